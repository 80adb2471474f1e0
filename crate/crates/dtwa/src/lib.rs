//! Host side of the simulator: TOML configuration, thread-parallel
//! execution, CSV and JSON output, and oracle comparison tables.
//!
//! The numerics live in [`dtwa_core`], re-exported here as [`core`].

pub mod compare;
pub mod config;
pub mod exec;
pub mod output;

pub use dtwa_core as core;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dtwa_core::Error),

    #[error("{0}")]
    Config(String),

    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("cannot serialize configuration: {0}")]
    Serialize(#[from] toml::ser::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}
