use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sites {i} and {j} coincide; couplings need distinct positions")]
    CoincidentSites { i: usize, j: usize },

    #[error(
        "site {site}: polarization {direction:?} has negative Wigner weight {weight} on phase point {point:?}; \
         only states polarized along ±x, ±y or ±z can be sampled"
    )]
    UnsupportedState {
        site: usize,
        direction: [f64; 3],
        point: (u8, u8),
        weight: f64,
    },

    #[error("enumeration needs {configurations:.3e} configurations, above the cap of {cap}; use sampling instead")]
    EnumerationTooLarge { configurations: f64, cap: u64 },

    #[error("dimension mismatch: expected {expected} spins, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integration diverged at t = {time}")]
    IntegrationDiverged { time: f64 },

    #[error(
        "trajectory {trajectory} of realization {realization} diverged at t = {time} \
         (master seed {master_seed})"
    )]
    TrajectoryDiverged {
        master_seed: u64,
        realization: usize,
        trajectory: u64,
        time: f64,
    },

    #[error("{0}")]
    Misuse(&'static str),

    #[error(
        "exact diagonalization of {n_spins} spins exceeds the cap of {cap} \
         (state vector alone would need {bytes} bytes)"
    )]
    TooLargeForEd { n_spins: usize, cap: usize, bytes: u128 },

    #[error("squeezing undefined: mean spin length {length} is below {threshold}")]
    UndefinedSqueezing { length: f64, threshold: f64 },

    #[error("pair ({i}, {j}) is not configured; configured pairs: {configured:?}")]
    UnconfiguredPair {
        i: usize,
        j: usize,
        configured: Vec<(usize, usize)>,
    },

    #[error("need at least {needed} trajectories for this estimate, have {have}")]
    TooFewTrajectories { needed: u64, have: u64 },
}
