//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! n_trajectories = 8000
//! sampler = "dtwa"            # or "gaussian"
//! disorder_realizations = 1
//!
//! [lattice]
//! extents = [16, 1, 1]
//! filling = 1.0
//!
//! [model]
//! kind = "ising"              # "xy" or "xxz" (with jz_ratio)
//! j = 1.0
//! alpha = 3.0
//! coupling = "dipolar"        # or "isotropic"
//! quantization_axis = [0.0, 0.0, 1.0]
//! omega = 0.0
//!
//! [initial]
//! axis = "+x"                 # or per_site = ["+x", "-z", ...]
//!
//! [time]
//! t_max = 4.0
//! points = 50                 # or times = [0.0, 0.1, ...]
//! # dt = 0.001
//!
//! [observables]
//! pairs = "center"            # "none", "all" or [[0, 1], [0, 2]]
//! ```
//!
//! Couplings are `J / r^alpha` times the dipolar factor `1 - 3cos²θ` when
//! `coupling = "dipolar"`. No Kac rescaling is applied: `alpha = 0` is
//! plain all-to-all coupling of strength `J`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dtwa_core::ensemble::{
    InitialState, ModelKind, ModelSpec, PairSelection, RunConfig, Sampler, DEFAULT_ENUMERATION_CAP,
};
use dtwa_core::lattice::{CouplingMode, LatticeSpec};
use dtwa_core::phase_space::Axis;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trajectories")]
    pub n_trajectories: u64,
    #[serde(default)]
    pub sampler: SamplerName,
    #[serde(default = "one")]
    pub disorder_realizations: usize,
    #[serde(default)]
    pub workers: usize,
    pub lattice: LatticeSection,
    pub model: ModelSection,
    pub initial: InitialSection,
    pub time: TimeSection,
    #[serde(default)]
    pub observables: ObservablesSection,
}

fn default_trajectories() -> u64 {
    1000
}

fn one() -> usize {
    1
}

fn unit_filling() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerName {
    #[default]
    Dtwa,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub extents: [usize; 3],
    #[serde(default = "unit_filling")]
    pub filling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Ising,
    Xy,
    Xxz,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingName {
    #[default]
    Dipolar,
    Isotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: KindName,
    #[serde(default)]
    pub jz_ratio: Option<f64>,
    pub j: f64,
    pub alpha: f64,
    #[serde(default)]
    pub coupling: CouplingName,
    #[serde(default)]
    pub quantization_axis: Option<[f64; 3]>,
    #[serde(default)]
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub axis: Option<String>,
    #[serde(default)]
    pub per_site: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub force_integrator: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairsValue {
    Named(String),
    Explicit(Vec<[usize; 2]>),
}

impl Default for PairsValue {
    fn default() -> Self {
        Self::Named("none".into())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSection {
    #[serde(default)]
    pub pairs: PairsValue,
    #[serde(default)]
    pub enumeration_cap: Option<u64>,
}

/// `points` evenly spaced times in `[0, t_max]`, both ends included.
pub fn linspace(t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect(),
    }
}

fn parse_axis(s: &str) -> Result<Axis> {
    Axis::parse(s).ok_or_else(|| Error::Config(format!("unknown axis {s:?}; expected one of +x, -x, +y, -y, +z, -z")))
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    /// Canonical TOML of the parsed file.
    pub fn canonical(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.canonical()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn to_run_config(&self) -> Result<RunConfig> {
        let lattice = LatticeSpec {
            extents: self.lattice.extents,
            filling: self.lattice.filling,
        };
        let kind = match (self.model.kind, self.model.jz_ratio) {
            (KindName::Ising, None) => ModelKind::Ising,
            (KindName::Xy, None) => ModelKind::Xy,
            (KindName::Xxz, Some(r)) => ModelKind::Xxz { jz_ratio: r },
            (KindName::Xxz, None) => return Err(Error::Config("model.kind = \"xxz\" needs model.jz_ratio".into())),
            (_, Some(_)) => return Err(Error::Config("model.jz_ratio only applies to kind = \"xxz\"".into())),
        };
        let model = ModelSpec {
            kind,
            j: self.model.j,
            alpha: self.model.alpha,
            mode: match self.model.coupling {
                CouplingName::Dipolar => CouplingMode::Dipolar,
                CouplingName::Isotropic => CouplingMode::Isotropic,
            },
            quantization_axis: self.model.quantization_axis.unwrap_or([0.0, 0.0, 1.0]),
            omega: self.model.omega,
        };
        let initial = match (&self.initial.axis, &self.initial.per_site) {
            (Some(a), None) => InitialState::Global(parse_axis(a)?),
            (None, Some(v)) => InitialState::PerSite(v.iter().map(|s| parse_axis(s)).collect::<Result<_>>()?),
            _ => return Err(Error::Config("set exactly one of initial.axis and initial.per_site".into())),
        };
        let times = match (&self.time.times, self.time.t_max, self.time.points) {
            (Some(t), None, None) => t.clone(),
            (None, Some(t_max), Some(points)) => linspace(t_max, points),
            _ => return Err(Error::Config("set either time.times or both time.t_max and time.points".into())),
        };
        let pairs = match &self.observables.pairs {
            PairsValue::Named(s) => match s.as_str() {
                "none" => PairSelection::None,
                "center" => PairSelection::CenterToAll,
                "all" => PairSelection::All,
                other => {
                    return Err(Error::Config(format!(
                        "unknown pair selection {other:?}; expected none, center, all or a list of pairs"
                    )))
                }
            },
            PairsValue::Explicit(v) => PairSelection::Explicit(v.iter().map(|p| (p[0], p[1])).collect()),
        };
        let cfg = RunConfig {
            lattice,
            model,
            sampler: match self.sampler {
                SamplerName::Dtwa => Sampler::Dtwa,
                SamplerName::Gaussian => Sampler::Gaussian,
            },
            initial,
            n_trajectories: self.n_trajectories,
            master_seed: self.seed,
            times,
            dt: self.time.dt,
            pairs,
            disorder_realizations: self.disorder_realizations,
            force_integrator: self.time.force_integrator,
            enumeration_cap: self.observables.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
            workers: self.workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
