//! Monte Carlo orchestration.
//!
//! Trajectory `k` of disorder realization `r` draws from its own ChaCha8
//! stream keyed by `(master_seed, r)` with stream id `k`, so its random
//! numbers never depend on scheduling. Trajectories are grouped into fixed
//! shards of [`SHARD_SIZE`] consecutive indices; shard accumulators are
//! merged strictly in shard order. Any [`ShardExecutor`] that returns
//! results in index order therefore produces bit-identical output.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{rotate_about_z, validate_times, Evolver, IntegratorConfig, LaneRk4, LaneState, ModelParams, LANES};
use crate::gaussian_twa::sample_gaussian_initial_into;
use crate::lattice::{build_couplings, build_sites, CouplingMatrix, CouplingMode, LatticeSpec, Position};
use crate::math::{self, Vec3};
use crate::observables::{squeezing_xi, EnsembleAccumulator};
use crate::phase_space::{sample_initial_into, Axis, DiscreteWignerSpec, Enumeration, EnumerationMode, SpinConfiguration};
use crate::{Error, Result};

/// Trajectories per shard.
pub const SHARD_SIZE: u64 = 64;
/// Shards handed to the executor at once; bounds peak memory.
pub const SHARDS_PER_BATCH: usize = 16;
/// Default refusal threshold for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;
/// Accumulator memory above which a run is refused.
pub const MEMORY_CAP_BYTES: u128 = 8 << 30;

const DOMAIN_LATTICE: u64 = 0x6c61_7474_6963_6521;
const DOMAIN_TRAJECTORIES: u64 = 0x7472_616a_6563_7421;

/// Maps shard indices to results, returned in index order.
pub trait ShardExecutor {
    fn map_shards<T, F>(&self, n_shards: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs shards one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ShardExecutor for Sequential {
    fn map_shards<T, F>(&self, n_shards: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n_shards).map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Ising,
    Xy,
    /// `Jz_ij = jz_ratio · J⊥_ij`.
    Xxz { jz_ratio: f64 },
}

/// Hamiltonian description, resolved against the site geometry of each
/// disorder realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub j: f64,
    pub alpha: f64,
    pub mode: CouplingMode,
    pub quantization_axis: Vec3,
    pub omega: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, j: f64, alpha: f64) -> Self {
        Self {
            kind,
            j,
            alpha,
            mode: CouplingMode::Dipolar,
            quantization_axis: [0.0, 0.0, 1.0],
            omega: 0.0,
        }
    }

    pub fn build(&self, sites: &[Position]) -> Result<ModelParams> {
        let k = build_couplings(sites, self.j, self.alpha, self.mode, self.quantization_axis)?;
        let zero = CouplingMatrix::zeros(sites.len());
        let (jp, jz) = match self.kind {
            ModelKind::Ising => (zero, k),
            ModelKind::Xy => (k, zero),
            ModelKind::Xxz { jz_ratio } => {
                let z = k.scaled(jz_ratio);
                (k, z)
            }
        };
        ModelParams::new(jp, jz, self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Dtwa,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialState {
    Global(Axis),
    PerSite(Vec<Axis>),
}

impl InitialState {
    pub fn axes(&self, n: usize) -> Result<Vec<Axis>> {
        match self {
            Self::Global(a) => Ok(vec![*a; n]),
            Self::PerSite(v) if v.len() == n => Ok(v.clone()),
            Self::PerSite(v) => Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            }),
        }
    }
}

/// Which two-site correlators to accumulate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSelection {
    None,
    /// `(c, j)` for every `j`, with `c = N / 2`.
    CenterToAll,
    /// Every unordered pair `i < j`.
    All,
    Explicit(Vec<(usize, usize)>),
}

impl PairSelection {
    pub fn resolve(&self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Self::None => Vec::new(),
            Self::CenterToAll => (0..n).map(|j| (center_site(n), j)).collect(),
            Self::All => (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect(),
            Self::Explicit(v) => v.clone(),
        }
    }
}

/// Center site used for correlation profiles.
pub fn center_site(n: usize) -> usize {
    n / 2
}

/// Complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    pub model: ModelSpec,
    pub sampler: Sampler,
    pub initial: InitialState,
    pub n_trajectories: u64,
    pub master_seed: u64,
    pub times: Vec<f64>,
    /// `None` selects `10⁻³ / max(max|J|, |Ω|, 1)`.
    pub dt: Option<f64>,
    pub pairs: PairSelection,
    pub disorder_realizations: usize,
    /// Use RK4 even where the closed-form Ising solution applies.
    pub force_integrator: bool,
    pub enumeration_cap: u64,
    /// Parallelism hint; never affects results.
    pub workers: usize,
}

impl RunConfig {
    pub fn new(lattice: LatticeSpec, model: ModelSpec, axis: Axis, times: Vec<f64>) -> Self {
        Self {
            lattice,
            model,
            sampler: Sampler::Dtwa,
            initial: InitialState::Global(axis),
            n_trajectories: 1000,
            master_seed: 0,
            times,
            dt: None,
            pairs: PairSelection::None,
            disorder_realizations: 1,
            force_integrator: false,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        validate_times(&self.times)?;
        if self.n_trajectories == 0 {
            return Err(Error::Config("n_trajectories must be at least 1".into()));
        }
        if self.disorder_realizations == 0 {
            return Err(Error::Config("disorder_realizations must be at least 1".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(alloc::format!("dt must be positive, got {dt}")));
            }
        }
        let n = self.lattice.n_spins();
        self.initial.axes(n)?;
        let pairs = self.pairs.resolve(n);
        if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::Config(alloc::format!("pair ({i}, {j}) out of range for {n} spins")));
        }
        let bytes = estimated_accumulator_bytes(n, self.times.len(), pairs.len()) * SHARDS_PER_BATCH as u128;
        if bytes > MEMORY_CAP_BYTES {
            return Err(Error::Config(alloc::format!(
                "accumulators would need about {bytes} bytes (cap {MEMORY_CAP_BYTES}); request fewer pairs or output times"
            )));
        }
        Ok(())
    }
}

/// Rough size of one accumulator.
pub fn estimated_accumulator_bytes(n_spins: usize, n_times: usize, n_pairs: usize) -> u128 {
    let sums_per_slot = 18 + 6 * n_spins + 18 * n_pairs + 10 * crate::observables::JACKKNIFE_BLOCKS;
    (sums_per_slot as u128) * (n_times as u128) * 16
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 256-bit ChaCha key for `(master_seed, realization, domain)`.
pub fn stream_key(master_seed: u64, realization: usize, domain: u64) -> [u8; 32] {
    let mut state = mix(master_seed) ^ mix(domain ^ mix(realization as u64));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Independent stream for trajectory `k`.
pub fn trajectory_rng(master_seed: u64, realization: usize, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(stream_key(master_seed, realization, DOMAIN_TRAJECTORIES));
    rng.set_stream(k);
    rng
}

/// Stream used to dilute the lattice of one realization.
pub fn lattice_rng(master_seed: u64, realization: usize) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(stream_key(master_seed, realization, DOMAIN_LATTICE))
}

/// Sites, couplings and initial axes of one disorder realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub index: usize,
    pub sites: Vec<Position>,
    pub params: ModelParams,
    pub axes: Vec<Axis>,
}

pub fn build_realization(cfg: &RunConfig, index: usize) -> Result<Realization> {
    let sites = build_sites(&cfg.lattice, &mut lattice_rng(cfg.master_seed, index))?;
    let params = cfg.model.build(&sites)?;
    let axes = cfg.initial.axes(sites.len())?;
    Ok(Realization {
        index,
        sites,
        params,
        axes,
    })
}

/// Result of an ensemble run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// All trajectories of all realizations.
    pub pooled: EnsembleAccumulator,
    /// One accumulator per disorder realization.
    pub per_realization: Vec<EnsembleAccumulator>,
    pub realizations: Vec<Realization>,
    pub dt: f64,
}

impl RunOutput {
    /// Mean and spread over realizations of a per-realization scalar
    /// `f(acc, slot)`, for every output time.
    pub fn disorder_statistics(
        &self,
        f: impl Fn(&EnsembleAccumulator, usize) -> Option<f64>,
    ) -> Vec<DisorderStatistic> {
        (0..self.pooled.times().len())
            .map(|slot| {
                let xs: Vec<f64> = self.per_realization.iter().filter_map(|a| f(a, slot)).collect();
                DisorderStatistic::from_samples(&xs)
            })
            .collect()
    }
}

/// Mean, sample standard deviation and standard error across realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderStatistic {
    pub mean: f64,
    pub spread: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl DisorderStatistic {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                spread: f64::NAN,
                std_error: f64::NAN,
                samples: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let spread = if n > 1 {
            math::sqrt(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64)
        } else {
            0.0
        };
        Self {
            mean,
            spread,
            std_error: spread / math::sqrt(n as f64),
            samples: n,
        }
    }
}

fn effective_dt(cfg: &RunConfig, params: &ModelParams) -> f64 {
    let dt = cfg.dt.unwrap_or_else(|| IntegratorConfig::default_dt(params));
    let ic = IntegratorConfig {
        dt,
        times: cfg.times.clone(),
    };
    ic.warn_if_stiff(params);
    dt
}

/// Runs `n_items` work items in shards and merges the shard accumulators
/// in shard order.
fn sharded<E, F>(exec: &E, n_items: u64, template: &EnsembleAccumulator, work: F) -> Result<EnsembleAccumulator>
where
    E: ShardExecutor + ?Sized,
    F: Fn(u64, u64, &mut EnsembleAccumulator) -> Result<()> + Sync + Send,
{
    let n_shards = n_items.div_ceil(SHARD_SIZE) as usize;
    let mut total = template.clone();
    let mut first = 0;
    while first < n_shards {
        let len = SHARDS_PER_BATCH.min(n_shards - first);
        let results = exec.map_shards(len, |s| {
            let shard = (first + s) as u64;
            let lo = shard * SHARD_SIZE;
            let hi = (lo + SHARD_SIZE).min(n_items);
            let mut acc = template.clone();
            work(lo, hi, &mut acc).map(|_| acc)
        });
        for r in results {
            total.merge(&r?)?;
        }
        first += len;
    }
    Ok(total)
}

fn sample_trajectories<E: ShardExecutor + ?Sized>(
    cfg: &RunConfig,
    real: &Realization,
    dt: f64,
    exec: &E,
) -> Result<EnsembleAccumulator> {
    let n = real.sites.len();
    let pairs = cfg.pairs.resolve(n);
    let template = EnsembleAccumulator::new(n, &cfg.times, &pairs)?;
    let spec = DiscreteWignerSpec::per_site(&real.axes)?;
    let closed_form = Evolver::for_model(&real.params, dt, cfg.force_integrator).is_closed_form();
    let draw = |k: u64, state: &mut SpinConfiguration| {
        let mut rng = trajectory_rng(cfg.master_seed, real.index, k);
        match cfg.sampler {
            Sampler::Dtwa => sample_initial_into(&spec, &mut rng, state),
            Sampler::Gaussian => sample_gaussian_initial_into(&real.axes, &mut rng, state),
        }
    };
    let diverged = |k: u64, time: f64| Error::TrajectoryDiverged {
        master_seed: cfg.master_seed,
        realization: real.index,
        trajectory: k,
        time,
    };
    sharded(exec, cfg.n_trajectories, &template, |lo, hi, acc| {
        let mut state = SpinConfiguration::zeros(n);
        if closed_form {
            let mut evolver = Evolver::closed_form(n);
            for k in lo..hi {
                draw(k, &mut state);
                acc.begin_trajectory(k, 1.0);
                evolver.run(state.clone(), &real.params, &cfg.times, |slot, s| acc.record(slot, s))?;
            }
            return Ok(());
        }
        let mut rk4 = LaneRk4::new(n);
        let mut k0 = lo;
        while k0 < hi {
            let width = (hi - k0).min(LANES as u64) as usize;
            let mut lanes = LaneState::zeros(n);
            for l in 0..width {
                draw(k0 + l as u64, &mut state);
                lanes.set_lane(l, &state);
                acc.begin_trajectory(k0 + l as u64, 1.0);
            }
            let mut now = 0.0;
            for (slot, &t) in cfg.times.iter().enumerate() {
                rk4.propagate(&mut lanes, &real.params, t - now, dt);
                now = t;
                for l in 0..width {
                    let k = k0 + l as u64;
                    lanes.lane_into(l, &mut state);
                    if !state.is_finite() {
                        return Err(diverged(k, t));
                    }
                    acc.resume_trajectory(k, 1.0);
                    acc.record(slot, &state)?;
                }
            }
            k0 += width as u64;
        }
        Ok(())
    })
}

/// Monte Carlo estimate over `n_trajectories` trajectories for each of the
/// `disorder_realizations` site configurations.
pub fn run_ensemble<E: ShardExecutor + ?Sized>(cfg: &RunConfig, exec: &E) -> Result<RunOutput> {
    cfg.validate()?;
    let mut realizations = Vec::with_capacity(cfg.disorder_realizations);
    let mut per_realization = Vec::with_capacity(cfg.disorder_realizations);
    let mut dt = 0.0;
    for r in 0..cfg.disorder_realizations {
        let real = build_realization(cfg, r)?;
        dt = effective_dt(cfg, &real.params);
        per_realization.push(sample_trajectories(cfg, &real, dt, exec)?);
        realizations.push(real);
    }
    let pooled = pool(&per_realization)?;
    Ok(RunOutput {
        pooled,
        per_realization,
        realizations,
        dt,
    })
}

fn pool(parts: &[EnsembleAccumulator]) -> Result<EnsembleAccumulator> {
    let mut it = parts.iter();
    let mut pooled = it.next().ok_or(Error::Misuse("no realizations"))?.clone();
    for a in it {
        pooled.merge(a)?;
    }
    Ok(pooled)
}

/// Whether [`run_enumerated`] uses the `2^N` longitudinal enumeration with
/// the transverse sign averaged analytically.
pub fn uses_longitudinal_enumeration(cfg: &RunConfig, real: &Realization) -> bool {
    real.params.is_pure_ising()
        && !cfg.force_integrator
        && real.axes.iter().all(|a| a.component_and_sign().0 != 2)
}

/// Exact infinite-sample limit of the discrete sampler: a weighted sum over
/// every initial configuration. Pure Ising models with transverse
/// polarization enumerate only the `2^N` values of `s^z`.
pub fn run_enumerated<E: ShardExecutor + ?Sized>(cfg: &RunConfig, exec: &E) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.sampler != Sampler::Dtwa {
        return Err(Error::Config("only the discrete sampler can be enumerated".into()));
    }
    let mut realizations = Vec::with_capacity(cfg.disorder_realizations);
    let mut per_realization = Vec::with_capacity(cfg.disorder_realizations);
    let mut dt = 0.0;
    for r in 0..cfg.disorder_realizations {
        let real = build_realization(cfg, r)?;
        dt = effective_dt(cfg, &real.params);
        per_realization.push(enumerate_realization(cfg, &real, dt, exec)?);
        realizations.push(real);
    }
    let pooled = pool(&per_realization)?;
    Ok(RunOutput {
        pooled,
        per_realization,
        realizations,
        dt,
    })
}

fn enumerate_realization<E: ShardExecutor + ?Sized>(
    cfg: &RunConfig,
    real: &Realization,
    dt: f64,
    exec: &E,
) -> Result<EnsembleAccumulator> {
    let n = real.sites.len();
    let pairs = cfg.pairs.resolve(n);
    let mut template = EnsembleAccumulator::new(n, &cfg.times, &pairs)?;
    template.set_exact(true);
    let spec = DiscreteWignerSpec::per_site(&real.axes)?;
    let marginal = uses_longitudinal_enumeration(cfg, real);
    let mode = if marginal {
        EnumerationMode::Longitudinal
    } else {
        EnumerationMode::Full
    };
    let enumeration = Enumeration::new(&spec, mode, cfg.enumeration_cap)?;
    // unit transverse fluctuation on the component that is neither the
    // polarization axis nor z
    let mut fluct0 = SpinConfiguration::zeros(n);
    for (site, a) in real.axes.iter().enumerate() {
        let mut v = [0.0; 3];
        v[1 - a.component_and_sign().0.min(1)] = 1.0;
        fluct0.set_spin(site, v);
    }
    sharded(exec, enumeration.len(), &template, |lo, hi, acc| {
        let mut state = SpinConfiguration::zeros(n);
        if marginal {
            let mut beta = vec![0.0; n];
            let mut mean = SpinConfiguration::zeros(n);
            let mut fluct = SpinConfiguration::zeros(n);
            for k in lo..hi {
                let w = enumeration.configuration_into(k, &mut state);
                acc.begin_trajectory(k, w);
                real.params.j_z().mul_vec(state.component(2), &mut beta);
                for (slot, &t) in cfg.times.iter().enumerate() {
                    rotate_about_z(&state, &beta, t, &mut mean);
                    rotate_about_z(&fluct0, &beta, t, &mut fluct);
                    acc.record_marginal(slot, &mean, &fluct)?;
                }
            }
        } else {
            let mut evolver = Evolver::for_model(&real.params, dt, cfg.force_integrator);
            for k in lo..hi {
                let w = enumeration.configuration_into(k, &mut state);
                acc.begin_trajectory(k, w);
                evolver.run(state.clone(), &real.params, &cfg.times, |slot, s| acc.record(slot, s))?;
            }
        }
        Ok(())
    })
}

/// Maximum relative deviation from the reference run for one trajectory
/// count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_trajectories: u64,
    pub sx_deviation: f64,
    pub xi_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Every count except the reference (the largest).
    pub rows: Vec<ConvergenceRow>,
    pub reference: u64,
    pub repeats: u32,
    /// Least-squares slope of `ln(deviation)` against `ln(n_t)`.
    pub sx_slope: f64,
    pub xi_slope: f64,
}

/// Seed of repeat `repeat` of the run with `n_t` trajectories inside a
/// convergence sweep. Every run gets an independent seed so deviations are
/// not correlated through shared trajectories.
pub fn sweep_seed(master_seed: u64, n_t: u64, repeat: u32) -> u64 {
    mix(master_seed ^ mix(n_t ^ mix(repeat as u64 + 1)))
}

/// Max over output times of `|x(n_t) − x(ref)| / |x(ref)|` for `⟨S_x⟩` and
/// `ξ`, where the reference is the run with the largest count. Each of the
/// `repeats` independent sweeps has its own reference; the reported
/// deviation is the mean over repeats.
pub fn convergence_sweep<E: ShardExecutor + ?Sized>(
    cfg: &RunConfig,
    counts: &[u64],
    repeats: u32,
    exec: &E,
) -> Result<ConvergenceReport> {
    if counts.len() < 3 {
        return Err(Error::Config("convergence sweep needs at least three trajectory counts".into()));
    }
    if repeats == 0 {
        return Err(Error::Config("convergence sweep needs at least one repeat".into()));
    }
    let mut counts = counts.to_vec();
    counts.sort_unstable();
    counts.dedup();
    let reference = *counts.last().unwrap();
    let series = |n_t: u64, repeat: u32| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut c = cfg.clone();
        c.n_trajectories = n_t;
        c.master_seed = sweep_seed(cfg.master_seed, n_t, repeat);
        c.disorder_realizations = 1;
        let out = run_ensemble(&c, exec)?;
        let acc = &out.pooled;
        let sx = (0..acc.times().len()).map(|s| acc.mean_spin(s)[0]).collect();
        let xi = (0..acc.times().len())
            .map(|s| squeezing_xi(acc, s).map(|q| q.xi))
            .collect::<Result<_>>()?;
        Ok((sx, xi))
    };
    let max_rel = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .filter(|(_, r)| r.abs() > 1e-12)
            .map(|(x, r)| (x - r).abs() / r.abs())
            .fold(0.0, f64::max)
    };
    let mut rows: Vec<ConvergenceRow> = counts[..counts.len() - 1]
        .iter()
        .map(|&n_t| ConvergenceRow {
            n_trajectories: n_t,
            sx_deviation: 0.0,
            xi_deviation: 0.0,
        })
        .collect();
    for repeat in 0..repeats {
        let (ref_sx, ref_xi) = series(reference, repeat)?;
        for row in &mut rows {
            let (sx, xi) = series(row.n_trajectories, repeat)?;
            row.sx_deviation += max_rel(&sx, &ref_sx) / repeats as f64;
            row.xi_deviation += max_rel(&xi, &ref_xi) / repeats as f64;
        }
    }
    let x: Vec<f64> = rows.iter().map(|r| math::ln(r.n_trajectories as f64)).collect();
    let sx: Vec<f64> = rows.iter().map(|r| math::ln(r.sx_deviation)).collect();
    let xi: Vec<f64> = rows.iter().map(|r| math::ln(r.xi_deviation)).collect();
    Ok(ConvergenceReport {
        sx_slope: slope(&x, &sx),
        xi_slope: slope(&x, &xi),
        rows,
        reference,
        repeats,
    })
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// One filling fraction of a filling sweep.
#[derive(Debug, Clone)]
pub struct FillingPoint {
    pub filling: f64,
    pub output: RunOutput,
}

/// Repeats [`run_ensemble`] for each filling fraction.
pub fn filling_sweep<E: ShardExecutor + ?Sized>(
    cfg: &RunConfig,
    fillings: &[f64],
    exec: &E,
) -> Result<Vec<FillingPoint>> {
    fillings
        .iter()
        .map(|&filling| {
            let mut c = cfg.clone();
            c.lattice.filling = filling;
            Ok(FillingPoint {
                filling,
                output: run_ensemble(&c, exec)?,
            })
        })
        .collect()
}
