//! Classical mean-field equations of motion.
//!
//! With effective fields `β^{x,y}_n = Σ_m J⊥_nm s^{x,y}_m` and
//! `β^z_n = Σ_m Jz_nm s^z_m`:
//!
//! ```text
//! ds^x_n/dt =  s^z_n β^y_n − 2 s^y_n β^z_n
//! ds^y_n/dt = −s^z_n β^x_n + 2 s^x_n β^z_n − 2Ω s^z_n
//! ds^z_n/dt =  s^y_n β^x_n − s^x_n β^y_n   + 2Ω s^y_n
//! ```
//!
//! Pure Ising evolution (`J⊥ = 0`, `Ω = 0`) has the closed form
//! [`ising_closed_form`]; everything else goes through fixed-step RK4.

use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::CouplingMatrix;
use crate::math;
use crate::phase_space::SpinConfiguration;
use crate::{Error, Result};

/// Couplings and field of the XXZ + transverse-field Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    j_perp: CouplingMatrix,
    j_z: CouplingMatrix,
    omega: f64,
    perp_zero: bool,
    z_zero: bool,
}

impl ModelParams {
    pub fn new(j_perp: CouplingMatrix, j_z: CouplingMatrix, omega: f64) -> Result<Self> {
        if j_perp.n_spins() != j_z.n_spins() {
            return Err(Error::DimensionMismatch {
                expected: j_perp.n_spins(),
                found: j_z.n_spins(),
            });
        }
        if !omega.is_finite() {
            return Err(Error::Config(alloc::format!("field must be finite, got {omega}")));
        }
        Ok(Self {
            perp_zero: j_perp.is_zero(),
            z_zero: j_z.is_zero(),
            j_perp,
            j_z,
            omega,
        })
    }

    pub fn ising(j_z: CouplingMatrix) -> Self {
        let n = j_z.n_spins();
        Self::new(CouplingMatrix::zeros(n), j_z, 0.0).expect("shapes agree")
    }

    pub fn xy(j_perp: CouplingMatrix) -> Self {
        let n = j_perp.n_spins();
        Self::new(j_perp, CouplingMatrix::zeros(n), 0.0).expect("shapes agree")
    }

    pub fn with_field(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn n_spins(&self) -> usize {
        self.j_z.n_spins()
    }

    pub fn j_perp(&self) -> &CouplingMatrix {
        &self.j_perp
    }

    pub fn j_z(&self) -> &CouplingMatrix {
        &self.j_z
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn is_pure_ising(&self) -> bool {
        self.perp_zero && self.omega == 0.0
    }

    pub fn conserves_total_sz(&self) -> bool {
        self.omega == 0.0
    }

    /// `max(max|J|, |Ω|, 1)`, the scale used for the default time step.
    pub fn energy_scale(&self) -> f64 {
        self.j_perp
            .max_abs()
            .max(self.j_z.max_abs())
            .max(self.omega.abs())
            .max(1.0)
    }

    /// `|Ω| + max_n Σ_m (|J⊥_nm| + |Jz_nm|)`.
    pub fn field_bound(&self) -> f64 {
        let n = self.n_spins();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let s: f64 = self
                .j_perp
                .row(i)
                .iter()
                .zip(self.j_z.row(i))
                .map(|(a, b)| a.abs() + b.abs())
                .sum();
            worst = worst.max(s);
        }
        self.omega.abs() + worst
    }

    fn check(&self, state: &SpinConfiguration) -> Result<()> {
        if state.n_spins() != self.n_spins() {
            return Err(Error::DimensionMismatch {
                expected: self.n_spins(),
                found: state.n_spins(),
            });
        }
        Ok(())
    }
}

/// Reusable buffers for the effective fields.
#[derive(Debug, Clone)]
struct Fields {
    bx: Vec<f64>,
    by: Vec<f64>,
    bz: Vec<f64>,
}

impl Fields {
    fn new(n: usize) -> Self {
        Self {
            bx: vec![0.0; n],
            by: vec![0.0; n],
            bz: vec![0.0; n],
        }
    }

    fn compute(&mut self, s: &SpinConfiguration, p: &ModelParams) {
        if p.perp_zero {
            self.bx.fill(0.0);
            self.by.fill(0.0);
        } else {
            p.j_perp.mul_vec2(&s.x, &s.y, &mut self.bx, &mut self.by);
        }
        if p.z_zero {
            self.bz.fill(0.0);
        } else {
            p.j_z.mul_vec(&s.z, &mut self.bz);
        }
    }

    fn rhs(&mut self, s: &SpinConfiguration, p: &ModelParams, out: &mut SpinConfiguration) {
        self.compute(s, p);
        let w2 = 2.0 * p.omega;
        for n in 0..s.n_spins() {
            let (x, y, z) = (s.x[n], s.y[n], s.z[n]);
            let (bx, by, bz) = (self.bx[n], self.by[n], self.bz[n]);
            out.x[n] = z * by - 2.0 * y * bz;
            out.y[n] = -z * bx + 2.0 * x * bz - w2 * z;
            out.z[n] = y * bx - x * by + w2 * y;
        }
    }
}

/// Time derivative of `state` under `params`.
pub fn eom_rhs(state: &SpinConfiguration, params: &ModelParams) -> Result<SpinConfiguration> {
    params.check(state)?;
    let n = state.n_spins();
    let mut out = SpinConfiguration::zeros(n);
    Fields::new(n).rhs(state, params, &mut out);
    Ok(out)
}

/// Classical Hamiltonian
/// `H_C = 1/2 Σ_{i≠j} [J⊥_ij/2 (s^x_i s^x_j + s^y_i s^y_j) + Jz_ij s^z_i s^z_j] + Ω Σ_i s^x_i`.
pub fn classical_energy(state: &SpinConfiguration, params: &ModelParams) -> Result<f64> {
    params.check(state)?;
    let mut f = Fields::new(state.n_spins());
    f.compute(state, params);
    let mut e = 0.0;
    for n in 0..state.n_spins() {
        e += 0.5 * (0.5 * (state.x[n] * f.bx[n] + state.y[n] * f.by[n]) + state.z[n] * f.bz[n]);
        e += params.omega * state.x[n];
    }
    Ok(e)
}

/// Fixed-step RK4 settings and output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Output times, nondecreasing, starting at or after `t = 0`.
    pub times: Vec<f64>,
}

/// Above this value of `dt · field_bound` a warning is logged.
pub const STIFFNESS_WARNING: f64 = 0.1;

impl IntegratorConfig {
    /// `dt = 10⁻³ / max(max|J|, |Ω|, 1)`.
    pub fn default_dt(params: &ModelParams) -> f64 {
        1e-3 / params.energy_scale()
    }

    pub fn with_default_dt(params: &ModelParams, times: Vec<f64>) -> Self {
        Self {
            dt: Self::default_dt(params),
            times,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(alloc::format!("dt must be positive, got {}", self.dt)));
        }
        validate_times(&self.times)
    }

    /// `dt · (|Ω| + max_n Σ_m(|J⊥| + |Jz|))`.
    pub fn stiffness(&self, params: &ModelParams) -> f64 {
        self.dt * params.field_bound()
    }

    pub fn warn_if_stiff(&self, params: &ModelParams) {
        let s = self.stiffness(params);
        if s > STIFFNESS_WARNING {
            log::warn!(
                "dt = {} gives dt * max field = {s:.3} > {STIFFNESS_WARNING}; results may be inaccurate",
                self.dt
            );
        }
    }
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Config("time grid is empty".into()));
    }
    if !(times[0] >= 0.0) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("output times must be finite and start at t >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("output times must be nondecreasing".into()));
    }
    Ok(())
}

/// Classical RK4 stepper with preallocated stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    fields: Fields,
    k1: SpinConfiguration,
    k2: SpinConfiguration,
    k3: SpinConfiguration,
    k4: SpinConfiguration,
    stage: SpinConfiguration,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self {
            fields: Fields::new(n),
            k1: SpinConfiguration::zeros(n),
            k2: SpinConfiguration::zeros(n),
            k3: SpinConfiguration::zeros(n),
            k4: SpinConfiguration::zeros(n),
            stage: SpinConfiguration::zeros(n),
        }
    }

    /// One step of size `h` (may be negative).
    pub fn step(&mut self, s: &mut SpinConfiguration, p: &ModelParams, h: f64) {
        let half = 0.5 * h;
        self.fields.rhs(s, p, &mut self.k1);
        axpy_into(&mut self.stage, s, half, &self.k1);
        self.fields.rhs(&self.stage, p, &mut self.k2);
        axpy_into(&mut self.stage, s, half, &self.k2);
        self.fields.rhs(&self.stage, p, &mut self.k3);
        axpy_into(&mut self.stage, s, h, &self.k3);
        self.fields.rhs(&self.stage, p, &mut self.k4);
        let w = h / 6.0;
        for c in 0..3 {
            let (k1, k2, k3, k4) = (
                self.k1.component(c),
                self.k2.component(c),
                self.k3.component(c),
                self.k4.component(c),
            );
            let out = s.component_mut(c);
            for i in 0..out.len() {
                out[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
        }
    }

    /// Advances by `duration` (sign gives direction) with equal steps no
    /// longer than `dt`.
    pub fn propagate(&mut self, s: &mut SpinConfiguration, p: &ModelParams, duration: f64, dt: f64) {
        if duration == 0.0 {
            return;
        }
        let steps = math::ceil(duration.abs() / dt).max(1.0) as u64;
        let h = duration / steps as f64;
        for _ in 0..steps {
            self.step(s, p, h);
        }
    }
}

fn axpy_into(out: &mut SpinConfiguration, base: &SpinConfiguration, a: f64, k: &SpinConfiguration) {
    for c in 0..3 {
        let (b, kk) = (base.component(c), k.component(c));
        let o = out.component_mut(c);
        for i in 0..o.len() {
            o[i] = b[i] + a * kk[i];
        }
    }
}

/// Trajectories advanced together by [`LaneRk4`].
pub const LANES: usize = 8;

type Lane = [f64; LANES];

/// [`LANES`] spin configurations stored lane-interleaved, so that one
/// coupling row multiplies every lane at once.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneState {
    x: Vec<Lane>,
    y: Vec<Lane>,
    z: Vec<Lane>,
}

impl LaneState {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![[0.0; LANES]; n],
            y: vec![[0.0; LANES]; n],
            z: vec![[0.0; LANES]; n],
        }
    }

    pub fn n_spins(&self) -> usize {
        self.x.len()
    }

    pub fn set_lane(&mut self, lane: usize, s: &SpinConfiguration) {
        for n in 0..self.n_spins() {
            self.x[n][lane] = s.x[n];
            self.y[n][lane] = s.y[n];
            self.z[n][lane] = s.z[n];
        }
    }

    pub fn lane_into(&self, lane: usize, out: &mut SpinConfiguration) {
        for n in 0..self.n_spins() {
            out.x[n] = self.x[n][lane];
            out.y[n] = self.y[n][lane];
            out.z[n] = self.z[n][lane];
        }
    }

    fn axpy(&mut self, base: &Self, a: f64, k: &Self) {
        for (o, (b, kk)) in [
            (&mut self.x, (&base.x, &k.x)),
            (&mut self.y, (&base.y, &k.y)),
            (&mut self.z, (&base.z, &k.z)),
        ] {
            for i in 0..o.len() {
                for l in 0..LANES {
                    o[i][l] = b[i][l] + a * kk[i][l];
                }
            }
        }
    }
}

fn lane_matvec(j: &CouplingMatrix, a: &[Lane], out: &mut [Lane]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = [0.0; LANES];
        for (&jv, v) in j.row(i).iter().zip(a) {
            for l in 0..LANES {
                acc[l] += jv * v[l];
            }
        }
        *o = acc;
    }
}

fn lane_matvec2(j: &CouplingMatrix, a: &[Lane], b: &[Lane], oa: &mut [Lane], ob: &mut [Lane]) {
    for i in 0..oa.len() {
        let mut acc_a = [0.0; LANES];
        let mut acc_b = [0.0; LANES];
        for ((&jv, va), vb) in j.row(i).iter().zip(a).zip(b) {
            for l in 0..LANES {
                acc_a[l] += jv * va[l];
                acc_b[l] += jv * vb[l];
            }
        }
        oa[i] = acc_a;
        ob[i] = acc_b;
    }
}

#[derive(Debug, Clone)]
struct LaneFields {
    bx: Vec<Lane>,
    by: Vec<Lane>,
    bz: Vec<Lane>,
}

impl LaneFields {
    fn rhs(&mut self, s: &LaneState, p: &ModelParams, out: &mut LaneState) {
        if p.perp_zero {
            self.bx.fill([0.0; LANES]);
            self.by.fill([0.0; LANES]);
        } else {
            lane_matvec2(&p.j_perp, &s.x, &s.y, &mut self.bx, &mut self.by);
        }
        if p.z_zero {
            self.bz.fill([0.0; LANES]);
        } else {
            lane_matvec(&p.j_z, &s.z, &mut self.bz);
        }
        let w2 = 2.0 * p.omega;
        for n in 0..s.n_spins() {
            let (x, y, z) = (&s.x[n], &s.y[n], &s.z[n]);
            let (bx, by, bz) = (&self.bx[n], &self.by[n], &self.bz[n]);
            for l in 0..LANES {
                out.x[n][l] = z[l] * by[l] - 2.0 * y[l] * bz[l];
                out.y[n][l] = -z[l] * bx[l] + 2.0 * x[l] * bz[l] - w2 * z[l];
                out.z[n][l] = y[l] * bx[l] - x[l] * by[l] + w2 * y[l];
            }
        }
    }
}

/// RK4 over [`LANES`] independent trajectories. Each lane follows exactly
/// the arithmetic it would follow alone, so a trajectory's result does not
/// depend on which other trajectories share its batch.
#[derive(Debug, Clone)]
pub struct LaneRk4 {
    fields: LaneFields,
    k1: LaneState,
    k2: LaneState,
    k3: LaneState,
    k4: LaneState,
    stage: LaneState,
}

impl LaneRk4 {
    pub fn new(n: usize) -> Self {
        Self {
            fields: LaneFields {
                bx: vec![[0.0; LANES]; n],
                by: vec![[0.0; LANES]; n],
                bz: vec![[0.0; LANES]; n],
            },
            k1: LaneState::zeros(n),
            k2: LaneState::zeros(n),
            k3: LaneState::zeros(n),
            k4: LaneState::zeros(n),
            stage: LaneState::zeros(n),
        }
    }

    pub fn step(&mut self, s: &mut LaneState, p: &ModelParams, h: f64) {
        let half = 0.5 * h;
        self.fields.rhs(s, p, &mut self.k1);
        self.stage.axpy(s, half, &self.k1);
        self.fields.rhs(&self.stage, p, &mut self.k2);
        self.stage.axpy(s, half, &self.k2);
        self.fields.rhs(&self.stage, p, &mut self.k3);
        self.stage.axpy(s, h, &self.k3);
        self.fields.rhs(&self.stage, p, &mut self.k4);
        let w = h / 6.0;
        let (k1, k2, k3, k4) = (&self.k1, &self.k2, &self.k3, &self.k4);
        for (o, (a, (b, (c, d)))) in [
            (&mut s.x, (&k1.x, (&k2.x, (&k3.x, &k4.x)))),
            (&mut s.y, (&k1.y, (&k2.y, (&k3.y, &k4.y)))),
            (&mut s.z, (&k1.z, (&k2.z, (&k3.z, &k4.z)))),
        ] {
            for i in 0..o.len() {
                for l in 0..LANES {
                    o[i][l] += w * (a[i][l] + 2.0 * (b[i][l] + c[i][l]) + d[i][l]);
                }
            }
        }
    }

    /// Same step schedule as [`Rk4::propagate`].
    pub fn propagate(&mut self, s: &mut LaneState, p: &ModelParams, duration: f64, dt: f64) {
        if duration == 0.0 {
            return;
        }
        let steps = math::ceil(duration.abs() / dt).max(1.0) as u64;
        let h = duration / steps as f64;
        for _ in 0..steps {
            self.step(s, p, h);
        }
    }
}

/// Integrates `initial` and returns the state at every output time.
pub fn integrate(
    initial: &SpinConfiguration,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Vec<SpinConfiguration>> {
    params.check(initial)?;
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.times.len());
    let mut ev = Evolver::integrator(params.n_spins(), cfg.dt);
    ev.run(initial.clone(), params, &cfg.times, |_, s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Exact pure-Ising evolution: `s^z` frozen, transverse components rotated
/// about z by `φ_n = 2 t Σ_j Jz_nj s^z_j(0)`.
pub fn ising_closed_form(initial: &SpinConfiguration, j_z: &CouplingMatrix, t: f64) -> Result<SpinConfiguration> {
    if initial.n_spins() != j_z.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: j_z.n_spins(),
            found: initial.n_spins(),
        });
    }
    let mut rates = vec![0.0; initial.n_spins()];
    j_z.mul_vec(&initial.z, &mut rates);
    let mut out = initial.clone();
    rotate_about_z(initial, &rates, t, &mut out);
    Ok(out)
}

/// [`ising_closed_form`] guarded against models that are not pure Ising.
pub fn ising_closed_form_checked(initial: &SpinConfiguration, params: &ModelParams, t: f64) -> Result<SpinConfiguration> {
    if !params.is_pure_ising() {
        return Err(Error::Misuse(
            "closed-form Ising evolution requires J⊥ = 0 and Ω = 0",
        ));
    }
    ising_closed_form(initial, params.j_z(), t)
}

/// `out = R_z(2 t β_n) s_n` per site, where `beta` holds `β^z_n`.
pub(crate) fn rotate_about_z(initial: &SpinConfiguration, beta: &[f64], t: f64, out: &mut SpinConfiguration) {
    for n in 0..initial.n_spins() {
        let (s, c) = math::sin_cos(2.0 * t * beta[n]);
        let (x, y) = (initial.x[n], initial.y[n]);
        out.x[n] = x * c - y * s;
        out.y[n] = x * s + y * c;
        out.z[n] = initial.z[n];
    }
}

/// Trajectory propagation strategy, reusing buffers across trajectories.
#[derive(Debug, Clone)]
pub enum Evolver {
    ClosedForm { beta: Vec<f64>, scratch: SpinConfiguration },
    Integrator { rk4: Rk4, dt: f64 },
}

impl Evolver {
    pub fn closed_form(n: usize) -> Self {
        Self::ClosedForm {
            beta: vec![0.0; n],
            scratch: SpinConfiguration::zeros(n),
        }
    }

    pub fn integrator(n: usize, dt: f64) -> Self {
        Self::Integrator { rk4: Rk4::new(n), dt }
    }

    /// Closed form for pure Ising models unless `force_integrator`.
    pub fn for_model(params: &ModelParams, dt: f64, force_integrator: bool) -> Self {
        if params.is_pure_ising() && !force_integrator {
            Self::closed_form(params.n_spins())
        } else {
            Self::integrator(params.n_spins(), dt)
        }
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self, Self::ClosedForm { .. })
    }

    /// Evolves `state` through `times` (nondecreasing, from t = 0) and calls
    /// `visit(index, state)` at each.
    pub fn run(
        &mut self,
        mut state: SpinConfiguration,
        params: &ModelParams,
        times: &[f64],
        mut visit: impl FnMut(usize, &SpinConfiguration) -> Result<()>,
    ) -> Result<()> {
        match self {
            Self::ClosedForm { beta, scratch } => {
                if !params.is_pure_ising() {
                    return Err(Error::Misuse(
                        "closed-form Ising evolution requires J⊥ = 0 and Ω = 0",
                    ));
                }
                params.j_z.mul_vec(&state.z, beta);
                for (k, &t) in times.iter().enumerate() {
                    rotate_about_z(&state, beta, t, scratch);
                    visit(k, scratch)?;
                }
            }
            Self::Integrator { rk4, dt } => {
                let mut now = 0.0;
                for (k, &t) in times.iter().enumerate() {
                    rk4.propagate(&mut state, params, t - now, *dt);
                    now = t;
                    if !state.is_finite() {
                        return Err(Error::IntegrationDiverged { time: t });
                    }
                    visit(k, &state)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_couplings, CouplingMode, Position};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dipolar_chain(n: usize) -> CouplingMatrix {
        let sites: Vec<Position> = (0..n).map(|i| [i as f64, 0.0, 0.0]).collect();
        build_couplings(&sites, 1.0, 3.0, CouplingMode::Dipolar, [0.0, 0.0, 1.0]).unwrap()
    }

    fn random_signs(n: usize, rng: &mut ChaCha8Rng) -> SpinConfiguration {
        let mut c = SpinConfiguration::zeros(n);
        for i in 0..n {
            let s = [0, 1, 2].map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 });
            c.set_spin(i, s);
        }
        c
    }

    #[test]
    fn field_only_rhs_and_orbit() {
        let omega = 0.8;
        let p = ModelParams::new(CouplingMatrix::zeros(1), CouplingMatrix::zeros(1), omega).unwrap();
        let s = SpinConfiguration::from_vectors(&[[0.0, 0.0, 1.0]]);
        let d = eom_rhs(&s, &p).unwrap();
        assert_eq!(d.spin(0), [0.0, -2.0 * omega, 0.0]);

        let t = 1.0 / omega;
        let cfg = IntegratorConfig {
            dt: 1e-3 / omega,
            times: vec![t],
        };
        let out = integrate(&s, &p, &cfg).unwrap();
        let (sn, cs) = (2.0 * omega * t).sin_cos();
        let want = [0.0, -sn, cs];
        for c in 0..3 {
            assert!((out[0].spin(0)[c] - want[c]).abs() < 1e-10);
        }
    }

    #[test]
    fn ising_rhs_freezes_sz() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = ModelParams::ising(dipolar_chain(6));
        let s = random_signs(6, &mut rng);
        let d = eom_rhs(&s, &p).unwrap();
        assert!(d.z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ising_rhs_limit_matches_printed_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let j = dipolar_chain(5);
        let p = ModelParams::ising(j.clone());
        let s = random_signs(5, &mut rng);
        let d = eom_rhs(&s, &p).unwrap();
        for n in 0..5 {
            let bz: f64 = (0..5).map(|m| j.get(n, m) * s.z[m]).sum();
            assert!((d.x[n] + 2.0 * s.y[n] * bz).abs() < 1e-14);
            assert!((d.y[n] - 2.0 * s.x[n] * bz).abs() < 1e-14);
        }
    }

    #[test]
    fn xy_two_spin_rhs() {
        let p = ModelParams::xy(CouplingMatrix::all_to_all(2, 1.0));
        let s = SpinConfiguration::from_vectors(&[[1.0, 1.0, 1.0], [1.0, -1.0, 1.0]]);
        let d = eom_rhs(&s, &p).unwrap();
        assert_eq!(d.z, vec![2.0, -2.0]);
        // printed XY equations: dx = z β^y, dy = -z β^x
        assert_eq!(d.x, vec![-1.0, 1.0]);
        assert_eq!(d.y, vec![-1.0, -1.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let p = ModelParams::ising(dipolar_chain(3));
        let s = SpinConfiguration::zeros(4);
        assert!(matches!(eom_rhs(&s, &p), Err(Error::DimensionMismatch { .. })));
        assert!(ModelParams::new(CouplingMatrix::zeros(2), CouplingMatrix::zeros(3), 0.0).is_err());
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ModelParams::new(CouplingMatrix::zeros(4), CouplingMatrix::zeros(4), 0.0).unwrap();
        let s = random_signs(4, &mut rng);
        let cfg = IntegratorConfig { dt: 1e-2, times: vec![0.0, 0.5, 3.0] };
        for st in integrate(&s, &p, &cfg).unwrap() {
            assert_eq!(st, s);
        }
    }

    #[test]
    fn closed_form_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let j = dipolar_chain(4);
        let s = random_signs(4, &mut rng);
        assert_eq!(ising_closed_form(&s, &j, 0.0).unwrap(), s);

        let jj = 0.7;
        let pair = CouplingMatrix::all_to_all(2, jj);
        let s2 = SpinConfiguration::from_vectors(&[[1.0, 0.0, 1.0], [1.0, 1.0, 1.0]]);
        let t = 0.3;
        let out = ising_closed_form(&s2, &pair, t).unwrap();
        let phi = 2.0 * jj * t;
        assert!((out.x[0] - phi.cos()).abs() < 1e-15);
        assert!((out.y[0] - phi.sin()).abs() < 1e-15);

        let xy = ModelParams::xy(pair);
        assert!(matches!(ising_closed_form_checked(&s2, &xy, 1.0), Err(Error::Misuse(_))));
    }

    #[test]
    fn closed_form_matches_rk4() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let j = dipolar_chain(10);
        let p = ModelParams::ising(j.clone());
        let s = random_signs(10, &mut rng);
        let cfg = IntegratorConfig::with_default_dt(&p, vec![1.0, 2.0]);
        let traj = integrate(&s, &p, &cfg).unwrap();
        for (k, &t) in cfg.times.iter().enumerate() {
            let exact = ising_closed_form(&s, &j, t).unwrap();
            assert!(traj[k].max_abs_diff(&exact) < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn time_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = ModelParams::new(dipolar_chain(6), dipolar_chain(6).scaled(0.4), 0.9).unwrap();
        let s0 = random_signs(6, &mut rng);
        let mut s = s0.clone();
        let mut rk = Rk4::new(6);
        rk.propagate(&mut s, &p, 1.5, 1e-3);
        assert!(s.max_abs_diff(&s0) > 1e-2);
        rk.propagate(&mut s, &p, -1.5, 1e-3);
        assert!(s.max_abs_diff(&s0) < 1e-6);
    }

    #[test]
    fn divergence_reported() {
        let p = ModelParams::new(CouplingMatrix::zeros(1), CouplingMatrix::zeros(1), 1.0).unwrap();
        let s = SpinConfiguration::from_vectors(&[[f64::NAN, 0.0, 1.0]]);
        let cfg = IntegratorConfig { dt: 1e-2, times: vec![0.0, 0.2] };
        assert!(matches!(integrate(&s, &p, &cfg), Err(Error::IntegrationDiverged { .. })));
    }

    #[test]
    fn bad_grids_rejected() {
        let p = ModelParams::ising(CouplingMatrix::zeros(2));
        let s = SpinConfiguration::zeros(2);
        for times in [vec![], vec![-1.0], vec![1.0, 0.5]] {
            let cfg = IntegratorConfig { dt: 1e-2, times };
            assert!(integrate(&s, &p, &cfg).is_err());
        }
        let cfg = IntegratorConfig { dt: 0.0, times: vec![1.0] };
        assert!(integrate(&s, &p, &cfg).is_err());
    }

    #[test]
    fn default_dt_and_stiffness() {
        let p = ModelParams::new(dipolar_chain(3).scaled(4.0), CouplingMatrix::zeros(3), 2.0).unwrap();
        assert_eq!(IntegratorConfig::default_dt(&p), 1e-3 / 4.0);
        let cfg = IntegratorConfig { dt: 0.1, times: vec![1.0] };
        // the middle site has two nearest neighbours
        let want = 0.1 * (2.0 + 8.0);
        assert!((cfg.stiffness(&p) - want).abs() < 1e-12);
    }

    #[test]
    fn lanes_match_single_trajectory_integrator() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 7;
        let p = ModelParams::new(
            CouplingMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            CouplingMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            0.4,
        )
        .unwrap();
        let configs: Vec<SpinConfiguration> = (0..LANES).map(|_| random_signs(n, &mut rng)).collect();
        let mut lanes = LaneState::zeros(n);
        for (l, c) in configs.iter().enumerate() {
            lanes.set_lane(l, c);
        }
        LaneRk4::new(n).propagate(&mut lanes, &p, 1.3, 1e-2);
        let mut got = SpinConfiguration::zeros(n);
        for (l, c) in configs.iter().enumerate() {
            let mut want = c.clone();
            Rk4::new(n).propagate(&mut want, &p, 1.3, 1e-2);
            lanes.lane_into(l, &mut got);
            assert!(got.max_abs_diff(&want) < 1e-12);
        }

        // a lane's result is bitwise independent of its neighbours
        let mut other = LaneState::zeros(n);
        other.set_lane(3, &configs[3]);
        LaneRk4::new(n).propagate(&mut other, &p, 1.3, 1e-2);
        let mut alone = SpinConfiguration::zeros(n);
        other.lane_into(3, &mut alone);
        lanes.lane_into(3, &mut got);
        assert_eq!(alone, got);
    }
}
