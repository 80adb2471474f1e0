//! Ensemble moments, spin squeezing and spatial correlations.
//!
//! An [`EnsembleAccumulator`] keeps compensated running sums of everything
//! the estimators need at every output time: collective first and second
//! moments, per-site first and second moments, and products `s^a_i s^b_j`
//! for a configured list of site pairs. Products of classical trajectory
//! values estimate symmetrically ordered quantum correlators.
//!
//! Collective moments are also binned into [`JACKKNIFE_BLOCKS`] interleaved
//! blocks (trajectory index modulo the block count) so that nonlinear
//! estimators such as the squeezing parameter get delete-a-block jackknife
//! errors.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::{self, Vec3};
use crate::phase_space::SpinConfiguration;
use crate::{Error, Result};

pub const JACKKNIFE_BLOCKS: usize = 32;

/// Index pairs of the six independent second moments, in storage order.
pub const SECOND_MOMENTS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Storage slot of `⟨S_a S_b⟩` among [`SECOND_MOMENTS`].
pub fn second_index(a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => panic!("spin component index out of range"),
    }
}

/// Kahan–Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

fn merge_all<const K: usize>(a: &mut [[NeumaierSum; K]], b: &[[NeumaierSum; K]]) {
    for (x, y) in a.iter_mut().zip(b) {
        for (p, q) in x.iter_mut().zip(y) {
            p.merge(q);
        }
    }
}

/// Moment vector of one trajectory: `S_x, S_y, S_z` then the six `S_a S_b`.
fn collective_moments(total: Vec3) -> [f64; 9] {
    let mut m = [0.0; 9];
    m[..3].copy_from_slice(&total);
    for (k, &(a, b)) in SECOND_MOMENTS.iter().enumerate() {
        m[3 + k] = total[a] * total[b];
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
struct TimeSlot {
    moments: [NeumaierSum; 9],
    moments_sq: [NeumaierSum; 9],
    sites: Vec<[NeumaierSum; 3]>,
    sites_sq: Vec<[NeumaierSum; 3]>,
    pairs: Vec<[NeumaierSum; 9]>,
    pairs_sq: Vec<[NeumaierSum; 9]>,
    /// weight, then the nine collective moments
    blocks: Vec<[NeumaierSum; 10]>,
}

impl TimeSlot {
    fn new(n: usize, n_pairs: usize) -> Self {
        Self {
            moments: Default::default(),
            moments_sq: Default::default(),
            sites: vec![Default::default(); n],
            sites_sq: vec![Default::default(); n],
            pairs: vec![Default::default(); n_pairs],
            pairs_sq: vec![Default::default(); n_pairs],
            blocks: vec![Default::default(); JACKKNIFE_BLOCKS],
        }
    }

    fn merge(&mut self, other: &Self) {
        for (p, q) in self.moments.iter_mut().zip(&other.moments) {
            p.merge(q);
        }
        for (p, q) in self.moments_sq.iter_mut().zip(&other.moments_sq) {
            p.merge(q);
        }
        merge_all(&mut self.sites, &other.sites);
        merge_all(&mut self.sites_sq, &other.sites_sq);
        merge_all(&mut self.pairs, &other.pairs);
        merge_all(&mut self.pairs_sq, &other.pairs_sq);
        merge_all(&mut self.blocks, &other.blocks);
    }
}

/// One estimate with its statistical error (zero for exact enumeration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Mergeable running sums over trajectories, one slot per output time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator {
    n_spins: usize,
    pairs: Vec<(usize, usize)>,
    pair_index: BTreeMap<(usize, usize), usize>,
    times: Vec<f64>,
    count: u64,
    weight: NeumaierSum,
    exact: bool,
    slots: Vec<TimeSlot>,
    current: (usize, f64),
}

impl EnsembleAccumulator {
    pub fn new(n_spins: usize, times: &[f64], pairs: &[(usize, usize)]) -> Result<Self> {
        let mut pair_index = BTreeMap::new();
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if i >= n_spins || j >= n_spins {
                return Err(Error::Config(alloc::format!(
                    "pair ({i}, {j}) out of range for {n_spins} spins"
                )));
            }
            pair_index.entry((i, j)).or_insert(k);
        }
        Ok(Self {
            n_spins,
            pairs: pairs.to_vec(),
            pair_index,
            times: times.to_vec(),
            count: 0,
            weight: NeumaierSum::default(),
            exact: false,
            slots: (0..times.len()).map(|_| TimeSlot::new(n_spins, pairs.len())).collect(),
            current: (0, 0.0),
        })
    }

    /// Marks the accumulator as holding an exact weighted sum; standard
    /// errors are then reported as zero.
    pub fn set_exact(&mut self, exact: bool) {
        self.exact = exact;
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of trajectories (or enumerated configurations) recorded.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn total_weight(&self) -> f64 {
        self.weight.value()
    }

    /// Starts trajectory `index` with statistical weight `weight`; the
    /// following `record*` calls belong to it.
    pub fn begin_trajectory(&mut self, index: u64, weight: f64) {
        self.count += 1;
        self.weight.add(weight);
        self.current = ((index % JACKKNIFE_BLOCKS as u64) as usize, weight);
    }

    /// Makes an already begun trajectory current again without counting it
    /// twice, for callers that record several trajectories slot by slot.
    pub(crate) fn resume_trajectory(&mut self, index: u64, weight: f64) {
        self.current = ((index % JACKKNIFE_BLOCKS as u64) as usize, weight);
    }

    /// Adds the trajectory state at output time `slot`.
    pub fn record(&mut self, slot: usize, state: &SpinConfiguration) -> Result<()> {
        self.check(state)?;
        let (block, w) = self.current;
        let s = &mut self.slots[slot];
        let m = collective_moments(state.total());
        let b = &mut s.blocks[block];
        b[0].add(w);
        for k in 0..9 {
            s.moments[k].add(w * m[k]);
            s.moments_sq[k].add(w * m[k] * m[k]);
            b[k + 1].add(w * m[k]);
        }
        for n in 0..self.n_spins {
            let v = state.spin(n);
            for c in 0..3 {
                s.sites[n][c].add(w * v[c]);
                s.sites_sq[n][c].add(w * v[c] * v[c]);
            }
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let (u, v) = (state.spin(i), state.spin(j));
            for a in 0..3 {
                for c in 0..3 {
                    let x = u[a] * v[c];
                    s.pairs[p][3 * a + c].add(w * x);
                    s.pairs_sq[p][3 * a + c].add(w * x * x);
                }
            }
        }
        Ok(())
    }

    /// Adds the exact average over independent fair signs `ε_n` of the
    /// state `mean + Σ_n ε_n fluct_n`, where `fluct_n` is nonzero only on
    /// site `n`. Only meaningful for exact accumulators: the squared sums
    /// used for standard errors are not updated.
    pub fn record_marginal(&mut self, slot: usize, mean: &SpinConfiguration, fluct: &SpinConfiguration) -> Result<()> {
        self.check(mean)?;
        self.check(fluct)?;
        let (block, w) = self.current;
        let s = &mut self.slots[slot];
        let total = mean.total();
        let mut m = collective_moments(total);
        for (k, &(a, c)) in SECOND_MOMENTS.iter().enumerate() {
            let extra: f64 = fluct
                .component(a)
                .iter()
                .zip(fluct.component(c))
                .map(|(p, q)| p * q)
                .sum();
            m[3 + k] += extra;
        }
        let b = &mut s.blocks[block];
        b[0].add(w);
        for k in 0..9 {
            s.moments[k].add(w * m[k]);
            b[k + 1].add(w * m[k]);
        }
        for n in 0..self.n_spins {
            let (a, f) = (mean.spin(n), fluct.spin(n));
            for c in 0..3 {
                s.sites[n][c].add(w * a[c]);
                s.sites_sq[n][c].add(w * (a[c] * a[c] + f[c] * f[c]));
            }
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let (u, v) = (mean.spin(i), mean.spin(j));
            let (fu, fv) = (fluct.spin(i), fluct.spin(j));
            for a in 0..3 {
                for c in 0..3 {
                    let mut x = u[a] * v[c];
                    if i == j {
                        x += fu[a] * fv[c];
                    }
                    s.pairs[p][3 * a + c].add(w * x);
                }
            }
        }
        Ok(())
    }

    fn check(&self, state: &SpinConfiguration) -> Result<()> {
        if state.n_spins() != self.n_spins {
            return Err(Error::DimensionMismatch {
                expected: self.n_spins,
                found: state.n_spins(),
            });
        }
        Ok(())
    }

    /// Adds another accumulator with the same layout.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.n_spins != other.n_spins {
            return Err(Error::DimensionMismatch {
                expected: self.n_spins,
                found: other.n_spins,
            });
        }
        if self.pairs != other.pairs || self.times != other.times {
            return Err(Error::Config("cannot merge accumulators with different layouts".into()));
        }
        self.count += other.count;
        self.weight.merge(&other.weight);
        self.exact &= other.exact;
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            a.merge(b);
        }
        Ok(())
    }

    fn mean_of(&self, sum: &NeumaierSum) -> f64 {
        sum.value() / self.weight.value()
    }

    /// Standard error of a per-trajectory quantity from its sum and sum of
    /// squares (unit weights).
    fn error_of(&self, sum: &NeumaierSum, sum_sq: &NeumaierSum) -> Result<f64> {
        if self.exact {
            return Ok(0.0);
        }
        if self.count < 2 {
            return Err(Error::TooFewTrajectories {
                needed: 2,
                have: self.count,
            });
        }
        let n = self.count as f64;
        let w = self.weight.value();
        let mean = sum.value() / w;
        let var = ((sum_sq.value() / w - mean * mean) * n / (n - 1.0)).max(0.0);
        Ok(math::sqrt(var / n))
    }

    fn estimate(&self, sum: &NeumaierSum, sum_sq: &NeumaierSum) -> Result<Estimate> {
        Ok(Estimate {
            value: self.mean_of(sum),
            std_error: self.error_of(sum, sum_sq)?,
        })
    }

    /// `⟨S⟩` at output time `slot`.
    pub fn mean_spin(&self, slot: usize) -> Vec3 {
        let m = &self.slots[slot].moments;
        [self.mean_of(&m[0]), self.mean_of(&m[1]), self.mean_of(&m[2])]
    }

    /// `⟨S_a S_b⟩` at output time `slot`.
    pub fn second_moment(&self, slot: usize, a: usize, b: usize) -> f64 {
        self.mean_of(&self.slots[slot].moments[3 + second_index(a, b)])
    }

    fn moment_means(&self, slot: usize) -> [f64; 9] {
        self.slots[slot].moments.map(|s| self.mean_of(&s))
    }

    /// Per-site mean `⟨s^c_n⟩`.
    pub fn site_mean(&self, slot: usize, site: usize, c: usize) -> Estimate {
        let s = &self.slots[slot];
        Estimate {
            value: self.mean_of(&s.sites[site][c]),
            std_error: self.error_of(&s.sites[site][c], &s.sites_sq[site][c]).unwrap_or(f64::NAN),
        }
    }

    /// Per-site `⟨(s^c_n)²⟩`.
    pub fn site_second(&self, slot: usize, site: usize, c: usize) -> f64 {
        self.mean_of(&self.slots[slot].sites_sq[site][c])
    }

    /// Raw product `⟨s^a_i s^b_j⟩` for a configured pair (either order).
    pub fn pair_moment(&self, slot: usize, i: usize, j: usize, a: usize, b: usize) -> Result<Estimate> {
        let s = &self.slots[slot];
        let (p, a, b) = if let Some(&p) = self.pair_index.get(&(i, j)) {
            (p, a, b)
        } else if let Some(&p) = self.pair_index.get(&(j, i)) {
            (p, b, a)
        } else if i == j && a == b {
            return Ok(Estimate {
                value: self.site_second(slot, i, a),
                std_error: if self.exact { 0.0 } else { f64::NAN },
            });
        } else {
            return Err(Error::UnconfiguredPair {
                i,
                j,
                configured: self.pairs.clone(),
            });
        };
        let k = 3 * a + b;
        Ok(Estimate {
            value: self.mean_of(&s.pairs[p][k]),
            std_error: self.error_of(&s.pairs[p][k], &s.pairs_sq[p][k]).unwrap_or(f64::NAN),
        })
    }

    /// `⟨s^{s1}_i s^{s2}_j⟩` with `s^± = (s^x ± i s^y)/2`; `+1` selects the
    /// raising combination.
    pub fn ladder_correlator(&self, slot: usize, i: usize, j: usize, s1: i8, s2: i8) -> Result<Complex64> {
        let g = |a, b| self.pair_moment(slot, i, j, a, b).map(|e| e.value);
        let (xx, xy, yx, yy) = (g(0, 0)?, g(0, 1)?, g(1, 0)?, g(1, 1)?);
        let (p, q) = (f64::from(s1.signum()), f64::from(s2.signum()));
        // (x_i + i p y_i)(x_j + i q y_j) / 4
        Ok(Complex64::new(xx - p * q * yy, q * xy + p * yx) / 4.0)
    }

    /// Delete-a-block jackknife error of `f` evaluated on the nine
    /// collective moment means.
    fn jackknife(&self, slot: usize, f: impl Fn(&[f64; 9]) -> Option<f64>) -> Option<f64> {
        if self.exact {
            return Some(0.0);
        }
        let s = &self.slots[slot];
        let total_w = self.weight.value();
        let totals: [f64; 9] = s.moments.map(|m| m.value());
        let mut vals = Vec::with_capacity(JACKKNIFE_BLOCKS);
        for b in &s.blocks {
            let wb = b[0].value();
            if wb <= 0.0 {
                continue;
            }
            let rest = total_w - wb;
            if rest <= 0.0 {
                return None;
            }
            let mut m = [0.0; 9];
            for k in 0..9 {
                m[k] = (totals[k] - b[k + 1].value()) / rest;
            }
            vals.push(f(&m)?);
        }
        let g = vals.len();
        if g < 2 {
            return None;
        }
        let mean = vals.iter().sum::<f64>() / g as f64;
        let ss: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
        Some(math::sqrt(ss * (g as f64 - 1.0) / g as f64))
    }

    /// Collective moments with errors at output time `slot`.
    pub fn collective(&self, slot: usize) -> Result<CollectiveEstimates> {
        let s = &self.slots[slot];
        let mut mean = [Estimate { value: 0.0, std_error: 0.0 }; 3];
        for c in 0..3 {
            mean[c] = self.estimate(&s.moments[c], &s.moments_sq[c])?;
        }
        let mut second = [Estimate { value: 0.0, std_error: 0.0 }; 6];
        for k in 0..6 {
            second[k] = self.estimate(&s.moments[3 + k], &s.moments_sq[3 + k])?;
        }
        let m = self.moment_means(slot);
        let mut variance = [Estimate { value: 0.0, std_error: 0.0 }; 3];
        for c in 0..3 {
            let k = 3 + second_index(c, c);
            let var = |m: &[f64; 9]| Some(m[k] - m[c] * m[c]);
            variance[c] = Estimate {
                value: var(&m).unwrap(),
                std_error: self.jackknife(slot, var).unwrap_or(f64::NAN),
            };
        }
        Ok(CollectiveEstimates {
            n_spins: self.n_spins,
            count: self.count,
            mean,
            second,
            variance,
        })
    }
}

/// Collective-spin estimates at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveEstimates {
    pub n_spins: usize,
    pub count: u64,
    /// `⟨S_x⟩, ⟨S_y⟩, ⟨S_z⟩`.
    pub mean: [Estimate; 3],
    /// `⟨S_a S_b⟩` in [`SECOND_MOMENTS`] order.
    pub second: [Estimate; 6],
    /// `ΔS_a = ⟨S_a²⟩ − ⟨S_a⟩²`.
    pub variance: [Estimate; 3],
}

impl CollectiveEstimates {
    pub fn second(&self, a: usize, b: usize) -> Estimate {
        self.second[second_index(a, b)]
    }

    /// `Re⟨S_y S_z⟩`.
    pub fn re_sy_sz(&self) -> Estimate {
        self.second(1, 2)
    }
}

/// Squeezing parameter and the transverse direction of minimal variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeezing {
    pub xi: f64,
    pub direction: Vec3,
    /// `min ΔS_⊥` (standard deviation).
    pub min_std: f64,
    pub std_error: f64,
}

/// `ξ = √N min_{n⊥} ΔS_⊥ / |⟨S⟩|` from collective moments, using the
/// covariance `⟨S_a S_b⟩ − ⟨S_a⟩⟨S_b⟩` restricted to the plane normal to
/// `⟨S⟩`. `second` is in [`SECOND_MOMENTS`] order.
pub fn squeezing_from_moments(n_spins: usize, mean: Vec3, second: &[f64; 6]) -> Result<Squeezing> {
    let len = math::norm(mean);
    let threshold = 1e-9 * n_spins as f64;
    if !(len > threshold) {
        return Err(Error::UndefinedSqueezing { length: len, threshold });
    }
    let n = mean.map(|c| c / len);
    // seed with the coordinate axis least aligned with n
    let mut k = 0;
    for c in 1..3 {
        if n[c].abs() < n[k].abs() {
            k = c;
        }
    }
    let mut seed = [0.0; 3];
    seed[k] = 1.0;
    let d = math::dot(seed, n);
    let e1 = {
        let v = [seed[0] - d * n[0], seed[1] - d * n[1], seed[2] - d * n[2]];
        let l = math::norm(v);
        v.map(|c| c / l)
    };
    let e2 = math::cross(n, e1);

    let cov = |u: Vec3, v: Vec3| -> f64 {
        let mut acc = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let c = second[second_index(a, b)] - mean[a] * mean[b];
                acc += u[a] * c * v[b];
            }
        }
        acc
    };
    let (c11, c22, c12) = (cov(e1, e1), cov(e2, e2), cov(e1, e2));
    let half_tr = 0.5 * (c11 + c22);
    let half_diff = 0.5 * (c11 - c22);
    let rad = math::sqrt(half_diff * half_diff + c12 * c12);
    let lambda_min = half_tr - rad;
    // eigenvector of [[c11, c12], [c12, c22]] for lambda_min
    let (u, v) = if rad == 0.0 {
        (1.0, 0.0)
    } else if c12.abs() > 0.0 {
        (c12, lambda_min - c11)
    } else if c11 <= c22 {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let l = math::sqrt(u * u + v * v);
    let (u, v) = (u / l, v / l);
    let direction = [
        u * e1[0] + v * e2[0],
        u * e1[1] + v * e2[1],
        u * e1[2] + v * e2[2],
    ];
    let min_std = math::sqrt(lambda_min.max(0.0));
    Ok(Squeezing {
        xi: math::sqrt(n_spins as f64) * min_std / len,
        direction,
        min_std,
        std_error: 0.0,
    })
}

/// Spin squeezing at output time `slot`, with a jackknife error.
pub fn squeezing_xi(acc: &EnsembleAccumulator, slot: usize) -> Result<Squeezing> {
    if !acc.exact && acc.count < 2 {
        return Err(Error::TooFewTrajectories { needed: 2, have: acc.count });
    }
    let m = acc.moment_means(slot);
    let n = acc.n_spins;
    let xi_of = |m: &[f64; 9]| -> Option<f64> {
        let second: [f64; 6] = m[3..].try_into().unwrap();
        squeezing_from_moments(n, [m[0], m[1], m[2]], &second).ok().map(|s| s.xi)
    };
    let second: [f64; 6] = m[3..].try_into().unwrap();
    let mut sq = squeezing_from_moments(n, [m[0], m[1], m[2]], &second)?;
    sq.std_error = acc.jackknife(slot, xi_of).unwrap_or(f64::NAN);
    Ok(sq)
}

/// Connected correlator `⟨s^a_i s^b_j⟩ − ⟨s^a_i⟩⟨s^b_j⟩`. The error is
/// that of the raw product.
pub fn connected_correlator(
    acc: &EnsembleAccumulator,
    slot: usize,
    i: usize,
    j: usize,
    (a, b): (usize, usize),
) -> Result<Estimate> {
    let raw = acc.pair_moment(slot, i, j, a, b)?;
    let mi = acc.site_mean(slot, i, a).value;
    let mj = acc.site_mean(slot, j, b).value;
    Ok(Estimate {
        value: raw.value - mi * mj,
        std_error: raw.std_error,
    })
}

/// `C^{ab}_j = ⟨s^a_c s^b_{c+j}⟩ − ⟨s^a_c⟩⟨s^b_{c+j}⟩` for every offset `j`
/// with `c + j` inside the system. The `j = 0` entry is the classical
/// on-site (co)variance.
pub fn correlation_profile(
    acc: &EnsembleAccumulator,
    slot: usize,
    center: usize,
    components: (usize, usize),
) -> Result<Vec<(isize, Estimate)>> {
    if center >= acc.n_spins {
        return Err(Error::Config(alloc::format!(
            "center site {center} out of range for {} spins",
            acc.n_spins
        )));
    }
    (0..acc.n_spins)
        .map(|k| {
            let e = connected_correlator(acc, slot, center, k, components)?;
            Ok((k as isize - center as isize, e))
        })
        .collect()
}

/// Standard errors of the linear collective observables and of `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardErrors {
    pub mean: [f64; 3],
    pub second: [f64; 6],
    pub xi: Option<f64>,
}

pub fn standard_errors(acc: &EnsembleAccumulator, slot: usize) -> Result<StandardErrors> {
    let c = acc.collective(slot)?;
    Ok(StandardErrors {
        mean: c.mean.map(|e| e.std_error),
        second: c.second.map(|e| e.std_error),
        xi: squeezing_xi(acc, slot).ok().map(|s| s.std_error),
    })
}
