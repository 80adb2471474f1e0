//! Site geometry and coupling tables.
//!
//! Lattices are simple cubic boxes with unit spacing and open boundaries.
//! Couplings decay as `J / r^alpha`, optionally with the dipolar angular
//! factor `1 - 3 cos²θ` where θ is measured from the quantization axis.
//! No Kac normalization is applied, so `alpha = 0` is plain all-to-all
//! coupling of strength `J`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{self, Vec3};
use crate::{Error, Result};

/// Cartesian site position in units of the lattice spacing.
pub type Position = [f64; 3];

/// Box of `Lx × Ly × Lz` sites, optionally diluted to a filling fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub extents: [usize; 3],
    /// `N / M`, in `(0, 1]`.
    pub filling: f64,
}

impl LatticeSpec {
    pub fn new(extents: [usize; 3], filling: f64) -> Result<Self> {
        let spec = Self { extents, filling };
        spec.validate()?;
        Ok(spec)
    }

    pub fn chain(len: usize) -> Self {
        Self {
            extents: [len, 1, 1],
            filling: 1.0,
        }
    }

    /// Total number of lattice sites `M`.
    pub fn n_sites(&self) -> usize {
        self.extents.iter().product()
    }

    /// Number of occupied sites `N = round(filling · M)`.
    pub fn n_spins(&self) -> usize {
        math::round(self.filling * self.n_sites() as f64) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.extents.contains(&0) {
            return Err(Error::Config(alloc::format!(
                "lattice extents must be positive, got {:?}",
                self.extents
            )));
        }
        if !(self.filling > 0.0 && self.filling <= 1.0) {
            return Err(Error::Config(alloc::format!(
                "filling must lie in (0, 1], got {}",
                self.filling
            )));
        }
        if self.n_spins() < 2 {
            return Err(Error::Config(alloc::format!(
                "lattice {:?} at filling {} holds {} spins; need at least 2",
                self.extents,
                self.filling,
                self.n_spins()
            )));
        }
        Ok(())
    }

    /// Row-major position of lattice site `index` (x fastest).
    pub fn position(&self, index: usize) -> Position {
        let [lx, ly, _] = self.extents;
        let x = index % lx;
        let y = (index / lx) % ly;
        let z = index / (lx * ly);
        [x as f64, y as f64, z as f64]
    }
}

/// Occupied site positions.
///
/// At full filling all sites are returned in row-major order and `rng` is not
/// touched. Otherwise `N` sites are drawn uniformly without replacement and
/// returned sorted in row-major order.
pub fn build_sites<R: Rng + ?Sized>(spec: &LatticeSpec, rng: &mut R) -> Result<Vec<Position>> {
    spec.validate()?;
    let m = spec.n_sites();
    let n = spec.n_spins();
    if n == m {
        return Ok((0..m).map(|i| spec.position(i)).collect());
    }
    let mut chosen = rand::seq::index::sample(rng, m, n).into_vec();
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| spec.position(i)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    Isotropic,
    Dipolar,
}

/// Symmetric `N × N` coupling table with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CouplingMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n],
        }
    }

    /// Uniform all-to-all coupling `j` between every pair.
    pub fn all_to_all(n: usize, j: f64) -> Self {
        Self::from_fn(n, |_, _| j)
    }

    /// Builds a matrix from `f(i, j)` evaluated for `i < j`; the lower
    /// triangle is mirrored and the diagonal is zero.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                m.values[i * n + j] = v;
                m.values[j * n + i] = v;
            }
        }
        m
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_n Σ_m |J_nm|`.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `y = J · x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            *out = dot(self.row(i), x);
        }
    }

    /// `(y1, y2) = (J · x1, J · x2)` sharing one pass over the matrix.
    pub fn mul_vec2(&self, x1: &[f64], x2: &[f64], y1: &mut [f64], y2: &mut [f64]) {
        for i in 0..self.n {
            let (a, b) = dot2(self.row(i), x1, x2);
            y1[i] = a;
            y2[i] = b;
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn dot2(a: &[f64], b: &[f64], c: &[f64]) -> (f64, f64) {
    let mut p = [0.0f64; 4];
    let mut q = [0.0f64; 4];
    let n = a.len();
    let body = n - n % 4;
    let mut k = 0;
    while k < body {
        for l in 0..4 {
            p[l] += a[k + l] * b[k + l];
            q[l] += a[k + l] * c[k + l];
        }
        k += 4;
    }
    let (mut tp, mut tq) = (0.0, 0.0);
    for k in body..n {
        tp += a[k] * b[k];
        tq += a[k] * c[k];
    }
    (
        (p[0] + p[1]) + (p[2] + p[3]) + tp,
        (q[0] + q[1]) + (q[2] + q[3]) + tq,
    )
}

/// `J_ij = J f(θ_ij) / |r_ij|^alpha` with `f = 1` (isotropic) or
/// `f = 1 - 3 cos²θ_ij` (dipolar), θ measured from `quantization_axis`.
pub fn build_couplings(
    sites: &[Position],
    j: f64,
    alpha: f64,
    mode: CouplingMode,
    quantization_axis: Vec3,
) -> Result<CouplingMatrix> {
    if sites.len() < 2 {
        return Err(Error::Config(alloc::format!(
            "need at least 2 sites for couplings, got {}",
            sites.len()
        )));
    }
    if !(alpha >= 0.0) {
        return Err(Error::Config(alloc::format!(
            "decay exponent must be nonnegative, got {alpha}"
        )));
    }
    let axis_len = math::norm(quantization_axis);
    if !(axis_len > 0.0) {
        return Err(Error::Config("quantization axis must be nonzero".into()));
    }
    let axis = quantization_axis.map(|c| c / axis_len);

    let n = sites.len();
    let mut out = CouplingMatrix::zeros(n);
    for a in 0..n {
        for b in (a + 1)..n {
            let r = [
                sites[b][0] - sites[a][0],
                sites[b][1] - sites[a][1],
                sites[b][2] - sites[a][2],
            ];
            let dist = math::norm(r);
            if dist == 0.0 {
                return Err(Error::CoincidentSites { i: a, j: b });
            }
            let radial = if alpha == 0.0 {
                1.0
            } else {
                math::powf(dist, -alpha)
            };
            let angular = match mode {
                CouplingMode::Isotropic => 1.0,
                CouplingMode::Dipolar => {
                    let c = math::dot(r, axis) / dist;
                    1.0 - 3.0 * c * c
                }
            };
            let v = j * angular * radial;
            out.values[a * n + b] = v;
            out.values[b * n + a] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const Z: Vec3 = [0.0, 0.0, 1.0];

    #[test]
    fn full_filling_is_row_major() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sites = build_sites(&LatticeSpec::chain(4), &mut rng).unwrap();
        assert_eq!(
            sites,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]]
        );
        let sq = LatticeSpec::new([2, 2, 1], 1.0).unwrap();
        let sites = build_sites(&sq, &mut rng).unwrap();
        assert_eq!(
            sites,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn dilution_is_distinct_and_reproducible() {
        let spec = LatticeSpec::new([100, 1, 1], 0.5).unwrap();
        let a = build_sites(&spec, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = build_sites(&spec, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
        let mut xs: Vec<i64> = a.iter().map(|p| p[0] as i64).collect();
        xs.dedup();
        assert_eq!(xs.len(), 50);
        let c = build_sites(&spec, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn too_few_spins_rejected() {
        assert!(matches!(LatticeSpec::new([1, 1, 1], 1.0), Err(Error::Config(_))));
        assert!(matches!(LatticeSpec::new([3, 1, 1], 0.3), Err(Error::Config(_))));
        assert!(LatticeSpec::new([4, 1, 1], 0.0).is_err());
        assert!(LatticeSpec::new([4, 0, 1], 1.0).is_err());
    }

    #[test]
    fn dipolar_chain_perpendicular_to_axis() {
        let sites: Vec<Position> = (0..5).map(|i| [i as f64, 0.0, 0.0]).collect();
        let dip = build_couplings(&sites, 1.0, 3.0, CouplingMode::Dipolar, Z).unwrap();
        let iso = build_couplings(&sites, 1.0, 3.0, CouplingMode::Isotropic, Z).unwrap();
        assert_eq!(dip.get(0, 1), 1.0);
        assert_eq!(dip.get(0, 2), 1.0 / 8.0);
        for i in 0..5 {
            for j in 0..5 {
                assert!((dip.get(i, j) - iso.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn alpha_zero_is_all_to_all() {
        let sites: Vec<Position> = (0..5).map(|i| [i as f64, 0.0, 0.0]).collect();
        let m = build_couplings(&sites, 0.7, 0.0, CouplingMode::Isotropic, Z).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 0.0 } else { 0.7 };
                assert_eq!(m.get(i, j), want);
            }
        }
    }

    #[test]
    fn diagonal_neighbor_distance() {
        let sites = [[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]];
        let m = build_couplings(&sites, 1.0, 1.0, CouplingMode::Isotropic, Z).unwrap();
        assert!((m.get(0, 1) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dipolar_along_axis_is_attractive() {
        let sites = [[0.0, 0.0, 0.0], [0.0, 0.0, 2.0]];
        let m = build_couplings(&sites, 1.0, 3.0, CouplingMode::Dipolar, Z).unwrap();
        assert!((m.get(0, 1) + 2.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn coincident_sites_rejected() {
        let sites = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        let err = build_couplings(&sites, 1.0, 3.0, CouplingMode::Isotropic, Z).unwrap_err();
        assert_eq!(err, Error::CoincidentSites { i: 0, j: 2 });
    }

    #[test]
    fn matvec_matches_naive() {
        let m = CouplingMatrix::from_fn(7, |i, j| (i * 3 + j) as f64 * 0.1);
        let x: Vec<f64> = (0..7).map(|i| i as f64 - 2.5).collect();
        let w: Vec<f64> = (0..7).map(|i| (i * i) as f64).collect();
        let (mut y1, mut y2, mut y3) = (vec![0.0; 7], vec![0.0; 7], vec![0.0; 7]);
        m.mul_vec(&x, &mut y1);
        m.mul_vec2(&x, &w, &mut y2, &mut y3);
        for i in 0..7 {
            let naive: f64 = (0..7).map(|j| m.get(i, j) * x[j]).sum();
            let naive2: f64 = (0..7).map(|j| m.get(i, j) * w[j]).sum();
            assert!((y1[i] - naive).abs() < 1e-12);
            assert!((y2[i] - naive).abs() < 1e-12);
            assert!((y3[i] - naive2).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn couplings_symmetric_zero_diagonal(
            coords in proptest::collection::btree_set((0i32..6, 0i32..6, 0i32..3), 2..12),
            alpha in 0.0f64..4.0,
            dipolar in any::<bool>(),
        ) {
            let sites: Vec<Position> = coords.iter().map(|&(x, y, z)| [x as f64, y as f64, z as f64]).collect();
            let mode = if dipolar { CouplingMode::Dipolar } else { CouplingMode::Isotropic };
            let m = build_couplings(&sites, 1.3, alpha, mode, [0.3, 0.1, 1.0]).unwrap();
            for i in 0..sites.len() {
                prop_assert_eq!(m.get(i, i), 0.0);
                for j in 0..sites.len() {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
        }
    }
}
