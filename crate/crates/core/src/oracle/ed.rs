//! Exact diagonalization for small systems.
//!
//! States live in the full `2^N` Hilbert space; basis index bit `n` set
//! means spin `n` points down (`σ^z_n = −1`). The Hamiltonian is applied
//! matrix-free and `exp(−iHt)|ψ⟩` is computed with restarted Lanczos
//! (Krylov) steps.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::ModelParams;
use crate::math::{self, Vec3};
use crate::observables::{second_index, squeezing_from_moments, Squeezing, SECOND_MOMENTS};
use crate::phase_space::Axis;
use crate::{Error, Result};

pub const DEFAULT_ED_CAP: usize = 14;

const KRYLOV_DIM: usize = 30;
const STEP_TOL: f64 = 1e-12;

/// Pure state of `N` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_spins: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn from_amplitudes(n_spins: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << n_spins {
            return Err(Error::DimensionMismatch {
                expected: 1usize << n_spins,
                found: amplitudes.len(),
            });
        }
        Ok(Self { n_spins, amplitudes })
    }

    /// Product state with site `n` polarized along `axes[n]`.
    pub fn product(axes: &[Axis]) -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let spinors: Vec<[Complex64; 2]> = axes
            .iter()
            .map(|a| {
                let (r, i) = (Complex64::new(h, 0.0), Complex64::new(0.0, h));
                match a {
                    Axis::PlusZ => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                    Axis::MinusZ => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                    Axis::PlusX => [r, r],
                    Axis::MinusX => [r, -r],
                    Axis::PlusY => [r, i],
                    Axis::MinusY => [r, -i],
                }
            })
            .collect();
        let n = axes.len();
        let amplitudes = (0..1usize << n)
            .map(|k| {
                spinors
                    .iter()
                    .enumerate()
                    .fold(Complex64::new(1.0, 0.0), |acc, (site, sp)| acc * sp[(k >> site) & 1])
            })
            .collect();
        Self { n_spins: n, amplitudes }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    math::sqrt(a.iter().map(|x| x.norm_sqr()).sum())
}

/// Matrix-free `Ĥ = 1/2 Σ_{i≠j}[J⊥_ij/2 (XX + YY) + Jz_ij ZZ] + Ω Σ X`.
#[derive(Debug, Clone)]
pub struct SpinHamiltonian {
    n_spins: usize,
    diagonal: Vec<f64>,
    flip_flops: Vec<(usize, f64)>,
    omega: f64,
}

impl SpinHamiltonian {
    pub fn new(params: &ModelParams, cap: usize) -> Result<Self> {
        let n = params.n_spins();
        check_cap(n, cap)?;
        let dim = 1usize << n;
        let jz = params.j_z();
        let jp = params.j_perp();
        let mut bonds = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if jz.get(i, j) != 0.0 {
                    bonds.push((i, j, jz.get(i, j)));
                }
            }
        }
        let diagonal = (0..dim)
            .map(|k| {
                bonds
                    .iter()
                    .map(|&(i, j, v)| {
                        let same = ((k >> i) & 1) == ((k >> j) & 1);
                        if same {
                            v
                        } else {
                            -v
                        }
                    })
                    .sum()
            })
            .collect();
        let mut flip_flops = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if jp.get(i, j) != 0.0 {
                    flip_flops.push(((1usize << i) | (1usize << j), jp.get(i, j)));
                }
            }
        }
        Ok(Self {
            n_spins: n,
            diagonal,
            flip_flops,
            omega: params.omega(),
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// `out = Ĥ ψ`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = psi[k] * self.diagonal[k];
        }
        for &(mask, amp) in &self.flip_flops {
            for k in 0..psi.len() {
                let bits = k & mask;
                // antiparallel pair: exactly one of the two bits set
                if bits != 0 && bits != mask {
                    out[k ^ mask] += psi[k] * amp;
                }
            }
        }
        if self.omega != 0.0 {
            for n in 0..self.n_spins {
                let m = 1usize << n;
                for k in 0..psi.len() {
                    out[k ^ m] += psi[k] * self.omega;
                }
            }
        }
    }

    /// Upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let d = self.diagonal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let f: f64 = self.flip_flops.iter().map(|(_, a)| a.abs()).sum();
        d + f + self.n_spins as f64 * self.omega.abs()
    }

    pub fn energy(&self, state: &QuantumState) -> f64 {
        let mut h = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
        self.apply(&state.amplitudes, &mut h);
        inner(&state.amplitudes, &h).re
    }

    /// One Krylov step `exp(−iĤτ)ψ`, returning the propagated vector and
    /// an a-posteriori error estimate.
    fn krylov_step(&self, psi: &[Complex64], tau: f64) -> (Vec<Complex64>, f64) {
        let dim = psi.len();
        let beta0 = norm(psi);
        let m_max = KRYLOV_DIM.min(dim);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max + 1);
        basis.push(psi.iter().map(|x| x / beta0).collect());
        let mut alphas = Vec::with_capacity(m_max);
        let mut betas: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        let mut residual = 0.0;
        let scale = self.norm_bound().max(1.0);
        for k in 0..m_max {
            self.apply(&basis[k], &mut w);
            let alpha = inner(&basis[k], &w).re;
            alphas.push(alpha);
            for (x, v) in w.iter_mut().zip(&basis[k]) {
                *x -= v * alpha;
            }
            if k > 0 {
                let b = betas[k - 1];
                for (x, v) in w.iter_mut().zip(&basis[k - 1]) {
                    *x -= v * b;
                }
            }
            // full reorthogonalization
            for v in &basis {
                let c = inner(v, &w);
                for (x, y) in w.iter_mut().zip(v) {
                    *x -= y * c;
                }
            }
            let beta = norm(&w);
            if beta < 1e-13 * scale || k + 1 == m_max {
                residual = if beta < 1e-13 * scale { 0.0 } else { beta };
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }
        let m = alphas.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            t[(k, k)] = alphas[k];
            if k + 1 < m {
                t[(k, k + 1)] = betas[k];
                t[(k + 1, k)] = betas[k];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut y = vec![Complex64::new(0.0, 0.0); m];
        for l in 0..m {
            let (s, c) = math::sin_cos(-tau * eig.eigenvalues[l]);
            let phase = Complex64::new(c, s) * eig.eigenvectors[(0, l)];
            for (k, yk) in y.iter_mut().enumerate() {
                *yk += phase * eig.eigenvectors[(k, l)];
            }
        }
        let err = beta0 * residual * y[m - 1].norm();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (k, v) in basis.iter().take(m).enumerate() {
            let c = y[k] * beta0;
            for (o, x) in out.iter_mut().zip(v) {
                *o += x * c;
            }
        }
        (out, err)
    }

    /// `exp(−iĤt)ψ` via adaptive Krylov substeps.
    pub fn evolve(&self, state: &QuantumState, t: f64) -> QuantumState {
        let mut psi = state.amplitudes.clone();
        let bound = self.norm_bound();
        if t == 0.0 || bound == 0.0 {
            return state.clone();
        }
        let mut remaining = t;
        let mut tau = (8.0 / bound).min(t.abs()) * t.signum();
        while remaining.abs() > 0.0 {
            if tau.abs() > remaining.abs() {
                tau = remaining;
            }
            let (next, err) = self.krylov_step(&psi, tau);
            if err > STEP_TOL && tau.abs() > 1e-6 / bound {
                tau *= 0.5;
                continue;
            }
            psi = next;
            remaining -= tau;
            tau *= 1.5;
            if remaining.abs() < 1e-15 * t.abs() {
                break;
            }
        }
        QuantumState {
            n_spins: state.n_spins,
            amplitudes: psi,
        }
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= 63 {
        return Err(Error::TooLargeForEd {
            n_spins: n,
            cap,
            bytes: 16u128 << n.min(120),
        });
    }
    Ok(())
}

/// `|ψ(t)⟩ = exp(−iĤt)|ψ(0)⟩` at every requested time, starting from the
/// product state `axes`.
pub fn ed_evolve(params: &ModelParams, axes: &[Axis], times: &[f64], cap: usize) -> Result<Vec<QuantumState>> {
    if axes.len() != params.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: params.n_spins(),
            found: axes.len(),
        });
    }
    crate::dynamics::validate_times(times)?;
    let h = SpinHamiltonian::new(params, cap)?;
    let mut psi = QuantumState::product(axes);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        psi = h.evolve(&psi, t - now);
        now = t;
        out.push(psi.clone());
    }
    Ok(out)
}

/// `out = σ^c_n ψ`.
fn apply_pauli(psi: &[Complex64], site: usize, c: usize, out: &mut [Complex64]) {
    let m = 1usize << site;
    for k in 0..psi.len() {
        let down = k & m != 0;
        match c {
            0 => out[k ^ m] = psi[k],
            // Y|↑⟩ = i|↓⟩, Y|↓⟩ = −i|↑⟩
            1 => {
                out[k ^ m] = if down {
                    psi[k] * Complex64::new(0.0, -1.0)
                } else {
                    psi[k] * Complex64::new(0.0, 1.0)
                }
            }
            _ => out[k] = if down { -psi[k] } else { psi[k] },
        }
    }
}

/// Quantum expectation values in Pauli normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct EdObservables {
    pub n_spins: usize,
    /// `⟨S_a⟩`.
    pub mean: Vec3,
    /// Symmetrized `½⟨S_a S_b + S_b S_a⟩` in [`SECOND_MOMENTS`] order.
    pub second: [f64; 6],
    /// `⟨σ^c_n⟩`.
    pub sites: Vec<Vec3>,
    /// Symmetrized `⟨σ^a_i σ^b_j⟩` (index `3a + b`) per requested pair.
    pub pairs: Vec<[f64; 9]>,
}

impl EdObservables {
    pub fn second(&self, a: usize, b: usize) -> f64 {
        self.second[second_index(a, b)]
    }

    /// `ΔS_a = ⟨S_a²⟩ − ⟨S_a⟩²`.
    pub fn variance(&self, a: usize) -> f64 {
        self.second(a, a) - self.mean[a] * self.mean[a]
    }

    pub fn squeezing(&self) -> Result<Squeezing> {
        squeezing_from_moments(self.n_spins, self.mean, &self.second)
    }

    /// `⟨σ^a_i σ^b_j⟩ − ⟨σ^a_i⟩⟨σ^b_j⟩` for requested pair index `p`.
    pub fn connected(&self, p: usize, (i, j): (usize, usize), (a, b): (usize, usize)) -> f64 {
        self.pairs[p][3 * a + b] - self.sites[i][a] * self.sites[j][b]
    }
}

pub fn ed_observables(state: &QuantumState, pairs: &[(usize, usize)]) -> EdObservables {
    let n = state.n_spins;
    let dim = state.amplitudes.len();
    let psi = &state.amplitudes;
    // σ^c_n ψ for every site and component
    let mut applied: Vec<[Vec<Complex64>; 3]> = Vec::with_capacity(n);
    for site in 0..n {
        let mut v = [
            vec![Complex64::new(0.0, 0.0); dim],
            vec![Complex64::new(0.0, 0.0); dim],
            vec![Complex64::new(0.0, 0.0); dim],
        ];
        for (c, out) in v.iter_mut().enumerate() {
            apply_pauli(psi, site, c, out);
        }
        applied.push(v);
    }
    let sites: Vec<Vec3> = applied
        .iter()
        .map(|v| [inner(psi, &v[0]).re, inner(psi, &v[1]).re, inner(psi, &v[2]).re])
        .collect();
    let mut mean = [0.0; 3];
    for s in &sites {
        for c in 0..3 {
            mean[c] += s[c];
        }
    }
    let mut collective = [
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
    ];
    for v in &applied {
        for c in 0..3 {
            for (acc, x) in collective[c].iter_mut().zip(&v[c]) {
                *acc += x;
            }
        }
    }
    let mut second = [0.0; 6];
    for (k, &(a, b)) in SECOND_MOMENTS.iter().enumerate() {
        second[k] = inner(&collective[a], &collective[b]).re;
    }
    let pairs = pairs
        .iter()
        .map(|&(i, j)| {
            let mut out = [0.0; 9];
            for a in 0..3 {
                for b in 0..3 {
                    out[3 * a + b] = inner(&applied[i][a], &applied[j][b]).re;
                }
            }
            out
        })
        .collect();
    EdObservables {
        n_spins: n,
        mean,
        second,
        sites,
        pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_couplings, CouplingMatrix, CouplingMode, Position};
    use crate::oracle::exact_ising_sx;

    fn chain(n: usize, alpha: f64) -> CouplingMatrix {
        let sites: Vec<Position> = (0..n).map(|i| [i as f64, 0.0, 0.0]).collect();
        build_couplings(&sites, 1.0, alpha, CouplingMode::Dipolar, [0.0, 0.0, 1.0]).unwrap()
    }

    fn dense(h: &SpinHamiltonian) -> DMatrix<Complex64> {
        let dim = 1usize << h.n_spins;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for k in 0..dim {
            e.fill(Complex64::new(0.0, 0.0));
            e[k] = Complex64::new(1.0, 0.0);
            h.apply(&e, &mut col);
            for r in 0..dim {
                m[(r, k)] = col[r];
            }
        }
        m
    }

    #[test]
    fn product_state_observables() {
        let psi = QuantumState::product(&[Axis::PlusX; 5]);
        assert!((psi.norm_sq() - 1.0).abs() < 1e-14);
        let obs = ed_observables(&psi, &[(0, 1)]);
        assert!((obs.mean[0] - 5.0).abs() < 1e-12);
        assert!(obs.mean[1].abs() < 1e-12 && obs.mean[2].abs() < 1e-12);
        assert!((obs.second(1, 1) - 5.0).abs() < 1e-12);
        assert!((obs.squeezing().unwrap().xi - 1.0).abs() < 1e-12);
        assert!((obs.pairs[0][0] - 1.0).abs() < 1e-12);

        let y = ed_observables(&QuantumState::product(&[Axis::MinusY, Axis::PlusZ]), &[]);
        assert!((y.sites[0][1] + 1.0).abs() < 1e-14);
        assert!((y.sites[1][2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_is_hermitian_and_matches_pauli_form() {
        let jp = chain(3, 1.0);
        let jz = chain(3, 3.0).scaled(0.5);
        let p = ModelParams::new(jp.clone(), jz.clone(), 0.3).unwrap();
        let h = SpinHamiltonian::new(&p, 14).unwrap();
        let m = dense(&h);
        assert!((m.adjoint() - &m).norm() < 1e-14);

        // build from explicit Kronecker products of Pauli matrices
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i1 = Complex64::new(0.0, 1.0);
        let paulis = [
            DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            DMatrix::from_row_slice(2, 2, &[o, -i1, i1, o]),
            DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        ];
        let id = DMatrix::<Complex64>::identity(2, 2);
        // site 0 is the least significant bit, i.e. the rightmost factor
        let op = |ops: &[(usize, usize)]| -> DMatrix<Complex64> {
            let mut out = DMatrix::<Complex64>::identity(1, 1);
            for site in (0..3).rev() {
                let f = ops.iter().find(|(s, _)| *s == site).map(|&(_, c)| paulis[c].clone()).unwrap_or(id.clone());
                out = out.kronecker(&f);
            }
            out
        };
        let mut want = DMatrix::<Complex64>::zeros(8, 8);
        for a in 0..3 {
            for b in (a + 1)..3 {
                want += op(&[(a, 0), (b, 0)]) * Complex64::new(jp.get(a, b) / 2.0, 0.0);
                want += op(&[(a, 1), (b, 1)]) * Complex64::new(jp.get(a, b) / 2.0, 0.0);
                want += op(&[(a, 2), (b, 2)]) * Complex64::new(jz.get(a, b), 0.0);
            }
            want += op(&[(a, 0)]) * Complex64::new(0.3, 0.0);
        }
        assert!((m - want).norm() < 1e-13);
    }

    #[test]
    fn zero_hamiltonian_keeps_state() {
        let p = ModelParams::ising(CouplingMatrix::zeros(3));
        let out = ed_evolve(&p, &[Axis::PlusX, Axis::MinusY, Axis::PlusZ], &[0.0, 1.0], 14).unwrap();
        let psi0 = QuantumState::product(&[Axis::PlusX, Axis::MinusY, Axis::PlusZ]);
        assert_eq!(out[1], psi0);
    }

    #[test]
    fn xy_pair_closed_form() {
        let jj = 0.9;
        let p = ModelParams::xy(CouplingMatrix::all_to_all(2, jj));
        let times = [0.0, 0.3, 1.1, 2.5];
        let states = ed_evolve(&p, &[Axis::PlusX; 2], &times, 14).unwrap();
        for (psi, &t) in states.iter().zip(&times) {
            let obs = ed_observables(psi, &[]);
            assert!((obs.sites[0][0] - (jj * t).cos()).abs() < 1e-10, "t = {t}");
            assert!((psi.norm_sq() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ising_matches_closed_form() {
        let j = chain(6, 3.0);
        let p = ModelParams::ising(j.clone());
        let times: Vec<f64> = (0..8).map(|k| 0.5 * k as f64).collect();
        let states = ed_evolve(&p, &[Axis::PlusX; 6], &times, 14).unwrap();
        for (psi, &t) in states.iter().zip(&times) {
            let obs = ed_observables(psi, &[]);
            let want: f64 = (0..6).map(|n| exact_ising_sx(&j, t, n)).sum();
            assert!((obs.mean[0] - want).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn krylov_matches_dense_exponential() {
        let p = ModelParams::new(chain(4, 1.0), chain(4, 3.0).scaled(-0.7), 1.3).unwrap();
        let h = SpinHamiltonian::new(&p, 14).unwrap();
        let m = dense(&h);
        let eig = m.clone().symmetric_eigen();
        let psi0 = QuantumState::product(&[Axis::PlusX, Axis::MinusZ, Axis::PlusY, Axis::PlusX]);
        let t = 2.7;
        let v = DMatrix::from_column_slice(16, 1, psi0.amplitudes());
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(0.0, -t * l).exp()));
        let want = &eig.eigenvectors * phases * eig.eigenvectors.adjoint() * v;
        let got = h.evolve(&psi0, t);
        for k in 0..16 {
            assert!((got.amplitudes()[k] - want[(k, 0)]).norm() < 1e-10);
        }
    }

    #[test]
    fn conserves_energy_and_sz() {
        let p = ModelParams::xy(chain(8, 1.0));
        let h = SpinHamiltonian::new(&p, 14).unwrap();
        let axes = [Axis::PlusX; 8];
        let e0 = h.energy(&QuantumState::product(&axes));
        let states = ed_evolve(&p, &axes, &[0.0, 0.7, 1.9], 14).unwrap();
        for psi in &states {
            assert!((h.energy(psi) - e0).abs() < 1e-9);
            assert!(ed_observables(psi, &[]).mean[2].abs() < 1e-9);
            assert!((psi.norm_sq() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cap_enforced() {
        let p = ModelParams::ising(CouplingMatrix::zeros(15));
        match ed_evolve(&p, &[Axis::PlusX; 15], &[0.0], DEFAULT_ED_CAP) {
            Err(Error::TooLargeForEd { bytes, cap, .. }) => {
                assert_eq!(cap, 14);
                assert_eq!(bytes, 16 << 15);
            }
            other => panic!("{other:?}"),
        }
    }
}
