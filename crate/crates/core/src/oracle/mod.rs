//! Exact references.
//!
//! Closed-form Ising results for the all-`+x` initial state, the
//! infinite-sample limit of the discrete sampler for Ising pair
//! correlators, and exact diagonalization for small systems ([`ed`]).
//!
//! Ladder operators are `σ^± = (σ^x ± iσ^y)/2`; signs are passed as `+1`
//! (raising) or `-1` (lowering).

pub mod ed;

use num_complex::Complex64;

use crate::lattice::CouplingMatrix;
use crate::math;
use crate::{Error, Result};

/// `⟨σ^x_n⟩(t) = Π_{i≠n} cos(2 t Jz_in)` for the all-`+x` state.
pub fn exact_ising_sx(j_z: &CouplingMatrix, t: f64, n: usize) -> f64 {
    (0..j_z.n_spins())
        .filter(|&i| i != n)
        .map(|i| math::cos(2.0 * t * j_z.get(i, n)))
        .product()
}

/// Exact `⟨σ^{s1}_i σ^{s2}_j⟩(t)` for the all-`+x` state:
/// `(1/4) Π_{a≠i,j} cos(2t(s1 Jz_ia + s2 Jz_ja))`.
pub fn exact_ising_corr(j_z: &CouplingMatrix, t: f64, i: usize, j: usize, signs: (i8, i8)) -> Result<Complex64> {
    if i == j {
        return Err(Error::Misuse("pair correlator needs two distinct sites"));
    }
    let (p, q) = (f64::from(signs.0.signum()), f64::from(signs.1.signum()));
    let prod: f64 = (0..j_z.n_spins())
        .filter(|&a| a != i && a != j)
        .map(|a| math::cos(2.0 * t * (p * j_z.get(i, a) + q * j_z.get(j, a))))
        .product();
    Ok(Complex64::new(0.25 * prod, 0.0))
}

/// Infinite-sample value of the discrete sampler:
/// `exact_ising_corr · cos²(2 t Jz_ij)`.
pub fn dtwa_limit_ising_corr(j_z: &CouplingMatrix, t: f64, i: usize, j: usize, signs: (i8, i8)) -> Result<Complex64> {
    let c = math::cos(2.0 * t * j_z.get(i, j));
    Ok(exact_ising_corr(j_z, t, i, j, signs)? * (c * c))
}

/// Sum over all `p, q ∈ {±1}` of ladder correlators, giving
/// `⟨σ^x_i σ^x_j⟩ = Σ ⟨σ^p_i σ^q_j⟩`.
pub fn ladder_to_xx(f: impl Fn((i8, i8)) -> Result<Complex64>) -> Result<f64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for s in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        acc += f(s)?;
    }
    Ok(acc.re)
}

/// `⟨σ^y_i σ^y_j⟩ = −Σ p q ⟨σ^p_i σ^q_j⟩`.
pub fn ladder_to_yy(f: impl Fn((i8, i8)) -> Result<Complex64>) -> Result<f64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for s in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
        acc -= f(s)? * f64::from(s.0 * s.1);
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_couplings, CouplingMode, Position};
    use alloc::vec::Vec;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dipolar_chain(n: usize) -> CouplingMatrix {
        let sites: Vec<Position> = (0..n).map(|i| [i as f64, 0.0, 0.0]).collect();
        build_couplings(&sites, 1.0, 3.0, CouplingMode::Dipolar, [0.0, 0.0, 1.0]).unwrap()
    }

    /// Direct sum over the 2^(N-2) spectator assignments with complex
    /// exponentials.
    fn brute_corr(j: &CouplingMatrix, t: f64, i: usize, k: usize, (p, q): (i8, i8)) -> Complex64 {
        let others: Vec<usize> = (0..j.n_spins()).filter(|&a| a != i && a != k).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for bits in 0..(1u64 << others.len()) {
            let mut phase_i = 0.0;
            let mut phase_k = 0.0;
            for (b, &a) in others.iter().enumerate() {
                let m = if bits >> b & 1 == 0 { 1.0 } else { -1.0 };
                phase_i += j.get(i, a) * m;
                phase_k += j.get(k, a) * m;
            }
            let arg = 2.0 * t * (f64::from(p) * phase_i + f64::from(q) * phase_k);
            acc += Complex64::new(0.0, arg).exp();
        }
        acc * 0.25 / (1u64 << others.len()) as f64
    }

    #[test]
    fn sx_basics() {
        let j = CouplingMatrix::all_to_all(5, 1.0);
        assert_eq!(exact_ising_sx(&j, 0.0, 2), 1.0);
        let rev = exact_ising_sx(&j, PI / 2.0, 0);
        assert!((rev - 1.0).abs() < 1e-12, "(-1)^4 revival, got {rev}");
        let j6 = CouplingMatrix::all_to_all(6, 1.0);
        assert!((exact_ising_sx(&j6, PI / 2.0, 0) + 1.0).abs() < 1e-12);
        let pair = CouplingMatrix::all_to_all(2, 0.8);
        assert!((exact_ising_sx(&pair, 0.4, 1) - (2.0 * 0.8 * 0.4f64).cos()).abs() < 1e-15);
    }

    #[test]
    fn corr_initial_value_and_misuse() {
        let j = dipolar_chain(4);
        for s in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            assert_eq!(exact_ising_corr(&j, 0.0, 0, 2, s).unwrap(), Complex64::new(0.25, 0.0));
        }
        assert!(matches!(exact_ising_corr(&j, 1.0, 1, 1, (1, 1)), Err(Error::Misuse(_))));
    }

    #[test]
    fn product_form_equals_exponential_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 3..=10 {
            let j = CouplingMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            for _ in 0..3 {
                let t = rng.random_range(0.0..3.0);
                let i = rng.random_range(0..n);
                let k = (i + 1 + rng.random_range(0..n - 1)) % n;
                for s in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let a = exact_ising_corr(&j, t, i, k, s).unwrap();
                    let b = brute_corr(&j, t, i, k, s);
                    assert!((a - b).norm() < 1e-12, "n={n} s={s:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn dtwa_limit_properties() {
        let j = dipolar_chain(5);
        // decoupled pair: no error
        let mut jj = j.clone();
        jj = CouplingMatrix::from_fn(5, |a, b| if (a, b) == (0, 4) { 0.0 } else { jj.get(a, b) });
        for s in [(1, 1), (1, -1)] {
            let a = dtwa_limit_ising_corr(&jj, 0.7, 0, 4, s).unwrap();
            let b = exact_ising_corr(&jj, 0.7, 0, 4, s).unwrap();
            assert!((a - b).norm() < 1e-15);
        }
        let t = PI / (4.0 * j.get(1, 2));
        assert!(dtwa_limit_ising_corr(&j, t, 1, 2, (1, -1)).unwrap().norm() < 1e-15);
        // Hermiticity: <σ+_i σ-_j>* = <σ-_i σ+_j> = <σ+_j σ-_i>
        let a = dtwa_limit_ising_corr(&j, 0.9, 0, 3, (1, -1)).unwrap();
        let b = dtwa_limit_ising_corr(&j, 0.9, 3, 0, (1, -1)).unwrap();
        assert!((a.conj() - b).norm() < 1e-15);
    }

    #[test]
    fn ladder_recombination() {
        // σ^x = σ^+ + σ^-
        let f = |s: (i8, i8)| -> Result<Complex64> {
            Ok(Complex64::new(f64::from(s.0) + 2.0, f64::from(s.1)))
        };
        assert_eq!(ladder_to_xx(f).unwrap(), 8.0);
        assert_eq!(ladder_to_yy(f).unwrap(), 0.0);
    }
}
