//! Continuous Gaussian TWA baseline.
//!
//! Each site keeps its polarization component pinned to the axis sign while
//! the two transverse components are independent standard normals. This
//! matches every first and second moment of the discrete sampler; higher
//! moments differ (the fourth transverse moment is 3 instead of 1).
//! Evolution and measurement are shared with the discrete method.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::phase_space::{Axis, SpinConfiguration};

pub fn sample_gaussian_initial<R: Rng + ?Sized>(axes: &[Axis], rng: &mut R) -> SpinConfiguration {
    let mut out = SpinConfiguration::zeros(axes.len());
    sample_gaussian_initial_into(axes, rng, &mut out);
    out
}

pub fn sample_gaussian_initial_into<R: Rng + ?Sized>(axes: &[Axis], rng: &mut R, out: &mut SpinConfiguration) {
    for (site, axis) in axes.iter().enumerate() {
        let (c, sign) = axis.component_and_sign();
        let mut s = [0.0; 3];
        s[c] = sign;
        s[(c + 1) % 3] = StandardNormal.sample(rng);
        s[(c + 2) % 3] = StandardNormal.sample(rng);
        out.set_spin(site, s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{enumerate_initial, DiscreteWignerSpec, EnumerationMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn moments_match_discrete_up_to_second_order() {
        let n_t = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut m1, mut m2, mut m4, mut zsum) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n_t {
            let s = sample_gaussian_initial(&[Axis::PlusZ], &mut rng);
            let x = s.spin(0)[0];
            m1 += x;
            m2 += x * x;
            m4 += x * x * x * x;
            zsum += s.spin(0)[2];
        }
        let n = n_t as f64;
        let tol = 4.0 / n.sqrt();
        assert!((m1 / n).abs() < tol);
        assert!((m2 / n - 1.0).abs() < 4.0 * tol);
        // fourth moment of a standard normal is 3 with variance 96
        assert!((m4 / n - 3.0).abs() < 4.0 * (96.0f64).sqrt() / n.sqrt());
        assert_eq!(zsum / n, 1.0);

        let spec = DiscreteWignerSpec::uniform(1, Axis::PlusZ).unwrap();
        let e = enumerate_initial(&spec, EnumerationMode::Full, 16).unwrap();
        let d4: f64 = e.iter().map(|(c, w)| w * c.spin(0)[0].powi(4)).sum();
        let d2: f64 = e.iter().map(|(c, w)| w * c.spin(0)[0].powi(2)).sum();
        assert!((d4 - 1.0).abs() < 1e-15 && (d2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collective_moments_for_x_polarization() {
        let n_t = 20_000;
        let axes = [Axis::MinusX; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut sx, mut syy) = (0.0, 0.0);
        for _ in 0..n_t {
            let t = sample_gaussian_initial(&axes, &mut rng).total();
            sx += t[0];
            syy += t[1] * t[1];
        }
        let n = n_t as f64;
        assert_eq!(sx / n, -6.0);
        // Var(S_y) = N, standard error of the estimate ≈ N√2/√n_t
        assert!((syy / n - 6.0).abs() < 4.0 * 6.0 * 2f64.sqrt() / n.sqrt());
    }
}
