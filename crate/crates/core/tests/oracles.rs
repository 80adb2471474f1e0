use dtwa_core::ensemble::{
    build_realization, run_enumerated, run_ensemble, ModelKind, ModelSpec, PairSelection, RunConfig, Sequential,
};
use dtwa_core::lattice::LatticeSpec;
use dtwa_core::observables::{correlation_profile, squeezing_xi};
use dtwa_core::oracle::ed::{ed_evolve, ed_observables, DEFAULT_ED_CAP};
use dtwa_core::oracle::exact_ising_sx;
use dtwa_core::phase_space::Axis;

fn times(t_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect()
}

/// `ξ` of the all-to-all Ising quench from the closed-form transverse
/// moments, with the pair `yy` correlator scaled by `damping`.
fn all_to_all_ising_xi(n: usize, t: f64, damping: f64) -> f64 {
    let nf = n as f64;
    let c = (2.0 * t).cos();
    let sx = nf * c.powi(n as i32 - 1);
    let yy = 0.5 * (1.0 - (4.0 * t).cos().powi(n as i32 - 2)) * damping;
    let yz = nf * (nf - 1.0) * (2.0 * t).sin() * c.powi(n as i32 - 2);
    let (a, d) = (nf + nf * (nf - 1.0) * yy, nf);
    let lambda = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + yz * yz).sqrt();
    nf.sqrt() * lambda.sqrt() / sx
}

#[test]
fn enumerated_ising_squeezing_against_closed_forms() {
    let n = 8;
    let cfg = RunConfig::new(
        LatticeSpec::chain(n),
        ModelSpec::new(ModelKind::Ising, 1.0, 0.0),
        Axis::PlusX,
        times(0.2, 9),
    );
    let out = run_enumerated(&cfg, &Sequential).unwrap();
    let real = build_realization(&cfg, 0).unwrap();
    let states = ed_evolve(&real.params, &real.axes, &cfg.times, DEFAULT_ED_CAP).unwrap();
    for (slot, (psi, &t)) in states.iter().zip(&cfg.times).enumerate() {
        let exact = ed_observables(psi, &[]).squeezing().unwrap().xi;
        let dtwa = squeezing_xi(&out.pooled, slot).unwrap().xi;
        let damping = (2.0 * t).cos().powi(2);
        assert!((exact - all_to_all_ising_xi(n, t, 1.0)).abs() < 1e-9, "t={t}: ed {exact}");
        assert!((dtwa - all_to_all_ising_xi(n, t, damping)).abs() < 1e-10, "t={t}: dtwa {dtwa}");
        if t <= 0.05 + 1e-12 {
            assert!((exact - dtwa).abs() < 1e-2, "t={t}: ed {exact} dtwa {dtwa}");
        }
        if t > 0.0 {
            assert!(dtwa < 1.0);
        }
    }
}

#[test]
fn ed_matches_closed_form_on_a_dipolar_square() {
    let cfg = RunConfig::new(
        LatticeSpec::new([3, 3, 1], 1.0).unwrap(),
        ModelSpec::new(ModelKind::Ising, 1.0, 3.0),
        Axis::PlusX,
        times(2.0, 9),
    );
    let real = build_realization(&cfg, 0).unwrap();
    let states = ed_evolve(&real.params, &real.axes, &cfg.times, DEFAULT_ED_CAP).unwrap();
    for (psi, &t) in states.iter().zip(&cfg.times) {
        let q = ed_observables(psi, &[]);
        let want: f64 = (0..9).map(|n| exact_ising_sx(real.params.j_z(), t, n)).sum();
        assert!((q.mean[0] - want).abs() < 1e-9);
    }
}

#[test]
fn sampled_xy_stays_near_ed_for_a_short_quench() {
    let mut cfg = RunConfig::new(
        LatticeSpec::chain(6),
        ModelSpec::new(ModelKind::Xy, 1.0, 3.0),
        Axis::PlusX,
        times(0.3, 4),
    );
    cfg.n_trajectories = 4000;
    cfg.master_seed = 11;
    let out = run_ensemble(&cfg, &Sequential).unwrap();
    let real = build_realization(&cfg, 0).unwrap();
    let states = ed_evolve(&real.params, &real.axes, &cfg.times, DEFAULT_ED_CAP).unwrap();
    for (slot, psi) in states.iter().enumerate() {
        let exact = ed_observables(psi, &[]).mean[0];
        let est = out.pooled.collective(slot).unwrap().mean[0];
        assert!((est.value - exact).abs() < 0.05 * 6.0, "slot {slot}: {} vs {exact}", est.value);
    }
}

#[test]
fn initial_profile_is_uncorrelated() {
    let mut cfg = RunConfig::new(
        LatticeSpec::chain(9),
        ModelSpec::new(ModelKind::Xy, 1.0, 1.0),
        Axis::PlusX,
        vec![0.0],
    );
    cfg.pairs = PairSelection::CenterToAll;
    let out = run_enumerated(&cfg, &Sequential).unwrap();
    let profile = correlation_profile(&out.pooled, 0, 4, (1, 1)).unwrap();
    for (offset, e) in profile {
        let want = if offset == 0 { 1.0 } else { 0.0 };
        assert!((e.value - want).abs() < 1e-12, "offset {offset}: {}", e.value);
    }
}

#[test]
fn diluted_runs_report_per_realization_statistics() {
    let mut cfg = RunConfig::new(
        LatticeSpec::new([4, 4, 1], 0.5).unwrap(),
        ModelSpec::new(ModelKind::Xy, 1.0, 3.0),
        Axis::PlusX,
        times(0.5, 3),
    );
    cfg.n_trajectories = 64;
    cfg.disorder_realizations = 4;
    let out = run_ensemble(&cfg, &Sequential).unwrap();
    assert_eq!(out.per_realization.len(), 4);
    assert_eq!(out.pooled.count(), 4 * 64);
    assert!(out.realizations.iter().all(|r| r.sites.len() == 8));
    assert!(out.realizations.windows(2).any(|w| w[0].sites != w[1].sites));
    let stats = out.disorder_statistics(|acc, slot| Some(acc.mean_spin(slot)[0] / 8.0));
    assert!((stats[0].mean - 1.0).abs() < 1e-12);
    assert!(stats[0].spread.abs() < 1e-12);
}
