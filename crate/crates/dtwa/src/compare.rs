//! Side-by-side tables of ensemble estimates and exact references.

use std::path::Path;

use dtwa_core::ensemble::{build_realization, run_enumerated, run_ensemble, RunConfig, ShardExecutor};
use dtwa_core::observables::{squeezing_xi, EnsembleAccumulator};
use dtwa_core::oracle::ed::{ed_evolve, ed_observables, DEFAULT_ED_CAP};
use dtwa_core::oracle::{exact_ising_corr, exact_ising_sx, ladder_to_xx, ladder_to_yy};
use dtwa_core::phase_space::Axis;

use crate::output::{create, io_err};
use crate::{Error, Result};

const AXES: [char; 3] = ['x', 'y', 'z'];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// Closed-form Ising results for the all-`+x` state.
    IsingAnalytic,
    ExactDiagonalization,
}

impl OracleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::IsingAnalytic => "ising-analytic",
            Self::ExactDiagonalization => "exact-diagonalization",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub time: f64,
    pub observable: String,
    pub dtwa: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub std_error: f64,
}

impl CompareRow {
    fn new(time: f64, observable: String, dtwa: (f64, f64), oracle: f64) -> Self {
        Self {
            time,
            observable,
            dtwa: dtwa.0,
            oracle,
            abs_diff: (dtwa.0 - oracle).abs(),
            std_error: dtwa.1,
        }
    }
}

/// Exact diagonalization when the system is small enough, otherwise the
/// analytic Ising solution when it applies.
pub fn choose_oracle(cfg: &RunConfig) -> Result<OracleKind> {
    let n = cfg.lattice.n_spins();
    if n <= DEFAULT_ED_CAP {
        return Ok(OracleKind::ExactDiagonalization);
    }
    let real = build_realization(cfg, 0)?;
    if real.params.is_pure_ising() && real.axes.iter().all(|&a| a == Axis::PlusX) {
        return Ok(OracleKind::IsingAnalytic);
    }
    Err(Error::Config(format!(
        "no exact reference for {n} spins: exact diagonalization is capped at {DEFAULT_ED_CAP} spins and the \
         analytic solution needs a pure Ising model from the all-+x state"
    )))
}

/// Runs the ensemble (or its enumeration) for realization 0 and pairs every
/// estimate that has an exact counterpart with the oracle value.
pub fn oracle_compare<E: ShardExecutor + ?Sized>(
    cfg: &RunConfig,
    enumerate: bool,
    exec: &E,
) -> Result<(OracleKind, Vec<CompareRow>)> {
    let mut cfg = cfg.clone();
    cfg.disorder_realizations = 1;
    let kind = choose_oracle(&cfg)?;
    let out = if enumerate {
        run_enumerated(&cfg, exec)?
    } else {
        run_ensemble(&cfg, exec)?
    };
    let acc = &out.pooled;
    let real = &out.realizations[0];
    let rows = match kind {
        OracleKind::ExactDiagonalization => ed_rows(acc, real, &cfg)?,
        OracleKind::IsingAnalytic => analytic_rows(acc, real)?,
    };
    Ok((kind, rows))
}

fn estimate_or_nan(e: Result<dtwa_core::observables::Estimate, dtwa_core::Error>) -> Option<(f64, f64)> {
    e.ok().map(|e| (e.value, e.std_error))
}

fn ed_rows(
    acc: &EnsembleAccumulator,
    real: &dtwa_core::ensemble::Realization,
    cfg: &RunConfig,
) -> Result<Vec<CompareRow>> {
    let n = acc.n_spins() as f64;
    let states = ed_evolve(&real.params, &real.axes, &cfg.times, DEFAULT_ED_CAP)?;
    let mut rows = Vec::new();
    for (slot, (psi, &t)) in states.iter().zip(&cfg.times).enumerate() {
        let q = ed_observables(psi, acc.pairs());
        let c = acc.collective(slot).ok();
        let mean = acc.mean_spin(slot);
        for a in 0..3 {
            let err = c.as_ref().map_or(f64::NAN, |c| c.mean[a].std_error);
            rows.push(CompareRow::new(t, format!("S{}/N", AXES[a]), (mean[a] / n, err / n), q.mean[a] / n));
        }
        let var = c.as_ref().map(|c| c.variance[0]);
        rows.push(CompareRow::new(
            t,
            "dSx/N".into(),
            var.map_or(
                (acc.second_moment(slot, 0, 0) / n - mean[0] * mean[0] / n, f64::NAN),
                |v| (v.value / n, v.std_error / n),
            ),
            q.variance(0) / n,
        ));
        let sysz = c.as_ref().map_or((acc.second_moment(slot, 1, 2), f64::NAN), |c| {
            (c.re_sy_sz().value, c.re_sy_sz().std_error)
        });
        rows.push(CompareRow::new(t, "ReSySz/N".into(), (sysz.0 / n, sysz.1 / n), q.second(1, 2) / n));
        if let (Ok(d), Ok(e)) = (squeezing_xi(acc, slot), q.squeezing()) {
            rows.push(CompareRow::new(t, "xi".into(), (d.xi, d.std_error), e.xi));
        }
        for (p, &(i, j)) in acc.pairs().iter().enumerate() {
            for a in 0..3 {
                for b in 0..3 {
                    if let Some(d) = estimate_or_nan(acc.pair_moment(slot, i, j, a, b)) {
                        rows.push(CompareRow::new(
                            t,
                            format!("pair:{}{}:{i}:{j}", AXES[a], AXES[b]),
                            d,
                            q.pairs[p][3 * a + b],
                        ));
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn analytic_rows(acc: &EnsembleAccumulator, real: &dtwa_core::ensemble::Realization) -> Result<Vec<CompareRow>> {
    let n = acc.n_spins();
    let jz = real.params.j_z();
    let mut rows = Vec::new();
    for (slot, &t) in acc.times().iter().enumerate() {
        let exact: f64 = (0..n).map(|k| exact_ising_sx(jz, t, k)).sum();
        let err = acc.collective(slot).map_or(f64::NAN, |c| c.mean[0].std_error);
        rows.push(CompareRow::new(
            t,
            "Sx/N".into(),
            (acc.mean_spin(slot)[0] / n as f64, err / n as f64),
            exact / n as f64,
        ));
        for &(i, j) in acc.pairs() {
            if i == j {
                continue;
            }
            let f = |s| exact_ising_corr(jz, t, i, j, s);
            for (a, name, oracle) in [(0, "xx", ladder_to_xx(f)?), (1, "yy", ladder_to_yy(f)?)] {
                if let Some(d) = estimate_or_nan(acc.pair_moment(slot, i, j, a, a)) {
                    rows.push(CompareRow::new(t, format!("pair:{name}:{i}:{j}"), d, oracle));
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_compare(rows: &[CompareRow], path: &Path) -> Result<()> {
    let fmt = |x: f64| if x.is_nan() { "NaN".to_string() } else { format!("{x}") };
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["time", "observable", "dtwa", "oracle", "abs_diff", "std_error"])?;
    for r in rows {
        out.write_record([
            fmt(r.time),
            r.observable.clone(),
            fmt(r.dtwa),
            fmt(r.oracle),
            fmt(r.abs_diff),
            fmt(r.std_error),
        ])?;
    }
    out.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}
