//! CSV and JSON writers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so the
//! same numbers always produce the same bytes.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use dtwa_core::ensemble::{center_site, ConvergenceReport, FillingPoint, Realization, RunOutput};
use dtwa_core::observables::{correlation_profile, squeezing_xi, EnsembleAccumulator, Estimate, SECOND_MOMENTS};

use crate::{Error, Result};

const AXES: [char; 3] = ['x', 'y', 'z'];

/// One line of the observable table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub time: f64,
    pub observable: String,
    pub estimate: f64,
    pub std_error: f64,
    pub n_t: u64,
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

pub(crate) fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map_err(|e| io_err(path, e))
}

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Collective moments, falling back to undefined errors for a single
/// trajectory.
fn collective_rows(acc: &EnsembleAccumulator, slot: usize) -> Vec<(String, Estimate)> {
    let n = acc.n_spins() as f64;
    let mut out = Vec::new();
    let nan = |value| Estimate {
        value,
        std_error: f64::NAN,
    };
    let (mean, second, variance) = match acc.collective(slot) {
        Ok(c) => (c.mean, c.second, c.variance),
        Err(_) => {
            let m = acc.mean_spin(slot);
            let mut s = [nan(0.0); 6];
            for (k, &(a, b)) in SECOND_MOMENTS.iter().enumerate() {
                s[k] = nan(acc.second_moment(slot, a, b));
            }
            let v = [0, 1, 2].map(|c| nan(acc.second_moment(slot, c, c) - m[c] * m[c]));
            (m.map(nan), s, v)
        }
    };
    for c in 0..3 {
        out.push((format!("S{}", AXES[c]), mean[c]));
    }
    for c in 0..3 {
        out.push((
            format!("S{}/N", AXES[c]),
            Estimate {
                value: mean[c].value / n,
                std_error: mean[c].std_error / n,
            },
        ));
    }
    for (k, &(a, b)) in SECOND_MOMENTS.iter().enumerate() {
        out.push((format!("S{}S{}", AXES[a], AXES[b]), second[k]));
    }
    for c in 0..3 {
        out.push((format!("dS{}", AXES[c]), variance[c]));
    }
    if let Ok(sq) = squeezing_xi(acc, slot) {
        out.push((
            "xi".into(),
            Estimate {
                value: sq.xi,
                std_error: sq.std_error,
            },
        ));
    }
    out
}

/// Every observable of an accumulator: collective moments (raw and per
/// spin), variances, `ξ`, raw pair products `pair:ab:i:j` and connected
/// `conn:yy:i:j`.
pub fn observable_rows(acc: &EnsembleAccumulator) -> Vec<Row> {
    let mut rows = Vec::new();
    for (slot, &time) in acc.times().iter().enumerate() {
        let mut push = |name: String, e: Estimate| {
            rows.push(Row {
                time,
                observable: name,
                estimate: e.value,
                std_error: e.std_error,
                n_t: acc.count(),
            })
        };
        for (name, e) in collective_rows(acc, slot) {
            push(name, e);
        }
        for &(i, j) in acc.pairs() {
            for a in 0..3 {
                for b in 0..3 {
                    if let Ok(e) = acc.pair_moment(slot, i, j, a, b) {
                        push(format!("pair:{}{}:{i}:{j}", AXES[a], AXES[b]), e);
                    }
                }
            }
            if let Ok(e) = dtwa_core::observables::connected_correlator(acc, slot, i, j, (1, 1)) {
                push(format!("conn:yy:{i}:{j}"), e);
            }
        }
    }
    rows
}

pub fn write_rows<W: Write>(rows: &[Row], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time", "observable", "estimate", "std_error", "n_t"])?;
    for r in rows {
        out.write_record([fmt(r.time), r.observable.clone(), fmt(r.estimate), fmt(r.std_error), r.n_t.to_string()])?;
    }
    out.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })?;
    Ok(())
}

pub fn write_observables(acc: &EnsembleAccumulator, path: &Path) -> Result<()> {
    write_rows(&observable_rows(acc), create(path)?)
}

/// Site positions of every realization.
pub fn write_sites(realizations: &[Realization], path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["realization", "site", "x", "y", "z"])?;
    for r in realizations {
        for (k, p) in r.sites.iter().enumerate() {
            out.write_record([r.index.to_string(), k.to_string(), fmt(p[0]), fmt(p[1]), fmt(p[2])])?;
        }
    }
    out.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Realization-averaged `⟨S_x⟩/N` and `ξ` with their spread.
pub fn write_disorder(output: &RunOutput, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["time", "observable", "mean", "spread", "std_error", "realizations"])?;
    let sx = output.disorder_statistics(|a, s| Some(a.mean_spin(s)[0] / a.n_spins() as f64));
    let xi = output.disorder_statistics(|a, s| squeezing_xi(a, s).ok().map(|q| q.xi));
    for (slot, &t) in output.pooled.times().iter().enumerate() {
        for (name, st) in [("Sx/N", sx[slot]), ("xi", xi[slot])] {
            out.write_record([
                fmt(t),
                name.to_string(),
                fmt(st.mean),
                fmt(st.spread),
                fmt(st.std_error),
                st.samples.to_string(),
            ])?;
        }
    }
    out.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Run metadata written next to the tables.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub n_spins: usize,
    pub n_trajectories: u64,
    pub disorder_realizations: usize,
    pub dt: f64,
    pub exact: bool,
    pub times: usize,
    pub pairs: usize,
}

/// `vMAJOR.MINOR.PATCH`, with `+<hash>` when `DTWA_GIT_HASH` was set at
/// build time.
pub fn version_string() -> String {
    match option_env!("DTWA_GIT_HASH") {
        Some(h) if !h.is_empty() => format!("v{}+{h}", env!("CARGO_PKG_VERSION")),
        _ => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, summary)?;
    writeln!(f).map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn write_convergence(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["n_t", "sx_max_rel_dev", "xi_max_rel_dev"])?;
    for r in &report.rows {
        out.write_record([r.n_trajectories.to_string(), fmt(r.sx_deviation), fmt(r.xi_deviation)])?;
    }
    out.write_record(["slope".to_string(), fmt(report.sx_slope), fmt(report.xi_slope)])?;
    out.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Disorder-averaged minimum over time of `ξ` for each filling.
pub fn write_filling(points: &[FillingPoint], path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    out.write_record(["filling", "n_spins", "min_xi_mean", "min_xi_spread", "min_xi_std_error", "realizations"])?;
    for p in points {
        let st = min_xi_statistic(&p.output);
        out.write_record([
            fmt(p.filling),
            p.output.pooled.n_spins().to_string(),
            fmt(st.mean),
            fmt(st.spread),
            fmt(st.std_error),
            st.samples.to_string(),
        ])?;
    }
    out.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Per-realization `min_t ξ`, averaged over realizations.
pub fn min_xi_statistic(output: &RunOutput) -> dtwa_core::ensemble::DisorderStatistic {
    let mins: Vec<f64> = output
        .per_realization
        .iter()
        .filter_map(|a| {
            (0..a.times().len())
                .filter_map(|s| squeezing_xi(a, s).ok().map(|q| q.xi))
                .reduce(f64::min)
        })
        .collect();
    dtwa_core::ensemble::DisorderStatistic::from_samples(&mins)
}

/// Figure-style data files: the collective Ising panel (`⟨S_x⟩/N`,
/// `ΔS_x/N`, `Re⟨S_yS_z⟩/N` against `tJ`), the XY panel (`⟨S_x⟩/N`, `ξ`)
/// and, when the center-to-all pairs are configured, `C^yy_j(t)`.
pub fn write_plot_data(acc: &EnsembleAccumulator, j: f64, dir: &Path) -> Result<()> {
    let n = acc.n_spins() as f64;
    let scale = if j != 0.0 { j.abs() } else { 1.0 };
    let mut col = csv::Writer::from_writer(create(&dir.join("collective.csv"))?);
    col.write_record(["tJ", "Sx_over_N", "Sx_over_N_err", "dSx_over_N", "ReSySz_over_N", "xi", "xi_err"])?;
    for (slot, &t) in acc.times().iter().enumerate() {
        let rows = collective_rows(acc, slot);
        let get = |name: &str| rows.iter().find(|(k, _)| k == name).map(|(_, e)| *e);
        let sx = get("Sx").unwrap();
        let xi = get("xi");
        col.write_record([
            fmt(t * scale),
            fmt(sx.value / n),
            fmt(sx.std_error / n),
            fmt(get("dSx").unwrap().value / n),
            fmt(get("SySz").unwrap().value / n),
            fmt(xi.map_or(f64::NAN, |e| e.value)),
            fmt(xi.map_or(f64::NAN, |e| e.std_error)),
        ])?;
    }
    col.flush().map_err(|e| io_err(dir, e))?;

    let c = center_site(acc.n_spins());
    if (0..acc.n_spins()).all(|k| acc.pair_moment(0, c, k, 1, 1).is_ok()) {
        let mut prof = csv::Writer::from_writer(create(&dir.join("correlation_profile.csv"))?);
        prof.write_record(["tJ", "j", "Cyy", "Cyy_err"])?;
        for (slot, &t) in acc.times().iter().enumerate() {
            for (offset, e) in correlation_profile(acc, slot, c, (1, 1))? {
                prof.write_record([fmt(t * scale), offset.to_string(), fmt(e.value), fmt(e.std_error)])?;
            }
        }
        prof.flush().map_err(|e| io_err(dir, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dtwa_core::phase_space::SpinConfiguration;

    #[test]
    fn rows_are_formatted_deterministically() {
        let mut acc = EnsembleAccumulator::new(2, &[0.0, 0.5], &[(0, 1)]).unwrap();
        for k in 0..3 {
            acc.begin_trajectory(k, 1.0);
            for slot in 0..2 {
                let s = SpinConfiguration::from_vectors(&[[1.0, 0.1 * k as f64, -1.0], [1.0, -1.0, 1.0 / 3.0]]);
                acc.record(slot, &s).unwrap();
            }
        }
        let rows = observable_rows(&acc);
        assert!(rows.iter().any(|r| r.observable == "pair:xy:0:1"));
        assert!(rows.iter().any(|r| r.observable == "Sx/N" && r.estimate == 1.0));
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_rows(&rows, &mut a).unwrap();
        write_rows(&observable_rows(&acc.clone()), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("time,observable,estimate,std_error,n_t\n"));
        assert!(text.contains("0.3333333333333333"));
    }

    #[test]
    fn single_trajectory_errors_are_flagged() {
        let mut acc = EnsembleAccumulator::new(2, &[0.0], &[]).unwrap();
        acc.begin_trajectory(0, 1.0);
        acc.record(0, &SpinConfiguration::uniform(2, [1.0, 0.0, 0.0])).unwrap();
        let rows = observable_rows(&acc);
        let sx = rows.iter().find(|r| r.observable == "Sx").unwrap();
        assert_eq!(sx.estimate, 2.0);
        assert!(sx.std_error.is_nan());
    }
}
