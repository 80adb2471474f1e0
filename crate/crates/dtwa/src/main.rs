use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use dtwa::compare::{oracle_compare, write_compare};
use dtwa::config::ConfigFile;
use dtwa::core::ensemble::{convergence_sweep, filling_sweep, run_enumerated, run_ensemble, RunConfig, RunOutput};
use dtwa::exec::RayonExecutor;
use dtwa::output::{
    version_string, write_convergence, write_disorder, write_filling, write_observables, write_plot_data,
    write_sites, write_summary, Summary,
};

/// Discrete truncated Wigner simulation of spin-1/2 lattice quenches.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses every core. Never changes the results.
    #[arg(short, long)]
    workers: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo ensemble.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write figure-style data files under OUT/plots.
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Exact infinite-sample limit by enumerating every initial configuration.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Maximum relative deviation against the largest trajectory count.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000,8000,16000,32000,64000")]
        counts: Vec<u64>,
        /// Independent sweeps whose deviations are averaged.
        #[arg(long, default_value_t = 1)]
        repeats: u32,
    },
    /// Disorder-averaged minimum squeezing against filling fraction.
    SweepFilling {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        fillings: Vec<f64>,
    },
    /// Ensemble estimates next to exact references.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        /// Compare the enumeration limit instead of a sampled ensemble.
        #[arg(long)]
        enumerate: bool,
    },
}

struct Loaded {
    file: ConfigFile,
    cfg: RunConfig,
    exec: RayonExecutor,
}

fn load(common: &Common) -> Result<Loaded> {
    let mut file = ConfigFile::load(&common.config)?;
    if let Some(seed) = common.seed {
        file.seed = seed;
    }
    if let Some(w) = common.workers {
        file.workers = w;
    }
    let cfg = file.to_run_config()?;
    let exec = RayonExecutor::new(cfg.workers)?;
    log::info!(
        "{} spins, {} trajectories, {} workers",
        cfg.lattice.n_spins(),
        cfg.n_trajectories,
        exec.workers()
    );
    Ok(Loaded { file, cfg, exec })
}

fn summary(l: &Loaded, command: &str, out: &RunOutput) -> Result<Summary> {
    Ok(Summary {
        version: version_string(),
        command: command.into(),
        seed: l.cfg.master_seed,
        config_hash: l.file.hash()?,
        n_spins: out.pooled.n_spins(),
        n_trajectories: out.pooled.count(),
        disorder_realizations: out.per_realization.len(),
        dt: out.dt,
        exact: out.pooled.is_exact(),
        times: out.pooled.times().len(),
        pairs: out.pooled.pairs().len(),
    })
}

fn write_run(l: &Loaded, command: &str, out: &RunOutput, dir: &Path, plots: bool) -> Result<()> {
    if out.pooled.count() < 2 && !out.pooled.is_exact() {
        log::warn!("a single trajectory has no statistical error; std_error is written as NaN");
    }
    write_observables(&out.pooled, &dir.join("observables.csv"))?;
    write_sites(&out.realizations, &dir.join("sites.csv"))?;
    if out.per_realization.len() > 1 {
        write_disorder(out, &dir.join("disorder.csv"))?;
    }
    write_summary(&summary(l, command, out)?, &dir.join("summary.json"))?;
    if plots {
        write_plot_data(&out.pooled, l.cfg.model.j, &dir.join("plots"))?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    match &cli.command {
        Command::Run { common, emit_plot_data } => {
            let l = load(common)?;
            let out = run_ensemble(&l.cfg, &l.exec)?;
            write_run(&l, "run", &out, &common.out, *emit_plot_data)?;
        }
        Command::Enumerate { common, emit_plot_data } => {
            let l = load(common)?;
            let out = run_enumerated(&l.cfg, &l.exec)?;
            write_run(&l, "enumerate", &out, &common.out, *emit_plot_data)?;
        }
        Command::Converge { common, counts, repeats } => {
            let l = load(common)?;
            let report = convergence_sweep(&l.cfg, counts, *repeats, &l.exec)?;
            log::info!("slopes: <Sx> {:.3}, xi {:.3}", report.sx_slope, report.xi_slope);
            write_convergence(&report, &common.out.join("convergence.csv"))?;
        }
        Command::SweepFilling { common, fillings } => {
            let l = load(common)?;
            let points = filling_sweep(&l.cfg, fillings, &l.exec)?;
            write_filling(&points, &common.out.join("filling.csv"))?;
        }
        Command::OracleCompare { common, enumerate } => {
            let l = load(common)?;
            let (kind, rows) = oracle_compare(&l.cfg, *enumerate, &l.exec)?;
            log::info!("oracle: {}", kind.as_str());
            let path = common.out.join("oracle_compare.csv");
            write_compare(&rows, &path).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    log::info!("done in {:.2?}", start.elapsed());
    Ok(())
}
