//! `wavelab`: runs the experiments and small utility queries.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;

use wavelab_core::lab::{self, ExperimentConfig, ExperimentKind};
use wavelab_core::nonlinearity::{classify_radial, regularity_gate, NonlinearSpec};
use wavelab_core::WaveError;

#[derive(Parser)]
#[command(name = "wavelab", version, about = "Pseudospectral experiments for semilinear wave equations")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Picard iteration traces over a list of data sizes.
    PicardContraction(RunArgs),
    /// Lifespans over a list of data sizes, with the almost-global fit.
    LifespanSweep(RunArgs),
    /// Empirical Strichartz ratios over a seeded ensemble.
    StrichartzEnsemble(RunArgs),
    /// Long runs with radial data at the scaling regularity.
    RadialCompare(RunArgs),
    /// Lifespans along a concentrating ladder on both sides of s_c.
    IllposednessProbe(RunArgs),
    /// Print the admissibility verdict for (n, k, s).
    Gate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        /// Radial equation and data.
        #[arg(long)]
        radial: bool,
    },
    /// Classify a nonlinearity as radial or not.
    RadialCheck {
        /// File in the nonlinearity text grammar.
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        spec: Option<PathBuf>,
        /// Experiment config whose nonlinearity is classified.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's `output`, then `out/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the config's run seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run even where the admissibility gate refuses; stamped into output.
    #[arg(long)]
    override_gate: bool,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_REFUSED: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

fn exit_code(e: &WaveError) -> u8 {
    match e {
        WaveError::Parse { .. } | WaveError::Config(_) | WaveError::Io(_) | WaveError::Csv(_) => EXIT_CONFIG,
        WaveError::Divergence { .. } | WaveError::NotConverged { .. } => EXIT_DIVERGED,
        _ => EXIT_REFUSED,
    }
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs) -> Result<(), WaveError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment != kind {
        return Err(WaveError::Config(format!(
            "{} describes experiment {}, not {}",
            args.config.display(),
            cfg.experiment.as_str(),
            kind.as_str()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.override_gate |= args.override_gate;
    let report = lab::run(&cfg)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").join(kind.as_str()));
    report.write_to(&dir)?;
    for (k, v) in &report.summary {
        println!("{k}: {v}");
    }
    for f in &report.files {
        println!("wrote {}", dir.join(&f.name).display());
    }
    Ok(())
}

fn radial_check(spec: Option<&Path>, config: Option<&Path>) -> Result<(), WaveError> {
    let spec: NonlinearSpec = match (spec, config) {
        (Some(p), _) => std::fs::read_to_string(p)
            .map_err(|e| WaveError::Config(format!("cannot read {}: {e}", p.display())))?
            .parse()?,
        (None, Some(c)) => ExperimentConfig::load(c)?.nonlinearity,
        (None, None) => return Err(WaveError::Config("need --spec or --config".into())),
    };
    let r = classify_radial(&spec);
    println!("radial: {}", r.radial);
    println!("symbolic: {}", r.symbolic);
    println!("sampled: {}", r.sampled);
    println!("seed: {}", r.seed);
    if let Some(w) = &r.witness {
        println!("witness: {w}");
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) {
    let Some(t) = threads else { return };
    #[cfg(feature = "parallel")]
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
        warn!("could not size the thread pool: {e}");
    }
    #[cfg(not(feature = "parallel"))]
    if t > 1 {
        warn!("built without the parallel feature; ignoring --threads {t}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let result = match &cli.command {
        Command::PicardContraction(a) => run_experiment(ExperimentKind::PicardContraction, a),
        Command::LifespanSweep(a) => run_experiment(ExperimentKind::LifespanSweep, a),
        Command::StrichartzEnsemble(a) => run_experiment(ExperimentKind::StrichartzEnsemble, a),
        Command::RadialCompare(a) => run_experiment(ExperimentKind::RadialCompare, a),
        Command::IllposednessProbe(a) => run_experiment(ExperimentKind::IllposednessProbe, a),
        Command::Gate { n, k, s, radial } => {
            if *n == 0 || *k < 2 {
                Err(WaveError::Config("need n >= 1 and k >= 2".into()))
            } else {
                println!("{}", regularity_gate(*n, *k, *s, *radial));
                Ok(())
            }
        }
        Command::RadialCheck { spec, config } => radial_check(spec.as_deref(), config.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
