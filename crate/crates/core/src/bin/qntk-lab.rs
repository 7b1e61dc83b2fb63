//! Command-line runner for the seeded experiments.
//!
//! Each subcommand starts from a preset, overlays `--config`, `--seed` and
//! every `--set` in that order, runs, and writes CSVs plus `manifest.json`
//! into `--out`. Failures print one JSON object on stderr and exit 1.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use qntk_lab::experiments::{emit, run, ExperimentConfig, ExperimentKind};
use qntk_lab::Error;

/// Default thread count when `--threads` is absent.
const THREADS_ENV: &str = "QNTK_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "qntk-lab", version, about = "Tangent-kernel experiments on simulated quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config (or a previous manifest.json) overlaid on the preset.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory [default: out/<subcommand>].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads; overrides the QNTK_LAB_THREADS environment variable.
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,

    /// Start from the full-size preset instead of the desk-scale one.
    #[arg(long, global = true)]
    paper_scale: bool,

    /// Override one config field, e.g. `--set depths=[60,120]`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Print the resolved config as JSON and exit without running.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Learn Heisenberg dynamics from finite-depth circuit states.
    Qdl,
    /// Binary classification of the bundled wine data.
    Wine,
    /// Kernel-model generalization on Haar-random data.
    CurseQkm,
    /// Frozen-kernel network generalization on Haar-random data.
    CurseQnn,
    /// Statistics of Pauli coefficient matrices against dataset size.
    CoeffStats,
    /// Tangent-kernel eigenvalues against their bounds.
    Spectrum,
    /// Monte Carlo check of the Haar moment identities.
    MomentCheck,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Qdl => ExperimentKind::Qdl,
            Command::Wine => ExperimentKind::Wine,
            Command::CurseQkm => ExperimentKind::CurseQkm,
            Command::CurseQnn => ExperimentKind::CurseQnn,
            Command::CoeffStats => ExperimentKind::CoeffStats,
            Command::Spectrum => ExperimentKind::Spectrum,
            Command::MomentCheck => ExperimentKind::MomentCheck,
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let kind = cli.command.kind();
    let mut cfg = ExperimentConfig::preset(kind, cli.paper_scale);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let overlay: serde_json::Value = serde_json::from_str(&text)?;
        cfg = cfg.merge_json(&overlay)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    for s in &cli.sets {
        cfg = cfg.set(s)?;
    }
    if cfg.kind != kind {
        return Err(Error::InvalidArgument(format!(
            "config is for `{}` but the subcommand is `{}`",
            cfg.kind.name(),
            kind.name()
        )));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_count(cli: &Cli) -> Result<Option<usize>, Error> {
    if let Some(t) = cli.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let cfg = resolve_config(cli)?;
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(());
    }
    if let Some(t) = thread_count(cli)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.kind.name()));
    log::info!("running {} with seed {}", cfg.kind.name(), cfg.seed);
    let start = Instant::now();
    let artifacts = run(&cfg)?;
    let written = emit(&out, &cfg, &artifacts, start.elapsed())?;
    for p in &written {
        log::info!("wrote {}", p.display());
    }
    println!("{}", serde_json::to_string(&artifacts.summary)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
