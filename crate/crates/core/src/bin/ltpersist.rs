use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ltpersist::orchestration::{report_dirs, run_stage, ExperimentConfig, Stage};
use ltpersist::Error;

/// Local-time persistence experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write every path, local-time profile and inverse as CSV.
    Simulate(RunArgs),
    /// Survival curves and the persistence exponent fit.
    Persist(RunArgs),
    /// Excursion point sets and tail fits.
    Excursions(RunArgs),
    /// Invariance test battery.
    Invariants(RunArgs),
    /// Markdown summary over finished run directories.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory, overriding the config's.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories holding a manifest.
    dirs: Vec<PathBuf>,
    /// Directory for report.md and the log-log CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if any acceptance check fails.
    #[arg(long)]
    check: bool,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs, stage: Stage) -> Result<(), Error> {
    let cfg = load(args)?;
    let manifest = run_stage(&cfg, stage)?;
    let dir = cfg.output_dir.as_deref().expect("validated by run_stage");
    println!(
        "wrote {} files to {} (config {})",
        manifest.outputs.len(),
        dir.display(),
        &manifest.config_hash[..12]
    );
    Ok(())
}

fn report(args: &ReportArgs) -> Result<bool, Error> {
    let r = report_dirs(&args.dirs);
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.md"), &r.markdown)?;
            fs::write(dir.join("loglog_survival.csv"), &r.loglog_csv)?;
            println!("wrote {}", dir.join("report.md").display());
        }
        None => print!("{}", r.markdown),
    }
    for g in &r.gaps {
        eprintln!("gap: {g}");
    }
    Ok(r.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => run(a, Stage::Simulate).map(|_| true),
        Command::Persist(a) => run(a, Stage::Persist).map(|_| true),
        Command::Excursions(a) => run(a, Stage::Excursions).map(|_| true),
        Command::Invariants(a) => run(a, Stage::Invariants).map(|_| true),
        Command::Report(a) => report(a).map(|ok| ok || !a.check),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("acceptance checks failed");
            ExitCode::from(3)
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
