use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use meshfree_llns::experiments::{emit_report, load_config, run, ExperimentConfig, Scenario, PRESET_NAMES};
use meshfree_llns::{Error, Result};

#[derive(Parser)]
#[command(
    name = "llns",
    version,
    about = "Meshfree particle solver for 1D fluctuating hydrodynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium variances of density, momentum and energy.
    Equilibrium(Options),
    /// Time covariance of a density Fourier mode.
    Covariance(Options),
    /// Ensemble variance of a standing shock's position.
    Shock(Options),
}

#[derive(Args)]
struct Options {
    /// Configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration, used when no file is given.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sampled steps (per realization for shocks).
    #[arg(long)]
    samples: Option<u64>,
    /// Shock realizations.
    #[arg(long)]
    ensemble: Option<usize>,
    /// CSV output path; the summary is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disable the stochastic fluxes.
    #[arg(long)]
    no_noise: bool,
    /// Worker threads for ensembles (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve(opts: &Options, default_preset: &str, allowed: &[Scenario]) -> Result<ExperimentConfig> {
    if opts.config.is_some() && opts.preset.is_some() {
        return Err(Error::InvalidConfig(
            "--config and --preset are mutually exclusive".into(),
        ));
    }
    let mut cfg = match (&opts.config, &opts.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::preset(default_preset)?,
    };
    if !allowed.contains(&cfg.scenario) {
        return Err(Error::InvalidConfig(format!(
            "scenario {} does not belong to this subcommand",
            cfg.scenario
        )));
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(n) = opts.samples {
        cfg.steps = n;
    }
    if let Some(n) = opts.ensemble {
        cfg.ensemble = n;
    }
    if opts.no_noise {
        cfg.noise = false;
    }
    if let Some(p) = &opts.out {
        cfg.output = Some(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let (opts, default_preset, allowed): (&Options, &str, &[Scenario]) = match &cli.command {
        Command::Equilibrium(o) => (
            o,
            "table1-equilibrium",
            &[Scenario::EquilibriumZeroFlow, Scenario::EquilibriumNetFlow],
        ),
        Command::Covariance(o) => (o, "table1-covariance", &[Scenario::TimeCovariance]),
        Command::Shock(o) => (o, "table4-shock-mach2", &[Scenario::StandingShock]),
    };
    if let Some(t) = opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let cfg = resolve(opts, default_preset, allowed)?;
    let report = run(&cfg)?;
    print!("{}", report.summary());
    let out = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.scenario)));
    let summary = emit_report(&report, &out)?;
    println!("series: {}", out.display());
    println!("summary: {}", summary.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::InvalidConfig(msg) = &e {
                if msg.starts_with("unknown preset") {
                    eprintln!("presets: {}", PRESET_NAMES.join(", "));
                }
            }
            ExitCode::FAILURE
        }
    }
}
