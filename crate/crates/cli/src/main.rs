//! `hitsignal`: batch front-end for the reliability pipeline.
//!
//! ```text
//! hitsignal ingest --raw batting.csv      # panels/ + normality.csv
//! hitsignal synth                          # panels/ + truth/ from the model
//! hitsignal fit                            # fits/<metric>.draws.csv + .meta.json
//! hitsignal report                         # report/ tables and SVG plots
//! hitsignal lasso                          # lasso/ cross-validation
//! hitsignal pca                            # pca/ spectra and bands
//! ```

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hitsignal::{ErrorKind, Result, TauPrior};

use commands::{Context, Outcome};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "hitsignal", version, about = "Spike-and-slab reliability of panel metrics")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Comma-separated metric selection.
    #[arg(long, global = true, value_delimiter = ',')]
    metrics: Option<Vec<String>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build per-metric panels and the normality table from a raw CSV.
    Ingest {
        /// Raw counting-stat CSV.
        #[arg(long)]
        raw: Option<PathBuf>,
        /// JSON metric definitions merged over the shipped table.
        #[arg(long)]
        definitions: Option<PathBuf>,
    },
    /// Draw synthetic panels with known truth.
    Synth,
    /// Run one Gibbs chain per metric.
    Fit {
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
        /// inverse-gamma or uniform-on-tau.
        #[arg(long, value_parser = parse_tau_prior)]
        tau_prior: Option<TauPrior>,
    },
    /// Summaries, top-player tables and plots from fitted chains.
    Report {
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Repeated k-fold cross-validated Lasso per metric.
    Lasso,
    /// PCA with permutation and bootstrap bands.
    Pca {
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Print the effective configuration as TOML.
    Config,
}

fn parse_tau_prior(s: &str) -> std::result::Result<TauPrior, String> {
    match s {
        "inverse-gamma" | "inverse_gamma" => Ok(TauPrior::InverseGamma),
        "uniform-on-tau" | "uniform_on_tau" => Ok(TauPrior::UniformOnTau),
        _ => Err(format!("unknown tau prior `{s}`")),
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    if let Some(m) = &cli.metrics {
        cfg.metrics = m.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    match &cli.command {
        Command::Ingest { definitions: Some(d), .. } => cfg.input.definitions = Some(d.clone()),
        Command::Fit { iterations, burn_in, thin, tau_prior } => {
            cfg.chain.iterations = iterations.unwrap_or(cfg.chain.iterations);
            cfg.chain.burn_in = burn_in.unwrap_or(cfg.chain.burn_in);
            cfg.chain.thin = thin.unwrap_or(cfg.chain.thin);
            cfg.hyper.tau_prior = tau_prior.unwrap_or(cfg.hyper.tau_prior);
        }
        Command::Report { top_k: Some(k) } => cfg.report.top_k = *k,
        Command::Pca { reps: Some(r) } => cfg.pca.reps = *r,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = effective_config(&cli)?;
    if let Command::Config = cli.command {
        print!("{}", cfg.to_toml()?);
        return Ok(Outcome::default());
    }
    let ctx = Context::new(cfg)?;
    commands::ensure_dir(&ctx.layout.root)?;
    commands::write_text(&ctx.layout.root.join("run_config.toml"), &ctx.config.to_toml()?)?;
    match cli.command {
        Command::Ingest { raw, .. } => commands::ingest::run(&ctx, raw),
        Command::Synth => commands::synth::run(&ctx),
        Command::Fit { .. } => commands::fit::run(&ctx),
        Command::Report { .. } => commands::report::run(&ctx),
        Command::Lasso => commands::lasso::run(&ctx),
        Command::Pca { .. } => commands::pca::run(&ctx),
        Command::Config => unreachable!(),
    }
}

fn exit_code(kind: ErrorKind) -> ExitCode {
    ExitCode::from(match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(outcome) => outcome.worst().map_or(ExitCode::SUCCESS, exit_code),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.kind())
        }
    }
}
