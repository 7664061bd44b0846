//! Command-line front end.
//!
//! ```text
//! udecide <analytic|simulate|figure1|figure2> --out <path>
//!         [--config <path>] [--format csv|json] [--plot <path>]
//!         [--seed <u64>] [--trials <n>]
//! ```
//!
//! Exit codes: 0 success, 2 invalid invocation or configuration, 3 runtime
//! failure. `UDECIDE_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::config::{self, ConfigError, Overrides, ParsedConfig};
use crate::decision;
use crate::experiments::{self, SweepKind, SweepRow, SweepStats};
use crate::montecarlo;
use crate::output::{self, OutputError};
use crate::plot;

pub const THREADS_ENV: &str = "UDECIDE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "udecide", version, about = "Expected-loss sensitivity of a binary decision to probability and cost estimation error")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form sensitivity of one problem (needs --config with [problem]).
    Analytic(RunArgs),
    /// Monte Carlo estimate for one problem (needs --config with [problem]).
    Simulate(RunArgs),
    /// Six priors, costs (0.3, 0.5), three noise scenarios, closed form.
    Figure1(RunArgs),
    /// 25 priors x 25 seeded cost pairs, simulated and closed form.
    Figure2(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output data file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write an SVG line chart of the summary curves.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubcommandKind {
    Analytic,
    Simulate,
    Figure1,
    Figure2,
}

impl SubcommandKind {
    fn as_str(self) -> &'static str {
        match self {
            SubcommandKind::Analytic => "analytic",
            SubcommandKind::Simulate => "simulate",
            SubcommandKind::Figure1 => "figure1",
            SubcommandKind::Figure2 => "figure2",
        }
    }
}

/// A parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliInvocation {
    pub subcommand: SubcommandKind,
    pub config_path: Option<PathBuf>,
    pub out_path: PathBuf,
    pub format: Format,
    pub plot_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

impl From<Cli> for CliInvocation {
    fn from(cli: Cli) -> Self {
        let (subcommand, a) = match cli.command {
            Command::Analytic(a) => (SubcommandKind::Analytic, a),
            Command::Simulate(a) => (SubcommandKind::Simulate, a),
            Command::Figure1(a) => (SubcommandKind::Figure1, a),
            Command::Figure2(a) => (SubcommandKind::Figure2, a),
        };
        CliInvocation {
            subcommand,
            config_path: a.config,
            out_path: a.out,
            format: a.format,
            plot_path: a.plot,
            seed: a.seed,
            trials: a.trials,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Simulation(#[from] montecarlo::SimulationError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Read { .. } => EXIT_CONFIG,
            CliError::Simulation(_) | CliError::Output(_) | CliError::ThreadPool(_) => EXIT_RUNTIME,
        }
    }
}

/// Provenance written next to every data file as `<out>.manifest.json`.
///
/// Everything except `timestamp_unix` is a function of the invocation, so
/// equal manifests imply byte-identical data files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: SubcommandKind,
    pub format: Format,
    pub seed: u64,
    pub trials: u64,
    /// Resolved configuration as a TOML document accepted by `--config`.
    pub config: String,
    pub timestamp_unix: u64,
    pub stats: SweepStats,
    pub warnings: Vec<String>,
}

/// Paths and counts from a completed run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub rows: usize,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Worker count from `UDECIDE_THREADS`; `None` means the rayon default.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

fn load_config(inv: &CliInvocation) -> Result<ParsedConfig, CliError> {
    let overrides = Overrides {
        seed: inv.seed,
        trials: inv.trials,
    };
    match &inv.config_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.clone(),
                source,
            })?;
            Ok(config::parse_config_with(&text, overrides)?)
        }
        None => match inv.subcommand {
            SubcommandKind::Figure1 => Ok(config::preset(SweepKind::Figure1, overrides)?),
            SubcommandKind::Figure2 => Ok(config::preset(SweepKind::Figure2, overrides)?),
            other => Err(CliError::Usage(format!(
                "{} needs --config with a [problem] table",
                other.as_str()
            ))),
        },
    }
}

struct Outcome {
    rows: Vec<SweepRow>,
    summaries: Vec<SweepRow>,
    stats: SweepStats,
    overlay: bool,
    seed: u64,
    trials: u64,
}

fn compute(inv: &CliInvocation, parsed: &ParsedConfig) -> Result<Outcome, CliError> {
    match (inv.subcommand, parsed) {
        (SubcommandKind::Analytic | SubcommandKind::Simulate, ParsedConfig::Simulation(sim)) => {
            if inv.plot_path.is_some() {
                return Err(CliError::Usage(
                    "--plot draws sweep summaries; use figure1 or figure2".into(),
                ));
            }
            let sigmas = sim.noise.sigmas();
            let analytic = decision::expected_increase(&sim.problem, sigmas);
            let simulated = if inv.subcommand == SubcommandKind::Simulate {
                Some(montecarlo::simulate(sim)?)
            } else {
                None
            };
            let row = SweepRow::point(
                &sim.problem,
                sigmas,
                &analytic,
                simulated.as_ref(),
                sim.trials,
                sim.master_seed,
            );
            let stats = SweepStats {
                cells: 1,
                mc_cells: usize::from(simulated.is_some()),
                clamped_cells: usize::from(simulated.is_some_and(|s| s.clamp_flag)),
                truncations: simulated.map_or(0, |s| s.truncation_count),
                ..SweepStats::default()
            };
            Ok(Outcome {
                rows: vec![row],
                summaries: Vec::new(),
                stats,
                overlay: false,
                seed: sim.master_seed,
                trials: sim.trials,
            })
        }
        (SubcommandKind::Figure1 | SubcommandKind::Figure2, ParsedConfig::Sweep(cfg)) => {
            let expected = if inv.subcommand == SubcommandKind::Figure1 {
                SweepKind::Figure1
            } else {
                SweepKind::Figure2
            };
            if cfg.kind != expected {
                return Err(CliError::Usage(format!(
                    "{} was given a sweep of kind {:?}",
                    inv.subcommand.as_str(),
                    cfg.kind
                )));
            }
            let out = experiments::run_sweep(cfg).map_err(|e| ConfigError::Invalid {
                key: "sweep".into(),
                message: e.to_string(),
            })?;
            let stats = out.stats();
            let rows: Vec<SweepRow> = out.all_rows().cloned().collect();
            Ok(Outcome {
                rows,
                summaries: out.summaries,
                stats,
                overlay: cfg.run_mc,
                seed: cfg.master_seed,
                trials: cfg.trials,
            })
        }
        (sub, ParsedConfig::Simulation(_)) => Err(CliError::Usage(format!(
            "{} needs a [sweep] document, got a [problem] document",
            sub.as_str()
        ))),
        (sub, ParsedConfig::Sweep(_)) => Err(CliError::Usage(format!(
            "{} needs a [problem] document, got a [sweep] document",
            sub.as_str()
        ))),
    }
}

/// Execute a parsed invocation on a pool of `threads` workers.
pub fn execute(inv: &CliInvocation, threads: Option<usize>) -> Result<RunReport, CliError> {
    let parsed = load_config(inv)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    let outcome = pool.install(|| compute(inv, &parsed))?;

    let mut warnings: Vec<String> = outcome
        .stats
        .failed_cells
        .iter()
        .map(|c| format!("cell failed: {c}"))
        .collect();
    match inv.format {
        Format::Csv => output::emit_csv(&outcome.rows, &inv.out_path)?,
        Format::Json => output::emit_json(&outcome.rows, outcome.seed, outcome.trials, &inv.out_path)?,
    }
    if let Some(plot_path) = &inv.plot_path {
        let title = format!(
            "{}: mean normalised loss increase (seed {}, {} trials)",
            inv.subcommand.as_str(),
            outcome.seed,
            outcome.trials
        );
        let render = plot::emit_plot(&outcome.summaries, plot_path, outcome.overlay, &title)?;
        warnings.extend(render.warnings);
    }

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: inv.subcommand,
        format: inv.format,
        seed: outcome.seed,
        trials: outcome.trials,
        config: config::to_document(&parsed),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        stats: outcome.stats,
        warnings,
    };
    let manifest_path = manifest_path(&inv.out_path);
    let json = serde_json::to_string_pretty(&manifest).map_err(OutputError::from)?;
    output::write_file(&manifest_path, &(json + "\n"))?;
    Ok(RunReport {
        manifest,
        manifest_path,
        rows: outcome.rows.len(),
    })
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let inv = CliInvocation::from(cli);
    let result = threads_from_env().and_then(|threads| execute(&inv, threads));
    match result {
        Ok(report) => {
            for w in &report.manifest.warnings {
                log::warn!("{w}");
            }
            log::info!(
                "wrote {} rows to {} (manifest {})",
                report.rows,
                inv.out_path.display(),
                report.manifest_path.display()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
