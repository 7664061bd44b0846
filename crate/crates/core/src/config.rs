//! TOML run configuration.
//!
//! A document describes either one problem to analyse or simulate:
//!
//! ```toml
//! [problem]
//! p0 = 0.2
//! c01 = 0.3
//! c10 = 0.5
//!
//! [noise]
//! sigma_p0 = 0.1
//! sigma_c01 = 0.1
//! sigma_c10 = 0.1
//! family_p = "beta"
//! family_c = "uniform-truncated"
//!
//! [run]
//! trials = 100000
//! seed = 42
//! ```
//!
//! or a sweep (`[sweep]` with `kind = "figure1"` or `"figure2"`, plus
//! optional grids overriding the preset). Unknown keys are errors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{DecisionError, DecisionProblem, StandardErrors};
use crate::estimators::{CostFamily, EstimatorError, NoiseSpec, ProbFamily};
use crate::experiments::{self, CostLayout, SweepConfig, SweepError, SweepKind};
use crate::montecarlo::{SimulationConfig, DEFAULT_TRIALS};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("{0}")]
    Structure(String),
}

impl ConfigError {
    fn invalid(key: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

/// A fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Simulation(SimulationConfig),
    Sweep(SweepConfig),
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

/// TOML integers are signed; seeds above `i64::MAX` are written as strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum SeedValue {
    Int(u64),
    Text(String),
}

impl SeedValue {
    fn resolve(&self, key: &str) -> Result<u64, ConfigError> {
        match self {
            SeedValue::Int(v) => Ok(*v),
            SeedValue::Text(s) => s
                .parse()
                .map_err(|_| ConfigError::invalid(key, format!("not a 64-bit unsigned integer: {s:?}"))),
        }
    }

    fn from_u64(v: u64) -> Self {
        if v <= i64::MAX as u64 {
            SeedValue::Int(v)
        } else {
            SeedValue::Text(v.to_string())
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<ProblemDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    p0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c00: Option<f64>,
    c01: f64,
    c10: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c11: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_c01: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_c10: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family_p: Option<ProbFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family_c: Option<CostFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_mode: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<SeedValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stream_id: Option<SeedValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    kind: SweepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p0_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost_pairs: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost_layout: Option<CostLayout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run_mc: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family_p: Option<ProbFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family_c: Option<CostFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_mode: Option<bool>,
}

fn decision_error(section: &str, e: DecisionError) -> ConfigError {
    match &e {
        DecisionError::ProbabilityOutOfRange { field, value } => ConfigError::invalid(
            format!("{section}.{field}"),
            format!("must be in [0, 1], got {value}"),
        ),
        DecisionError::NegativeOrNonFinite { field, value } => ConfigError::invalid(
            format!("{section}.{field}"),
            format!("must be finite and >= 0, got {value}"),
        ),
    }
}

fn estimator_error(e: EstimatorError) -> ConfigError {
    match e {
        EstimatorError::Invalid(d) => decision_error("noise", d),
        EstimatorError::FamilyMismatch { estimator, .. } => {
            let key = if estimator == "p0" { "noise.family_p" } else { "noise.family_c" };
            ConfigError::invalid(key, e)
        }
        other => ConfigError::invalid("noise", other),
    }
}

fn sweep_error(e: SweepError) -> ConfigError {
    let key = match &e {
        SweepError::EmptyGrid(g) => format!("sweep.{g}"),
        SweepError::UnsortedSigmaGrid => "sweep.sigma_grid".to_string(),
        SweepError::ZeroTrials => "run.trials".to_string(),
        SweepError::Invalid { grid, .. } => format!("sweep.{grid}"),
    };
    let message = match e {
        SweepError::Invalid { source, .. } => source.to_string(),
        other => other.to_string(),
    };
    ConfigError::Invalid { key, message }
}

/// Parse and validate a document.
pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigError> {
    parse_config_with(text, Overrides::default())
}

/// Parse and validate a document, with command-line overrides applied
/// before defaults are resolved (so a `--seed` also reseeds figure-2 cost
/// pairs that the document leaves implicit).
pub fn parse_config_with(text: &str, overrides: Overrides) -> Result<ParsedConfig, ConfigError> {
    let doc: Document = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    resolve(doc, overrides)
}

/// Configuration of a preset sweep without a document.
pub fn preset(kind: SweepKind, overrides: Overrides) -> Result<ParsedConfig, ConfigError> {
    resolve(
        Document {
            sweep: Some(SweepDoc {
                kind,
                sigma_grid: None,
                p0_grid: None,
                cost_pairs: None,
                cost_layout: None,
                run_mc: None,
                family_p: None,
                family_c: None,
                delta_mode: None,
            }),
            ..Document::default()
        },
        overrides,
    )
}

fn resolve(doc: Document, overrides: Overrides) -> Result<ParsedConfig, ConfigError> {
    let run = doc.run.clone().unwrap_or_default();
    let seed = match overrides.seed {
        Some(s) => s,
        None => run
            .seed
            .as_ref()
            .map(|s| s.resolve("run.seed"))
            .transpose()?
            .unwrap_or(DEFAULT_SEED),
    };
    let trials = overrides.trials.or(run.trials);
    if trials == Some(0) {
        return Err(ConfigError::invalid("run.trials", "must be at least 1"));
    }

    match (doc.problem, doc.sweep) {
        (Some(_), Some(_)) => Err(ConfigError::Structure(
            "[problem] and [sweep] cannot appear in the same document".into(),
        )),
        (None, None) => Err(ConfigError::Structure(
            "document needs either a [problem] or a [sweep] table".into(),
        )),
        (Some(problem), None) => {
            let problem = DecisionProblem::with_diagonal(
                problem.p0,
                problem.c00.unwrap_or(0.0),
                problem.c01,
                problem.c10,
                problem.c11.unwrap_or(0.0),
            )
            .map_err(|e| decision_error("problem", e))?;
            let noise = resolve_noise(doc.noise.unwrap_or_default())?;
            let stream_id = run
                .stream_id
                .as_ref()
                .map(|s| s.resolve("run.stream_id"))
                .transpose()?
                .unwrap_or(0);
            let sim = SimulationConfig::new(
                problem,
                noise,
                trials.unwrap_or(DEFAULT_TRIALS),
                seed,
                stream_id,
            )
            .map_err(|e| ConfigError::invalid("run.trials", e))?;
            Ok(ParsedConfig::Simulation(sim))
        }
        (None, Some(sweep)) => {
            if doc.noise.is_some() {
                return Err(ConfigError::Structure(
                    "[noise] applies to a single [problem]; sweeps set families under [sweep]".into(),
                ));
            }
            if run.stream_id.is_some() {
                return Err(ConfigError::invalid(
                    "run.stream_id",
                    "sweeps assign stream ids per cell",
                ));
            }
            let mut cfg = match sweep.kind {
                SweepKind::Figure1 => experiments::figure1_config(),
                SweepKind::Figure2 => experiments::figure2_config(seed),
            };
            cfg.master_seed = seed;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(g) = sweep.sigma_grid {
                cfg.sigma_grid = g;
            }
            if let Some(g) = sweep.p0_grid {
                cfg.p0_grid = g;
            }
            if let Some(pairs) = sweep.cost_pairs {
                cfg.cost_pairs = pairs.into_iter().map(|[a, b]| (a, b)).collect();
            }
            if let Some(l) = sweep.cost_layout {
                cfg.cost_layout = l;
            }
            if let Some(r) = sweep.run_mc {
                cfg.run_mc = r;
            }
            if let Some(f) = sweep.family_p {
                cfg.family_p = f;
            }
            if let Some(f) = sweep.family_c {
                cfg.family_c = f;
            }
            if let Some(d) = sweep.delta_mode {
                cfg.delta_mode = d;
            }
            if cfg.family_p == ProbFamily::Exact {
                return Err(ConfigError::invalid(
                    "sweep.family_p",
                    "sweeps need a noisy family; exact is chosen automatically at sigma = 0",
                ));
            }
            if cfg.family_c == CostFamily::Exact {
                return Err(ConfigError::invalid(
                    "sweep.family_c",
                    "sweeps need a noisy family; exact is chosen automatically at sigma = 0",
                ));
            }
            cfg.validate().map_err(sweep_error)?;
            Ok(ParsedConfig::Sweep(cfg))
        }
    }
}

fn resolve_noise(doc: NoiseDoc) -> Result<NoiseSpec, ConfigError> {
    let sigmas = StandardErrors::new(
        doc.sigma_p0.unwrap_or(0.0),
        doc.sigma_c01.unwrap_or(0.0),
        doc.sigma_c10.unwrap_or(0.0),
    )
    .map_err(|e| decision_error("noise", e))?;
    let family_p = doc.family_p.unwrap_or(if sigmas.sigma_p0 > 0.0 {
        ProbFamily::Beta
    } else {
        ProbFamily::Exact
    });
    let noisy_costs = sigmas.sigma_c01 > 0.0 || sigmas.sigma_c10 > 0.0;
    let family_c = doc.family_c.unwrap_or(if noisy_costs {
        CostFamily::UniformTruncated
    } else {
        CostFamily::Exact
    });
    NoiseSpec::new(sigmas, family_p, family_c, doc.delta_mode.unwrap_or(false)).map_err(estimator_error)
}

/// Fully explicit document for a resolved configuration; parsing it yields
/// an equal value.
pub fn to_document(config: &ParsedConfig) -> String {
    let doc = match config {
        ParsedConfig::Simulation(sim) => {
            let p = &sim.problem;
            let s = sim.noise.sigmas();
            Document {
                problem: Some(ProblemDoc {
                    p0: p.p0(),
                    c00: Some(p.c00()),
                    c01: p.c01(),
                    c10: p.c10(),
                    c11: Some(p.c11()),
                }),
                noise: Some(NoiseDoc {
                    sigma_p0: Some(s.sigma_p0),
                    sigma_c01: Some(s.sigma_c01),
                    sigma_c10: Some(s.sigma_c10),
                    family_p: Some(sim.noise.family_p()),
                    family_c: Some(sim.noise.family_c()),
                    delta_mode: Some(sim.noise.delta_mode()),
                }),
                run: Some(RunDoc {
                    trials: Some(sim.trials),
                    seed: Some(SeedValue::from_u64(sim.master_seed)),
                    stream_id: Some(SeedValue::from_u64(sim.stream_id)),
                }),
                sweep: None,
            }
        }
        ParsedConfig::Sweep(cfg) => Document {
            problem: None,
            noise: None,
            run: Some(RunDoc {
                trials: Some(cfg.trials),
                seed: Some(SeedValue::from_u64(cfg.master_seed)),
                stream_id: None,
            }),
            sweep: Some(SweepDoc {
                kind: cfg.kind,
                sigma_grid: Some(cfg.sigma_grid.clone()),
                p0_grid: Some(cfg.p0_grid.clone()),
                cost_pairs: Some(cfg.cost_pairs.iter().map(|&(a, b)| [a, b]).collect()),
                cost_layout: Some(cfg.cost_layout),
                run_mc: Some(cfg.run_mc),
                family_p: Some(cfg.family_p),
                family_c: Some(cfg.family_c),
                delta_mode: Some(cfg.delta_mode),
            }),
        },
    };
    toml::to_string(&doc).expect("config document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(text: &str) -> SimulationConfig {
        match parse_config(text).unwrap() {
            ParsedConfig::Simulation(s) => s,
            other => panic!("expected simulation, got {other:?}"),
        }
    }

    fn sweep(text: &str) -> SweepConfig {
        match parse_config(text).unwrap() {
            ParsedConfig::Sweep(s) => s,
            other => panic!("expected sweep, got {other:?}"),
        }
    }

    fn invalid_key(text: &str) -> String {
        match parse_config(text) {
            Err(ConfigError::Invalid { key, .. }) => key,
            other => panic!("expected invalid key, got {other:?}"),
        }
    }

    #[test]
    fn minimal_problem_takes_defaults() {
        let s = sim("[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\n");
        assert_eq!(s.problem, DecisionProblem::new(0.5, 0.3, 0.5).unwrap());
        assert!(s.noise.sigmas().is_zero());
        assert_eq!(s.noise.family_p(), ProbFamily::Exact);
        assert_eq!(s.noise.family_c(), CostFamily::Exact);
        assert_eq!(s.trials, 100_000);
        assert_eq!(s.master_seed, 42);
        assert_eq!(s.problem.c00(), 0.0);
        assert_eq!(s.problem.c11(), 0.0);
    }

    #[test]
    fn out_of_range_probability_names_key() {
        let err = parse_config("[problem]\np0 = 1.2\nc01 = 0.3\nc10 = 0.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("problem.p0"), "{msg}");
        assert!(msg.contains("[0, 1]"), "{msg}");
    }

    #[test]
    fn negative_sigma_names_key() {
        let key = invalid_key("[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\n[noise]\nsigma_c10 = -0.1\n");
        assert_eq!(key, "noise.sigma_c10");
        let key = invalid_key("[problem]\np0 = 0.5\nc01 = -0.3\nc10 = 0.5\n");
        assert_eq!(key, "problem.c01");
    }

    #[test]
    fn inconsistent_family_names_key() {
        let key = invalid_key(
            "[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\n[noise]\nsigma_p0 = 0.1\nfamily_p = \"exact\"\n",
        );
        assert_eq!(key, "noise.family_p");
    }

    #[test]
    fn unknown_keys_rejected_with_location() {
        let err = parse_config("[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\nc99 = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ConfigError::Syntax(_)));
        assert!(msg.contains("c99"), "{msg}");
        assert!(msg.contains("line 5"), "{msg}");
        assert!(parse_config("[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\n[extra]\n").is_err());
    }

    #[test]
    fn structure_errors() {
        assert!(matches!(parse_config(""), Err(ConfigError::Structure(_))));
        assert!(matches!(
            parse_config("[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\n[sweep]\nkind = \"figure1\"\n"),
            Err(ConfigError::Structure(_))
        ));
        assert_eq!(invalid_key("[problem]\np0 = 0.5\nc01 = 0.3\nc10 = 0.5\n[run]\ntrials = 0\n"), "run.trials");
    }

    #[test]
    fn sweep_presets_and_overrides() {
        let s = sweep("[sweep]\nkind = \"figure1\"\n");
        assert_eq!(s, experiments::figure1_config());
        let s = sweep("[sweep]\nkind = \"figure2\"\n[run]\nseed = 7\n");
        assert_eq!(s, experiments::figure2_config(7));
        let s = sweep("[sweep]\nkind = \"figure2\"\nsigma_grid = [0.0, 0.1]\ncost_layout = \"cross-product\"\n[run]\ntrials = 500\n");
        assert_eq!(s.sigma_grid, vec![0.0, 0.1]);
        assert_eq!(s.cost_layout, CostLayout::CrossProduct);
        assert_eq!(s.trials, 500);
        assert_eq!(invalid_key("[sweep]\nkind = \"figure1\"\nsigma_grid = [0.2, 0.1]\n"), "sweep.sigma_grid");
        assert_eq!(invalid_key("[sweep]\nkind = \"figure1\"\np0_grid = [0.5, 1.5]\n"), "sweep.p0_grid");
    }

    #[test]
    fn cli_seed_reseeds_implicit_cost_pairs() {
        let s = match parse_config_with(
            "[sweep]\nkind = \"figure2\"\n[run]\nseed = 7\n",
            Overrides {
                seed: Some(9),
                trials: Some(10),
            },
        )
        .unwrap()
        {
            ParsedConfig::Sweep(s) => s,
            _ => unreachable!(),
        };
        assert_eq!(s.master_seed, 9);
        assert_eq!(s.trials, 10);
        assert_eq!(s.cost_pairs, experiments::figure2_cost_pairs(9));
    }

    #[test]
    fn round_trip_through_document() {
        let configs = [
            parse_config("[problem]\np0 = 0.2\nc00 = 0.01\nc01 = 0.3\nc10 = 0.5\n[noise]\nsigma_p0 = 0.1\nsigma_c01 = 0.05\nsigma_c10 = 0.05\ndelta_mode = true\n[run]\nseed = 5\n").ok(),
            parse_config("[problem]\np0 = 0.2\nc01 = 0.3\nc10 = 0.5\n[noise]\nsigma_p0 = 0.1\n[run]\nseed = \"18446744073709551615\"\nstream_id = 3\n").ok(),
            preset(SweepKind::Figure1, Overrides::default()).ok(),
            preset(SweepKind::Figure2, Overrides { seed: Some(u64::MAX), trials: None }).ok(),
        ];
        let big = sim("[problem]\np0 = 0.2\nc01 = 0.3\nc10 = 0.5\n[run]\nseed = 18446744073709551615\n");
        assert_eq!(big.master_seed, u64::MAX);
        for cfg in configs {
            let cfg = cfg.unwrap();
            let text = to_document(&cfg);
            assert_eq!(parse_config(&text).unwrap(), cfg, "{text}");
        }
    }
}
