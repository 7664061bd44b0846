//! Standard-error sweeps over grids of decision problems.
//!
//! A sweep evaluates every `(scenario, σ, p0, cost pair)` cell with the
//! closed form and, when enabled, with the simulator, then averages the
//! cells of each `(scenario, σ)` into a summary row. Two presets exist:
//!
//! * [`figure1_config`]: six priors, costs `(0.3, 0.5)`, closed form only.
//! * [`figure2_config`]: 25 evenly spaced priors × 25 seeded cost pairs,
//!   Beta / truncated-uniform simulation next to the closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{self, AnalyticSensitivity, DecisionError, DecisionProblem, StandardErrors};
use crate::estimators::{CostFamily, NoiseSpec, ProbFamily};
use crate::montecarlo::{self, SimulationConfig, SimulationResult};
use crate::rng::RngStream;

/// Stream reserved for drawing the figure-2 cost pairs.
pub const COST_PAIR_STREAM: u64 = u64::MAX;

pub const FIGURE1_P0: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
pub const FIGURE1_COSTS: (f64, f64) = (0.3, 0.5);
pub const FIGURE2_GRID_POINTS: usize = 25;
pub const FIGURE2_C01_RANGE: (f64, f64) = (0.2, 0.4);
pub const FIGURE2_C10_RANGE: (f64, f64) = (0.4, 0.6);
pub const FIGURE2_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep.{0} must not be empty")]
    EmptyGrid(&'static str),
    #[error("sweep.sigma_grid must be sorted ascending")]
    UnsortedSigmaGrid,
    #[error("sweep.trials must be at least 1")]
    ZeroTrials,
    #[error("sweep.{grid}: {source}")]
    Invalid {
        grid: &'static str,
        source: DecisionError,
    },
}

/// Which estimators carry the swept standard error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Costs noisy, probability exact.
    CostOnly,
    /// Probability noisy, costs exact.
    ProbOnly,
    /// All three noisy with the same standard error.
    Both,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::CostOnly, Scenario::ProbOnly, Scenario::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::CostOnly => "cost-only",
            Scenario::ProbOnly => "prob-only",
            Scenario::Both => "both",
        }
    }

    pub fn parse(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.as_str() == tag)
    }

    pub fn sigmas(self, sigma: f64) -> StandardErrors {
        match self {
            Scenario::CostOnly => StandardErrors {
                sigma_p0: 0.0,
                sigma_c01: sigma,
                sigma_c10: sigma,
            },
            Scenario::ProbOnly => StandardErrors {
                sigma_p0: sigma,
                sigma_c01: 0.0,
                sigma_c10: 0.0,
            },
            Scenario::Both => StandardErrors {
                sigma_p0: sigma,
                sigma_c01: sigma,
                sigma_c10: sigma,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Figure1,
    Figure2,
}

/// How `cost_pairs` expand into the cost grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostLayout {
    /// Use the pairs as given.
    #[default]
    Pairs,
    /// Every listed `c01` against every listed `c10`.
    CrossProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub sigma_grid: Vec<f64>,
    pub p0_grid: Vec<f64>,
    pub cost_pairs: Vec<(f64, f64)>,
    pub cost_layout: CostLayout,
    pub trials: u64,
    pub master_seed: u64,
    pub run_mc: bool,
    pub family_p: ProbFamily,
    pub family_c: CostFamily,
    pub delta_mode: bool,
}

/// `{0, 0.05, …, 0.5}`.
pub fn default_sigma_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 20.0).collect()
}

pub fn figure1_config() -> SweepConfig {
    SweepConfig {
        kind: SweepKind::Figure1,
        sigma_grid: default_sigma_grid(),
        p0_grid: FIGURE1_P0.to_vec(),
        cost_pairs: vec![FIGURE1_COSTS],
        cost_layout: CostLayout::Pairs,
        trials: montecarlo::DEFAULT_TRIALS,
        master_seed: 42,
        run_mc: false,
        family_p: ProbFamily::Beta,
        family_c: CostFamily::UniformTruncated,
        delta_mode: false,
    }
}

/// `i / 26` for `i = 1..=25`.
pub fn figure2_p0_grid() -> Vec<f64> {
    let n = FIGURE2_GRID_POINTS;
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// 25 seeded uniform draws `c01 ∈ [0.2, 0.4)`, `c10 ∈ [0.4, 0.6)`.
pub fn figure2_cost_pairs(master_seed: u64) -> Vec<(f64, f64)> {
    let base = RngStream::new(master_seed, COST_PAIR_STREAM, 0);
    (0..FIGURE2_GRID_POINTS as u64)
        .map(|i| {
            let mut rng = base.at_counter(i);
            let c01 = rng.uniform(FIGURE2_C01_RANGE.0, FIGURE2_C01_RANGE.1);
            let c10 = rng.uniform(FIGURE2_C10_RANGE.0, FIGURE2_C10_RANGE.1);
            (c01, c10)
        })
        .collect()
}

pub fn figure2_config(master_seed: u64) -> SweepConfig {
    SweepConfig {
        kind: SweepKind::Figure2,
        sigma_grid: default_sigma_grid(),
        p0_grid: figure2_p0_grid(),
        cost_pairs: figure2_cost_pairs(master_seed),
        cost_layout: CostLayout::Pairs,
        trials: FIGURE2_TRIALS,
        master_seed,
        run_mc: true,
        family_p: ProbFamily::Beta,
        family_c: CostFamily::UniformTruncated,
        delta_mode: false,
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.sigma_grid.is_empty() {
            return Err(SweepError::EmptyGrid("sigma_grid"));
        }
        if self.p0_grid.is_empty() {
            return Err(SweepError::EmptyGrid("p0_grid"));
        }
        if self.cost_pairs.is_empty() {
            return Err(SweepError::EmptyGrid("cost_pairs"));
        }
        if self.trials == 0 {
            return Err(SweepError::ZeroTrials);
        }
        let invalid = |grid| move |source| SweepError::Invalid { grid, source };
        for &s in &self.sigma_grid {
            decision::check_nonneg("sigma", s).map_err(invalid("sigma_grid"))?;
        }
        if self.sigma_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(SweepError::UnsortedSigmaGrid);
        }
        for &p0 in &self.p0_grid {
            DecisionProblem::new(p0, 0.0, 0.0).map_err(invalid("p0_grid"))?;
        }
        for &(c01, c10) in &self.cost_pairs {
            DecisionProblem::new(0.5, c01, c10).map_err(invalid("cost_pairs"))?;
        }
        Ok(())
    }

    /// The `(c01, c10)` grid after applying [`CostLayout`].
    pub fn cost_grid(&self) -> Vec<(f64, f64)> {
        match self.cost_layout {
            CostLayout::Pairs => self.cost_pairs.clone(),
            CostLayout::CrossProduct => self
                .cost_pairs
                .iter()
                .flat_map(|&(c01, _)| self.cost_pairs.iter().map(move |&(_, c10)| (c01, c10)))
                .collect(),
        }
    }

    /// Cells per `(scenario, σ)`.
    pub fn cells_per_curve_point(&self) -> usize {
        self.p0_grid.len() * self.cost_grid().len()
    }

    pub fn cell_count(&self) -> usize {
        Scenario::ALL.len() * self.sigma_grid.len() * self.cells_per_curve_point()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Cell,
    Summary,
}

/// One output record. Cell rows describe a single problem; summary rows
/// average the cells of one `(scenario, σ)` and leave the per-problem
/// fields empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `None` for a standalone problem outside any sweep.
    pub scenario: Option<Scenario>,
    pub kind: RowKind,
    /// Swept standard error; `None` for a standalone problem.
    pub sigma: Option<f64>,
    pub p0: Option<f64>,
    pub c01: Option<f64>,
    pub c10: Option<f64>,
    pub sigma_p: f64,
    pub sigma_c01: f64,
    pub sigma_c10: f64,
    pub delta: Option<f64>,
    pub l_star: Option<f64>,
    pub var_delta_hat: Option<f64>,
    pub p_err_analytic: f64,
    pub delta_inc_analytic: f64,
    pub norm_inc_analytic: Option<f64>,
    pub p_err_mc: Option<f64>,
    pub delta_inc_mc: Option<f64>,
    pub norm_inc_mc: Option<f64>,
    pub stderr_p_err_mc: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub clamped: Option<bool>,
    pub truncations: Option<u64>,
    /// Summary rows: cells left out of the `Δ/L*` means (undefined or failed).
    pub excluded: usize,
    /// Simulation failure for this cell, if any.
    pub error: Option<String>,
}

impl SweepRow {
    /// CSV scenario tag: `cost-only` or `cost-only/summary`.
    pub fn tag(&self) -> String {
        match (self.scenario, self.kind) {
            (None, _) => "point".to_string(),
            (Some(s), RowKind::Cell) => s.as_str().to_string(),
            (Some(s), RowKind::Summary) => format!("{}/summary", s.as_str()),
        }
    }

    /// Row for a single problem evaluated outside a sweep.
    pub fn point(
        problem: &DecisionProblem,
        sigmas: &StandardErrors,
        analytic: &AnalyticSensitivity,
        simulated: Option<&SimulationResult>,
        trials: u64,
        seed: u64,
    ) -> Self {
        let mut row = SweepRow {
            scenario: None,
            kind: RowKind::Cell,
            sigma: None,
            p0: Some(problem.p0()),
            c01: Some(problem.c01()),
            c10: Some(problem.c10()),
            sigma_p: sigmas.sigma_p0,
            sigma_c01: sigmas.sigma_c01,
            sigma_c10: sigmas.sigma_c10,
            delta: Some(analytic.delta),
            l_star: Some(analytic.l_star),
            var_delta_hat: Some(analytic.var_delta_hat),
            p_err_analytic: analytic.p_err,
            delta_inc_analytic: analytic.delta_inc,
            norm_inc_analytic: analytic.norm_inc,
            p_err_mc: None,
            delta_inc_mc: None,
            norm_inc_mc: None,
            stderr_p_err_mc: None,
            trials,
            seed,
            clamped: None,
            truncations: None,
            excluded: 0,
            error: None,
        };
        if let Some(r) = simulated {
            row.fill_simulated(r);
        }
        row
    }

    fn fill_simulated(&mut self, r: &SimulationResult) {
        self.p_err_mc = Some(r.p_err_hat);
        self.delta_inc_mc = Some(r.delta_inc_hat);
        self.norm_inc_mc = r.norm_inc_hat;
        self.stderr_p_err_mc = Some(r.stderr_p_err);
        self.clamped = Some(r.clamp_flag);
        self.truncations = Some(r.truncation_count);
    }

    /// The value plotted for this row: simulated if present, else analytic.
    pub fn plotted_norm_inc(&self) -> Option<f64> {
        self.norm_inc_mc.or(self.norm_inc_analytic)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepStats {
    pub cells: usize,
    pub mc_cells: usize,
    pub clamped_cells: usize,
    pub truncations: u64,
    pub excluded_cells: usize,
    pub failed_cells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    /// Cell rows in enumeration order: scenario, σ, p0, cost pair.
    pub cells: Vec<SweepRow>,
    /// One row per `(scenario, σ)`, same order.
    pub summaries: Vec<SweepRow>,
}

impl SweepOutput {
    /// Cell rows followed by summary rows.
    pub fn all_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.cells.iter().chain(self.summaries.iter())
    }

    pub fn summary(&self, scenario: Scenario, sigma: f64) -> Option<&SweepRow> {
        self.summaries
            .iter()
            .find(|r| r.scenario == Some(scenario) && r.sigma == Some(sigma))
    }

    pub fn stats(&self) -> SweepStats {
        let mut stats = SweepStats {
            cells: self.cells.len(),
            ..SweepStats::default()
        };
        for row in &self.cells {
            if row.p_err_mc.is_some() {
                stats.mc_cells += 1;
            }
            if row.clamped == Some(true) {
                stats.clamped_cells += 1;
            }
            stats.truncations += row.truncations.unwrap_or(0);
            if let Some(e) = &row.error {
                stats.failed_cells.push(format!(
                    "{} sigma={:?} p0={:?} c01={:?} c10={:?}: {e}",
                    row.tag(),
                    row.sigma,
                    row.p0,
                    row.c01,
                    row.c10
                ));
            }
        }
        stats.excluded_cells = self.summaries.iter().map(|r| r.excluded).sum();
        stats
    }
}

struct Cell {
    scenario: Scenario,
    sigma: f64,
    p0: f64,
    c01: f64,
    c10: f64,
    stream_id: u64,
}

fn enumerate_cells(config: &SweepConfig) -> Vec<Cell> {
    let costs = config.cost_grid();
    let mut cells = Vec::with_capacity(config.cell_count());
    for scenario in Scenario::ALL {
        for &sigma in &config.sigma_grid {
            for &p0 in &config.p0_grid {
                for &(c01, c10) in &costs {
                    let stream_id = cells.len() as u64;
                    cells.push(Cell {
                        scenario,
                        sigma,
                        p0,
                        c01,
                        c10,
                        stream_id,
                    });
                }
            }
        }
    }
    cells
}

fn evaluate_cell(config: &SweepConfig, cell: &Cell) -> SweepRow {
    // Grids were validated, so the problem is well formed.
    let problem = DecisionProblem::new(cell.p0, cell.c01, cell.c10)
        .expect("validated sweep grid produced an invalid problem");
    let sigmas = cell.scenario.sigmas(cell.sigma);
    let analytic = decision::expected_increase(&problem, &sigmas);

    let mut row = SweepRow {
        scenario: Some(cell.scenario),
        kind: RowKind::Cell,
        sigma: Some(cell.sigma),
        p0: Some(cell.p0),
        c01: Some(cell.c01),
        c10: Some(cell.c10),
        sigma_p: sigmas.sigma_p0,
        sigma_c01: sigmas.sigma_c01,
        sigma_c10: sigmas.sigma_c10,
        delta: Some(analytic.delta),
        l_star: Some(analytic.l_star),
        var_delta_hat: Some(analytic.var_delta_hat),
        p_err_analytic: analytic.p_err,
        delta_inc_analytic: analytic.delta_inc,
        norm_inc_analytic: analytic.norm_inc,
        p_err_mc: None,
        delta_inc_mc: None,
        norm_inc_mc: None,
        stderr_p_err_mc: None,
        trials: config.trials,
        seed: config.master_seed,
        clamped: None,
        truncations: None,
        excluded: 0,
        error: None,
    };
    if !config.run_mc {
        return row;
    }

    let simulated = NoiseSpec::with_families(sigmas, config.family_p, config.family_c)
        .map(|n| n.with_delta_mode(config.delta_mode))
        .map_err(montecarlo::SimulationError::from)
        .and_then(|noise| {
            SimulationConfig::new(problem, noise, config.trials, config.master_seed, cell.stream_id)
        })
        .and_then(|sim| montecarlo::simulate(&sim));
    match simulated {
        Ok(r) => row.fill_simulated(&r),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(config: &SweepConfig, scenario: Scenario, sigma: f64, cells: &[SweepRow]) -> SweepRow {
    let sigmas = scenario.sigmas(sigma);
    let excluded_analytic = cells.iter().filter(|r| r.norm_inc_analytic.is_none()).count();
    let excluded_mc = if config.run_mc {
        cells.iter().filter(|r| r.norm_inc_mc.is_none()).count()
    } else {
        0
    };
    let mc_rows = || cells.iter().filter(|r| r.p_err_mc.is_some());
    let any_mc = config.run_mc && mc_rows().next().is_some();
    SweepRow {
        scenario: Some(scenario),
        kind: RowKind::Summary,
        sigma: Some(sigma),
        p0: None,
        c01: None,
        c10: None,
        sigma_p: sigmas.sigma_p0,
        sigma_c01: sigmas.sigma_c01,
        sigma_c10: sigmas.sigma_c10,
        delta: None,
        l_star: None,
        var_delta_hat: None,
        p_err_analytic: mean(cells.iter().map(|r| r.p_err_analytic)).unwrap_or(0.0),
        delta_inc_analytic: mean(cells.iter().map(|r| r.delta_inc_analytic)).unwrap_or(0.0),
        norm_inc_analytic: mean(cells.iter().filter_map(|r| r.norm_inc_analytic)),
        p_err_mc: if any_mc { mean(mc_rows().filter_map(|r| r.p_err_mc)) } else { None },
        delta_inc_mc: if any_mc { mean(mc_rows().filter_map(|r| r.delta_inc_mc)) } else { None },
        norm_inc_mc: if any_mc { mean(cells.iter().filter_map(|r| r.norm_inc_mc)) } else { None },
        stderr_p_err_mc: None,
        trials: config.trials,
        seed: config.master_seed,
        clamped: any_mc.then(|| cells.iter().any(|r| r.clamped == Some(true))),
        truncations: any_mc.then(|| cells.iter().filter_map(|r| r.truncations).sum()),
        excluded: excluded_analytic.max(excluded_mc),
        error: None,
    }
}

/// Evaluate every cell of `config` and the per-curve-point summaries.
///
/// Cells run in parallel on the current rayon pool; the output order is the
/// enumeration order regardless.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput, SweepError> {
    config.validate()?;
    let cells = enumerate_cells(config);
    let rows: Vec<SweepRow> = cells.par_iter().map(|c| evaluate_cell(config, c)).collect();

    let block = config.cells_per_curve_point();
    let mut summaries = Vec::with_capacity(rows.len() / block);
    for chunk in rows.chunks(block) {
        let cell = &cells[summaries.len() * block];
        summaries.push(summarize(config, cell.scenario, cell.sigma, chunk));
    }
    Ok(SweepOutput {
        cells: rows,
        summaries,
    })
}
