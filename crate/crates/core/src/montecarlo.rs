//! Monte Carlo estimate of the action-selection error rate.
//!
//! Each trial draws `(p̂0, ĉ01, ĉ10)` from the configured estimators (or `δ̂`
//! directly in delta mode), picks the action by the sign of `δ̂` and records
//! whether it disagrees with the Bayes action. Trial `i` always uses
//! `RngStream::new(master_seed, stream_id, i)`, and block results are
//! integer counts, so the outcome does not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{self, ActionLabel, DecisionProblem};
use crate::estimators::{
    sample_delta_hat_direct, CostSampler, EstimatorError, NoiseSpec, ProbSampler,
};
use crate::rng::RngStream;

/// Trials per work unit handed to the thread pool.
const BLOCK_TRIALS: u64 = 4096;

pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("trial index {index} out of range for {trials} trials")]
    TrialOutOfRange { index: u64, trials: u64 },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub problem: DecisionProblem,
    pub noise: NoiseSpec,
    pub trials: u64,
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SimulationConfig {
    pub fn new(
        problem: DecisionProblem,
        noise: NoiseSpec,
        trials: u64,
        master_seed: u64,
        stream_id: u64,
    ) -> Result<Self, SimulationError> {
        if trials == 0 {
            return Err(SimulationError::ZeroTrials);
        }
        Ok(Self {
            problem,
            noise,
            trials,
            master_seed,
            stream_id,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub p_err_hat: f64,
    /// `p_err_hat · |δ|`.
    pub delta_inc_hat: f64,
    /// `delta_inc_hat / L*`; `None` when `L* = 0`.
    pub norm_inc_hat: Option<f64>,
    /// Binomial standard error `√(p̂(1 − p̂)/n)`.
    pub stderr_p_err: f64,
    pub trials: u64,
    pub errors: u64,
    /// Rejected or clipped estimator draws across all trials.
    pub truncation_count: u64,
    /// The Beta variance for `p̂0` had to be clamped.
    pub clamp_flag: bool,
    pub master_seed: u64,
    pub stream_id: u64,
}

enum Sampling {
    Direct { var_delta_hat: f64 },
    Components {
        p0: ProbSampler,
        c01: CostSampler,
        c10: CostSampler,
    },
}

/// Samplers prepared once per configuration.
struct Engine {
    problem: DecisionProblem,
    delta: f64,
    truth: ActionLabel,
    sampling: Sampling,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    errors: u64,
    adjustments: u64,
}

impl Engine {
    fn new(config: &SimulationConfig) -> Result<Self, SimulationError> {
        let problem = config.problem;
        let sigmas = config.noise.sigmas();
        let sampling = if config.noise.delta_mode() {
            Sampling::Direct {
                var_delta_hat: decision::var_delta_hat(&problem, sigmas),
            }
        } else {
            Sampling::Components {
                p0: ProbSampler::new(problem.p0(), sigmas.sigma_p0, config.noise.family_p())?,
                c01: CostSampler::new(problem.c01(), sigmas.sigma_c01, config.noise.family_c())?,
                c10: CostSampler::new(problem.c10(), sigmas.sigma_c10, config.noise.family_c())?,
            }
        };
        let delta = decision::delta(&problem);
        Ok(Self {
            problem,
            delta,
            truth: ActionLabel::from_gap(delta),
            sampling,
        })
    }

    fn clamped(&self) -> bool {
        matches!(&self.sampling, Sampling::Components { p0, .. } if p0.clamped())
    }

    #[inline]
    fn trial(&self, rng: &mut RngStream) -> Result<Counts, EstimatorError> {
        if self.delta == 0.0 {
            return Ok(Counts::default());
        }
        let (delta_hat, adjustments) = match &self.sampling {
            Sampling::Direct { var_delta_hat } => {
                (sample_delta_hat_direct(self.delta, *var_delta_hat, rng), 0)
            }
            Sampling::Components { p0, c01, c10 } => {
                let p = p0.sample(rng);
                let a = c01.sample(rng)?;
                let b = c10.sample(rng)?;
                let gap = decision::estimated_delta(&self.problem, p.value, a.value, b.value);
                (gap, p.adjustments + a.adjustments + b.adjustments)
            }
        };
        Ok(Counts {
            errors: u64::from(ActionLabel::from_gap(delta_hat) != self.truth),
            adjustments: u64::from(adjustments),
        })
    }

    fn run_block(&self, config: &SimulationConfig, start: u64, end: u64) -> Result<Counts, EstimatorError> {
        let mut total = Counts::default();
        for index in start..end {
            let mut rng = RngStream::new(config.master_seed, config.stream_id, index);
            let c = self.trial(&mut rng)?;
            total.errors += c.errors;
            total.adjustments += c.adjustments;
        }
        Ok(total)
    }
}

/// Run a single trial; `true` when the selected action is not the Bayes action.
pub fn simulate_trial(config: &SimulationConfig, trial_index: u64) -> Result<bool, SimulationError> {
    if trial_index >= config.trials {
        return Err(SimulationError::TrialOutOfRange {
            index: trial_index,
            trials: config.trials,
        });
    }
    let engine = Engine::new(config)?;
    let mut rng = RngStream::new(config.master_seed, config.stream_id, trial_index);
    Ok(engine.trial(&mut rng)?.errors == 1)
}

/// Run all trials of `config`, in parallel on the current rayon pool.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationResult, SimulationError> {
    if config.trials == 0 {
        return Err(SimulationError::ZeroTrials);
    }
    let engine = Engine::new(config)?;
    let blocks = config.trials.div_ceil(BLOCK_TRIALS);
    let per_block: Vec<Result<Counts, EstimatorError>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_TRIALS;
            let end = (start + BLOCK_TRIALS).min(config.trials);
            engine.run_block(config, start, end)
        })
        .collect();

    let mut total = Counts::default();
    for block in per_block {
        let c = block?;
        total.errors += c.errors;
        total.adjustments += c.adjustments;
    }

    let n = config.trials as f64;
    let p_err_hat = total.errors as f64 / n;
    let delta_inc_hat = p_err_hat * engine.delta.abs();
    Ok(SimulationResult {
        p_err_hat,
        delta_inc_hat,
        norm_inc_hat: decision::normalize(delta_inc_hat, decision::min_loss(&config.problem)),
        stderr_p_err: (p_err_hat * (1.0 - p_err_hat) / n).sqrt(),
        trials: config.trials,
        errors: total.errors,
        truncation_count: total.adjustments,
        clamp_flag: engine.clamped(),
        master_seed: config.master_seed,
        stream_id: config.stream_id,
    })
}
