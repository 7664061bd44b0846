//! Noisy estimators of `p0`, `c01` and `c10`.
//!
//! Every estimator is unbiased up to the support constraints: the
//! probability estimate is moment-matched Beta (or a clipped normal), the
//! cost estimates are uniform with the requested standard deviation (or
//! normal), resampled until positive. Rejections and clips are counted so
//! the bias they introduce is visible downstream.

use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{DecisionError, StandardErrors};
use crate::rng::RngStream;

/// Retry budget for positivity rejection sampling.
pub const MAX_REJECTIONS: u32 = 1000;

/// Infeasible Beta variances are reduced to this fraction of `p(1 − p)`.
pub const BETA_VARIANCE_CLAMP: f64 = 0.99;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Invalid(#[from] DecisionError),
    #[error("Beta mean must lie strictly inside (0, 1), got {0}")]
    BetaMeanOutOfRange(f64),
    #[error("Beta variance must be positive and finite, got {0}")]
    BetaVarianceInvalid(f64),
    #[error("{estimator}: family `{family}` is inconsistent with standard error {sigma}")]
    FamilyMismatch {
        estimator: &'static str,
        family: &'static str,
        sigma: f64,
    },
    #[error("positivity rejection exhausted {MAX_REJECTIONS} retries for cost {cost} with standard error {sigma}")]
    RejectionExhausted { cost: f64, sigma: f64 },
}

/// Distribution family of the probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbFamily {
    Exact,
    Beta,
    Normal,
}

impl ProbFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbFamily::Exact => "exact",
            ProbFamily::Beta => "beta",
            ProbFamily::Normal => "normal",
        }
    }
}

/// Distribution family of the cost estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostFamily {
    Exact,
    UniformTruncated,
    Normal,
}

impl CostFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            CostFamily::Exact => "exact",
            CostFamily::UniformTruncated => "uniform-truncated",
            CostFamily::Normal => "normal",
        }
    }
}

/// Standard errors plus the sampling families that realize them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    sigmas: StandardErrors,
    family_p: ProbFamily,
    family_c: CostFamily,
    delta_mode: bool,
}

impl NoiseSpec {
    /// Validated constructor: a family is `exact` exactly when its standard
    /// errors are all zero.
    pub fn new(
        sigmas: StandardErrors,
        family_p: ProbFamily,
        family_c: CostFamily,
        delta_mode: bool,
    ) -> Result<Self, EstimatorError> {
        let sigmas = StandardErrors::new(sigmas.sigma_p0, sigmas.sigma_c01, sigmas.sigma_c10)?;
        if (sigmas.sigma_p0 == 0.0) != (family_p == ProbFamily::Exact) {
            return Err(EstimatorError::FamilyMismatch {
                estimator: "p0",
                family: family_p.as_str(),
                sigma: sigmas.sigma_p0,
            });
        }
        let cost_sigma = sigmas.sigma_c01.max(sigmas.sigma_c10);
        if (cost_sigma == 0.0) != (family_c == CostFamily::Exact) {
            return Err(EstimatorError::FamilyMismatch {
                estimator: "costs",
                family: family_c.as_str(),
                sigma: cost_sigma,
            });
        }
        Ok(Self {
            sigmas,
            family_p,
            family_c,
            delta_mode,
        })
    }

    /// No estimation noise at all.
    pub fn exact() -> Self {
        Self {
            sigmas: StandardErrors::default(),
            family_p: ProbFamily::Exact,
            family_c: CostFamily::Exact,
            delta_mode: false,
        }
    }

    /// Pick `family_p` / `family_c` for whichever estimators are noisy and
    /// `exact` for the rest.
    pub fn with_families(
        sigmas: StandardErrors,
        family_p: ProbFamily,
        family_c: CostFamily,
    ) -> Result<Self, EstimatorError> {
        let fp = if sigmas.sigma_p0 > 0.0 {
            family_p
        } else {
            ProbFamily::Exact
        };
        let fc = if sigmas.sigma_c01 > 0.0 || sigmas.sigma_c10 > 0.0 {
            family_c
        } else {
            CostFamily::Exact
        };
        Self::new(sigmas, fp, fc, false)
    }

    /// Beta for `p̂0`, truncated uniform for the costs.
    pub fn beta_uniform(sigmas: StandardErrors) -> Result<Self, EstimatorError> {
        Self::with_families(sigmas, ProbFamily::Beta, CostFamily::UniformTruncated)
    }

    /// Oracle mode: `δ̂` is drawn directly from `N(δ, σ̂²)`.
    pub fn direct_delta(sigmas: StandardErrors) -> Result<Self, EstimatorError> {
        Ok(Self::with_families(sigmas, ProbFamily::Normal, CostFamily::Normal)?.with_delta_mode(true))
    }

    pub fn with_delta_mode(mut self, delta_mode: bool) -> Self {
        self.delta_mode = delta_mode;
        self
    }

    pub fn sigmas(&self) -> &StandardErrors {
        &self.sigmas
    }
    pub fn family_p(&self) -> ProbFamily {
        self.family_p
    }
    pub fn family_c(&self) -> CostFamily {
        self.family_c
    }
    pub fn delta_mode(&self) -> bool {
        self.delta_mode
    }
}

/// Beta shape parameters matched to a mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
    /// The variance actually matched (differs from the request when clamped).
    pub variance: f64,
    pub clamped: bool,
}

impl BetaParams {
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn implied_variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }
}

/// Method-of-moments Beta: `k = m(1 − m)/v − 1`, `α = m k`, `β = (1 − m) k`.
///
/// A variance at or above `m(1 − m)` has no Beta; it is clamped to
/// `0.99 · m(1 − m)` and the result is flagged.
pub fn beta_params_from_moments(mean: f64, variance: f64) -> Result<BetaParams, EstimatorError> {
    if !(mean > 0.0 && mean < 1.0) {
        return Err(EstimatorError::BetaMeanOutOfRange(mean));
    }
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(EstimatorError::BetaVarianceInvalid(variance));
    }
    let bound = mean * (1.0 - mean);
    let (variance, clamped) = if variance >= bound {
        (BETA_VARIANCE_CLAMP * bound, true)
    } else {
        (variance, false)
    };
    // same k, evaluated so that (0.2, 0.01) lands on (3, 12) without rounding
    let k = (mean - mean * mean - variance) / variance;
    Ok(BetaParams {
        alpha: mean * k,
        beta: (1.0 - mean) * k,
        variance,
        clamped,
    })
}

/// One estimator draw with the number of clip/rejection events it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub value: f64,
    pub adjustments: u32,
}

impl Draw {
    fn clean(value: f64) -> Self {
        Self {
            value,
            adjustments: 0,
        }
    }
}

/// Prepared sampler for `p̂0`.
#[derive(Debug, Clone, Copy)]
pub enum ProbSampler {
    Exact(f64),
    Beta { dist: Beta<f64>, params: BetaParams },
    Normal { mean: f64, sd: f64 },
}

impl ProbSampler {
    pub fn new(p0: f64, sigma: f64, family: ProbFamily) -> Result<Self, EstimatorError> {
        if sigma == 0.0 {
            return Ok(ProbSampler::Exact(p0));
        }
        match family {
            ProbFamily::Exact => Err(EstimatorError::FamilyMismatch {
                estimator: "p0",
                family: family.as_str(),
                sigma,
            }),
            ProbFamily::Beta => {
                let params = beta_params_from_moments(p0, sigma * sigma)?;
                let dist = Beta::new(params.alpha, params.beta)
                    .map_err(|_| EstimatorError::BetaVarianceInvalid(params.variance))?;
                Ok(ProbSampler::Beta { dist, params })
            }
            ProbFamily::Normal => Ok(ProbSampler::Normal { mean: p0, sd: sigma }),
        }
    }

    pub fn clamped(&self) -> bool {
        matches!(self, ProbSampler::Beta { params, .. } if params.clamped)
    }

    /// Draw; a normal draw outside `[0, 1]` is clipped and counted.
    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> Draw {
        match *self {
            ProbSampler::Exact(p) => Draw::clean(p),
            ProbSampler::Beta { ref dist, .. } => Draw::clean(dist.sample(rng)),
            ProbSampler::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                let raw = mean + sd * z;
                let value = raw.clamp(0.0, 1.0);
                Draw {
                    value,
                    adjustments: u32::from(value != raw),
                }
            }
        }
    }
}

/// Prepared sampler for one cost estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostSampler {
    Exact(f64),
    UniformTruncated { cost: f64, sigma: f64, lo: f64, hi: f64 },
    Normal { cost: f64, sigma: f64 },
}

impl CostSampler {
    pub fn new(cost: f64, sigma: f64, family: CostFamily) -> Result<Self, EstimatorError> {
        if sigma == 0.0 {
            return Ok(CostSampler::Exact(cost));
        }
        match family {
            CostFamily::Exact => Err(EstimatorError::FamilyMismatch {
                estimator: "cost",
                family: family.as_str(),
                sigma,
            }),
            CostFamily::UniformTruncated => {
                let half_width = sigma * SQRT_3;
                Ok(CostSampler::UniformTruncated {
                    cost,
                    sigma,
                    lo: cost - half_width,
                    hi: cost + half_width,
                })
            }
            CostFamily::Normal => Ok(CostSampler::Normal { cost, sigma }),
        }
    }

    /// Draw, resampling until the value is strictly positive.
    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> Result<Draw, EstimatorError> {
        let (cost, sigma) = match *self {
            CostSampler::Exact(c) => return Ok(Draw::clean(c)),
            CostSampler::UniformTruncated { cost, sigma, .. } => (cost, sigma),
            CostSampler::Normal { cost, sigma } => (cost, sigma),
        };
        for rejected in 0..=MAX_REJECTIONS {
            let value = match *self {
                CostSampler::UniformTruncated { lo, hi, .. } => rng.uniform(lo, hi),
                _ => {
                    let z: f64 = StandardNormal.sample(rng);
                    cost + sigma * z
                }
            };
            if value > 0.0 {
                return Ok(Draw {
                    value,
                    adjustments: rejected,
                });
            }
        }
        Err(EstimatorError::RejectionExhausted { cost, sigma })
    }
}

/// Single draw of `p̂0`. See [`ProbSampler`].
pub fn sample_p_hat(
    p0: f64,
    sigma_p: f64,
    family: ProbFamily,
    rng: &mut RngStream,
) -> Result<Draw, EstimatorError> {
    Ok(ProbSampler::new(p0, sigma_p, family)?.sample(rng))
}

/// Single draw of a cost estimate. See [`CostSampler`].
pub fn sample_cost_hat(
    cost: f64,
    sigma_c: f64,
    family: CostFamily,
    rng: &mut RngStream,
) -> Result<Draw, EstimatorError> {
    CostSampler::new(cost, sigma_c, family)?.sample(rng)
}

/// Draw from `N(δ, σ̂²)`; zero variance returns `δ`.
#[inline]
pub fn sample_delta_hat_direct(delta: f64, var_delta_hat: f64, rng: &mut RngStream) -> f64 {
    if var_delta_hat <= 0.0 {
        return delta;
    }
    let z: f64 = StandardNormal.sample(rng);
    delta + var_delta_hat.sqrt() * z
}
