//! Binary decision problem and its closed-form sensitivity quantities.
//!
//! A state `θ ∈ {0, 1}` with `P(θ = 0) = p0` and two actions `a0`, `a1` with
//! cost table
//!
//! ```text
//!          θ = 0   θ = 1
//!   a0     c00     c01
//!   a1     c10     c11
//! ```
//!
//! The signed gap between the two expected losses,
//! `δ = (c01 − c11)(1 − p0) − (c10 − c00) p0`, decides the Bayes action and
//! `|δ|` is the regret of choosing the other one. When the problem
//! parameters are replaced by unbiased estimates with known standard errors,
//! the estimated gap `δ̂` is treated as `N(δ, σ̂²)` and the expected loss
//! increase is `Δ = P(sign δ̂ ≠ sign δ) · |δ|`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::erfc_nonneg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error("{field} must be in [0, 1], got {value}")]
    ProbabilityOutOfRange { field: &'static str, value: f64 },
    #[error("{field} must be a finite nonnegative number, got {value}")]
    NegativeOrNonFinite { field: &'static str, value: f64 },
}

fn check_probability(field: &'static str, value: f64) -> Result<f64, DecisionError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(DecisionError::ProbabilityOutOfRange { field, value })
    }
}

pub(crate) fn check_nonneg(field: &'static str, value: f64) -> Result<f64, DecisionError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(DecisionError::NegativeOrNonFinite { field, value })
    }
}

/// One of the two available actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionLabel {
    A0,
    A1,
}

impl ActionLabel {
    /// Selection rule shared by the true and the estimated gap: `a0` iff the
    /// gap is strictly negative, so a tie goes to `a1`.
    #[inline]
    pub fn from_gap(gap: f64) -> Self {
        if gap < 0.0 {
            ActionLabel::A0
        } else {
            ActionLabel::A1
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActionLabel::A0 => "a0",
            ActionLabel::A1 => "a1",
        }
    }
}

/// Ground-truth decision task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    p0: f64,
    c00: f64,
    c01: f64,
    c10: f64,
    c11: f64,
}

impl DecisionProblem {
    /// Zero-diagonal problem: the right action for each state costs nothing.
    pub fn new(p0: f64, c01: f64, c10: f64) -> Result<Self, DecisionError> {
        Self::with_diagonal(p0, 0.0, c01, c10, 0.0)
    }

    pub fn with_diagonal(
        p0: f64,
        c00: f64,
        c01: f64,
        c10: f64,
        c11: f64,
    ) -> Result<Self, DecisionError> {
        Ok(Self {
            p0: check_probability("p0", p0)?,
            c00: check_nonneg("c00", c00)?,
            c01: check_nonneg("c01", c01)?,
            c10: check_nonneg("c10", c10)?,
            c11: check_nonneg("c11", c11)?,
        })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }
    pub fn c00(&self) -> f64 {
        self.c00
    }
    pub fn c01(&self) -> f64 {
        self.c01
    }
    pub fn c10(&self) -> f64 {
        self.c10
    }
    pub fn c11(&self) -> f64 {
        self.c11
    }

    /// Multiply every cost by `k`. Used by scale-equivariance checks.
    pub fn scale_costs(&self, k: f64) -> Result<Self, DecisionError> {
        Self::with_diagonal(self.p0, k * self.c00, k * self.c01, k * self.c10, k * self.c11)
    }

    /// Cost of `a0` in state 1 net of the cost of the right action there.
    pub fn effective_c01(&self) -> f64 {
        self.c01 - self.c11
    }

    /// Cost of `a1` in state 0 net of the cost of the right action there.
    pub fn effective_c10(&self) -> f64 {
        self.c10 - self.c00
    }

    /// Expected loss of taking `action` under the true state distribution.
    pub fn expected_loss(&self, action: ActionLabel) -> f64 {
        match action {
            ActionLabel::A0 => self.c00 * self.p0 + self.c01 * (1.0 - self.p0),
            ActionLabel::A1 => self.c10 * self.p0 + self.c11 * (1.0 - self.p0),
        }
    }
}

/// Signed expected-loss gap `E[C(a0)] − E[C(a1)]`.
///
/// With a zero diagonal this evaluates exactly `c01(1 − p0) − c10 p0`.
pub fn delta(problem: &DecisionProblem) -> f64 {
    estimated_delta(problem, problem.p0, problem.c01, problem.c10)
}

/// Gap computed from estimates of `p0`, `c01`, `c10`. Diagonal costs are
/// taken as known.
#[inline]
pub fn estimated_delta(problem: &DecisionProblem, p0_hat: f64, c01_hat: f64, c10_hat: f64) -> f64 {
    let c01_eff = c01_hat - problem.c11;
    let c10_eff = c10_hat - problem.c00;
    c01_eff * (1.0 - p0_hat) - c10_eff * p0_hat
}

pub fn bayes_action(problem: &DecisionProblem) -> ActionLabel {
    ActionLabel::from_gap(delta(problem))
}

/// Minimal expected loss `L*`.
pub fn min_loss(problem: &DecisionProblem) -> f64 {
    if problem.c00 == 0.0 && problem.c11 == 0.0 {
        (problem.c01 * (1.0 - problem.p0)).min(problem.c10 * problem.p0)
    } else {
        problem
            .expected_loss(ActionLabel::A0)
            .min(problem.expected_loss(ActionLabel::A1))
    }
}

/// Standard errors of the three estimators.
///
/// This is the part of the noise description the closed form needs; the
/// sampling families live in [`crate::estimators::NoiseSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StandardErrors {
    pub sigma_p0: f64,
    pub sigma_c01: f64,
    pub sigma_c10: f64,
}

impl StandardErrors {
    pub fn new(sigma_p0: f64, sigma_c01: f64, sigma_c10: f64) -> Result<Self, DecisionError> {
        Ok(Self {
            sigma_p0: check_nonneg("sigma_p0", sigma_p0)?,
            sigma_c01: check_nonneg("sigma_c01", sigma_c01)?,
            sigma_c10: check_nonneg("sigma_c10", sigma_c10)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.sigma_p0 == 0.0 && self.sigma_c01 == 0.0 && self.sigma_c10 == 0.0
    }
}

/// Variance of `δ̂` assuming independent unbiased estimators, each product
/// expanded with `Var(xy) = Var x Var y + Var x (E y)² + Var y (E x)²`.
///
/// Nonzero diagonal costs enter through the effective costs `c01 − c11` and
/// `c10 − c00`; they carry no variance of their own.
pub fn var_delta_hat(problem: &DecisionProblem, sigmas: &StandardErrors) -> f64 {
    let vp = sigmas.sigma_p0 * sigmas.sigma_p0;
    let v01 = sigmas.sigma_c01 * sigmas.sigma_c01;
    let v10 = sigmas.sigma_c10 * sigmas.sigma_c10;
    let p0 = problem.p0;
    let q0 = 1.0 - p0;
    let c01 = problem.effective_c01();
    let c10 = problem.effective_c10();
    v01 * vp + v01 * q0 * q0 + vp * c01 * c01 + v10 * vp + v10 * p0 * p0 + vp * c10 * c10
}

/// Probability that a `N(δ, σ̂²)` estimate falls on the wrong side of zero:
/// `½[1 + erf(−|δ| / √(2σ̂²))]`.
///
/// Degenerate cases: zero variance gives 0 (the estimate equals `δ`), and
/// `δ = 0` with positive variance gives ½.
pub fn p_err(delta: f64, var_delta_hat: f64) -> f64 {
    debug_assert!(var_delta_hat >= 0.0);
    if var_delta_hat <= 0.0 {
        return 0.0;
    }
    let z = delta.abs() / (2.0 * var_delta_hat).sqrt();
    // ½[1 + erf(−z)] = ½ erfc(z), evaluated without cancellation.
    0.5 * erfc_nonneg(z)
}

/// Closed-form sensitivity bundle for one problem and noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSensitivity {
    pub delta: f64,
    pub l_star: f64,
    pub var_delta_hat: f64,
    pub p_err: f64,
    /// Expected loss increase `Δ = P_err · |δ|`.
    pub delta_inc: f64,
    /// `Δ / L*`; `None` when `L* = 0`.
    pub norm_inc: Option<f64>,
}

impl AnalyticSensitivity {
    /// Total loss relative to the optimum, `(L* + Δ) / L*`.
    pub fn relative_total_loss(&self) -> Option<f64> {
        self.norm_inc.map(|n| 1.0 + n)
    }
}

/// `Δ / L*`, or `None` when the minimal loss is zero.
pub fn normalize(delta_inc: f64, l_star: f64) -> Option<f64> {
    (l_star > 0.0).then(|| delta_inc / l_star)
}

pub fn expected_increase(problem: &DecisionProblem, sigmas: &StandardErrors) -> AnalyticSensitivity {
    let delta = delta(problem);
    let l_star = min_loss(problem);
    let var = var_delta_hat(problem, sigmas);
    let p_err = p_err(delta, var);
    let delta_inc = p_err * delta.abs();
    AnalyticSensitivity {
        delta,
        l_star,
        var_delta_hat: var,
        p_err,
        delta_inc,
        norm_inc: normalize(delta_inc, l_star),
    }
}
