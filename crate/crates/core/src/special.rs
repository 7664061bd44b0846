//! Error function and normal CDF.
//!
//! Uses the five-term rational approximation of Abramowitz & Stegun (7.1.26):
//!
//! ```text
//! erfc(x) ≈ (a1 t + a2 t² + a3 t³ + a4 t⁴ + a5 t⁵) · exp(−x²),   t = 1 / (1 + p x),   x ≥ 0
//! ```
//!
//! with absolute error at most 1.5e-7. `erf` is evaluated on `|x|` and the
//! sign is applied afterwards, so `erf(-x) == -erf(x)` holds bit-for-bit.

use thiserror::Error;

const P: f64 = 0.327_591_1;
const A1: f64 = 0.254_829_592;
const A2: f64 = -0.284_496_736;
const A3: f64 = 1.421_413_741;
const A4: f64 = -1.453_152_027;
const A5: f64 = 1.061_405_429;

/// Guaranteed absolute error bound of [`erf`] and [`erfc`].
pub const ERF_MAX_ABS_ERROR: f64 = 1.5e-7;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialFunctionError {
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("standard deviation must be positive and finite, got {0}")]
    InvalidSigma(f64),
}

/// erfc on a nonnegative argument. Callers guarantee `x >= 0` and finite.
#[inline]
pub(crate) fn erfc_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    // The coefficients sum to 1 − 1e-9; pin the origin exactly.
    if x == 0.0 {
        return 1.0;
    }
    let t = 1.0 / P.mul_add(x, 1.0);
    let poly = A5
        .mul_add(t, A4)
        .mul_add(t, A3)
        .mul_add(t, A2)
        .mul_add(t, A1)
        * t;
    poly * (-x * x).exp()
}

/// Gauss error function.
pub fn erf(x: f64) -> Result<f64, SpecialFunctionError> {
    if !x.is_finite() {
        return Err(SpecialFunctionError::NonFinite(x));
    }
    let magnitude = 1.0 - erfc_nonneg(x.abs());
    Ok(if x.is_sign_negative() { -magnitude } else { magnitude })
}

/// Complementary error function, `1 - erf(x)`.
///
/// For `x >= 0` this avoids the cancellation in `1 - erf(x)`, which keeps
/// small tail probabilities accurate in relative terms.
pub fn erfc(x: f64) -> Result<f64, SpecialFunctionError> {
    if !x.is_finite() {
        return Err(SpecialFunctionError::NonFinite(x));
    }
    Ok(if x >= 0.0 {
        erfc_nonneg(x)
    } else {
        2.0 - erfc_nonneg(-x)
    })
}

/// CDF of `N(mu, sigma²)` evaluated at `z`: `½[1 + erf((z − μ)/(σ√2))]`.
pub fn normal_cdf(z: f64, mu: f64, sigma: f64) -> Result<f64, SpecialFunctionError> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(SpecialFunctionError::InvalidSigma(sigma));
    }
    let arg = (z - mu) / (sigma * std::f64::consts::SQRT_2);
    Ok(0.5 * (1.0 + erf(arg)?))
}
