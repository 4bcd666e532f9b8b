//! Closed-form best L^p Lyapunov constants for the periodic and
//! antiperiodic problems.
//!
//! For 1 < p < ∞ the periodic constant is
//!
//! ```text
//! beta_p^per = 16 I(p)^2 p / (T^(2-1/p) (p-1)^(1-1/p) (2p-1)^(1/p)),
//! I(p) = int_0^1 (1 - s^(2p/(p-1)))^(-1/2) ds,
//! ```
//!
//! with endpoint values 16/T and 4π²/T². The antiperiodic constant is one
//! quarter of the periodic one for every p.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::LyacertError;
use crate::exponent::PExponent;
use crate::numeric;
use crate::variational::{BoundaryTag, GridFunction};

/// Boundary condition selecting which constant family is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    #[serde(alias = "per")]
    Periodic,
    #[serde(alias = "ant")]
    Antiperiodic,
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bc::Periodic => write!(f, "per"),
            Bc::Antiperiodic => write!(f, "ant"),
        }
    }
}

impl FromStr for Bc {
    type Err = LyacertError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "per" | "periodic" => Ok(Bc::Periodic),
            "ant" | "antiperiodic" => Ok(Bc::Antiperiodic),
            other => Err(LyacertError::Usage(format!(
                "unknown boundary condition '{other}' (use per|ant)"
            ))),
        }
    }
}

/// A best Lyapunov constant, tagged with the data that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovConstant {
    pub bc: Bc,
    pub p: PExponent,
    pub period: f64,
    pub value: f64,
}

/// The special integral I(p) = ∫₀¹ (1 − s^q)^{−1/2} ds with q = 2p/(p−1),
/// evaluated through the Beta-function identity I = (1/q)·B(1/q, 1/2).
///
/// Only finite p > 1 is meaningful; the endpoints have closed-form
/// constants that never touch this integral.
pub fn special_integral(p: &PExponent) -> Result<f64, LyacertError> {
    let p = match p {
        PExponent::Finite(p) => *p,
        other => {
            return Err(LyacertError::Domain(format!(
                "special integral requires finite p > 1, got p = {other}"
            )))
        }
    };
    let q = 2.0 * p / (p - 1.0);
    let ln_beta = ln_gamma(1.0 / q) + ln_gamma(0.5) - ln_gamma(1.0 / q + 0.5);
    Ok(ln_beta.exp() / q)
}

/// Independent evaluation of I(p) by adaptive quadrature. The integrand is
/// split at s = 1/2 and the singular upper half is regularized by the
/// substitution s = (1 − r²)^{1/q}, which maps it to
/// (2/q)·∫₀^{r₀} (1 − r²)^{1/q − 1} dr with r₀ = √(1 − 2^{−q}) < 1.
pub fn special_integral_quadrature(p: &PExponent, tol: f64) -> Result<f64, LyacertError> {
    let p = match p {
        PExponent::Finite(p) => *p,
        other => {
            return Err(LyacertError::Domain(format!(
                "special integral requires finite p > 1, got p = {other}"
            )))
        }
    };
    let q = 2.0 * p / (p - 1.0);
    let lower = numeric::adaptive_simpson(&|s: f64| 1.0 / (1.0 - s.powf(q)).sqrt(), 0.0, 0.5, tol);
    let r0 = (1.0 - 0.5f64.powf(q)).sqrt();
    let upper = numeric::adaptive_simpson(
        &|r: f64| 2.0 / q * (1.0 - r * r).powf(1.0 / q - 1.0),
        0.0,
        r0,
        tol,
    );
    Ok(lower + upper)
}

/// The best Lyapunov constant β_p for the given boundary condition,
/// exponent, and period.
pub fn lyapunov_constant(bc: Bc, p: &PExponent, period: f64) -> Result<LyapunovConstant, LyacertError> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(LyacertError::Domain(format!(
            "period must be positive and finite, got {period}"
        )));
    }
    let periodic_value = match p {
        PExponent::One => 16.0 / period,
        PExponent::Infinity => 4.0 * std::f64::consts::PI.powi(2) / (period * period),
        PExponent::Finite(pf) => {
            let i = special_integral(p)?;
            16.0 * i * i * pf
                / (period.powf(2.0 - 1.0 / pf)
                    * (pf - 1.0).powf(1.0 - 1.0 / pf)
                    * (2.0 * pf - 1.0).powf(1.0 / pf))
        }
    };
    let value = match bc {
        Bc::Periodic => periodic_value,
        Bc::Antiperiodic => periodic_value / 4.0,
    };
    Ok(LyapunovConstant {
        bc,
        p: *p,
        period,
        value,
    })
}

/// Sampled extremal function achieving β_p at the endpoint exponents, on a
/// uniform closed grid of `grid_size` cells.
///
/// * periodic, p = 1: the triangle wave with slopes ±1 and breakpoints at
///   T/4 and 3T/4;
/// * antiperiodic, p = 1: v(x) = T/2 − x;
/// * periodic, p = ∞: cos(2πx/T); antiperiodic, p = ∞: cos(πx/T).
///
/// Finite p in (1, ∞) has no elementary extremal; obtain it numerically
/// with [`crate::variational::minimize_Ip`].
pub fn extremal_function(
    bc: Bc,
    p: &PExponent,
    period: f64,
    grid_size: usize,
) -> Result<GridFunction, LyacertError> {
    if !(period > 0.0) {
        return Err(LyacertError::Domain(format!(
            "period must be positive, got {period}"
        )));
    }
    if grid_size < 8 {
        return Err(LyacertError::Domain(format!(
            "grid_size must be at least 8, got {grid_size}"
        )));
    }
    let t = period;
    let n = grid_size;
    let h = t / n as f64;
    let tag = match bc {
        Bc::Periodic => BoundaryTag::Periodic,
        Bc::Antiperiodic => BoundaryTag::Antiperiodic,
    };
    let sample: Box<dyn Fn(f64) -> f64> = match (bc, p) {
        (Bc::Periodic, PExponent::One) => Box::new(move |x: f64| {
            if x <= 0.25 * t {
                x
            } else if x <= 0.75 * t {
                0.5 * t - x
            } else {
                x - t
            }
        }),
        (Bc::Antiperiodic, PExponent::One) => Box::new(move |x: f64| 0.5 * t - x),
        (Bc::Periodic, PExponent::Infinity) => {
            Box::new(move |x: f64| (2.0 * std::f64::consts::PI * x / t).cos())
        }
        (Bc::Antiperiodic, PExponent::Infinity) => {
            Box::new(move |x: f64| (std::f64::consts::PI * x / t).cos())
        }
        (_, PExponent::Finite(_)) => {
            return Err(LyacertError::Unsupported(
                "extremal functions for finite p in (1, inf) are not elementary; \
                 minimize the functional numerically instead"
                    .into(),
            ))
        }
    };
    let samples: Vec<f64> = (0..=n).map(|j| sample(j as f64 * h)).collect();
    GridFunction::new(period, samples, tag)
}
