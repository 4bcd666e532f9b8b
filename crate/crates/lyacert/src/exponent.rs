//! The exponent p ∈ [1, ∞] indexing the L^p norms and constants.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::LyacertError;

/// An exponent p with 1 ≤ p ≤ ∞.
///
/// The endpoints are explicit variants, never approximated by floats: the
/// closed-form constant is singular as written at both p = 1 and p = ∞,
/// so every formula branches on the variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    One,
    /// Strictly 1 < p < ∞.
    Finite(f64),
    Infinity,
}

impl PExponent {
    /// Classifies a float as an exponent. `1.0` and `f64::INFINITY` map to
    /// the endpoint variants.
    pub fn new(p: f64) -> Result<Self, LyacertError> {
        if p == 1.0 {
            Ok(PExponent::One)
        } else if p == f64::INFINITY {
            Ok(PExponent::Infinity)
        } else if p.is_finite() && p > 1.0 {
            Ok(PExponent::Finite(p))
        } else {
            Err(LyacertError::Domain(format!(
                "exponent must satisfy 1 <= p <= inf, got {p}"
            )))
        }
    }

    /// The conjugate exponent p/(p−1), with 1 and ∞ swapped.
    pub fn conjugate(&self) -> PExponent {
        match self {
            PExponent::One => PExponent::Infinity,
            PExponent::Infinity => PExponent::One,
            PExponent::Finite(p) => PExponent::Finite(p / (p - 1.0)),
        }
    }

    /// 1/p with the convention 1/∞ = 0.
    pub fn one_over_p(&self) -> f64 {
        match self {
            PExponent::One => 1.0,
            PExponent::Finite(p) => 1.0 / p,
            PExponent::Infinity => 0.0,
        }
    }

    /// The value as a float (∞ for the infinity variant).
    pub fn as_f64(&self) -> f64 {
        match self {
            PExponent::One => 1.0,
            PExponent::Finite(p) => *p,
            PExponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, PExponent::One | PExponent::Finite(_))
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::One => write!(f, "1"),
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for PExponent {
    type Err = LyacertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "inf" | "infinity" | "oo" => Ok(PExponent::Infinity),
            _ => {
                let p: f64 = s.parse().map_err(|_| {
                    LyacertError::Usage(format!("cannot parse exponent '{s}' (use a number or 'inf')"))
                })?;
                PExponent::new(p)
            }
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(x) => PExponent::new(x).map_err(de::Error::custom),
            Raw::Str(s) => s.parse().map_err(de::Error::custom),
        }
    }
}
