//! Error types shared across the crate.

use thiserror::Error;

/// Diagnostics from a `lambda1` scan that found no admissible crossing.
///
/// Distinguishes "the eigenvalue lies beyond the scanned range" from a
/// genuine failure: `all_same_sign` with a small `min_abs_det` suggests a
/// near-touch that the refinement missed, while a large `min_abs_det`
/// indicates the range was simply too short.
#[derive(Debug, Clone)]
pub struct ScanDiagnostics {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub points: usize,
    pub min_abs_det: f64,
    pub all_same_sign: bool,
}

impl std::fmt::Display for ScanDiagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "scanned mu in [{:.6e}, {:.6e}] with {} points, min |det| = {:.3e}, all same sign: {}",
            self.mu_lo, self.mu_hi, self.points, self.min_abs_det, self.all_same_sign
        )
    }
}

#[derive(Debug, Error)]
pub enum LyacertError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A quotient functional was evaluated on input that annihilates its
    /// denominator.
    #[error("undefined quotient: {0}")]
    UndefinedQuotient(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// No antiperiodic eigenvalue was located in the scanned range.
    #[error("lambda1 not found: {0}")]
    Lambda1NotFound(ScanDiagnostics),

    /// `I − M(T)` is singular: the homogeneous problem admits nontrivial
    /// periodic solutions and the linear solve is resonant.
    #[error("resonant linear problem ({context}): sigma_min(I - M) = {sigma_min:.3e}")]
    ResonantLinear { sigma_min: f64, context: String },

    /// The proposed diagonal majorant fails `P(t) ≤ B(t)` somewhere.
    #[error("majorant invalid: P(t) ≤ B(t) fails at t = {t:.6} (defect eigenvalue {defect:.3e})")]
    MajorantInvalid { t: f64, defect: f64 },

    /// The witness search exhausted its grid. Diagnostic, not a disproof.
    #[error("witness not found: {0}")]
    WitnessNotFound(String),

    #[error("solver did not converge: {context} (last residuals: {tail:?})")]
    NonConverged { context: String, tail: Vec<f64> },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed problem spec: {0}")]
    Json(#[from] serde_json::Error),
}

impl LyacertError {
    /// Process exit code for the CLI: 0 success, 1 inconclusive or
    /// hypothesis failure, 2 numerically unstable, 64 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            LyacertError::Usage(_) | LyacertError::Json(_) | LyacertError::Io(_) => 64,
            LyacertError::Overflow(_) | LyacertError::NonConverged { .. } => 2,
            _ => 1,
        }
    }
}
