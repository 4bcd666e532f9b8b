//! Best Lyapunov constants and stability certificates for periodic systems.
//!
//! The crate is organized around three workflows:
//!
//! 1. **Constants** ([`constants`], [`variational`]): closed-form best
//!    constants `beta_p` for the periodic and antiperiodic Lyapunov
//!    inequalities, together with a direct variational cross-check that
//!    minimizes the underlying functionals over discretized constraint sets.
//! 2. **Certification** ([`linear_engine`], [`certifier`]): Floquet analysis
//!    of `y'' + P(t) y = 0`, antiperiodic eigenvalue computation, and
//!    sufficient conditions for stable boundedness expressed through
//!    `L^p` norms of a diagonal majorant.
//! 3. **Resonant solving** ([`resonant`]): an iterative solver for nonlinear
//!    periodic problems `u'' + G_u(t, u) = h(t)` at resonance, with
//!    verifiable hypotheses and a posteriori residuals.
//!
//! The command line front end lives in [`cli`]; serialization of problem
//! specifications and reports in [`problem`] and [`report`].

pub mod certifier;
pub mod cli;
pub mod constants;
pub mod error;
pub mod exponent;
pub mod linear_engine;
pub mod matrixfn;
pub mod numeric;
pub mod problem;
pub mod report;
pub mod resonant;
pub mod variational;

pub use error::LyacertError;
pub use exponent::PExponent;
