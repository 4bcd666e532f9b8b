//! The weighted antiperiodic eigenvalue lambda_1 by shooting, against the
//! analytic value for a constant scaled identity and a Rayleigh quotient
//! estimate from finite differences.

use lyacert::linear_engine::{lambda1_shooting, rayleigh_lambda1};
use lyacert::matrixfn::MatrixFunction;
use nalgebra::DMatrix;

fn main() -> Result<(), lyacert::LyacertError> {
    let period = 2.0 * std::f64::consts::PI;
    let c = 3.0;

    // Q = c I: u'' + lambda c u = 0 first hits antiperiodicity at
    // lambda = pi^2 / (c T^2)
    let q = MatrixFunction::constant(period, DMatrix::from_diagonal_element(2, 2, c))?;
    let analytic = std::f64::consts::PI.powi(2) / (c * period * period);
    let report = lambda1_shooting(&q, 2048)?;
    let rayleigh = rayleigh_lambda1(&q, 512)?;
    println!("constant weight c = {c}, dimension 2");
    println!("  analytic lambda_1       {analytic:.12}");
    println!("  shooting lambda_1       {:.12}  ({:?})", report.lambda1, report.resolution);
    println!("  rayleigh lambda_1       {rayleigh:.12}  (1/lambda_1 = {:.12})", 1.0 / rayleigh);

    // a genuinely t-dependent scalar weight
    let m = MatrixFunction::from_fn(1, period, |s| {
        DMatrix::from_element(1, 1, 0.6 + 0.4 * s.cos())
    })?;
    let report = lambda1_shooting(&m, 2048)?;
    let rayleigh = rayleigh_lambda1(&m, 512)?;
    println!("weight 0.6 + 0.4 cos t");
    println!("  shooting lambda_1       {:.12}  ({:?})", report.lambda1, report.resolution);
    println!("  rayleigh lambda_1       {rayleigh:.12}  (1/lambda_1 = {:.12})", 1.0 / rayleigh);
    println!(
        "  krein margin            lambda_1 - 1 = {:+.6}",
        report.lambda1 - 1.0
    );
    Ok(())
}
