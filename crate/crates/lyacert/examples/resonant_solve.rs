//! Solves u'' + u/2 = cos t through the resonant fixed-point iteration and
//! compares with the exact solution -2 cos t.

use lyacert::problem::ProblemSpec;
use lyacert::resonant::{check_t1_hypotheses, solve_resonant, ProbePlan, ResonantOptions};
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs/resonant_cosine.json");
    let spec = ProblemSpec::from_path(&path)?;
    let prob = spec.nonlinear()?;
    let forcing = spec.forcing_vector()?;

    let hyp = check_t1_hypotheses(&prob, &ProbePlan::default())?;
    println!("hypotheses pass: {}", hyp.passed);
    for c in &hyp.norm_checks {
        println!(
            "  component {}: ||b+||_{} = {:.6} < beta_per = {:.6}",
            c.component + 1,
            c.p,
            c.norm,
            c.beta
        );
    }

    let opts = ResonantOptions { tol: 1e-9, ..ResonantOptions::default() };
    let run = solve_resonant(&prob, &forcing, None, &opts)?;
    println!(
        "finished in {} outer iterations ({:?} phase), residual {:.3e}",
        run.outer_iterations, run.phase, run.solution.residual_sup
    );

    let mut err = 0.0f64;
    for (t, u) in run.solution.times.iter().zip(&run.solution.samples) {
        err = err.max((u[0] + 2.0 * t.cos()).abs());
    }
    println!("sup distance to -2 cos t: {err:.3e}");
    Ok(())
}
