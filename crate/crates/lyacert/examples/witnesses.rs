//! Sharpness witnesses: coefficients that stay under a prescribed norm
//! budget yet break stability, or sit exactly at periodic resonance.
//!
//! The budgets here exceed the corresponding best constants; below them no
//! such coefficient exists, which is what makes the constants sharp.

use lyacert::certifier::{instability_witness, resonance_witness};
use lyacert::PExponent;

fn main() -> Result<(), lyacert::LyacertError> {
    let period = 1.0;
    let p = PExponent::One;

    // beta_1_ant = 4/T: a budget 25% above it already admits instability
    let (q, floquet) = instability_witness(&[5.0], 0, &p, period)?;
    println!("instability witness (gamma = 5.0 > 4 = beta_1_ant)");
    println!("  dim {} period {}", q.dim(), q.period());
    println!("  floquet verdict     {}", floquet.verdict);
    let top = floquet
        .multipliers
        .iter()
        .map(|(re, im)| (re * re + im * im).sqrt())
        .fold(0.0f64, f64::max);
    println!("  largest multiplier  {top:.6}");

    // beta_1_per = 16/T: above it a coefficient with a nontrivial periodic
    // kernel fits under the budget
    let (q, h, diag) = resonance_witness(&[20.0], 0, &p, period)?;
    println!("resonance witness (gamma = 20.0 > 16 = beta_1_per)");
    println!("  dim {} period {}", q.dim(), q.period());
    println!("  trace(M) - 2        {:+.3e}", diag.trace_minus_two);
    println!("  ||q+||_1            {:.9} (budget {:.9})", diag.norm, diag.norm_bound);
    println!("  kernel forcing h(0) {:+.6}", h.eval(0.0)[0]);
    println!("  int w^2 dt          {:.6}", diag.fredholm_integral);
    println!("  inner solver raises RESONANT_LINEAR: {}", diag.solve_reports_resonant);
    Ok(())
}
