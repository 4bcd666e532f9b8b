//! Closed-form best constants over a grid of exponents, with the quarter
//! law and the period scaling law checked on the fly.

use lyacert::constants::{lyapunov_constant, Bc};
use lyacert::PExponent;

fn main() -> Result<(), lyacert::LyacertError> {
    let period = 2.0 * std::f64::consts::PI;
    println!("period T = {period:.15}");
    println!(
        "{:>6} {:>20} {:>20} {:>14} {:>14}",
        "p", "beta_per", "beta_ant", "ant/per", "scaling defect"
    );
    for s in ["1", "1.25", "1.5", "2", "3", "10", "inf"] {
        let p: PExponent = s.parse()?;
        let per = lyapunov_constant(Bc::Periodic, &p, period)?.value;
        let ant = lyapunov_constant(Bc::Antiperiodic, &p, period)?.value;
        // halving the period multiplies the constant by 2^(2 - 1/p)
        let half = lyapunov_constant(Bc::Periodic, &p, 0.5 * period)?.value;
        let predicted = per * 0.5f64.powf(p.one_over_p() - 2.0);
        println!(
            "{:>6} {:>20.13} {:>20.13} {:>14.10} {:>14.3e}",
            s,
            per,
            ant,
            ant / per,
            (half - predicted).abs() / predicted
        );
    }
    Ok(())
}
