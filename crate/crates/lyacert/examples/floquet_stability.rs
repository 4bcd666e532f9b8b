//! Floquet analysis of two Mathieu coefficients: one inside the first
//! stability band, one inside the first instability tongue.

use lyacert::linear_engine::floquet;
use lyacert::matrixfn::MatrixFunction;
use nalgebra::DMatrix;

fn mathieu(delta: f64, epsilon: f64) -> MatrixFunction {
    let t = 2.0 * std::f64::consts::PI;
    MatrixFunction::from_fn(1, t, move |s| {
        DMatrix::from_element(1, 1, delta + epsilon * s.cos())
    })
    .expect("valid coefficient")
}

fn main() -> Result<(), lyacert::LyacertError> {
    for (delta, epsilon) in [(0.08, 0.05), (0.25, 0.2)] {
        let report = floquet(&mathieu(delta, epsilon), 4096)?;
        println!("delta = {delta}, epsilon = {epsilon}");
        println!("  verdict              {}", report.verdict);
        println!("  |det - 1|            {:.3e}", report.determinant_defect);
        println!("  unit circle margin   {:.3e}", report.unit_circle_margin);
        for (re, im) in &report.multipliers {
            let modulus = (re * re + im * im).sqrt();
            println!("  multiplier           {re:+.12} {im:+.12}i  (modulus {modulus:.12})");
        }
        println!();
    }
    Ok(())
}
