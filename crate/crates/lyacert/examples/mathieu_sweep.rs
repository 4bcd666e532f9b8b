//! A coarse Mathieu stability chart with certificates overlaid.
//!
//! C: certified stably bounded, s: Floquet stable but not certified,
//! U: unbounded, .: outside the admissible class.

use lyacert::certifier::{certify_thm41, check_lambda_membership};
use lyacert::linear_engine::{floquet, StabilityVerdict};
use lyacert::matrixfn::MatrixFunction;
use nalgebra::DMatrix;

fn main() -> Result<(), lyacert::LyacertError> {
    let t = 2.0 * std::f64::consts::PI;
    let deltas: Vec<f64> = (0..12).map(|i| 0.02 + 0.04 * i as f64).collect();
    let epsilons: Vec<f64> = (0..12).map(|j| 0.04 * j as f64).collect();

    println!("rows: delta from {:.2} to {:.2}, columns: epsilon from {:.2} to {:.2}\n", deltas[0], deltas[11], epsilons[0], epsilons[11]);
    for &delta in &deltas {
        let mut row = String::new();
        for &epsilon in &epsilons {
            let q = MatrixFunction::from_fn(1, t, move |s| {
                DMatrix::from_element(1, 1, delta + epsilon * s.cos())
            })?;
            let cell = if !check_lambda_membership(&q, 256, 1e-9).member() {
                '.'
            } else {
                match floquet(&q, 1024)?.verdict {
                    StabilityVerdict::Unbounded => 'U',
                    _ => {
                        if certify_thm41(&q, None, None)?.certified() {
                            'C'
                        } else {
                            's'
                        }
                    }
                }
            };
            row.push(cell);
            row.push(' ');
        }
        println!("delta {delta:>5.2}  {row}");
    }
    println!("\nthe uncertified stable band sits between the certificate's reach and the first tongue");
    Ok(())
}
