//! The dedicated two dimensional route: a coupled coefficient whose
//! off-diagonal term is absorbed into a diagonal majorant through the
//! split b11 = p11 + g, b22 = p22 + p12^2/g, with g tuned by maximin.

use lyacert::certifier::certify_2d_example;
use lyacert::matrixfn::MatrixFunction;
use lyacert::PExponent;
use nalgebra::DMatrix;

fn main() -> Result<(), lyacert::LyacertError> {
    let w = 2.0 * std::f64::consts::PI;
    let q = MatrixFunction::from_fn(2, 1.0, move |t| {
        let p11 = 0.2 * (1.0 + (w * t).cos());
        let p22 = 0.2 * (1.0 + (w * t).sin()) + 0.02;
        let p12 = 0.05 * (w * t).sin();
        DMatrix::from_row_slice(2, 2, &[p11, p12, p12, p22])
    })?;

    let cert = certify_2d_example(&q, &PExponent::Infinity, &PExponent::Infinity)?;
    println!("verdict  {}", cert.verdict);
    if let Some(g) = cert.gamma {
        println!("gamma    {g:.9}");
    }
    for i in 0..cert.norms.len() {
        println!(
            "row {}: ||b_ii||_p = {:.9} vs beta = {:.9} (margin {:+.4e})",
            i + 1,
            cert.norms[i],
            cert.constants[i],
            cert.margins[i]
        );
    }
    for note in &cert.notes {
        println!("note: {note}");
    }
    Ok(())
}
