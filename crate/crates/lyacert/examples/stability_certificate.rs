//! Loads a linear system from a JSON problem file, checks admissibility,
//! and runs the norm-based certifier with automatic exponent selection.

use lyacert::certifier::{certify_thm41, check_lambda_membership};
use lyacert::problem::ProblemSpec;
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs");
    for name in ["constant_spd.json", "mathieu_stable.json"] {
        let spec = ProblemSpec::from_path(&dir.join(name))?;
        let q = spec.matrix()?;
        let membership = check_lambda_membership(&q, 512, 1e-9);
        println!("{name}");
        println!("  in the admissible class   {}", membership.member());
        println!("  mean min eigenvalue       {:.6e}", membership.mean_min_eigenvalue);

        let cert = certify_thm41(&q, None, None)?;
        println!("  method                    {}", cert.method);
        println!("  verdict                   {}", cert.verdict);
        for (i, ((norm, beta), p)) in cert
            .norms
            .iter()
            .zip(&cert.constants)
            .zip(&cert.exponents)
            .enumerate()
        {
            println!(
                "  component {}: p = {:>4}  ||b+||_p = {:.9}  beta_ant = {:.9}  margin {:+.3e}",
                i + 1,
                p.to_string(),
                norm,
                beta,
                cert.margins[i]
            );
        }
        for note in &cert.notes {
            println!("  note: {note}");
        }
        println!();
    }
    Ok(())
}
