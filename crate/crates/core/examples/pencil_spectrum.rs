//! Laplace pencil spectra at corners of growing opening angle, the strip
//! widths around the energy line and the admissible Kondratiev weights.
//!
//! ```bash
//! cargo run --release --example pencil_spectrum
//! ```

use std::f64::consts::PI;

use cornerpde::pencil::{
    heat_weight_bound, laplace_pencil_closed_form, pencil_eigenvalues_numeric, summarize, QuadraticPencil,
};

fn main() -> cornerpde::Result<()> {
    println!("{:>8} {:>12} {:>12} {:>22} {:>22} {:>10}", "theta/pi", "lambda_1", "closed", "linear a", "nonlinear a", "heat");
    for theta in [0.5 * PI, PI, 1.5 * PI, 2.0 * PI] {
        let numeric = pencil_eigenvalues_numeric(theta, 3, 2000)?;
        let exact = laplace_pencil_closed_form(theta, 3)?;
        let s = summarize(&numeric)?;
        println!(
            "{:>8.2} {:>12.8} {:>12.8} {:>22} {:>22} {:>10.4}",
            theta / PI,
            numeric.positive_real_parts()[0],
            exact.positive_real_parts()[0],
            s.weight_interval_linear.to_string(),
            s.weight_interval_nonlinear.to_string(),
            heat_weight_bound(theta)?,
        );
    }

    // the same spectrum from the dense companion linearization on a coarse grid
    let pencil = QuadraticPencil::angular_laplace(1.5 * PI, 60);
    let mut roots: Vec<f64> = pencil.companion_eigenvalues()?.iter().map(|z| z.re).filter(|r| *r > 0.0).collect();
    roots.sort_by(f64::total_cmp);
    println!("companion form, 60 points, θ = 3π/2: {:.6?}", &roots[..3]);
    Ok(())
}
