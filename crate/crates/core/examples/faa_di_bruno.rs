//! Faà di Bruno tuples and the r-th time derivative of `g^j` for `g = sin`,
//! compared with the closed form.
//!
//! ```bash
//! cargo run --release --example faa_di_bruno
//! ```

use cornerpde::calculus::{derivative_of_power, faa_di_bruno_tuples};

fn main() -> cornerpde::Result<()> {
    for r in 1..=5 {
        let tuples: Vec<Vec<usize>> = faa_di_bruno_tuples(r)?.into_iter().map(|t| t.kappa).collect();
        println!("r = {r}: {} tuples {tuples:?}", tuples.len());
    }
    // derivatives of sin up to order 2 at a few points
    let ts = [0.0, 0.3, 1.1];
    let derivs: Vec<Vec<f64>> = vec![
        ts.iter().map(|t: &f64| t.sin()).collect(),
        ts.iter().map(|t: &f64| t.cos()).collect(),
        ts.iter().map(|t: &f64| -t.sin()).collect(),
    ];
    let d2 = derivative_of_power(&derivs, 2, 2)?;
    for (t, v) in ts.iter().zip(&d2) {
        println!("(sin²)''({t}) = {v:.12}  closed form {:.12}", 2.0 * (2.0 * t).cos());
    }
    Ok(())
}
