//! Reflection extension of a sampled vector signal to negative times: the
//! Vandermonde coefficients, junction mismatches as the sampling refines and
//! the norm ratio of the extension.
//!
//! ```bash
//! cargo run --release --example extension_operator
//! ```

use cornerpde::calculus::{
    default_lambdas, discrete_hk_norm, extend_signal, junction_report, reflection_coefficients, Signal,
};

fn main() -> cornerpde::Result<()> {
    let k = 3;
    let coeffs = reflection_coefficients(k, &default_lambdas(k))?;
    println!("lambdas {:?}\na       {:?}\nresidual {:.2e}", coeffs.lambdas, coeffs.a, coeffs.max_residual());
    for n in [201, 401, 801, 1601] {
        let dt = 1.0 / (n - 1) as f64;
        let channels = vec![
            (0..n).map(|i| (3.0 * i as f64 * dt).sin()).collect(),
            (0..n).map(|i| (i as f64 * dt).exp()).collect(),
        ];
        let signal = Signal::new(dt, channels)?;
        let ext = extend_signal(&signal, &coeffs, None)?;
        let mismatches: Vec<String> = junction_report(&ext, k)?.iter().map(|j| format!("{:.2e}", j.mismatch)).collect();
        let ratio = discrete_hk_norm(&ext.channels, dt, 1) / discrete_hk_norm(&signal.channels, dt, 1);
        println!("n = {n:5}  mismatch by order {mismatches:?}  H1 ratio {ratio:.4}");
    }
    Ok(())
}
