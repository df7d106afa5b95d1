//! Moduli of smoothness and the Besov surrogate for `x^{2/3}` on [0, 1]: the
//! value settles under refinement below the critical smoothness and keeps
//! growing above it.
//!
//! ```bash
//! cargo run --release --example besov_moduli
//! ```

use cornerpde::smoothness::{besov_norm_moduli, GridSamples};

fn main() -> cornerpde::Result<()> {
    let f = |x: f64| x.powf(2.0 / 3.0);
    println!("{:>6} {:>14} {:>14} {:>14}", "s", "n = 1025", "n = 4097", "n = 16385");
    for s in [0.3, 0.6, 0.9, 1.2, 1.5] {
        let norms: Vec<f64> = [1025, 4097, 16385]
            .iter()
            .map(|&n| besov_norm_moduli(&GridSamples::from_fn_1d(n, f)?, s, 2.0, 2.0, 2).map(|b| b.norm))
            .collect::<cornerpde::Result<_>>()?;
        println!("{s:>6.2} {:>14.6} {:>14.6} {:>14.6}", norms[0], norms[1], norms[2]);
    }
    Ok(())
}
