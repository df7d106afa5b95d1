//! Runs a named experiment preset (default `lshape-semilinear`) and prints the
//! headline numbers and the file manifest.
//!
//! ```bash
//! cargo run --release --example run_preset -- lshape-linear
//! ```

use cornerpde::experiment::{output_root, preset, run_experiment};

fn main() -> cornerpde::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "lshape-semilinear".into());
    let cfg = preset(&name)?;
    let report = run_experiment(&cfg, &output_root(), 1)?;
    for c in &report.pencil {
        println!("corner {} (θ = {:.4}): linear weights {}", c.vertex, c.theta, c.summary.weight_interval_linear);
    }
    for r in &report.energy_rates {
        println!("{:?} energy rate {:.3}", r.family, r.rate);
    }
    if let Some(s) = &report.smoothness {
        println!("sobolev rate {:.3}, N-term slope {:.3}, gap {:.3}", s.sobolev_rate, s.nterm_slope, s.gap);
    }
    if let Some(s) = &report.semilinear {
        println!("Picard: {} iterates, last residual {:.2e}", s.log.iterations(), s.log.last_residual().unwrap_or(0.0));
    }
    for t in &report.timings {
        println!("{:>16}: {:.3}s", t.stage, t.seconds);
    }
    for e in &report.manifest {
        println!("{}  {}", &e.sha256[..16], e.file);
    }
    Ok(())
}
