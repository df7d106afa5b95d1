//! Manufactured heat problem on the unit square: implicit Euler in time,
//! P1 elements in space, `Δt = h²`, L₂ error at the final time.
//!
//! ```bash
//! cargo run --release --example heat_convergence
//! ```

use cornerpde::domain::PolygonalDomain;
use cornerpde::experiment::{manufactured_solution, manufactured_source};
use cornerpde::field::FieldSnapshot;
use cornerpde::mesh::mesh_uniform;
use cornerpde::pde::{solve_linear, ParabolicProblem, Source};
use cornerpde::smoothness::{fit_loglog, l2_error, QuadratureConfig};

fn main() -> cornerpde::Result<()> {
    let horizon = 0.25;
    let square = PolygonalDomain::unit_square();
    let problem = ParabolicProblem::heat(square.clone(), Source::function(manufactured_source), horizon);
    let (mut hs, mut errors) = (Vec::new(), Vec::new());
    for k in 3..=6 {
        let h = 1.0 / f64::from(1u32 << k);
        let mesh = mesh_uniform(&square, h)?;
        let n_steps = (horizon / (h * h)).round() as usize;
        let u = solve_linear(&problem, &mesh, n_steps)?;
        let snap = FieldSnapshot::new(&mesh, u.terminal().to_vec());
        let e = l2_error(&snap, |x| manufactured_solution(horizon, x), &QuadratureConfig::default());
        println!("h = 1/{:<3} steps = {n_steps:5}  L2 error = {e:.4e}", 1 << k);
        hs.push(h);
        errors.push(e);
    }
    let fit = fit_loglog(&hs, &errors)?;
    println!("observed order {:.3}", fit.slope);
    Ok(())
}
