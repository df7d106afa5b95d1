//! Heat equation on the L-shape with `f ≡ 1`: the re-entrant corner caps the
//! uniform energy rate near 2/3, grading toward the corner restores about 1.
//!
//! ```bash
//! cargo run --release --example corner_singularity
//! ```

use cornerpde::domain::PolygonalDomain;
use cornerpde::mesh::{mesh_graded, mesh_uniform, Mesh};
use cornerpde::pde::{ParabolicProblem, RotheSolver, Source};
use cornerpde::smoothness::energy_self_convergence;

fn energy(problem: &ParabolicProblem, mesh: &Mesh) -> cornerpde::Result<f64> {
    let solver = RotheSolver::new(problem, mesh, 30)?;
    let u = solver.solve_source(&problem.source)?;
    Ok(solver.operators().stiffness.quad_form(u.terminal()))
}

fn main() -> cornerpde::Result<()> {
    let l = PolygonalDomain::l_shape();
    let problem = ParabolicProblem::heat(l.clone(), Source::Constant(1.0), 3.0);
    let n: Vec<usize> = vec![8, 16, 32, 64, 128];
    let widths: Vec<f64> = n.iter().map(|&n| 1.0 / n as f64).collect();

    let mut uniform = Vec::new();
    let mut graded = Vec::new();
    for (&n, &h) in n.iter().zip(&widths) {
        uniform.push(energy(&problem, &mesh_uniform(&l, h)?)?);
        graded.push(energy(&problem, &mesh_graded(&l, n, 2.0 / 3.0)?)?);
        println!("n = {n:4}  E_uniform = {:.10}  E_graded = {:.10}", uniform.last().unwrap(), graded.last().unwrap());
    }
    let (ru, _) = energy_self_convergence(&widths, &uniform)?;
    let (rg, _) = energy_self_convergence(&widths, &graded)?;
    println!("energy rate: uniform {ru:.3}, graded (mu = 2/3) {rg:.3}");
    Ok(())
}
