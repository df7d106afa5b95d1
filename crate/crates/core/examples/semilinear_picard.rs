//! Picard iteration for `u_t − Δu + ε u² = f` on the L-shape: smallness bound,
//! ball radius and contraction at half the admissible ε, then the warning path
//! far beyond it.
//!
//! ```bash
//! cargo run --release --example semilinear_picard
//! ```

use cornerpde::domain::PolygonalDomain;
use cornerpde::mesh::mesh_uniform;
use cornerpde::pde::{
    data_norm, estimate_operator_norm, smallness_check, solve_semilinear, ParabolicProblem, SemilinearConfig, Source,
};
use cornerpde::Error;

fn main() -> cornerpde::Result<()> {
    let l = PolygonalDomain::l_shape();
    let mesh = mesh_uniform(&l, 1.0 / 16.0)?;
    let problem = ParabolicProblem::heat(l, Source::Constant(1.0), 1.0);
    let n_steps = 20;
    let eta_tilde = data_norm(&problem, &mesh, n_steps)?;
    let op = estimate_operator_norm(&problem, &mesh, n_steps, 4, 7)?;
    let mut cfg = SemilinearConfig {
        eps: 0.0,
        power: 2,
        r0: 2.0,
        eta_tilde,
        op_norm: op.estimate,
        max_iter: 30,
        tol: 1e-10,
    };
    let bound = smallness_check(&cfg)?;
    println!("eta~ = {eta_tilde:.4}, |L^-1| ~ {:.4}, R = {:.4}, max eps = {:.4}", op.estimate, bound.radius, bound.max_eps);

    cfg.eps = 0.5 * bound.max_eps;
    let (_, log) = solve_semilinear(&problem, &mesh, n_steps, &cfg)?;
    for r in &log.iterates {
        println!("  iterate {:2}: residual {:.3e}, distance to linear {:.4}, in ball {}", r.index, r.residual, r.distance_to_linear, r.in_ball);
    }
    println!("contraction factor {:.4}", log.contraction_factor().unwrap_or(0.0));

    cfg.eps = 100.0 * bound.max_eps;
    match solve_semilinear(&problem, &mesh, n_steps, &cfg) {
        Err(Error::NonConvergence(log)) => println!("eps = 100·max: no convergence after {} iterates, warnings {:?}", log.iterations(), log.warnings),
        Ok((_, log)) => println!("eps = 100·max: converged anyway, warnings {:?}", log.warnings),
        Err(e) => return Err(e),
    }
    Ok(())
}
