//! Best N-term approximation in the hierarchical P1 basis against uniform
//! refinement for the L-shape heat solution. The N-term slope exceeding the
//! uniform slope per degree of freedom is the adaptivity gain.
//!
//! ```bash
//! cargo run --release --example adaptivity_gap
//! ```

use cornerpde::domain::PolygonalDomain;
use cornerpde::field::FieldSnapshot;
use cornerpde::mesh::{mesh_uniform, Mesh};
use cornerpde::pde::{solve_linear, ParabolicProblem, Source};
use cornerpde::smoothness::{estimate_rates, nterm_sequence, successive_l2_differences};

fn main() -> cornerpde::Result<()> {
    let l = PolygonalDomain::l_shape();
    let problem = ParabolicProblem::heat(l.clone(), Source::Constant(1.0), 3.0);
    let widths: Vec<f64> = (2..=7).map(|k| 1.0 / f64::from(1u32 << k)).collect();
    let meshes: Vec<Mesh> = widths.iter().map(|&h| mesh_uniform(&l, h)).collect::<cornerpde::Result<_>>()?;
    let terminals: Vec<Vec<f64>> = meshes
        .iter()
        .map(|m| solve_linear(&problem, m, 30).map(|u| u.terminal().to_vec()))
        .collect::<cornerpde::Result<_>>()?;
    let snaps: Vec<FieldSnapshot<'_>> = meshes.iter().zip(&terminals).map(|(m, u)| FieldSnapshot::new(m, u.clone())).collect();
    let diffs = successive_l2_differences(&snaps, &widths)?;
    let refs: Vec<&Mesh> = meshes.iter().collect();
    let finest = meshes.last().unwrap().n_nodes();
    let nterm = nterm_sequence(&refs, terminals.last().unwrap(), 16, finest / 8, 10)?;
    for (n, s) in &nterm {
        println!("N = {n:6}  sigma_N = {s:.4e}");
    }
    let r = estimate_rates(&diffs[diffs.len() - 4..], &nterm, 2, 2.0)?;
    println!(
        "uniform slope {:.3} (per dof {:.3}), N-term slope {:.3}, gap {:.3}, Besov gamma ~ {:.3}, tau = {:.3}",
        r.sobolev_rate,
        r.sobolev_rate / 2.0,
        r.nterm_slope,
        r.gap,
        r.besov_gamma_est,
        r.tau
    );
    Ok(())
}
