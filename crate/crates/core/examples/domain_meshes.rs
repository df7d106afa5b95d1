//! Corner domains, the distance weight and uniform versus graded meshes.
//! Writes VTK files of both L-shape meshes into `$CORNERPDE_OUT/meshes`.
//!
//! ```bash
//! cargo run --release --example domain_meshes
//! ```

use std::f64::consts::PI;

use cornerpde::domain::{default_grading_exponent, PolygonalDomain};
use cornerpde::experiment::output_root;
use cornerpde::mesh::{mesh_graded, mesh_uniform};

fn main() -> cornerpde::Result<()> {
    let domains = [
        ("quarter disc", PolygonalDomain::sector(0.5 * PI, 1.0)?),
        ("slit disc", PolygonalDomain::sector(2.0 * PI, 1.0)?),
        ("L-shape", PolygonalDomain::l_shape()),
    ];
    for (name, d) in &domains {
        println!(
            "{name:>12}: area {:.4}, convex {}, re-entrant vertices {:?}, rho(0.3, 0.1) = {:.3}",
            d.area(),
            d.is_convex(),
            d.re_entrant_vertices(),
            d.weight().eval([0.3, 0.1]).unwrap_or(f64::NAN),
        );
    }

    let l = PolygonalDomain::l_shape();
    let mu = default_grading_exponent(l.max_interior_angle());
    let uniform = mesh_uniform(&l, 1.0 / 16.0)?;
    let graded = mesh_graded(&l, 16, mu)?;
    for (name, m) in [("uniform", &uniform), ("graded", &graded)] {
        println!(
            "{name:>8}: {} nodes, {} triangles, smallest element at the corner {:.2e}, min angle {:.1}°",
            m.n_nodes(),
            m.n_triangles(),
            m.min_diameter_at([0.0, 0.0]),
            m.min_angle().to_degrees(),
        );
    }

    let dir = output_root().join("meshes");
    std::fs::create_dir_all(&dir)?;
    let rho: Vec<f64> = graded.nodes().iter().map(|&x| l.rho_unchecked(x)).collect();
    uniform.write_vtk(&dir.join("lshape_uniform.vtk"), None)?;
    graded.write_vtk(&dir.join("lshape_graded.vtk"), Some(("rho", &rho)))?;
    println!("VTK files written to {}", dir.display());
    Ok(())
}
