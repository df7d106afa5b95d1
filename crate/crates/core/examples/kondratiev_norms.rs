//! Weighted Kondratiev norms of the corner singularity `r^{2/3} sin(2φ/3)` on
//! the 3π/2 sector for several weight exponents, with the quadrature depth
//! doubled as a stability check.
//!
//! ```bash
//! cargo run --release --example kondratiev_norms
//! ```

use std::f64::consts::PI;

use cornerpde::domain::PolygonalDomain;
use cornerpde::field::FieldSnapshot;
use cornerpde::mesh::mesh_uniform;
use cornerpde::smoothness::{kondratiev_norm, sobolev_norm, KondratievParams, QuadratureConfig};

fn main() -> cornerpde::Result<()> {
    let theta = 1.5 * PI;
    let d = PolygonalDomain::sector(theta, 1.0)?;
    let mesh = mesh_uniform(&d, 1.0 / 16.0)?;
    let u = FieldSnapshot::interpolate(&mesh, |x| {
        let (r, phi) = (x[0].hypot(x[1]), x[1].atan2(x[0]) + 0.5 * theta);
        r.powf(2.0 / 3.0) * (2.0 * phi / 3.0).sin()
    });
    println!("L2 {:.6}  H1 {:.6}", sobolev_norm(&u, 0)?, sobolev_norm(&u, 1)?);
    for a in [-1.0, -0.5, 0.0, 0.5] {
        let params = KondratievParams::new(1, 2.0, a)?;
        let k8 = kondratiev_norm(&u, &params, &d.weight(), &QuadratureConfig { order: 4, depth: 8 })?;
        let k16 = kondratiev_norm(&u, &params, &d.weight(), &QuadratureConfig { order: 4, depth: 16 })?;
        println!("a = {a:5.2}: K^1_(2,a) = {k8:.8}  (depth 16: {k16:.8})");
    }
    Ok(())
}
