//! Weighted and unweighted Sobolev-type norms of P1 fields by element
//! quadrature.

use serde::{Deserialize, Serialize};

use crate::domain::{Point, WeightFunction};
use crate::error::{Error, Result};
use crate::field::FieldSnapshot;
use crate::quadrature::{
    element_points_toward, geometric_subdivision, shape_gradients, shape_values, ElementMap, TriangleRule,
};

/// Exponents of the weighted norm `Σ_{|α|≤m} ∫ ρ^{p(|α|−a)} |D^α u|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KondratievParams {
    pub m: usize,
    pub p: f64,
    pub a: f64,
}

impl KondratievParams {
    pub fn new(m: usize, p: f64, a: f64) -> Result<Self> {
        let params = Self { m, p, a };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Parameter(format!("integrability p = {} must lie in (1, ∞)", self.p)));
        }
        if !self.a.is_finite() {
            return Err(Error::Parameter("weight exponent a must be finite".into()));
        }
        check_order(self.m)
    }
}

/// Per-element Gauss order and number of geometric refinement levels toward
/// singular vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub order: usize,
    pub depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { order: 4, depth: 8 }
    }
}

fn check_order(m: usize) -> Result<()> {
    if m > 1 {
        return Err(Error::Capability(format!(
            "derivatives of order {m} are not available for piecewise linear fields"
        )));
    }
    Ok(())
}

/// `∫ g(x, u, ∇u)` with refinement toward the listed points.
fn integrate(
    field: &FieldSnapshot<'_>,
    quad: &QuadratureConfig,
    singular: &[Point],
    integrand: impl Fn(Point, f64, [f64; 2]) -> f64,
) -> f64 {
    let mesh = field.mesh;
    let rule = TriangleRule::collapsed(quad.order);
    let whole = geometric_subdivision(&[], 0);
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let map = ElementMap::new(mesh, t);
        let verts = map.vertices();
        let tol = 1e-12 * mesh.diameter(t);
        let local: Vec<usize> = (0..3)
            .filter(|&k| singular.iter().any(|s| (verts[k][0] - s[0]).hypot(verts[k][1] - s[1]) <= tol))
            .collect();
        let refined;
        let sub = if local.is_empty() {
            &whole
        } else {
            refined = geometric_subdivision(&local, quad.depth);
            &refined
        };
        let apex = local.first().copied().or(mesh.curved_edge(t).map(|c| c.local_edge as usize));
        let u = [field.values[tri[0]], field.values[tri[1]], field.values[tri[2]]];
        for (xi, x, w) in element_points_toward(&map, &rule, sub, apex) {
            let phi = shape_values(xi);
            let grads = shape_gradients(&map.jacobian(xi));
            let value = phi[0] * u[0] + phi[1] * u[1] + phi[2] * u[2];
            let grad = [
                grads[0][0] * u[0] + grads[1][0] * u[1] + grads[2][0] * u[2],
                grads[0][1] * u[0] + grads[1][1] * u[1] + grads[2][1] * u[2],
            ];
            total += w * integrand(x, value, grad);
        }
    }
    total
}

pub fn kondratiev_norm(
    field: &FieldSnapshot<'_>,
    params: &KondratievParams,
    weight: &WeightFunction<'_>,
    quad: &QuadratureConfig,
) -> Result<f64> {
    params.validate()?;
    let domain = weight.domain();
    let singular: Vec<Point> = domain.singular_points().collect();
    let KondratievParams { m, p, a } = *params;
    let sum = integrate(field, quad, &singular, |x, u, g| {
        let rho = weight.eval_unchecked(x);
        let mut v = rho.powf(-p * a) * u.abs().powf(p);
        if m == 1 {
            v += rho.powf(p * (1.0 - a)) * (g[0].abs().powf(p) + g[1].abs().powf(p));
        }
        v
    });
    Ok(sum.powf(1.0 / p))
}

/// Unweighted `H^m` norm, `m ∈ {0, 1}`.
pub fn sobolev_norm(field: &FieldSnapshot<'_>, m: usize) -> Result<f64> {
    check_order(m)?;
    let sum = integrate(field, &QuadratureConfig::default(), &[], |_, u, g| {
        u * u + if m == 1 { g[0] * g[0] + g[1] * g[1] } else { 0.0 }
    });
    Ok(sum.sqrt())
}

/// `‖u_h − u‖_{L₂}` against a pointwise exact function.
pub fn l2_error(field: &FieldSnapshot<'_>, exact: impl Fn(Point) -> f64, quad: &QuadratureConfig) -> f64 {
    integrate(field, quad, &[], |x, u, _| (u - exact(x)).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PolygonalDomain;
    use crate::mesh::mesh_uniform;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_on_square() {
        let sq = PolygonalDomain::unit_square();
        let mesh = mesh_uniform(&sq, 0.25).unwrap();
        let one = FieldSnapshot::interpolate(&mesh, |_| 1.0);
        let k = kondratiev_norm(&one, &KondratievParams::new(0, 2.0, 0.0).unwrap(), &sq.weight(), &Default::default());
        assert!((k.unwrap() - 1.0).abs() < 1e-14);
        assert!((sobolev_norm(&one, 0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_field_h1_norm() {
        let sq = PolygonalDomain::unit_square();
        let mesh = mesh_uniform(&sq, 0.25).unwrap();
        let x = FieldSnapshot::interpolate(&mesh, |p| p[0]);
        let want = (1.0f64 / 3.0 + 1.0).sqrt();
        assert!((sobolev_norm(&x, 1).unwrap() - want).abs() < 1e-13);
        assert!(sobolev_norm(&x, 1).unwrap() >= sobolev_norm(&x, 0).unwrap());
        assert!(matches!(sobolev_norm(&x, 2), Err(Error::Capability(_))));
    }

    #[test]
    fn radial_power_weights_match_closed_forms() {
        let theta = 1.5 * PI;
        let d = PolygonalDomain::sector(theta, 1.0).unwrap();
        let mesh = mesh_uniform(&d, 1.0 / 8.0).unwrap();
        let one = FieldSnapshot::interpolate(&mesh, |_| 1.0);
        // ∫ ρ^{-2a} = θ / (2 - 2a) on the unit sector
        for a in [-1.0, -0.5, 0.25] {
            let params = KondratievParams::new(0, 2.0, a).unwrap();
            let k = kondratiev_norm(&one, &params, &d.weight(), &Default::default()).unwrap();
            let want = (theta / (2.0 - 2.0 * a)).sqrt();
            assert!((k - want).abs() / want < 1e-6, "a = {a}: {k} vs {want}");
        }
    }

    #[test]
    fn rejects_second_derivatives() {
        assert!(matches!(KondratievParams::new(2, 2.0, 0.0), Err(Error::Capability(_))));
        assert!(KondratievParams::new(0, 1.0, 0.0).is_err());
    }

    #[test]
    fn unweighted_bound_by_l2() {
        // a = 0, m = 0: the norm lies between min ρ·‖u‖ and ‖u‖
        let d = PolygonalDomain::l_shape();
        let mesh = mesh_uniform(&d, 0.25).unwrap();
        let u = FieldSnapshot::interpolate(&mesh, |p| (1.0 - p[0] * p[0]) * (1.0 - p[1] * p[1]));
        let k = kondratiev_norm(&u, &KondratievParams::new(0, 2.0, 0.0).unwrap(), &d.weight(), &Default::default());
        let l2 = sobolev_norm(&u, 0).unwrap();
        assert!((k.unwrap() - l2).abs() < 1e-12 * l2);
    }
}
