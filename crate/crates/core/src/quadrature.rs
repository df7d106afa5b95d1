//! Gauss rules on the reference triangle and element geometry maps.

use crate::domain::Point;
use crate::mesh::{CurvedEdge, Mesh};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Quadrature on the reference triangle `(0,0), (1,0), (0,1)`; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed (Duffy) product of `n`-point Gauss rules; exact for total
    /// degree `2n - 2`.
    pub fn collapsed(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (xu, wu) in x.iter().zip(&w) {
            let u = 0.5 * (xu + 1.0);
            for (xv, wv) in x.iter().zip(&w) {
                let v = 0.5 * (xv + 1.0);
                points.push([u * (1.0 - v), v]);
                weights.push(0.25 * wu * wv * (1.0 - v));
            }
        }
        Self { points, weights }
    }

    /// The rule transported to the sub-triangle `tri` of the reference element.
    fn on_subtriangle(&self, tri: &[[f64; 2]; 3]) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let [a, b, c] = *tri;
        let (e1, e2) = ([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]);
        let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
        self.points.iter().zip(&self.weights).map(move |(p, w)| {
            (
                [a[0] + p[0] * e1[0] + p[1] * e2[0], a[1] + p[0] * e1[1] + p[1] * e2[1]],
                w * det,
            )
        })
    }
}

const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn mid(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Reference sub-triangles refined geometrically (ratio 1/2, `depth` levels)
/// toward each listed local vertex.
pub fn geometric_subdivision(singular_local: &[usize], depth: usize) -> Vec<[[f64; 2]; 3]> {
    let mut tris = vec![REF_VERTICES];
    for &v in singular_local {
        let corner = REF_VERTICES[v];
        let mut next = Vec::new();
        for tri in tris {
            let Some(k) = tri.iter().position(|p| p == &corner) else {
                next.push(tri);
                continue;
            };
            let (mut a, mut b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            for _ in 0..depth {
                let (a2, b2) = (mid(corner, a), mid(corner, b));
                next.push([a2, a, b]);
                next.push([a2, b, b2]);
                a = a2;
                b = b2;
            }
            next.push([corner, a, b]);
        }
        tris = next;
    }
    tris
}

/// Map from the reference triangle onto a mesh element, with exact arc
/// geometry for elements carrying a curved boundary edge.
#[derive(Debug, Clone, Copy)]
pub struct ElementMap {
    verts: [Point; 3],
    curved: Option<CurvedEdge>,
}

impl ElementMap {
    pub fn new(mesh: &Mesh, t: usize) -> Self {
        Self {
            verts: mesh.vertices_of(t),
            curved: mesh.curved_edge(t),
        }
    }

    pub fn straight(verts: [Point; 3]) -> Self {
        Self { verts, curved: None }
    }

    pub fn is_affine(&self) -> bool {
        self.curved.is_none()
    }

    pub fn vertices(&self) -> [Point; 3] {
        self.verts
    }

    fn arc_terms(&self, c: &CurvedEdge, lam: [f64; 3]) -> (usize, usize, usize, [f64; 2], [f64; 2], f64) {
        let e = c.local_edge as usize;
        let (ia, ib) = ((e + 1) % 3, (e + 2) % 3);
        let (pa, pb) = (self.verts[ia], self.verts[ib]);
        let phi_a = (pa[1] - c.center[1]).atan2(pa[0] - c.center[0]);
        let phi_b = (pb[1] - c.center[1]).atan2(pb[0] - c.center[0]);
        let mut dphi = phi_b - phi_a;
        if dphi > std::f64::consts::PI {
            dphi -= 2.0 * std::f64::consts::PI;
        } else if dphi < -std::f64::consts::PI {
            dphi += 2.0 * std::f64::consts::PI;
        }
        let sigma = lam[ia] + lam[ib];
        let s = if sigma > 1e-300 { lam[ib] / sigma } else { 0.5 };
        let phi = phi_a + s * dphi;
        let gamma = [c.center[0] + c.radius * phi.cos(), c.center[1] + c.radius * phi.sin()];
        let g = [
            gamma[0] - ((1.0 - s) * pa[0] + s * pb[0]),
            gamma[1] - ((1.0 - s) * pa[1] + s * pb[1]),
        ];
        let dg = [
            -c.radius * dphi * phi.sin() - (pb[0] - pa[0]),
            c.radius * dphi * phi.cos() - (pb[1] - pa[1]),
        ];
        (e, ia, ib, g, dg, s)
    }

    pub fn map(&self, xi: [f64; 2]) -> Point {
        let [p0, p1, p2] = self.verts;
        let mut x = [
            p0[0] + xi[0] * (p1[0] - p0[0]) + xi[1] * (p2[0] - p0[0]),
            p0[1] + xi[0] * (p1[1] - p0[1]) + xi[1] * (p2[1] - p0[1]),
        ];
        if let Some(c) = self.curved {
            let lam = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
            let (_, ia, ib, g, _, _) = self.arc_terms(&c, lam);
            let sigma = lam[ia] + lam[ib];
            x[0] += sigma * g[0];
            x[1] += sigma * g[1];
        }
        x
    }

    /// Columns are `∂x/∂ξ` and `∂x/∂η`.
    pub fn jacobian(&self, xi: [f64; 2]) -> [[f64; 2]; 2] {
        let [p0, p1, p2] = self.verts;
        let mut j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        if let Some(c) = self.curved {
            let lam = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
            let (e, ia, ib, g, dg, s) = self.arc_terms(&c, lam);
            // derivatives of σ·g(s) with respect to the barycentric coordinates
            let mut d = [[0.0; 2]; 3];
            d[ia] = [g[0] - s * dg[0], g[1] - s * dg[1]];
            d[ib] = [g[0] + (1.0 - s) * dg[0], g[1] + (1.0 - s) * dg[1]];
            d[e] = [0.0, 0.0];
            for r in 0..2 {
                j[r][0] += d[1][r] - d[0][r];
                j[r][1] += d[2][r] - d[0][r];
            }
        }
        j
    }
}

pub fn det2(j: &[[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// Physical gradients of the three P1 shape functions at a reference point.
pub fn shape_gradients(j: &[[f64; 2]; 2]) -> [[f64; 2]; 3] {
    let det = det2(j);
    // J^{-T} applied to reference gradients (-1,-1), (1,0), (0,1)
    let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
    let apply = |g: [f64; 2]| {
        [
            inv_t[0][0] * g[0] + inv_t[0][1] * g[1],
            inv_t[1][0] * g[0] + inv_t[1][1] * g[1],
        ]
    };
    [apply([-1.0, -1.0]), apply([1.0, 0.0]), apply([0.0, 1.0])]
}

pub fn shape_values(xi: [f64; 2]) -> [f64; 3] {
    [1.0 - xi[0] - xi[1], xi[0], xi[1]]
}

/// Quadrature points of an element: `(reference point, physical point, weight·|det J|)`.
pub fn element_points<'a>(
    map: &'a ElementMap,
    rule: &'a TriangleRule,
    subdivision: &'a [[[f64; 2]; 3]],
) -> impl Iterator<Item = ([f64; 2], Point, f64)> + 'a {
    // the blending term is only Lipschitz at the vertex opposite the arc, so
    // the collapsed vertex of the rule is placed there
    let apex = map.curved.map(|c| c.local_edge as usize);
    element_points_toward(map, rule, subdivision, apex)
}

/// As [`element_points`], with the collapsed vertex of the rule moved onto
/// local vertex `apex` in every sub-triangle that touches it.
pub fn element_points_toward<'a>(
    map: &'a ElementMap,
    rule: &'a TriangleRule,
    subdivision: &'a [[[f64; 2]; 3]],
    apex: Option<usize>,
) -> impl Iterator<Item = ([f64; 2], Point, f64)> + 'a {
    let apex = apex.map(|k| REF_VERTICES[k]);
    subdivision.iter().flat_map(move |tri| {
        let tri = match apex.and_then(|p| tri.iter().position(|v| *v == p)) {
            Some(k) => [tri[(k + 1) % 3], tri[(k + 2) % 3], tri[k]],
            None => *tri,
        };
        rule.on_subtriangle(&tri).map(move |(xi, w)| {
            let jac = map.jacobian(xi);
            (xi, map.map(xi), w * det2(&jac).abs())
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PolygonalDomain;
    use crate::mesh::mesh_uniform;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn collapsed_rule_is_exact() {
        let rule = TriangleRule::collapsed(4);
        // ∫ ξ^a η^b over the reference triangle = a! b! / (a+b+2)!
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        for a in 0..=6u32 {
            for b in 0..=(6 - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn subdivision_preserves_area() {
        for sing in [vec![], vec![0], vec![2], vec![0, 1, 2]] {
            let tris = geometric_subdivision(&sing, 8);
            let area: f64 = tris
                .iter()
                .map(|[a, b, c]| 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])))
                .sum();
            assert!((area - 0.5).abs() < 1e-14);
            assert!(tris.iter().all(|[a, b, c]| (b[0] - a[0]) * (c[1] - a[1]) > (c[0] - a[0]) * (b[1] - a[1])));
        }
    }

    #[test]
    fn curved_sector_area_is_exact() {
        let theta = 1.5 * std::f64::consts::PI;
        let d = PolygonalDomain::sector(theta, 1.0).unwrap();
        let mesh = mesh_uniform(&d, 0.25).unwrap();
        let rule = TriangleRule::collapsed(6);
        let sub = geometric_subdivision(&[], 0);
        let mut area = 0.0;
        for t in 0..mesh.n_triangles() {
            let map = ElementMap::new(&mesh, t);
            area += element_points(&map, &rule, &sub).map(|(_, _, w)| w).sum::<f64>();
        }
        assert!((area - 0.5 * theta).abs() < 1e-9, "{area}");
    }

    #[test]
    fn curved_map_hits_vertices_and_arc() {
        let d = PolygonalDomain::sector(std::f64::consts::PI, 2.0).unwrap();
        let mesh = mesh_uniform(&d, 1.0).unwrap();
        let t = (0..mesh.n_triangles()).find(|&t| mesh.curved_edge(t).is_some()).unwrap();
        let map = ElementMap::new(&mesh, t);
        for (k, xi) in REF_VERTICES.iter().enumerate() {
            let x = map.map(*xi);
            assert!((x[0] - map.vertices()[k][0]).abs() < 1e-14 && (x[1] - map.vertices()[k][1]).abs() < 1e-14);
        }
        let e = mesh.curved_edge(t).unwrap().local_edge as usize;
        let (a, b) = (REF_VERTICES[(e + 1) % 3], REF_VERTICES[(e + 2) % 3]);
        let x = map.map(mid(a, b));
        assert!((x[0].hypot(x[1]) - 2.0).abs() < 1e-14);
        // analytic Jacobian against central differences
        let xi = [0.3, 0.25];
        let j = map.jacobian(xi);
        let h = 1e-6;
        for c in 0..2 {
            let mut p = xi;
            let mut m = xi;
            p[c] += h;
            m[c] -= h;
            let (xp, xm) = (map.map(p), map.map(m));
            for r in 0..2 {
                assert!(((xp[r] - xm[r]) / (2.0 * h) - j[r][c]).abs() < 1e-8);
            }
        }
    }
}
