//! Structured conforming triangulations of the corner domains.
//!
//! Two generator families exist: axis-aligned grids with a fixed diagonal
//! (rectangles and the L-shape) and ring fans for sectors, where ring `i`
//! carries `s·i` segments so elements stay shape-regular under radial grading.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{DomainKind, Point, PolygonalDomain};
use crate::error::{Error, Result};

/// Upper bound on generated node counts.
pub const NODE_BUDGET: usize = 2_000_000;

/// Radial grading toward a singular vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub mu: f64,
    pub center: Point,
    pub breakpoints: Vec<f64>,
}

/// A triangle edge that lies on a circular arc of the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvedEdge {
    /// Local edge index: edge `e` joins local vertices `(e+1)%3` and `(e+2)%3`.
    pub local_edge: u8,
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    curved: Vec<Option<CurvedEdge>>,
    grading: Option<Grading>,
}

/// r_i = (i/n)^{1/μ}, i = 0..=n.
pub fn graded_breakpoints(n_layers: usize, mu: f64) -> Vec<f64> {
    (0..=n_layers)
        .map(|i| (i as f64 / n_layers as f64).powf(1.0 / mu))
        .collect()
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mesh {
    /// Builds a mesh from raw arrays; boundary flags are derived from edges
    /// owned by a single triangle.
    pub fn from_parts(nodes: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= nodes.len())) {
            return Err(Error::Parameter(format!("triangle {t:?} references a missing node")));
        }
        let curved = vec![None; triangles.len()];
        let mut mesh = Self {
            nodes,
            triangles,
            boundary: Vec::new(),
            curved,
            grading: None,
        };
        mesh.boundary = mesh.boundary_from_edges();
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn curved_edge(&self, t: usize) -> Option<CurvedEdge> {
        self.curved[t]
    }

    pub fn grading(&self) -> Option<&Grading> {
        self.grading.as_ref()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_interior(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    pub fn vertices_of(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area of the straight triangle through the three vertices.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices_of(t);
        signed_area(a, b, c)
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices_of(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn max_edge(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = PI;
        for t in 0..self.n_triangles() {
            let v = self.vertices_of(t);
            for k in 0..3 {
                let (p, q, r) = (v[k], v[(k + 1) % 3], v[(k + 2) % 3]);
                let (u, w) = ([q[0] - p[0], q[1] - p[1]], [r[0] - p[0], r[1] - p[1]]);
                let cos = (u[0] * w[0] + u[1] * w[1]) / (u[0].hypot(u[1]) * w[0].hypot(w[1]));
                min = min.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        min
    }

    /// Smallest diameter among triangles incident to the node nearest `p`.
    pub fn min_diameter_at(&self, p: Point) -> f64 {
        (0..self.n_triangles())
            .filter(|&t| self.vertices_of(t).iter().any(|v| dist(*v, p) < 1e-12))
            .map(|t| self.diameter(t))
            .fold(f64::INFINITY, f64::min)
    }

    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::with_capacity(self.triangles.len() * 2);
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    fn boundary_from_edges(&self) -> Vec<bool> {
        let mut flags = vec![false; self.nodes.len()];
        for ((a, b), n) in self.edge_counts() {
            if n == 1 {
                flags[a] = true;
                flags[b] = true;
            }
        }
        flags
    }

    /// Checks conformity, orientation and boundary flags.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            let area = self.signed_area(t);
            if !(area > 0.0) {
                return Err(Error::Assembly(format!("triangle {t} has signed area {area}")));
            }
        }
        if let Some((e, n)) = self.edge_counts().into_iter().find(|(_, n)| *n > 2) {
            return Err(Error::Assembly(format!("edge {e:?} shared by {n} triangles")));
        }
        if self.boundary_from_edges() != self.boundary {
            return Err(Error::Assembly("boundary flags disagree with edge topology".into()));
        }
        Ok(())
    }

    /// Every single-owner edge must lie on the domain boundary; otherwise the
    /// mesh has a hanging node or a hole.
    pub fn check_against(&self, domain: &PolygonalDomain) -> Result<()> {
        let counts = self.edge_counts();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                if counts[&(a.min(b), a.max(b))] != 1 {
                    continue;
                }
                let (pa, pb) = (self.nodes[a], self.nodes[b]);
                let mut mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                if let Some(c) = self.curved[t].filter(|c| c.local_edge as usize == k) {
                    let (dx, dy) = (mid[0] - c.center[0], mid[1] - c.center[1]);
                    let s = c.radius / dx.hypot(dy);
                    mid = [c.center[0] + s * dx, c.center[1] + s * dy];
                }
                if !on_boundary(domain, mid) {
                    return Err(Error::Assembly(format!(
                        "boundary edge ({a},{b}) at {mid:?} is not on the domain boundary"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes `node,x,y,boundary` and `triangle,n0,n1,n2` tables.
    pub fn write_csv(&self, nodes_path: &Path, triangles_path: &Path) -> Result<()> {
        std::fs::write(nodes_path, self.nodes_csv())?;
        std::fs::write(triangles_path, self.triangles_csv())?;
        Ok(())
    }

    pub fn nodes_csv(&self) -> String {
        let mut s = String::from("node,x,y,boundary\n");
        for (i, (p, b)) in self.nodes.iter().zip(&self.boundary).enumerate() {
            let _ = writeln!(s, "{i},{:.16e},{:.16e},{}", p[0], p[1], u8::from(*b));
        }
        s
    }

    pub fn triangles_csv(&self) -> String {
        let mut s = String::from("triangle,n0,n1,n2\n");
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(s, "{i},{},{},{}", t[0], t[1], t[2]);
        }
        s
    }

    /// Reads the two tables written by [`Mesh::write_csv`].
    pub fn read_csv(nodes_path: &Path, triangles_path: &Path) -> Result<Self> {
        let mut nodes = Vec::new();
        for rec in csv::Reader::from_path(nodes_path)?.records() {
            let rec = rec?;
            nodes.push([parse_field(&rec, 1)?, parse_field(&rec, 2)?]);
        }
        let mut triangles = Vec::new();
        for rec in csv::Reader::from_path(triangles_path)?.records() {
            let rec = rec?;
            let idx = |k: usize| -> Result<usize> {
                rec.get(k)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Parameter(format!("bad triangle record {rec:?}")))
            };
            triangles.push([idx(1)?, idx(2)?, idx(3)?]);
        }
        Self::from_parts(nodes, triangles)
    }

    /// Legacy ASCII VTK unstructured grid, optionally with one point field.
    pub fn to_vtk(&self, field: Option<(&str, &[f64])>) -> String {
        let mut s = String::from("# vtk DataFile Version 3.0\ncornerpde mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
        let _ = writeln!(s, "POINTS {} double", self.n_nodes());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
        }
        let _ = writeln!(s, "CELLS {} {}", self.n_triangles(), 4 * self.n_triangles());
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "CELL_TYPES {}", self.n_triangles());
        for _ in &self.triangles {
            s.push_str("5\n");
        }
        if let Some((name, values)) = field {
            let _ = writeln!(s, "POINT_DATA {}\nSCALARS {name} double 1\nLOOKUP_TABLE default", self.n_nodes());
            for v in values {
                let _ = writeln!(s, "{v:.16e}");
            }
        }
        s
    }

    pub fn write_vtk(&self, path: &Path, field: Option<(&str, &[f64])>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_vtk(field).as_bytes())?;
        Ok(())
    }
}

fn parse_field(rec: &csv::StringRecord, k: usize) -> Result<f64> {
    rec.get(k)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Parameter(format!("bad numeric field {k} in {rec:?}")))
}

fn on_boundary(domain: &PolygonalDomain, x: Point) -> bool {
    const TOL: f64 = 1e-9;
    match domain.kind() {
        DomainKind::Sector { theta, radius } => {
            let r = x[0].hypot(x[1]);
            if (r - radius).abs() < TOL * radius.max(1.0) || r < TOL {
                return true;
            }
            let phi = x[1].atan2(x[0]);
            (phi.abs() - 0.5 * theta).abs() < TOL
                || (theta >= 2.0 * PI - TOL && (phi.abs() - PI).abs() < TOL)
        }
        DomainKind::Rectangle { min, max } => {
            (x[0] - min[0]).abs() < TOL
                || (x[0] - max[0]).abs() < TOL
                || (x[1] - min[1]).abs() < TOL
                || (x[1] - max[1]).abs() < TOL
        }
        DomainKind::LShape => {
            (x[0].abs() - 1.0).abs() < TOL
                || (x[1].abs() - 1.0).abs() < TOL
                || (x[0].abs() < TOL && x[1] <= TOL)
                || (x[1].abs() < TOL && x[0] >= -TOL)
        }
    }
}

fn check_budget(n: usize) -> Result<()> {
    if n > NODE_BUDGET {
        return Err(Error::Resource(format!(
            "mesh would need {n} nodes, budget is {NODE_BUDGET}"
        )));
    }
    Ok(())
}

fn cells_along(extent: f64, h: f64) -> Result<usize> {
    let n = extent / h;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::Parameter(format!(
            "mesh width {h} does not divide the domain extent {extent}"
        )));
    }
    Ok(rounded as usize)
}

/// Axis-aligned grid over `[min, max]` keeping cells whose centres lie in the
/// domain; each cell is split along its rising diagonal. Nodes are numbered
/// row by row so the stiffness profile stays narrow.
fn grid_mesh(domain: &PolygonalDomain, min: Point, max: Point, h: f64) -> Result<Mesh> {
    let nx = cells_along(max[0] - min[0], h)?;
    let ny = cells_along(max[1] - min[1], h)?;
    check_budget((nx + 1).saturating_mul(ny + 1))?;
    let hx = (max[0] - min[0]) / nx as f64;
    let hy = (max[1] - min[1]) / ny as f64;
    let coord = |i: usize, j: usize| [min[0] + i as f64 * hx, min[1] + j as f64 * hy];

    let active = |i: usize, j: usize| {
        let c = coord(i, j);
        domain.contains([c[0] + 0.5 * hx, c[1] + 0.5 * hy])
    };
    let mut used = vec![false; (nx + 1) * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            if active(i, j) {
                for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    used[(j + dj) * (nx + 1) + i + di] = true;
                }
            }
        }
    }
    let mut index = vec![usize::MAX; used.len()];
    let mut nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let g = j * (nx + 1) + i;
            if used[g] {
                index[g] = nodes.len();
                nodes.push(coord(i, j));
            }
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            if !active(i, j) {
                continue;
            }
            let n00 = index[j * (nx + 1) + i];
            let n10 = index[j * (nx + 1) + i + 1];
            let n01 = index[(j + 1) * (nx + 1) + i];
            let n11 = index[(j + 1) * (nx + 1) + i + 1];
            triangles.push([n00, n10, n11]);
            triangles.push([n00, n11, n01]);
        }
    }
    Mesh::from_parts(nodes, triangles)
}

/// Number of segments on the first ring so that fan angles stay ≤ π/3.
fn base_segments(theta: f64) -> usize {
    ((theta / (PI / 3.0)) - 1e-9).ceil().max(1.0) as usize
}

fn ring_mesh(theta: f64, radius: f64, radii: &[f64]) -> Result<Mesh> {
    let n = radii.len() - 1;
    let s = base_segments(theta);
    let total = 1 + (1..=n).map(|i| s * i + 1).sum::<usize>();
    check_budget(total)?;

    let mut nodes = Vec::with_capacity(total);
    nodes.push([0.0, 0.0]);
    let mut ring_start = vec![0usize; n + 1];
    for (i, &r) in radii.iter().enumerate().skip(1) {
        ring_start[i] = nodes.len();
        let segs = s * i;
        for j in 0..=segs {
            let phi = -0.5 * theta + theta * j as f64 / segs as f64;
            nodes.push([r * phi.cos(), r * phi.sin()]);
        }
    }
    let id = |i: usize, j: usize| if i == 0 { 0 } else { ring_start[i] + j };

    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut curved = Vec::new();
    let push = |tri: [usize; 3], arc: Option<(usize, usize)>, triangles: &mut Vec<[usize; 3]>, curved: &mut Vec<Option<CurvedEdge>>, nodes: &[Point]| {
        let mut tri = tri;
        if signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]) < 0.0 {
            tri.swap(1, 2);
        }
        let info = arc.map(|(a, b)| {
            let k = (0..3)
                .find(|&k| {
                    let (p, q) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                    (p == a && q == b) || (p == b && q == a)
                })
                .expect("arc edge belongs to the triangle");
            CurvedEdge {
                local_edge: k as u8,
                center: [0.0, 0.0],
                radius,
            }
        });
        triangles.push(tri);
        curved.push(info);
    };

    for i in 1..=n {
        let on_arc = i == n;
        if i == 1 {
            for j in 0..s {
                let (a, b) = (id(1, j), id(1, j + 1));
                push([0, a, b], on_arc.then_some((a, b)), &mut triangles, &mut curved, &nodes);
            }
            continue;
        }
        for q in 0..s {
            let (inner_n, outer_n) = (i - 1, i);
            let (mut a, mut b) = (0usize, 0usize);
            while a < inner_n || b < outer_n {
                let advance_outer = if a == inner_n {
                    true
                } else if b == outer_n {
                    false
                } else {
                    // keep the new diagonal as short as possible
                    let via_outer = ((b + 1) as f64 / outer_n as f64 - a as f64 / inner_n as f64).abs();
                    let via_inner = (b as f64 / outer_n as f64 - (a + 1) as f64 / inner_n as f64).abs();
                    via_outer <= via_inner + 1e-12
                };
                let ia = id(i - 1, q * inner_n + a);
                let ob = id(i, q * outer_n + b);
                if advance_outer {
                    let ob1 = id(i, q * outer_n + b + 1);
                    push([ia, ob, ob1], on_arc.then_some((ob, ob1)), &mut triangles, &mut curved, &nodes);
                    b += 1;
                } else {
                    let ia1 = id(i - 1, q * inner_n + a + 1);
                    push([ia, ob, ia1], None, &mut triangles, &mut curved, &nodes);
                    a += 1;
                }
            }
        }
    }
    let mut mesh = Mesh::from_parts(nodes, triangles)?;
    mesh.curved = curved;
    Ok(mesh)
}

/// Quasi-uniform triangulation with maximal edge length of order `h`.
pub fn mesh_uniform(domain: &PolygonalDomain, h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Parameter(format!("mesh width {h} must be positive")));
    }
    match domain.kind() {
        DomainKind::Rectangle { min, max } => grid_mesh(domain, min, max, h),
        DomainKind::LShape => grid_mesh(domain, [-1.0, -1.0], [1.0, 1.0], h),
        DomainKind::Sector { theta, radius } => {
            let n = (radius / h - 1e-9).ceil().max(1.0);
            if n > NODE_BUDGET as f64 {
                return Err(Error::Resource(format!("{n} rings exceed the node budget")));
            }
            let n = n as usize;
            let radii: Vec<f64> = (0..=n).map(|i| radius * i as f64 / n as f64).collect();
            ring_mesh(theta, radius, &radii)
        }
    }
}

/// Triangulation with layer breakpoints `(i/n)^{1/μ}` toward the re-entrant
/// vertex (the apex for sectors). Domains without such a vertex get the
/// uniform mesh with `n` layers.
pub fn mesh_graded(domain: &PolygonalDomain, n_layers: usize, mu: f64) -> Result<Mesh> {
    if n_layers < 2 {
        return Err(Error::Parameter(format!("n_layers = {n_layers} must be at least 2")));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Parameter(format!("grading exponent {mu} outside (0, 1]")));
    }
    let breakpoints = graded_breakpoints(n_layers, mu);
    match domain.kind() {
        DomainKind::Sector { theta, radius } => {
            let radii: Vec<f64> = breakpoints.iter().map(|b| radius * b).collect();
            let mut mesh = ring_mesh(theta, radius, &radii)?;
            mesh.grading = Some(Grading {
                mu,
                center: [0.0, 0.0],
                breakpoints: radii,
            });
            Ok(mesh)
        }
        DomainKind::LShape => {
            let mut mesh = grid_mesh(domain, [-1.0, -1.0], [1.0, 1.0], 1.0 / n_layers as f64)?;
            // Square shells |x|_∞ = i/n are mapped onto |x|_∞ = (i/n)^{1/μ}.
            for p in &mut mesh.nodes {
                let r = p[0].abs().max(p[1].abs());
                if r > 0.0 {
                    let s = r.powf(1.0 / mu - 1.0);
                    *p = [p[0] * s, p[1] * s];
                }
            }
            mesh.grading = Some(Grading {
                mu,
                center: [0.0, 0.0],
                breakpoints,
            });
            Ok(mesh)
        }
        DomainKind::Rectangle { min, max } => {
            let h = (max[0] - min[0]).min(max[1] - min[1]) / n_layers as f64;
            grid_mesh(domain, min, max, h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn key(p: Point) -> (i64, i64) {
        ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64)
    }

    #[test]
    fn unit_square_quarter() {
        let m = mesh_uniform(&PolygonalDomain::unit_square(), 0.25).unwrap();
        assert_eq!(m.n_triangles(), 32);
        assert_eq!(m.n_nodes(), 25);
        assert_eq!(m.n_interior(), 9);
        m.validate().unwrap();
        m.check_against(&PolygonalDomain::unit_square()).unwrap();
    }

    #[test]
    fn l_shape_half() {
        let l = PolygonalDomain::l_shape();
        let m = mesh_uniform(&l, 0.5).unwrap();
        m.validate().unwrap();
        m.check_against(&l).unwrap();
        assert_eq!(m.n_triangles(), 24);
        let area: f64 = (0..m.n_triangles()).map(|t| m.signed_area(t)).sum();
        assert!((area - 3.0).abs() < 1e-14);
        assert_eq!(m, mesh_uniform(&l, 0.5).unwrap());
    }

    #[test]
    fn rejects_bad_widths() {
        let sq = PolygonalDomain::unit_square();
        assert!(matches!(mesh_uniform(&sq, 0.3), Err(Error::Parameter(_))));
        assert!(matches!(mesh_uniform(&sq, -1.0), Err(Error::Parameter(_))));
        assert!(matches!(mesh_uniform(&sq, 1e-4), Err(Error::Resource(_))));
    }

    #[test]
    fn sector_meshes_are_conforming() {
        for theta in [PI / 2.0, PI, 1.5 * PI, 2.0 * PI] {
            let d = PolygonalDomain::sector(theta, 1.0).unwrap();
            for m in [mesh_uniform(&d, 0.2).unwrap(), mesh_graded(&d, 5, 2.0 / 3.0).unwrap()] {
                m.validate().unwrap();
                m.check_against(&d).unwrap();
                assert!(m.min_angle() > 0.25, "min angle {}", m.min_angle());
            }
            let m = mesh_uniform(&d, 0.2).unwrap();
            // ring-to-ring diagonals are at most sqrt(1 + (π/3)²)·h
            assert!(m.max_edge() <= 1.5 * 0.2, "theta {theta}: max edge {}", m.max_edge());
        }
    }

    #[test]
    fn breakpoints() {
        let b = graded_breakpoints(4, 2.0 / 3.0);
        let want = [0.0, 0.125, 0.35355, 0.64952, 1.0];
        for (x, y) in b.iter().zip(want) {
            assert!((x - y).abs() < 1e-5);
        }
        assert_eq!(graded_breakpoints(4, 1.0), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = mesh_graded(&PolygonalDomain::sector(1.5 * PI, 1.0).unwrap(), 4, 2.0 / 3.0).unwrap();
        assert_eq!(m.grading().unwrap().breakpoints.len(), 5);
    }

    #[test]
    fn graded_rejects_bad_input() {
        let l = PolygonalDomain::l_shape();
        assert!(mesh_graded(&l, 1, 0.5).is_err());
        assert!(mesh_graded(&l, 4, 0.0).is_err());
        assert!(mesh_graded(&l, 4, 1.5).is_err());
    }

    #[test]
    fn graded_l_shape() {
        let l = PolygonalDomain::l_shape();
        for n in [4, 8, 16] {
            let m = mesh_graded(&l, n, 2.0 / 3.0).unwrap();
            m.validate().unwrap();
            m.check_against(&l).unwrap();
            let h0 = m.min_diameter_at([0.0, 0.0]);
            let predicted = (1.0 / n as f64).powf(1.5);
            assert!(h0 / predicted < 2.0 && predicted / h0 < 2.0, "n={n}: {h0} vs {predicted}");
        }
    }

    #[test]
    fn graded_sector_smallest_element() {
        let d = PolygonalDomain::sector(1.5 * PI, 1.0).unwrap();
        for n in [4, 8, 16] {
            let m = mesh_graded(&d, n, 0.5).unwrap();
            let predicted = (1.0 / n as f64).powf(2.0);
            let h0 = m.min_diameter_at([0.0, 0.0]);
            assert!(h0 / predicted < 2.0 && predicted / h0 < 2.0);
        }
    }

    #[test]
    fn refinement_nests_nodes() {
        let l = PolygonalDomain::l_shape();
        let coarse = mesh_uniform(&l, 0.25).unwrap();
        let fine = mesh_uniform(&l, 0.125).unwrap();
        let fine_keys: HashSet<_> = fine.nodes().iter().map(|p| key(*p)).collect();
        assert!(coarse.nodes().iter().all(|p| fine_keys.contains(&key(*p))));

        let d = PolygonalDomain::sector(1.5 * PI, 1.0).unwrap();
        let coarse = mesh_graded(&d, 4, 0.6).unwrap();
        let fine = mesh_graded(&d, 8, 0.6).unwrap();
        let fine_keys: Vec<Point> = fine.nodes().to_vec();
        for p in coarse.nodes() {
            assert!(fine_keys.iter().any(|q| dist(*p, *q) < 1e-12), "{p:?} missing");
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = mesh_uniform(&PolygonalDomain::l_shape(), 0.5).unwrap();
        let (np, tp) = (dir.path().join("n.csv"), dir.path().join("t.csv"));
        m.write_csv(&np, &tp).unwrap();
        let back = Mesh::read_csv(&np, &tp).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_flags(), m.boundary_flags());
        assert!(m.to_vtk(None).contains("CELL_TYPES 24"));
    }
}
