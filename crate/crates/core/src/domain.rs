//! Planar corner domains and the distance weight to their singular set.
//!
//! Only the structured families needed by the mesh generators are modelled:
//! circular sectors (including the slit, θ = 2π), axis-aligned rectangles and
//! the L-shape `(-1,1)² \ [0,1)×(-1,0]`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainKind {
    /// `{0 < r < radius, -θ/2 < φ < θ/2}` with apex at the origin.
    Sector { theta: f64, radius: f64 },
    Rectangle { min: Point, max: Point },
    LShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonalDomain {
    kind: DomainKind,
    /// Counter-clockwise corner points. For sectors: apex, then the two arc ends.
    vertices: Vec<Point>,
    interior_angles: Vec<f64>,
    singular_vertices: Vec<usize>,
}

impl PolygonalDomain {
    pub fn sector(theta: f64, radius: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 2.0 * PI + GEOM_TOL) {
            return Err(Error::Domain(format!(
                "sector opening angle {theta} outside (0, 2π]"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("sector radius {radius} must be positive")));
        }
        let theta = theta.min(2.0 * PI);
        let half = 0.5 * theta;
        Ok(Self {
            kind: DomainKind::Sector { theta, radius },
            vertices: vec![
                [0.0, 0.0],
                [radius * (-half).cos(), radius * (-half).sin()],
                [radius * half.cos(), radius * half.sin()],
            ],
            interior_angles: vec![theta, FRAC_PI_2, FRAC_PI_2],
            singular_vertices: vec![0],
        })
    }

    pub fn l_shape() -> Self {
        let vertices = vec![
            [-1.0, -1.0],
            [0.0, -1.0],
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [-1.0, 1.0],
        ];
        let mut interior_angles = vec![FRAC_PI_2; 6];
        interior_angles[2] = 3.0 * FRAC_PI_2;
        Self {
            kind: DomainKind::LShape,
            vertices,
            interior_angles,
            singular_vertices: (0..6).collect(),
        }
    }

    pub fn rectangle(min: Point, max: Point) -> Result<Self> {
        if !(max[0] > min[0] && max[1] > min[1]) {
            return Err(Error::Domain(format!("degenerate rectangle {min:?}..{max:?}")));
        }
        Ok(Self {
            kind: DomainKind::Rectangle { min, max },
            vertices: vec![min, [max[0], min[1]], max, [min[0], max[1]]],
            interior_angles: vec![FRAC_PI_2; 4],
            singular_vertices: (0..4).collect(),
        })
    }

    pub fn unit_square() -> Self {
        Self::rectangle([0.0, 0.0], [1.0, 1.0]).expect("unit square is valid")
    }

    pub fn from_kind(kind: DomainKind) -> Result<Self> {
        match kind {
            DomainKind::Sector { theta, radius } => Self::sector(theta, radius),
            DomainKind::Rectangle { min, max } => Self::rectangle(min, max),
            DomainKind::LShape => Ok(Self::l_shape()),
        }
    }

    /// Restricts the singular set to the given vertex indices.
    pub fn with_singular_vertices(mut self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Domain("singular set must be non-empty".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.vertices.len()) {
            return Err(Error::Domain(format!("vertex index {bad} out of range")));
        }
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        self.singular_vertices = idx;
        Ok(self)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn interior_angles(&self) -> &[f64] {
        &self.interior_angles
    }

    pub fn singular_vertices(&self) -> &[usize] {
        &self.singular_vertices
    }

    pub fn singular_points(&self) -> impl Iterator<Item = Point> + '_ {
        self.singular_vertices.iter().map(|&i| self.vertices[i])
    }

    pub fn max_interior_angle(&self) -> f64 {
        self.interior_angles.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_convex(&self) -> bool {
        self.max_interior_angle() <= PI + GEOM_TOL
    }

    /// Indices of vertices whose interior angle exceeds π.
    pub fn re_entrant_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| self.interior_angles[i] > PI + GEOM_TOL)
            .collect()
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            DomainKind::Sector { theta, radius } => 0.5 * theta * radius * radius,
            DomainKind::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
            DomainKind::LShape => 3.0,
        }
    }

    /// Closed-set membership with a small absolute tolerance.
    pub fn contains(&self, x: Point) -> bool {
        match self.kind {
            DomainKind::Sector { theta, radius } => {
                let r = x[0].hypot(x[1]);
                if r <= GEOM_TOL {
                    return true;
                }
                if r > radius * (1.0 + 1e-10) + GEOM_TOL {
                    return false;
                }
                let phi = x[1].atan2(x[0]);
                phi.abs() <= 0.5 * theta + 1e-10
            }
            DomainKind::Rectangle { min, max } => {
                x[0] >= min[0] - GEOM_TOL
                    && x[0] <= max[0] + GEOM_TOL
                    && x[1] >= min[1] - GEOM_TOL
                    && x[1] <= max[1] + GEOM_TOL
            }
            DomainKind::LShape => {
                let in_box = x[0].abs() <= 1.0 + GEOM_TOL && x[1].abs() <= 1.0 + GEOM_TOL;
                let in_hole = x[0] > GEOM_TOL && x[1] < -GEOM_TOL;
                in_box && !in_hole
            }
        }
    }

    /// Euclidean distance to the nearest singular vertex (uncapped).
    pub fn distance_to_singular_set(&self, x: Point) -> f64 {
        self.singular_points()
            .map(|s| (x[0] - s[0]).hypot(x[1] - s[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// ρ(x) = min(1, dist(x, S)); fails for points outside the closed domain.
    pub fn rho(&self, x: Point) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("point {x:?} lies outside the domain")));
        }
        Ok(self.rho_unchecked(x))
    }

    pub fn rho_unchecked(&self, x: Point) -> f64 {
        self.distance_to_singular_set(x).min(1.0)
    }

    pub fn weight(&self) -> WeightFunction<'_> {
        WeightFunction { domain: self }
    }
}

/// The capped distance weight ρ attached to a domain.
#[derive(Debug, Clone, Copy)]
pub struct WeightFunction<'a> {
    domain: &'a PolygonalDomain,
}

impl<'a> WeightFunction<'a> {
    pub const CAP: f64 = 1.0;

    pub fn domain(&self) -> &'a PolygonalDomain {
        self.domain
    }

    pub fn eval(&self, x: Point) -> Result<f64> {
        self.domain.rho(x)
    }

    pub(crate) fn eval_unchecked(&self, x: Point) -> f64 {
        self.domain.rho_unchecked(x)
    }
}

/// Grading exponent matched to the first Dirichlet-Laplace pencil eigenvalue π/θ.
pub fn default_grading_exponent(theta: f64) -> f64 {
    (PI / theta).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_constructor() {
        let s = PolygonalDomain::sector(FRAC_PI_2, 1.0).unwrap();
        assert!(s.is_convex());
        assert_eq!(s.singular_points().collect::<Vec<_>>(), vec![[0.0, 0.0]]);
        assert!(!PolygonalDomain::sector(1.5 * PI, 1.0).unwrap().is_convex());
        let slit = PolygonalDomain::sector(2.0 * PI, 1.0).unwrap();
        assert!((slit.max_interior_angle() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn sector_rejects_bad_angles() {
        assert!(matches!(PolygonalDomain::sector(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(PolygonalDomain::sector(3.0 * PI, 1.0), Err(Error::Domain(_))));
        assert!(PolygonalDomain::sector(1.0, -1.0).is_err());
    }

    #[test]
    fn l_shape_geometry() {
        let l = PolygonalDomain::l_shape();
        assert_eq!(l.vertices().len(), 6);
        assert!((l.max_interior_angle() - 1.5 * PI).abs() < 1e-15);
        assert!(l.singular_points().any(|p| p == [0.0, 0.0]));
        assert_eq!(l.area(), 3.0);
        assert_eq!(l.re_entrant_vertices(), vec![2]);
        // shoelace
        let v = l.vertices();
        let twice: f64 = (0..v.len())
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        assert!((0.5 * twice - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rho_values() {
        let s = PolygonalDomain::sector(1.5 * PI, 1.0).unwrap();
        assert_eq!(s.rho([0.0, 0.0]).unwrap(), 0.0);
        assert!((s.rho([0.5, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        let big = PolygonalDomain::sector(FRAC_PI_2, 10.0).unwrap();
        assert_eq!(big.rho([7.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(s.rho([2.0, 0.0]), Err(Error::Domain(_))));
        let l = PolygonalDomain::l_shape();
        assert!(l.rho([0.5, -0.5]).is_err());
    }

    #[test]
    fn singular_subset() {
        let sq = PolygonalDomain::unit_square().with_singular_vertices(&[0]).unwrap();
        assert!((sq.rho([1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((sq.rho([0.3, 0.4]).unwrap() - 0.5).abs() < 1e-15);
        assert!(PolygonalDomain::unit_square().with_singular_vertices(&[]).is_err());
        assert!(PolygonalDomain::unit_square().with_singular_vertices(&[9]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn rho_is_capped_and_lipschitz(x0 in -1.0f64..1.0, y0 in 0.0f64..1.0, dx in -0.1f64..0.1, dy in -0.1f64..0.1) {
            let l = PolygonalDomain::l_shape();
            let a = [x0, y0];
            let b = [(x0 + dx).clamp(-1.0, 1.0), (y0 + dy).clamp(0.0, 1.0)];
            let (ra, rb) = (l.rho(a).unwrap(), l.rho(b).unwrap());
            proptest::prop_assert!((0.0..=1.0).contains(&ra));
            let dist = (a[0] - b[0]).hypot(a[1] - b[1]);
            proptest::prop_assert!((ra - rb).abs() <= dist + 1e-14);
        }
    }
}
