//! Linear and semilinear parabolic problems in divergence form with zero
//! initial and Dirichlet data, discretized by the Rothe method (implicit Euler
//! in time, P1 finite elements in space).

mod assembly;
mod rothe;
mod semilinear;

use std::fmt;
use std::sync::Arc;

pub use assembly::{assemble, mass_matrix, Operators};
pub use rothe::{
    data_norm, estimate_operator_norm, solve_linear, OperatorNormEstimate, RotheSolver, Trajectory,
};
pub use semilinear::{
    smallness_check, solve_semilinear, solve_semilinear_with, IterateRecord, IterationLog, SemilinearConfig,
    SmallnessCheck, ITERATION_NORM,
};

use crate::domain::{Point, PolygonalDomain};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub type Tensor2 = [[f64; 2]; 2];

/// Diffusion coefficients `a_{αβ}` for m = 1.
#[derive(Clone)]
pub enum Diffusion {
    Constant(Tensor2),
    Field(Arc<dyn Fn(Point) -> Tensor2 + Send + Sync>),
    /// Representable but rejected by the solver.
    TimeDependent(Arc<dyn Fn(f64, Point) -> Tensor2 + Send + Sync>),
}

impl Diffusion {
    pub const IDENTITY: Tensor2 = [[1.0, 0.0], [0.0, 1.0]];

    pub(crate) fn at(&self, x: Point) -> Tensor2 {
        match self {
            Diffusion::Constant(a) => *a,
            Diffusion::Field(f) => f(x),
            Diffusion::TimeDependent(f) => f(0.0, x),
        }
    }
}

impl fmt::Debug for Diffusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diffusion::Constant(a) => f.debug_tuple("Constant").field(a).finish(),
            Diffusion::Field(_) => f.write_str("Field(..)"),
            Diffusion::TimeDependent(_) => f.write_str("TimeDependent(..)"),
        }
    }
}

/// Right-hand side `f(t, x)`.
#[derive(Clone)]
pub enum Source {
    Zero,
    Constant(f64),
    Function(Arc<dyn Fn(f64, Point) -> f64 + Send + Sync>),
    /// Nodal samples for every time level `0..=n_steps`.
    Nodal(Arc<Vec<Vec<f64>>>),
}

impl Source {
    pub fn function(f: impl Fn(f64, Point) -> f64 + Send + Sync + 'static) -> Self {
        Source::Function(Arc::new(f))
    }

    /// Nodal interpolant of `f(t_level, ·)`.
    pub fn nodal(&self, mesh: &Mesh, level: usize, t: f64) -> Result<Vec<f64>> {
        Ok(match self {
            Source::Zero => vec![0.0; mesh.n_nodes()],
            Source::Constant(c) => vec![*c; mesh.n_nodes()],
            Source::Function(f) => mesh.nodes().iter().map(|&x| f(t, x)).collect(),
            Source::Nodal(levels) => {
                let v = levels.get(level).ok_or_else(|| {
                    Error::Parameter(format!("nodal source has no samples for time level {level}"))
                })?;
                if v.len() != mesh.n_nodes() {
                    return Err(Error::Parameter(format!(
                        "nodal source has {} values, mesh has {} nodes",
                        v.len(),
                        mesh.n_nodes()
                    )));
                }
                v.clone()
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Source::Zero => true,
            Source::Constant(c) => *c == 0.0,
            _ => false,
        }
    }
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => f.write_str("Zero"),
            Source::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Source::Function(_) => f.write_str("Function(..)"),
            Source::Nodal(v) => write!(f, "Nodal({} levels)", v.len()),
        }
    }
}

/// `∂u/∂t - div(A ∇u) = f` on `(0, T] × D`, `u(0) = 0`, `u = 0` on `∂D`.
#[derive(Debug, Clone)]
pub struct ParabolicProblem {
    pub domain: PolygonalDomain,
    pub diffusion: Diffusion,
    pub source: Source,
    pub horizon: f64,
}

impl ParabolicProblem {
    /// Heat equation (identity diffusion).
    pub fn heat(domain: PolygonalDomain, source: Source, horizon: f64) -> Self {
        Self {
            domain,
            diffusion: Diffusion::Constant(Diffusion::IDENTITY),
            source,
            horizon,
        }
    }

    pub(crate) fn check(&self, n_steps: usize) -> Result<()> {
        if n_steps == 0 {
            return Err(Error::Parameter("n_steps must be at least 1".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Parameter(format!("horizon T = {} must be positive", self.horizon)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::mesh_uniform;

    #[test]
    fn nodal_source_checks_shape() {
        let mesh = mesh_uniform(&PolygonalDomain::unit_square(), 0.5).unwrap();
        let s = Source::Nodal(Arc::new(vec![vec![0.0; 3]]));
        assert!(s.nodal(&mesh, 0, 0.0).is_err());
        assert!(s.nodal(&mesh, 5, 0.0).is_err());
        let f = Source::function(|t, x| t * x[0]);
        let v = f.nodal(&mesh, 1, 2.0).unwrap();
        assert_eq!(v[2], 2.0);
    }

    #[test]
    fn problem_checks() {
        let p = ParabolicProblem::heat(PolygonalDomain::unit_square(), Source::Zero, 1.0);
        assert!(p.check(0).is_err());
        assert!(ParabolicProblem { horizon: -1.0, ..p.clone() }.check(3).is_err());
        assert!(p.check(3).is_ok());
    }
}
