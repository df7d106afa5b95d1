//! Picard iteration `u_{j+1} = L⁻¹(f − ε u_j^M)` over whole trajectories,
//! monitored against the ball of radius `R = (r₀−1)·η̃·‖L⁻¹‖` around the
//! linear solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

use super::{ParabolicProblem, RotheSolver, Source, Trajectory};

/// Number of consecutive residual increases treated as divergence.
const DIVERGENCE_RUN: usize = 5;

/// Norm in which residuals and ball distances are measured.
pub const ITERATION_NORM: &str = "discrete L2(0,T;H1)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemilinearConfig {
    pub eps: f64,
    pub power: u32,
    pub r0: f64,
    pub eta_tilde: f64,
    pub op_norm: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl SemilinearConfig {
    pub fn radius(&self) -> f64 {
        (self.r0 - 1.0) * self.eta_tilde * self.op_norm
    }

    fn validate(&self) -> Result<()> {
        if !(self.r0 > 1.0) {
            return Err(Error::config("r0", format!("must exceed 1, got {}", self.r0)));
        }
        if !(self.eta_tilde > 0.0 && self.eta_tilde.is_finite()) {
            return Err(Error::config("eta_tilde", format!("must be positive, got {}", self.eta_tilde)));
        }
        if !(self.op_norm > 0.0 && self.op_norm.is_finite()) {
            return Err(Error::config("op_norm", format!("must be positive, got {}", self.op_norm)));
        }
        if self.power == 0 {
            return Err(Error::config("power", "must be at least 1"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::config("eps", format!("must be non-negative, got {}", self.eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallnessCheck {
    pub ok: bool,
    pub max_eps: f64,
    pub radius: f64,
}

/// Largest ε with `ε·r₀^M·η̃^{M−1}·‖L⁻¹‖^M ≤ r₀ − 1`.
pub fn smallness_check(cfg: &SemilinearConfig) -> Result<SmallnessCheck> {
    cfg.validate()?;
    let m = cfg.power as i32;
    let max_eps = (cfg.r0 - 1.0) / (cfg.r0.powi(m) * cfg.eta_tilde.powi(m - 1) * cfg.op_norm.powi(m));
    Ok(SmallnessCheck {
        ok: cfg.eps <= max_eps,
        max_eps,
        radius: cfg.radius(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub index: usize,
    /// Distance to the previous iterate.
    pub residual: f64,
    pub distance_to_linear: f64,
    pub in_ball: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub norm: String,
    pub eps: f64,
    pub power: u32,
    pub radius: f64,
    pub max_eps: f64,
    pub smallness_ok: bool,
    pub iterates: Vec<IterateRecord>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl IterationLog {
    pub fn iterations(&self) -> usize {
        self.iterates.len()
    }

    pub fn last_residual(&self) -> Option<f64> {
        self.iterates.last().map(|r| r.residual)
    }

    pub fn all_in_ball(&self) -> bool {
        self.iterates.iter().all(|r| r.in_ball)
    }

    /// Largest observed ratio of successive non-zero residuals.
    pub fn contraction_factor(&self) -> Option<f64> {
        self.iterates
            .windows(2)
            .filter(|w| w[0].residual > 0.0 && w[1].residual > 0.0)
            .map(|w| w[1].residual / w[0].residual)
            .reduce(f64::max)
    }

    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }
}

pub fn solve_semilinear(
    problem: &ParabolicProblem,
    mesh: &Mesh,
    n_steps: usize,
    cfg: &SemilinearConfig,
) -> Result<(Trajectory, IterationLog)> {
    let solver = RotheSolver::new(problem, mesh, n_steps)?;
    solve_semilinear_with(&solver, &problem.source, cfg)
}

/// Same as [`solve_semilinear`] on an already factorized solver.
pub fn solve_semilinear_with(
    solver: &RotheSolver<'_>,
    source: &Source,
    cfg: &SemilinearConfig,
) -> Result<(Trajectory, IterationLog)> {
    let check = smallness_check(cfg)?;
    let mut log = IterationLog {
        norm: ITERATION_NORM.into(),
        eps: cfg.eps,
        power: cfg.power,
        radius: check.radius,
        max_eps: check.max_eps,
        smallness_ok: check.ok,
        iterates: Vec::new(),
        converged: false,
        warnings: Vec::new(),
    };
    if !check.ok {
        log.warn(format!(
            "eps = {} exceeds the smallness bound {}; convergence is not guaranteed",
            cfg.eps, check.max_eps
        ));
    }
    if cfg.max_iter == 0 {
        return Err(Error::config("max_iter", "must be at least 1"));
    }

    let mesh = solver.mesh();
    let data: Vec<Vec<f64>> = (0..=solver.n_steps())
        .map(|n| source.nodal(mesh, n, n as f64 * solver.dt()))
        .collect::<Result<_>>()?;
    let linear = solver.march(|n| Ok(data[n].clone()))?;

    let power = cfg.power as i32;
    let mut current = linear.clone();
    let mut rising = 0;
    for index in 1..=cfg.max_iter {
        let next = solver.march(|n| {
            Ok(data[n]
                .iter()
                .zip(&current.levels[n])
                .map(|(f, u)| f - cfg.eps * u.powi(power))
                .collect())
        });
        let next = match next {
            Ok(t) => t,
            Err(Error::Numeric(msg)) => {
                log.warn(format!("iterate {index}: {msg}"));
                return Err(Error::NonConvergence(Box::new(log)));
            }
            Err(e) => return Err(e),
        };
        let residual = solver.trajectory_distance(&next, &current);
        let distance = solver.trajectory_distance(&next, &linear);
        let in_ball = distance <= check.radius;
        if !in_ball {
            log.warn(format!(
                "iterate {index} left the ball: distance {distance} > radius {}",
                check.radius
            ));
        }
        if let Some(prev) = log.last_residual() {
            rising = if residual > prev { rising + 1 } else { 0 };
        }
        log.iterates.push(IterateRecord {
            index,
            residual,
            distance_to_linear: distance,
            in_ball,
        });
        current = next;

        if !residual.is_finite() || !distance.is_finite() {
            log.warn(format!("iterate {index} is not finite"));
            return Err(Error::NonConvergence(Box::new(log)));
        }
        if residual <= cfg.tol {
            log.converged = true;
            return Ok((current, log));
        }
        if rising >= DIVERGENCE_RUN {
            log.warn(format!("residual grew over {DIVERGENCE_RUN} consecutive iterates"));
            return Err(Error::NonConvergence(Box::new(log)));
        }
    }
    log.warn(format!("no convergence within {} iterations", cfg.max_iter));
    Err(Error::NonConvergence(Box::new(log)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PolygonalDomain;
    use crate::mesh::mesh_uniform;
    use crate::pde::{estimate_operator_norm, solve_linear, RotheSolver};

    fn cfg(eps: f64, power: u32) -> SemilinearConfig {
        SemilinearConfig {
            eps,
            power,
            r0: 2.0,
            eta_tilde: 1.0,
            op_norm: 1.0,
            max_iter: 30,
            tol: 1e-10,
        }
    }

    #[test]
    fn smallness_arithmetic() {
        let c = smallness_check(&cfg(0.2, 2)).unwrap();
        assert_eq!(c.max_eps, 0.25);
        assert!(c.ok);
        assert!(!smallness_check(&cfg(0.3, 2)).unwrap().ok);
        assert_eq!(smallness_check(&cfg(0.0, 1)).unwrap().max_eps, 0.5);
        let bad = SemilinearConfig { r0: 1.0, ..cfg(0.1, 2) };
        assert!(matches!(smallness_check(&bad), Err(Error::Config { .. })));
    }

    fn lshape() -> (ParabolicProblem, Mesh) {
        let d = PolygonalDomain::l_shape();
        let mesh = mesh_uniform(&d, 0.25).unwrap();
        (ParabolicProblem::heat(d, Source::Constant(1.0), 1.0), mesh)
    }

    fn calibrated(problem: &ParabolicProblem, mesh: &Mesh, factor: f64) -> SemilinearConfig {
        let solver = RotheSolver::new(problem, mesh, 10).unwrap();
        let eta = solver.data_norm(&problem.source).unwrap();
        let op = estimate_operator_norm(problem, mesh, 10, 2, 1).unwrap().estimate;
        let mut c = SemilinearConfig {
            eta_tilde: eta,
            op_norm: op,
            ..cfg(0.0, 2)
        };
        c.eps = factor * smallness_check(&c).unwrap().max_eps;
        c
    }

    #[test]
    fn zero_eps_is_the_linear_solution() {
        let (p, mesh) = lshape();
        let c = calibrated(&p, &mesh, 0.0);
        let (u, log) = solve_semilinear(&p, &mesh, 10, &c).unwrap();
        assert_eq!(u, solve_linear(&p, &mesh, 10).unwrap());
        assert_eq!(log.iterations(), 1);
        assert!(log.converged);
    }

    #[test]
    fn small_eps_contracts_inside_the_ball() {
        let (p, mesh) = lshape();
        let c = calibrated(&p, &mesh, 0.5);
        let (u, log) = solve_semilinear(&p, &mesh, 10, &c).unwrap();
        assert!(log.converged && log.all_in_ball());
        assert!(log.contraction_factor().unwrap() < 0.9);
        assert!(log.warnings.is_empty());
        u.check_invariants(&mesh).unwrap();
    }

    #[test]
    fn large_eps_is_flagged() {
        let (p, mesh) = lshape();
        let c = calibrated(&p, &mesh, 100.0);
        match solve_semilinear(&p, &mesh, 10, &c) {
            Ok((_, log)) => assert!(!log.warnings.is_empty() && !log.smallness_ok),
            Err(Error::NonConvergence(log)) => assert!(!log.converged),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
