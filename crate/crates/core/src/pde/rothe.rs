use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSnapshot;
use crate::mesh::Mesh;
use crate::sparse::SkylineCholesky;

use super::{assemble, Operators, ParabolicProblem, Source};

/// Nodal coefficients at the time levels `t_n = n·Δt`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub levels: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn n_steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.dt
    }

    pub fn terminal(&self) -> &[f64] {
        self.levels.last().expect("trajectory has at least one level")
    }

    pub fn snapshot<'m>(&self, mesh: &'m Mesh, level: usize) -> FieldSnapshot<'m> {
        FieldSnapshot::new(mesh, self.levels[level].clone())
    }

    /// Zero initial level and zero Dirichlet trace at every level.
    pub fn check_invariants(&self, mesh: &Mesh) -> Result<()> {
        if self.levels[0].iter().any(|v| *v != 0.0) {
            return Err(Error::Numeric("initial level is not zero".into()));
        }
        for (n, level) in self.levels.iter().enumerate() {
            if level.len() != mesh.n_nodes() {
                return Err(Error::Numeric(format!("level {n} has wrong length")));
            }
            if level.iter().zip(mesh.boundary_flags()).any(|(v, b)| *b && *v != 0.0) {
                return Err(Error::Numeric(format!("level {n} violates the Dirichlet condition")));
            }
        }
        Ok(())
    }
}

/// Implicit Euler stepper with the factorized system `M/Δt + K` reused for
/// every step and every right-hand side.
#[derive(Debug)]
pub struct RotheSolver<'m> {
    mesh: &'m Mesh,
    ops: Operators,
    fixed: Vec<bool>,
    chol: SkylineCholesky,
    dt: f64,
    n_steps: usize,
}

impl<'m> RotheSolver<'m> {
    pub fn new(problem: &ParabolicProblem, mesh: &'m Mesh, n_steps: usize) -> Result<Self> {
        problem.check(n_steps)?;
        let ops = assemble(mesh, problem)?;
        let dt = problem.horizon / n_steps as f64;
        let fixed = mesh.boundary_flags().to_vec();
        let system = ops.mass.lin_comb(1.0 / dt, &ops.stiffness, 1.0).with_dirichlet(&fixed);
        let chol = SkylineCholesky::factor(&system)?;
        Ok(Self {
            mesh,
            ops,
            fixed,
            chol,
            dt,
            n_steps,
        })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Marches `M(u^{n+1} - u^n)/Δt + K u^{n+1} = M f^{n+1}` where `load(n)`
    /// supplies the nodal values `f^n`.
    pub fn march(&self, mut load: impl FnMut(usize) -> Result<Vec<f64>>) -> Result<Trajectory> {
        let n = self.mesh.n_nodes();
        let mut levels = Vec::with_capacity(self.n_steps + 1);
        levels.push(vec![0.0; n]);
        let mut work = vec![0.0; n];
        for step in 1..=self.n_steps {
            let f = load(step)?;
            let prev = &levels[step - 1];
            let w: Vec<f64> = prev.iter().zip(&f).map(|(u, f)| u / self.dt + f).collect();
            self.ops.mass.mul_vec_into(&w, &mut work);
            for (r, fixed) in work.iter_mut().zip(&self.fixed) {
                if *fixed {
                    *r = 0.0;
                }
            }
            self.chol.solve_in_place(&mut work);
            if work.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite solution at step {step}")));
            }
            levels.push(work.clone());
        }
        Ok(Trajectory { dt: self.dt, levels })
    }

    pub fn solve_source(&self, source: &Source) -> Result<Trajectory> {
        self.march(|level| source.nodal(self.mesh, level, level as f64 * self.dt))
    }

    /// `‖v‖_{H¹}` with the Gram matrix `L + M`.
    pub fn h1_norm(&self, v: &[f64]) -> f64 {
        (self.ops.laplace.quad_form(v) + self.ops.mass.quad_form(v)).max(0.0).sqrt()
    }

    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        self.ops.mass.quad_form(v).max(0.0).sqrt()
    }

    /// Discrete `L₂([0,T], H¹)` norm over levels `1..=N`.
    pub fn trajectory_norm(&self, levels: &[Vec<f64>]) -> f64 {
        levels[1..]
            .iter()
            .map(|v| self.dt * self.h1_norm(v).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn trajectory_distance(&self, a: &Trajectory, b: &Trajectory) -> f64 {
        let diff: Vec<Vec<f64>> = a
            .levels
            .iter()
            .zip(&b.levels)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
            .collect();
        self.trajectory_norm(&diff)
    }

    /// `max_n ‖f^n‖_{L₂}` over all time levels.
    pub fn data_norm(&self, source: &Source) -> Result<f64> {
        let mut best: f64 = 0.0;
        for level in 0..=self.n_steps {
            let f = source.nodal(self.mesh, level, level as f64 * self.dt)?;
            best = best.max(self.l2_norm(&f));
        }
        Ok(best)
    }
}

pub fn solve_linear(problem: &ParabolicProblem, mesh: &Mesh, n_steps: usize) -> Result<Trajectory> {
    RotheSolver::new(problem, mesh, n_steps)?.solve_source(&problem.source)
}

/// Data-norm bound η̃ of the problem's source on the given discretization.
pub fn data_norm(problem: &ParabolicProblem, mesh: &Mesh, n_steps: usize) -> Result<f64> {
    RotheSolver::new(problem, mesh, n_steps)?.data_norm(&problem.source)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormEstimate {
    pub estimate: f64,
    /// `‖u_f‖ / ‖f‖` for each probe, in probe order.
    pub ratios: Vec<f64>,
}

/// Probe right-hand sides `φ_i(x)·sin((2i+1)πt/(2T))`: `φ_0 = 1` and seeded
/// uniform values in `[-1, 1]` afterwards, all vanishing on the boundary.
/// The problem's own source, when non-zero, is probed first.
pub fn estimate_operator_norm(
    problem: &ParabolicProblem,
    mesh: &Mesh,
    n_steps: usize,
    n_probes: usize,
    seed: u64,
) -> Result<OperatorNormEstimate> {
    if n_probes == 0 {
        return Err(Error::Parameter("n_probes must be at least 1".into()));
    }
    let solver = RotheSolver::new(problem, mesh, n_steps)?;
    let mut probes: Vec<Source> = Vec::with_capacity(n_probes + 1);
    if !problem.source.is_zero() {
        probes.push(problem.source.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = problem.horizon;
    for i in 0..n_probes {
        let spatial: Vec<f64> = mesh
            .boundary_flags()
            .iter()
            .map(|&b| {
                let r = if i == 0 { 1.0 } else { rng.random_range(-1.0..=1.0) };
                if b { 0.0 } else { r }
            })
            .collect();
        let freq = (2 * i + 1) as f64 * std::f64::consts::PI / (2.0 * horizon);
        let levels = (0..=n_steps)
            .map(|n| {
                let g = (freq * n as f64 * solver.dt()).sin();
                spatial.iter().map(|p| p * g).collect()
            })
            .collect();
        probes.push(Source::Nodal(std::sync::Arc::new(levels)));
    }
    let mut ratios = Vec::with_capacity(probes.len());
    for probe in &probes {
        let norm_f = solver.data_norm(probe)?;
        if norm_f == 0.0 {
            continue;
        }
        let u = solver.solve_source(probe)?;
        ratios.push(solver.trajectory_norm(&u.levels) / norm_f);
    }
    let estimate = ratios.iter().copied().fold(0.0, f64::max);
    Ok(OperatorNormEstimate { estimate, ratios })
}
