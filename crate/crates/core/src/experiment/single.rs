use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{default_grading_exponent, DomainKind};
use crate::error::{Error, Result};
use crate::mesh::{mesh_graded, mesh_uniform, Mesh};
use crate::pde::{estimate_operator_norm, smallness_check, solve_semilinear_with, RotheSolver, SemilinearConfig};

use super::config::{domain_from_spec, positive, ProblemSpec, SemilinearSpec};
use super::output::{num, ManifestEntry, OutputDir, Table};
use super::run::SemilinearReport;

const DEFAULT_SNAPSHOTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshChoice {
    Uniform {
        h: f64,
    },
    Graded {
        n_layers: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
    },
}

/// A single solve on one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainKind,
    pub mesh: MeshChoice,
    pub problem: ProblemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semilinear: Option<SemilinearSpec>,
    /// Time levels written to `snapshots.csv`; about ten evenly spaced levels when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_levels: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        domain_from_spec(self.domain)?;
        match self.mesh {
            MeshChoice::Uniform { h } => positive("mesh.h", h)?,
            MeshChoice::Graded { n_layers, mu } => {
                if n_layers < 2 {
                    return Err(Error::config("mesh.n_layers", "must be at least 2"));
                }
                if mu.is_some_and(|mu| !(mu > 0.0 && mu <= 1.0)) {
                    return Err(Error::config("mesh.mu", "must lie in (0, 1]"));
                }
            }
        }
        positive("problem.horizon", self.problem.horizon)?;
        if let Some(s) = &self.semilinear {
            if s.level.is_some() {
                return Err(Error::config("semilinear.level", "not used by single runs"));
            }
            if s.eps.is_some() == s.eps_factor.is_some() {
                return Err(Error::config("semilinear.eps", "give exactly one of eps and eps_factor"));
            }
            if !(s.r0 > 1.0) {
                return Err(Error::config("semilinear.r0", "must exceed 1"));
            }
            positive("semilinear.tol", s.tol)?;
            if s.power == 0 || s.max_iter == 0 || s.n_probes == 0 {
                return Err(Error::config("semilinear", "power, max_iter and n_probes must be at least 1"));
            }
        }
        Ok(())
    }

    /// Representative width: `h`, or `1/n_layers` on graded meshes.
    pub fn width(&self) -> f64 {
        match self.mesh {
            MeshChoice::Uniform { h } => h,
            MeshChoice::Graded { n_layers, .. } => 1.0 / n_layers as f64,
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let domain = domain_from_spec(self.domain)?;
        match self.mesh {
            MeshChoice::Uniform { h } => mesh_uniform(&domain, h),
            MeshChoice::Graded { n_layers, mu } => {
                let mu = mu.unwrap_or_else(|| default_grading_exponent(domain.max_interior_angle()));
                mesh_graded(&domain, n_layers, mu)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleRunReport {
    pub config: RunConfig,
    pub h: f64,
    pub n_nodes: usize,
    pub n_triangles: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub energy: f64,
    pub l2_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semilinear: Option<SemilinearReport>,
    #[serde(skip)]
    pub manifest: Vec<ManifestEntry>,
}

fn snapshot_levels(cfg: &RunConfig, n_steps: usize) -> Result<Vec<usize>> {
    match &cfg.snapshot_levels {
        Some(levels) => {
            if let Some(&l) = levels.iter().find(|&&l| l > n_steps) {
                return Err(Error::config("snapshot_levels", format!("level {l} beyond n_steps = {n_steps}")));
            }
            Ok(levels.clone())
        }
        None => {
            let mut v: Vec<usize> = (1..=DEFAULT_SNAPSHOTS).map(|i| (i * n_steps).div_ceil(DEFAULT_SNAPSHOTS)).collect();
            v.dedup();
            Ok(v)
        }
    }
}

/// Linear solve, plus the Picard iteration when `semilinear` is set, with
/// outputs in `out_dir`.
pub fn run_single(cfg: &RunConfig, out_dir: &Path, semilinear: bool) -> Result<SingleRunReport> {
    cfg.validate()?;
    if semilinear && cfg.semilinear.is_none() {
        return Err(Error::config("semilinear", "section required for a semilinear run"));
    }
    let mut out = OutputDir::create(out_dir)?;
    let result = single_pipeline(cfg, &mut out, semilinear);
    match result {
        Ok(mut report) => {
            report.manifest = out.finish()?;
            Ok(report)
        }
        Err(e) => {
            let log = match &e {
                Error::NonConvergence(log) => Some(log.as_ref()),
                _ => None,
            };
            out.write_json(
                "error.json",
                &serde_json::json!({ "exit_code": e.exit_code(), "message": e.to_string(), "iteration_log": log }),
            )?;
            out.finish()?;
            Err(e)
        }
    }
}

fn single_pipeline(cfg: &RunConfig, out: &mut OutputDir, semilinear: bool) -> Result<SingleRunReport> {
    out.write_json("config.json", cfg)?;
    let domain = domain_from_spec(cfg.domain)?;
    let problem = cfg.problem.build(domain);
    let mesh = cfg.build_mesh()?;
    out.write("nodes.csv", mesh.nodes_csv().as_bytes())?;
    out.write("triangles.csv", mesh.triangles_csv().as_bytes())?;
    let h = cfg.width();
    let n_steps = cfg.problem.steps.steps(problem.horizon, h);
    let levels = snapshot_levels(cfg, n_steps)?;
    let solver = RotheSolver::new(&problem, &mesh, n_steps)?;

    let mut semi = None;
    let traj = if semilinear {
        let spec = cfg.semilinear.as_ref().expect("checked by run_single");
        let eta_tilde = solver.data_norm(&problem.source)?;
        let operator_norm = estimate_operator_norm(&problem, &mesh, n_steps, spec.n_probes, cfg.seed)?;
        let mut scfg = SemilinearConfig {
            eps: 0.0,
            power: spec.power,
            r0: spec.r0,
            eta_tilde,
            op_norm: operator_norm.estimate,
            max_iter: spec.max_iter,
            tol: spec.tol,
        };
        let bound = smallness_check(&scfg)?;
        scfg.eps = spec.eps.unwrap_or_else(|| spec.eps_factor.unwrap_or(0.0) * bound.max_eps);
        let smallness = smallness_check(&scfg)?;
        let (traj, log) = solve_semilinear_with(&solver, &problem.source, &scfg)?;
        let mut table = Table::new(&["iterate", "residual", "distance_to_linear", "in_ball"]);
        for r in &log.iterates {
            table.row(&[r.index.to_string(), num(r.residual), num(r.distance_to_linear), u8::from(r.in_ball).to_string()]);
        }
        out.write("iterations.csv", &table.into_bytes())?;
        semi = Some(SemilinearReport {
            level: 0,
            h,
            n_steps,
            eta_tilde,
            operator_norm,
            smallness,
            config: scfg,
            log,
        });
        traj
    } else {
        solver.solve_source(&problem.source)?
    };

    let mut header = vec!["node".to_string(), "x".into(), "y".into()];
    header.extend(levels.iter().map(|l| format!("u_{l}")));
    let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (i, p) in mesh.nodes().iter().enumerate() {
        let mut row = vec![i.to_string(), num(p[0]), num(p[1])];
        row.extend(levels.iter().map(|&l| num(traj.levels[l][i])));
        table.row(&row);
    }
    out.write("snapshots.csv", &table.into_bytes())?;
    let mut table = Table::new(&["node", "x", "y", "u"]);
    for (i, (p, u)) in mesh.nodes().iter().zip(traj.terminal()).enumerate() {
        table.row(&[i.to_string(), num(p[0]), num(p[1]), num(*u)]);
    }
    out.write("terminal.csv", &table.into_bytes())?;

    let report = SingleRunReport {
        config: cfg.clone(),
        h,
        n_nodes: mesh.n_nodes(),
        n_triangles: mesh.n_triangles(),
        n_steps,
        dt: solver.dt(),
        energy: solver.operators().stiffness.quad_form(traj.terminal()),
        l2_norm: solver.l2_norm(traj.terminal()),
        semilinear: semi,
        manifest: Vec::new(),
    };
    out.write_json("run.json", &report)?;
    Ok(report)
}

/// Mesh, terminal values and width of a directory written by [`run_single`].
pub fn load_run(dir: &Path) -> Result<(Mesh, Vec<f64>, f64)> {
    let mesh = Mesh::read_csv(&dir.join("nodes.csv"), &dir.join("triangles.csv"))?;
    let mut values = Vec::with_capacity(mesh.n_nodes());
    for rec in csv::Reader::from_path(dir.join("terminal.csv"))?.records() {
        let rec = rec?;
        let v = rec
            .get(3)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Parameter(format!("bad terminal record {rec:?}")))?;
        values.push(v);
    }
    if values.len() != mesh.n_nodes() {
        return Err(Error::Parameter(format!(
            "{} terminal values for {} nodes in {}",
            values.len(),
            mesh.n_nodes(),
            dir.display()
        )));
    }
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("run.json"))?)?;
    let h = run["h"]
        .as_f64()
        .ok_or_else(|| Error::Parameter(format!("run.json in {} has no width", dir.display())))?;
    Ok((mesh, values, h))
}
