use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSnapshot;
use crate::mesh::Mesh;
use crate::pde::{
    estimate_operator_norm, smallness_check, solve_semilinear_with, IterationLog, OperatorNormEstimate,
    ParabolicProblem, RotheSolver, SemilinearConfig, SmallnessCheck,
};
use crate::pencil::{
    heat_weight_bound, laplace_pencil_closed_form, pencil_eigenvalues_numeric, summarize, PencilSummary,
};
use crate::smoothness::{
    energy_self_convergence, estimate_rates, kondratiev_norm, l2_error, log_spaced, successive_l2_differences,
    HierarchicalField, LogLogFit, SmoothnessReport, MIN_FIT_POINTS,
};

use super::config::{ExperimentConfig, SmoothnessSpec};
use super::output::{num, parallel_map, ManifestEntry, OutputDir, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerPencil {
    pub vertex: usize,
    pub theta: f64,
    /// Positive eigenvalues in increasing order.
    pub eigenvalues: Vec<f64>,
    pub summary: PencilSummary,
    pub heat_weight_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFamily {
    Uniform,
    Graded,
}

impl MeshFamily {
    fn label(self) -> &'static str {
        match self {
            MeshFamily::Uniform => "uniform",
            MeshFamily::Graded => "graded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub family: MeshFamily,
    pub index: usize,
    /// Mesh width `h`, or `1/n_layers` for graded meshes.
    pub width: f64,
    pub n_nodes: usize,
    pub n_triangles: usize,
    pub n_steps: usize,
    pub dt: f64,
    /// `a(u_h(T), u_h(T))`.
    pub energy: f64,
    pub l2_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRate {
    pub family: MeshFamily,
    pub rate: f64,
    /// Number of finest energy defects entering the fit.
    pub defects_used: usize,
    pub fit: LogLogFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemilinearReport {
    pub level: usize,
    pub h: f64,
    pub n_steps: usize,
    pub eta_tilde: f64,
    pub operator_norm: OperatorNormEstimate,
    pub smallness: SmallnessCheck,
    pub config: SemilinearConfig,
    pub log: IterationLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub pencil: Vec<CornerPencil>,
    pub levels: Vec<LevelRecord>,
    pub energy_rates: Vec<EnergyRate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<SmoothnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kondratiev_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semilinear: Option<SemilinearReport>,
    /// Kept out of `report.json`, whose bytes must not depend on the machine.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
    #[serde(skip)]
    pub manifest: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    stage: &'a str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    iteration_log: Option<&'a IterationLog>,
}

struct Solved {
    mesh: Mesh,
    record: LevelRecord,
    terminal: Vec<f64>,
}

/// Runs the configured pipeline and writes its artifacts below
/// `out_root/config.output_dir`.
///
/// On failure the directory still receives `error.json` and a manifest of
/// whatever was written before the failing stage.
pub fn run_experiment(config: &ExperimentConfig, out_root: &Path, threads: usize) -> Result<RunReport> {
    config.validate()?;
    let mut out = OutputDir::create(out_root.join(&config.output_dir))?;
    let mut stage = "setup";
    let mut timings = Vec::new();
    let result = pipeline(config, &mut out, threads.max(1), &mut stage, &mut timings);
    let log: String = timings.iter().map(|t| format!("{}\t{:.3}s\n", t.stage, t.seconds)).collect();
    out.write_untracked("timings.log", log.as_bytes())?;
    match result {
        Ok(mut report) => {
            report.timings = timings;
            report.manifest = out.finish()?;
            Ok(report)
        }
        Err(e) => {
            let iteration_log = match &e {
                Error::NonConvergence(log) => Some(log.as_ref()),
                _ => None,
            };
            out.write_json(
                "error.json",
                &ErrorReport {
                    stage,
                    exit_code: e.exit_code(),
                    message: e.to_string(),
                    iteration_log,
                },
            )?;
            out.finish()?;
            Err(e)
        }
    }
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let r = f();
    timings.push(StageTiming {
        stage: stage.into(),
        seconds: start.elapsed().as_secs_f64(),
    });
    r
}

fn pipeline(
    config: &ExperimentConfig,
    out: &mut OutputDir,
    threads: usize,
    stage: &mut &'static str,
    timings: &mut Vec<StageTiming>,
) -> Result<RunReport> {
    out.write("config.json", format!("{}\n", config.to_json()).as_bytes())?;
    let domain = config.domain()?;
    let problem = config.problem.build(domain.clone());
    let exact = config.problem.source.exact();

    *stage = "pencil";
    let pencil = timed(timings, "pencil", || corner_pencils(config))?;
    let mut table = Table::new(&["vertex", "theta", "k", "lambda_re", "lambda_im"]);
    for c in &pencil {
        for (k, l) in c.eigenvalues.iter().enumerate() {
            table.row(&[c.vertex.to_string(), num(c.theta), (k + 1).to_string(), num(*l), num(0.0)]);
        }
    }
    out.write("pencil.csv", &table.into_bytes())?;

    *stage = "mesh";
    let uniform_meshes = timed(timings, "mesh", || {
        (0..config.mesh.uniform.len()).map(|i| config.uniform_mesh(i)).collect::<Result<Vec<_>>>()
    })?;
    let graded_meshes = match &config.mesh.graded {
        Some(g) => timed(timings, "graded_mesh", || {
            (0..g.n_layers.len()).map(|i| config.graded_mesh(i)).collect::<Result<Vec<_>>>()
        })?,
        None => Vec::new(),
    };

    *stage = "solve";
    let uniform = timed(timings, "solve_uniform", || {
        solve_family(config, &problem, uniform_meshes, MeshFamily::Uniform, exact, threads)
    })?;
    let graded = timed(timings, "solve_graded", || {
        solve_family(config, &problem, graded_meshes, MeshFamily::Graded, exact, threads)
    })?;
    let mut levels: Vec<LevelRecord> = uniform.iter().chain(&graded).map(|s| s.record.clone()).collect();
    levels.sort_by_key(|r| (r.family == MeshFamily::Graded, r.index));
    let mut table = Table::new(&["family", "index", "width", "n_nodes", "n_triangles", "n_steps", "dt", "energy", "l2_norm", "l2_error"]);
    for r in &levels {
        table.row(&[
            r.family.label().into(),
            r.index.to_string(),
            num(r.width),
            r.n_nodes.to_string(),
            r.n_triangles.to_string(),
            r.n_steps.to_string(),
            num(r.dt),
            num(r.energy),
            num(r.l2_norm),
            r.l2_error.map(num).unwrap_or_default(),
        ]);
    }
    out.write("levels.csv", &table.into_bytes())?;

    *stage = "energy_rates";
    let fit_points = config.smoothness.as_ref().map_or(MIN_FIT_POINTS, |s| s.fit_points);
    let mut energy_rates = Vec::new();
    for (family, solved) in [(MeshFamily::Uniform, &uniform), (MeshFamily::Graded, &graded)] {
        if solved.len() >= 3 {
            energy_rates.push(energy_rate(family, solved, fit_points)?);
        }
    }

    if let Some(finest) = uniform.last() {
        let mut table = Table::new(&["node", "x", "y", "u"]);
        for (i, (p, u)) in finest.mesh.nodes().iter().zip(&finest.terminal).enumerate() {
            table.row(&[i.to_string(), num(p[0]), num(p[1]), num(*u)]);
        }
        out.write("snapshot.csv", &table.into_bytes())?;
    }

    let mut smoothness = None;
    let mut kondratiev = None;
    if let Some(spec) = &config.smoothness {
        *stage = "smoothness";
        let (report, uniform_table, nterm) = timed(timings, "smoothness", || smoothness_stage(spec, &uniform, exact))?;
        out.write("uniform_errors.csv", &uniform_table)?;
        let mut table = Table::new(&["n", "sigma"]);
        for (n, s) in &nterm {
            table.row(&[n.to_string(), num(*s)]);
        }
        out.write("nterm.csv", &table.into_bytes())?;
        smoothness = Some(report);
        if let (Some(params), Some(finest)) = (&spec.kondratiev, uniform.last()) {
            *stage = "kondratiev";
            let field = FieldSnapshot::new(&finest.mesh, finest.terminal.clone());
            kondratiev = Some(timed(timings, "kondratiev", || {
                kondratiev_norm(&field, params, &domain.weight(), &spec.quadrature)
            })?);
        }
    }

    let mut semilinear = None;
    if let Some(spec) = &config.semilinear {
        *stage = "semilinear";
        let level = spec.level.unwrap_or(uniform.len() - 1);
        let solved = &uniform[level];
        let report = timed(timings, "semilinear", || {
            let n_steps = solved.record.n_steps;
            let solver = RotheSolver::new(&problem, &solved.mesh, n_steps)?;
            let eta_tilde = solver.data_norm(&problem.source)?;
            let operator_norm = estimate_operator_norm(&problem, &solved.mesh, n_steps, spec.n_probes, config.seed)?;
            let mut cfg = SemilinearConfig {
                eps: 0.0,
                power: spec.power,
                r0: spec.r0,
                eta_tilde,
                op_norm: operator_norm.estimate,
                max_iter: spec.max_iter,
                tol: spec.tol,
            };
            let bound = smallness_check(&cfg)?;
            cfg.eps = match (spec.eps, spec.eps_factor) {
                (Some(e), _) => e,
                (None, Some(f)) => f * bound.max_eps,
                (None, None) => unreachable!("validated"),
            };
            let smallness = smallness_check(&cfg)?;
            let (_, log) = solve_semilinear_with(&solver, &problem.source, &cfg)?;
            Ok(SemilinearReport {
                level,
                h: solved.record.width,
                n_steps,
                eta_tilde,
                operator_norm,
                smallness,
                config: cfg,
                log,
            })
        })?;
        let mut table = Table::new(&["iterate", "residual", "distance_to_linear", "in_ball"]);
        for r in &report.log.iterates {
            table.row(&[r.index.to_string(), num(r.residual), num(r.distance_to_linear), u8::from(r.in_ball).to_string()]);
        }
        out.write("iterations.csv", &table.into_bytes())?;
        semilinear = Some(report);
    }

    *stage = "report";
    let report = RunReport {
        config: config.clone(),
        pencil,
        levels,
        energy_rates,
        smoothness,
        kondratiev_norm: kondratiev,
        semilinear,
        timings: Vec::new(),
        manifest: Vec::new(),
    };
    out.write_json("report.json", &report)?;
    Ok(report)
}

fn corner_pencils(config: &ExperimentConfig) -> Result<Vec<CornerPencil>> {
    let domain = config.domain()?;
    let p = &config.pencil;
    domain
        .singular_vertices()
        .iter()
        .map(|&v| {
            let theta = domain.interior_angles()[v];
            let spectrum = if p.numeric {
                pencil_eigenvalues_numeric(theta, p.count, p.n_grid)?
            } else {
                laplace_pencil_closed_form(theta, p.count)?
            };
            Ok(CornerPencil {
                vertex: v,
                theta,
                eigenvalues: spectrum.positive_real_parts(),
                summary: summarize(&spectrum)?,
                heat_weight_bound: heat_weight_bound(theta)?,
            })
        })
        .collect()
}

fn solve_family(
    config: &ExperimentConfig,
    problem: &ParabolicProblem,
    meshes: Vec<Mesh>,
    family: MeshFamily,
    exact: Option<fn(f64, [f64; 2]) -> f64>,
    threads: usize,
) -> Result<Vec<Solved>> {
    let widths: Vec<f64> = match family {
        MeshFamily::Uniform => config.mesh.uniform.clone(),
        MeshFamily::Graded => config.mesh.graded.iter().flat_map(|g| &g.n_layers).map(|&n| 1.0 / n as f64).collect(),
    };
    let jobs: Vec<(usize, Mesh)> = meshes.into_iter().enumerate().collect();
    let results = parallel_map(&jobs, threads, |(index, mesh)| -> Result<(LevelRecord, Vec<f64>)> {
        let width = widths[*index];
        let n_steps = config.problem.steps.steps(problem.horizon, width);
        let solver = RotheSolver::new(problem, mesh, n_steps)?;
        let traj = solver.solve_source(&problem.source)?;
        let terminal = traj.terminal().to_vec();
        let l2_error = exact.map(|u| {
            let field = FieldSnapshot::new(mesh, terminal.clone());
            l2_error(&field, |x| u(problem.horizon, x), &Default::default())
        });
        let record = LevelRecord {
            family,
            index: *index,
            width,
            n_nodes: mesh.n_nodes(),
            n_triangles: mesh.n_triangles(),
            n_steps,
            dt: solver.dt(),
            energy: solver.operators().stiffness.quad_form(&terminal),
            l2_norm: solver.l2_norm(&terminal),
            l2_error,
        };
        Ok((record, terminal))
    });
    jobs.into_iter()
        .zip(results)
        .map(|((_, mesh), r)| r.map(|(record, terminal)| Solved { mesh, record, terminal }))
        .collect()
}

/// Energy self-convergence over the finest `fit_points` defects (all of them
/// when fewer are available).
fn energy_rate(family: MeshFamily, solved: &[Solved], fit_points: usize) -> Result<EnergyRate> {
    let take = (fit_points + 1).min(solved.len());
    let tail = &solved[solved.len() - take..];
    let widths: Vec<f64> = tail.iter().map(|s| s.record.width).collect();
    let energies: Vec<f64> = tail.iter().map(|s| s.record.energy).collect();
    let (rate, fit) = energy_self_convergence(&widths, &energies)?;
    Ok(EnergyRate {
        family,
        rate,
        defects_used: take - 1,
        fit,
    })
}

type SmoothnessOutput = (SmoothnessReport, Vec<u8>, Vec<(usize, f64)>);

fn smoothness_stage(
    spec: &SmoothnessSpec,
    uniform: &[Solved],
    exact: Option<fn(f64, [f64; 2]) -> f64>,
) -> Result<SmoothnessOutput> {
    // exact errors when a closed form exists, successive differences otherwise
    let errors: Vec<(f64, f64)> = match exact {
        Some(_) => uniform
            .iter()
            .map(|s| (s.record.width, s.record.l2_error.expect("computed with the exact solution")))
            .collect(),
        None => {
            let snaps: Vec<FieldSnapshot<'_>> =
                uniform.iter().map(|s| FieldSnapshot::new(&s.mesh, s.terminal.clone())).collect();
            let widths: Vec<f64> = uniform.iter().map(|s| s.record.width).collect();
            successive_l2_differences(&snaps, &widths)?
        }
    };
    let mut table = Table::new(&["h", "error", "in_fit"]);
    let first_fit = errors.len().saturating_sub(spec.fit_points);
    for (i, (h, e)) in errors.iter().enumerate() {
        table.row(&[num(*h), num(*e), u8::from(i >= first_fit).to_string()]);
    }
    let meshes: Vec<&Mesh> = uniform.iter().map(|s| &s.mesh).collect();
    let finest = uniform.last().ok_or_else(|| Error::config("mesh.uniform", "empty"))?;
    let field = HierarchicalField::new(&meshes, &finest.terminal)?;
    let hi = ((field.len() as f64 * spec.nterm_max_fraction) as usize).min(field.len());
    if hi <= spec.nterm_min {
        return Err(Error::config(
            "smoothness.nterm_min",
            format!("N range [{}, {hi}] is empty for {} coefficients", spec.nterm_min, field.len()),
        ));
    }
    let nterm = field.nterm_curve(&log_spaced(spec.nterm_min, hi, spec.nterm_points));
    let report = estimate_rates(&errors[first_fit..], &nterm, 2, spec.p)?;
    Ok((report, table.into_bytes(), nterm))
}
