use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{default_grading_exponent, DomainKind, PolygonalDomain};
use crate::error::{Error, Result};
use crate::mesh::{mesh_graded, mesh_uniform, Mesh};
use crate::pde::{Diffusion, ParabolicProblem, Source};
use crate::smoothness::{KondratievParams, QuadratureConfig, MIN_FIT_POINTS};

/// Right-hand sides expressible in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Constant { value: f64 },
    /// `amplitude · sin(πx) sin(πy)`, constant in time.
    SineProduct { amplitude: f64 },
    /// Data of `u*(t,x,y) = t·x(1−x)·y(1−y)` on the unit square.
    Manufactured,
}

impl SourceSpec {
    pub fn build(&self) -> Source {
        match *self {
            SourceSpec::Constant { value } => Source::Constant(value),
            SourceSpec::SineProduct { amplitude } => {
                Source::function(move |_, p| amplitude * (PI * p[0]).sin() * (PI * p[1]).sin())
            }
            SourceSpec::Manufactured => Source::Function(Arc::new(manufactured_source)),
        }
    }

    /// Exact solution, where one is known.
    pub fn exact(&self) -> Option<fn(f64, [f64; 2]) -> f64> {
        match self {
            SourceSpec::Manufactured => Some(manufactured_solution),
            _ => None,
        }
    }
}

pub fn manufactured_solution(t: f64, p: [f64; 2]) -> f64 {
    t * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])
}

pub fn manufactured_source(t: f64, p: [f64; 2]) -> f64 {
    let (bx, by) = (p[0] * (1.0 - p[0]), p[1] * (1.0 - p[1]));
    bx * by + 2.0 * t * (bx + by)
}

/// How the number of time steps follows from the mesh width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepRule {
    Fixed { n_steps: usize },
    /// `Δt ≈ factor · h²`.
    PerH2 { factor: f64 },
}

impl StepRule {
    pub fn steps(&self, horizon: f64, h: f64) -> usize {
        match *self {
            StepRule::Fixed { n_steps } => n_steps,
            StepRule::PerH2 { factor } => (horizon / (factor * h * h) - 1e-9).ceil().max(1.0) as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub source: SourceSpec,
    pub horizon: f64,
    pub steps: StepRule,
    /// Constant symmetric diffusion tensor; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<[[f64; 2]; 2]>,
}

impl ProblemSpec {
    pub fn build(&self, domain: PolygonalDomain) -> ParabolicProblem {
        let mut p = ParabolicProblem::heat(domain, self.source.build(), self.horizon);
        if let Some(a) = self.diffusion {
            p.diffusion = Diffusion::Constant(a);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradedSpec {
    /// Grading exponent; defaults to `min(1, π/θ)` for the largest angle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub n_layers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    /// Uniform mesh widths, strictly decreasing.
    #[serde(default)]
    pub uniform: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graded: Option<GradedSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemilinearSpec {
    /// Absolute ε; exclusive with `eps_factor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// ε as a multiple of the smallness bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_factor: Option<f64>,
    pub power: u32,
    pub r0: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_n_probes")]
    pub n_probes: usize,
    /// Index into the uniform widths; the finest when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    30
}
fn default_n_probes() -> usize {
    4
}
fn default_p() -> f64 {
    2.0
}
fn default_fit_points() -> usize {
    MIN_FIT_POINTS
}
fn default_nterm_points() -> usize {
    12
}
fn default_nterm_min() -> usize {
    16
}
fn default_nterm_max_fraction() -> f64 {
    0.125
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothnessSpec {
    #[serde(default = "default_p")]
    pub p: f64,
    /// Rate fits use this many of the finest data points.
    #[serde(default = "default_fit_points")]
    pub fit_points: usize,
    #[serde(default = "default_nterm_points")]
    pub nterm_points: usize,
    #[serde(default = "default_nterm_min")]
    pub nterm_min: usize,
    /// Largest `N` as a fraction of the number of coefficients.
    #[serde(default = "default_nterm_max_fraction")]
    pub nterm_max_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kondratiev: Option<KondratievParams>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

impl Default for SmoothnessSpec {
    fn default() -> Self {
        Self {
            p: default_p(),
            fit_points: default_fit_points(),
            nterm_points: default_nterm_points(),
            nterm_min: default_nterm_min(),
            nterm_max_fraction: default_nterm_max_fraction(),
            kondratiev: None,
            quadrature: QuadratureConfig::default(),
        }
    }
}

fn default_count() -> usize {
    3
}
fn default_grid() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilSpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub numeric: bool,
    #[serde(default = "default_grid")]
    pub n_grid: usize,
}

impl Default for PencilSpec {
    fn default() -> Self {
        Self {
            count: default_count(),
            numeric: false,
            n_grid: default_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub domain: DomainKind,
    pub mesh: MeshSpec,
    pub problem: ProblemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semilinear: Option<SemilinearSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<SmoothnessSpec>,
    #[serde(default)]
    pub pencil: PencilSpec,
    /// Output directory relative to the output root.
    pub output_dir: String,
    pub seed: u64,
}

pub(crate) fn domain_from_spec(kind: DomainKind) -> Result<PolygonalDomain> {
    PolygonalDomain::from_kind(kind).map_err(|e| {
        let field = match kind {
            DomainKind::Sector { theta, .. } if !(theta > 0.0 && theta <= 2.0 * PI + 1e-12) => "domain.theta",
            DomainKind::Sector { .. } => "domain.radius",
            DomainKind::Rectangle { .. } => "domain.max",
            DomainKind::LShape => "domain",
        };
        Error::config(field, e.to_string())
    })
}

pub(crate) fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn domain(&self) -> Result<PolygonalDomain> {
        domain_from_spec(self.domain)
    }

    pub fn grading_exponent(&self) -> Result<Option<f64>> {
        let Some(g) = &self.mesh.graded else { return Ok(None) };
        Ok(Some(match g.mu {
            Some(mu) => mu,
            None => default_grading_exponent(self.domain()?.max_interior_angle()),
        }))
    }

    pub fn uniform_mesh(&self, level: usize) -> Result<Mesh> {
        mesh_uniform(&self.domain()?, self.mesh.uniform[level])
    }

    pub fn graded_mesh(&self, level: usize) -> Result<Mesh> {
        let g = self.mesh.graded.as_ref().ok_or_else(|| Error::config("mesh.graded", "not configured"))?;
        let mu = self.grading_exponent()?.expect("graded mesh configured");
        mesh_graded(&self.domain()?, g.n_layers[level], mu)
    }

    /// Checks every parameter range before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        if self.output_dir.trim().is_empty() || self.output_dir.contains("..") {
            return Err(Error::config("output_dir", "must be a non-empty relative path without '..'"));
        }
        let domain = self.domain()?;
        let m = &self.mesh;
        if m.uniform.is_empty() && m.graded.is_none() {
            return Err(Error::config("mesh", "needs uniform widths or a graded sequence"));
        }
        for (i, h) in m.uniform.iter().enumerate() {
            positive(&format!("mesh.uniform[{i}]"), *h)?;
        }
        if m.uniform.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("mesh.uniform", "widths must be strictly decreasing"));
        }
        if let DomainKind::Rectangle { .. } | DomainKind::LShape = domain.kind() {
            // grid generators need widths that divide the unit extent
            for (i, h) in m.uniform.iter().enumerate() {
                let k = 1.0 / h;
                if (k - k.round()).abs() > 1e-9 * k {
                    return Err(Error::config(format!("mesh.uniform[{i}]"), format!("1/h must be an integer, got h = {h}")));
                }
            }
        }
        if let Some(g) = &m.graded {
            if let Some(mu) = g.mu {
                if !(mu > 0.0 && mu <= 1.0) {
                    return Err(Error::config("mesh.graded.mu", format!("must lie in (0, 1], got {mu}")));
                }
            }
            if g.n_layers.is_empty() || g.n_layers.iter().any(|&n| n < 2) {
                return Err(Error::config("mesh.graded.n_layers", "needs entries of at least 2"));
            }
            if g.n_layers.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::config("mesh.graded.n_layers", "must be strictly increasing"));
            }
        }
        let p = &self.problem;
        positive("problem.horizon", p.horizon)?;
        match p.steps {
            StepRule::Fixed { n_steps: 0 } => {
                return Err(Error::config("problem.steps.n_steps", "must be at least 1"))
            }
            StepRule::PerH2 { factor } => positive("problem.steps.factor", factor)?,
            _ => {}
        }
        if let Some(a) = p.diffusion {
            if a[0][1] != a[1][0] || !(a[0][0] > 0.0 && a[0][0] * a[1][1] - a[0][1] * a[1][0] > 0.0) {
                return Err(Error::config("problem.diffusion", "must be symmetric positive definite"));
            }
        }
        if p.source == SourceSpec::Manufactured && domain.kind() != (DomainKind::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] }) {
            return Err(Error::config("problem.source", "the manufactured solution lives on the unit square"));
        }
        if let Some(s) = &self.semilinear {
            match (s.eps, s.eps_factor) {
                (Some(e), None) if e >= 0.0 && e.is_finite() => {}
                (None, Some(f)) if f >= 0.0 && f.is_finite() => {}
                _ => return Err(Error::config("semilinear.eps", "give exactly one non-negative eps or eps_factor")),
            }
            if s.power == 0 {
                return Err(Error::config("semilinear.power", "must be at least 1"));
            }
            if !(s.r0 > 1.0) {
                return Err(Error::config("semilinear.r0", format!("must exceed 1, got {}", s.r0)));
            }
            positive("semilinear.tol", s.tol)?;
            if s.max_iter == 0 || s.n_probes == 0 {
                return Err(Error::config("semilinear", "max_iter and n_probes must be at least 1"));
            }
            if m.uniform.is_empty() {
                return Err(Error::config("semilinear", "runs on a uniform mesh level"));
            }
            if s.level.is_some_and(|l| l >= m.uniform.len()) {
                return Err(Error::config("semilinear.level", "index beyond the uniform widths"));
            }
        }
        if let Some(s) = &self.smoothness {
            if !(s.p > 1.0) {
                return Err(Error::config("smoothness.p", "must exceed 1"));
            }
            if s.fit_points < MIN_FIT_POINTS {
                return Err(Error::config("smoothness.fit_points", format!("must be at least {MIN_FIT_POINTS}")));
            }
            if m.uniform.len() < s.fit_points + 1 {
                return Err(Error::config(
                    "mesh.uniform",
                    format!("rate fits over {} points need {} widths", s.fit_points, s.fit_points + 1),
                ));
            }
            if s.nterm_points < MIN_FIT_POINTS || s.nterm_min == 0 {
                return Err(Error::config("smoothness.nterm_points", "needs at least 4 points from N ≥ 1"));
            }
            if !(s.nterm_max_fraction > 0.0 && s.nterm_max_fraction <= 1.0) {
                return Err(Error::config("smoothness.nterm_max_fraction", "must lie in (0, 1]"));
            }
            if let Some(k) = &s.kondratiev {
                KondratievParams::new(k.m, k.p, k.a).map_err(|e| Error::config("smoothness.kondratiev", e.to_string()))?;
            }
            if s.quadrature.order == 0 {
                return Err(Error::config("smoothness.quadrature.order", "must be at least 1"));
            }
        }
        if self.pencil.count == 0 {
            return Err(Error::config("pencil.count", "must be at least 1"));
        }
        if self.pencil.numeric && self.pencil.n_grid < 8 * self.pencil.count {
            return Err(Error::config("pencil.n_grid", "must be at least 8 × count"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
                "name": "minimal",
                "domain": {"type": "rectangle", "min": [0, 0], "max": [1, 1]},
                "mesh": {"uniform": [0.5, 0.25]},
                "problem": {"source": {"type": "constant", "value": 1.0}, "horizon": 1.0,
                            "steps": {"rule": "fixed", "n_steps": 2}},
                "output_dir": "minimal",
                "seed": 3
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = minimal();
        assert_eq!(c.pencil, PencilSpec::default());
        assert!(c.semilinear.is_none() && c.smoothness.is_none());
    }

    #[test]
    fn bad_angle_names_the_field() {
        let mut c = minimal();
        c.domain = DomainKind::Sector { theta: 3.0 * PI, radius: 1.0 };
        match c.validate().unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "domain.theta"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn widths_must_decrease() {
        let mut c = minimal();
        c.mesh.uniform = vec![0.25, 0.5];
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "mesh.uniform"));
        c.mesh.uniform = vec![0.3];
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = minimal().to_json().replacen("\"seed\"", "\"sed\": 1, \"seed\"", 1);
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn step_rules() {
        assert_eq!(StepRule::PerH2 { factor: 1.0 }.steps(0.25, 1.0 / 8.0), 16);
        assert_eq!(StepRule::Fixed { n_steps: 7 }.steps(3.0, 0.1), 7);
    }

    #[test]
    fn manufactured_source_matches_solution() {
        // u_t − Δu by central differences
        let (t, p, e) = (0.3, [0.2, 0.7], 1e-4);
        let u = |t, p| manufactured_solution(t, p);
        let ut = (u(t + e, p) - u(t - e, p)) / (2.0 * e);
        let lap = (u(t, [p[0] + e, p[1]]) + u(t, [p[0] - e, p[1]]) + u(t, [p[0], p[1] + e]) + u(t, [p[0], p[1] - e])
            - 4.0 * u(t, p))
            / (e * e);
        assert!((ut - lap - manufactured_source(t, p)).abs() < 1e-6);
    }
}
