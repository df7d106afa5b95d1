use std::f64::consts::PI;

use crate::domain::DomainKind;
use crate::error::{Error, Result};
use crate::smoothness::{KondratievParams, QuadratureConfig};

use super::config::{
    ExperimentConfig, GradedSpec, MeshSpec, PencilSpec, ProblemSpec, SemilinearSpec, SmoothnessSpec, SourceSpec,
    StepRule,
};

pub const PRESET_NAMES: [&str; 4] = ["square-smooth", "lshape-linear", "lshape-semilinear", "slit-pencil"];

fn dyadic(from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|k| 1.0 / f64::from(1u32 << k)).collect()
}

fn lshape_unit_load(horizon: f64) -> ProblemSpec {
    ProblemSpec {
        source: SourceSpec::Constant { value: 1.0 },
        horizon,
        steps: StepRule::Fixed { n_steps: 30 },
        diffusion: None,
    }
}

/// Named configurations behind the documented experiments.
pub fn presets() -> Vec<ExperimentConfig> {
    vec![
        // smooth solution: uniform and adaptive rates agree
        ExperimentConfig {
            name: "square-smooth".into(),
            domain: DomainKind::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] },
            mesh: MeshSpec { uniform: dyadic(2, 6), graded: None },
            problem: ProblemSpec {
                source: SourceSpec::Manufactured,
                horizon: 0.25,
                steps: StepRule::PerH2 { factor: 1.0 },
                diffusion: None,
            },
            semilinear: None,
            smoothness: Some(SmoothnessSpec::default()),
            pencil: PencilSpec::default(),
            output_dir: "square-smooth".into(),
            seed: 1,
        },
        ExperimentConfig {
            name: "lshape-linear".into(),
            domain: DomainKind::LShape,
            mesh: MeshSpec {
                uniform: dyadic(2, 8),
                graded: Some(GradedSpec {
                    mu: Some(2.0 / 3.0),
                    n_layers: vec![4, 8, 16, 32, 64, 128],
                }),
            },
            problem: lshape_unit_load(3.0),
            semilinear: None,
            smoothness: Some(SmoothnessSpec {
                kondratiev: Some(KondratievParams { m: 1, p: 2.0, a: -0.5 }),
                quadrature: QuadratureConfig::default(),
                ..SmoothnessSpec::default()
            }),
            pencil: PencilSpec::default(),
            output_dir: "lshape-linear".into(),
            seed: 1,
        },
        ExperimentConfig {
            name: "lshape-semilinear".into(),
            domain: DomainKind::LShape,
            mesh: MeshSpec { uniform: dyadic(2, 5), graded: None },
            problem: lshape_unit_load(1.0),
            semilinear: Some(SemilinearSpec {
                eps: None,
                eps_factor: Some(0.5),
                power: 2,
                r0: 2.0,
                tol: 1e-10,
                max_iter: 30,
                n_probes: 4,
                level: None,
            }),
            smoothness: None,
            pencil: PencilSpec::default(),
            output_dir: "lshape-semilinear".into(),
            seed: 7,
        },
        ExperimentConfig {
            name: "slit-pencil".into(),
            domain: DomainKind::Sector { theta: 2.0 * PI, radius: 1.0 },
            mesh: MeshSpec { uniform: vec![0.2, 0.1, 0.05], graded: None },
            problem: lshape_unit_load(1.0),
            semilinear: None,
            smoothness: None,
            pencil: PencilSpec { count: 3, numeric: true, n_grid: 2000 },
            output_dir: "slit-pencil".into(),
            seed: 1,
        },
    ]
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::config("preset", format!("unknown preset `{name}`; known: {}", PRESET_NAMES.join(", "))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_and_all_validate() {
        let names: Vec<String> = presets().into_iter().map(|p| p.name).collect();
        assert_eq!(names, PRESET_NAMES);
        for p in presets() {
            p.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn presets_round_trip() {
        for p in presets() {
            let back = ExperimentConfig::from_json(&p.to_json()).unwrap();
            assert_eq!(back, p);
            assert_eq!(back.to_json(), p.to_json());
        }
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        assert_eq!(preset("nope").unwrap_err().exit_code(), 2);
        assert!(preset("lshape-semilinear").is_ok());
    }
}
