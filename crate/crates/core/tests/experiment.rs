use std::path::Path;
use std::process::Command;

use cornerpde::experiment::{preset, run_experiment, ExperimentConfig};

fn minimal_square(dir: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
            "name": "minimal-square",
            "domain": {{"type": "rectangle", "min": [0, 0], "max": [1, 1]}},
            "mesh": {{"uniform": [0.5, 0.25, 0.125, 0.0625, 0.03125]}},
            "problem": {{"source": {{"type": "sine_product", "amplitude": 2.0}}, "horizon": 0.5,
                        "steps": {{"rule": "fixed", "n_steps": 6}}}},
            "smoothness": {{"nterm_min": 4}},
            "output_dir": "{dir}",
            "seed": 11
        }}"#
    ))
    .unwrap()
}

fn read(dir: &Path, file: &str) -> Vec<u8> {
    std::fs::read(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let root = tempfile::tempdir().unwrap();
    let cfg = minimal_square("run");
    let first = run_experiment(&cfg, root.path(), 1).unwrap();
    let manifest = read(&root.path().join("run"), "manifest.json");
    let second = run_experiment(&cfg, root.path(), 3).unwrap();
    assert_eq!(first.manifest, second.manifest);
    assert_eq!(manifest, read(&root.path().join("run"), "manifest.json"));
    for f in ["config.json", "levels.csv", "nterm.csv", "pencil.csv", "report.json", "snapshot.csv", "uniform_errors.csv"] {
        assert!(first.manifest.iter().any(|e| e.file == f), "{f} not in manifest");
    }
    assert!(!first.manifest.iter().any(|e| e.file == "timings.log"));
}

#[test]
fn report_embeds_the_config_and_rate_fields() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = preset("lshape-linear").unwrap();
    cfg.mesh.uniform.truncate(5);
    cfg.mesh.graded = None;
    run_experiment(&cfg, root.path(), 1).unwrap();
    let text = std::fs::read_to_string(root.path().join("lshape-linear/report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let echoed: ExperimentConfig = serde_json::from_value(report["config"].clone()).unwrap();
    assert_eq!(echoed, cfg);
    for field in ["sobolev_rate", "nterm_slope", "gap", "besov_gamma_est", "tau"] {
        assert!(report["smoothness"][field].is_number(), "{field} missing");
    }
    assert_eq!(report["pencil"].as_array().unwrap().len(), 6);
}

#[test]
fn failing_stage_leaves_error_report_and_partial_manifest() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = preset("lshape-semilinear").unwrap();
    cfg.mesh.uniform = vec![0.25, 0.125];
    if let Some(s) = cfg.semilinear.as_mut() {
        s.eps_factor = Some(100.0);
    }
    let err = run_experiment(&cfg, root.path(), 1).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    let dir = root.path().join("lshape-semilinear");
    let error: serde_json::Value = serde_json::from_slice(&read(&dir, "error.json")).unwrap();
    assert_eq!(error["stage"], "semilinear");
    assert!(error["iteration_log"]["warnings"].as_array().is_some_and(|w| !w.is_empty()));
    let manifest: serde_json::Value = serde_json::from_slice(&read(&dir, "manifest.json")).unwrap();
    let files: Vec<&str> = manifest.as_array().unwrap().iter().map(|e| e["file"].as_str().unwrap()).collect();
    assert!(files.contains(&"levels.csv") && files.contains(&"error.json") && !files.contains(&"report.json"));
}

fn cli(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cornerpde"))
        .args(args)
        .env("CORNERPDE_OUT", out)
        .output()
        .unwrap()
}

#[test]
fn cli_exit_codes() {
    let root = tempfile::tempdir().unwrap();
    let cfg_path = root.path().join("bad.json");
    let mut cfg = minimal_square("bad");
    cfg.domain = cornerpde::domain::DomainKind::Sector { theta: 3.0 * std::f64::consts::PI, radius: 1.0 };
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = cli(&["experiment", cfg_path.to_str().unwrap()], root.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain.theta"));

    let out = cli(&["pencil", "--theta", "4.71238898038469", "--count", "3"], root.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(root.path().join("pencil/pencil.csv").exists());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["weight_interval_nonlinear"]["lower"]["value"], -0.5);

    let out = cli(&["pencil", "--theta", "7.0"], root.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_solve_then_smoothness() {
    let root = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for k in 1..=5 {
        let path = root.path().join(format!("level{k}.json"));
        std::fs::write(
            &path,
            format!(
                r#"{{"domain": {{"type": "l_shape"}}, "mesh": {{"type": "uniform", "h": {}}},
                    "problem": {{"source": {{"type": "constant", "value": 1.0}}, "horizon": 1.0,
                                "steps": {{"rule": "fixed", "n_steps": 5}}}}}}"#,
                1.0 / f64::from(1u32 << k)
            ),
        )
        .unwrap();
        let out = cli(&["solve", path.to_str().unwrap()], root.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        dirs.push(root.path().join(format!("level{k}")));
    }
    let mut args = vec!["smoothness", "--nterm-min", "4"];
    args.extend(dirs.iter().map(|d| d.to_str().unwrap()));
    let out = cli(&args, root.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["gap"].is_number());
    assert!(root.path().join("smoothness/nterm.csv").exists());
}
