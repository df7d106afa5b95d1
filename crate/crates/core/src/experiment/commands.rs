//! Library side of the `pencil`, `smoothness` and `extend` commands.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calculus::{
    default_lambdas, discrete_hk_norm, extend_signal, junction_report, reflection_coefficients, ExtendedSignal,
    JunctionMismatch, ReflectionCoefficients, Signal,
};
use crate::error::{Error, Result};
use crate::field::FieldSnapshot;
use crate::mesh::Mesh;
use crate::pencil::{heat_weight_bound, laplace_pencil_closed_form, pencil_eigenvalues_numeric, summarize, PencilSummary};
use crate::smoothness::{estimate_rates, log_spaced, successive_l2_differences, HierarchicalField, SmoothnessReport};

use super::config::SmoothnessSpec;
use super::output::{num, ManifestEntry, OutputDir, Table};
use super::single::load_run;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilReport {
    #[serde(flatten)]
    pub summary: PencilSummary,
    pub method: String,
    pub heat_weight_bound: f64,
}

/// Laplace pencil at one corner: `pencil.csv` with `(k, lambda_re, lambda_im)`
/// and `summary.json`.
pub fn pencil_command(theta: f64, count: usize, numeric: Option<usize>, out_dir: &Path) -> Result<PencilReport> {
    let spectrum = match numeric {
        Some(n_grid) => pencil_eigenvalues_numeric(theta, count, n_grid)?,
        None => laplace_pencil_closed_form(theta, count)?,
    };
    let mut out = OutputDir::create(out_dir)?;
    let mut table = Table::new(&["k", "lambda_re", "lambda_im"]);
    for (k, e) in spectrum.eigenvalues.iter().filter(|e| e.re > 0.0).enumerate() {
        table.row(&[(k + 1).to_string(), num(e.re), num(e.im)]);
    }
    out.write("pencil.csv", &table.into_bytes())?;
    let report = PencilReport {
        summary: summarize(&spectrum)?,
        method: serde_json::to_value(spectrum.method)?.as_str().unwrap_or_default().to_string(),
        heat_weight_bound: heat_weight_bound(theta)?,
    };
    out.write_json("summary.json", &report)?;
    out.finish()?;
    Ok(report)
}

/// Rates from a coarse-to-fine sequence of run directories on a red-refined
/// chain; writes `smoothness.json`, `uniform_errors.csv` and `nterm.csv`.
pub fn smoothness_command(runs: &[&Path], spec: &SmoothnessSpec, out_dir: &Path) -> Result<SmoothnessReport> {
    if runs.len() < spec.fit_points + 1 {
        return Err(Error::config(
            "runs",
            format!("{} runs given, rate fits over {} points need {}", runs.len(), spec.fit_points, spec.fit_points + 1),
        ));
    }
    let loaded: Vec<(Mesh, Vec<f64>, f64)> = runs.iter().map(|d| load_run(d)).collect::<Result<_>>()?;
    let snaps: Vec<FieldSnapshot<'_>> = loaded.iter().map(|(m, v, _)| FieldSnapshot::new(m, v.clone())).collect();
    let widths: Vec<f64> = loaded.iter().map(|r| r.2).collect();
    let errors = successive_l2_differences(&snaps, &widths)?;
    let meshes: Vec<&Mesh> = loaded.iter().map(|r| &r.0).collect();
    let field = HierarchicalField::new(&meshes, &loaded.last().expect("non-empty").1)?;
    let hi = (field.len() as f64 * spec.nterm_max_fraction) as usize;
    if hi <= spec.nterm_min {
        return Err(Error::config("nterm_min", format!("N range [{}, {hi}] is empty", spec.nterm_min)));
    }
    let nterm = field.nterm_curve(&log_spaced(spec.nterm_min, hi, spec.nterm_points));
    let first = errors.len() - spec.fit_points;
    let report = estimate_rates(&errors[first..], &nterm, 2, spec.p)?;

    let mut out = OutputDir::create(out_dir)?;
    let mut table = Table::new(&["h", "error", "in_fit"]);
    for (i, (h, e)) in errors.iter().enumerate() {
        table.row(&[num(*h), num(*e), u8::from(i >= first).to_string()]);
    }
    out.write("uniform_errors.csv", &table.into_bytes())?;
    let mut table = Table::new(&["n", "sigma"]);
    for (n, s) in &nterm {
        table.row(&[n.to_string(), num(*s)]);
    }
    out.write("nterm.csv", &table.into_bytes())?;
    out.write_json("smoothness.json", &report)?;
    out.finish()?;
    Ok(report)
}

/// Reads `t,c0,c1,…` rows with uniform `t` starting at 0.
pub fn read_signal_csv(path: &Path) -> Result<Signal> {
    let mut times = Vec::new();
    let mut channels: Vec<Vec<f64>> = Vec::new();
    for rec in csv::Reader::from_path(path)?.records() {
        let rec = rec?;
        let values: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parameter(format!("bad signal record {rec:?}: {e}")))?;
        if values.len() < 2 {
            return Err(Error::Parameter("signal rows need a time and at least one channel".into()));
        }
        if channels.is_empty() {
            channels = vec![Vec::new(); values.len() - 1];
        } else if channels.len() != values.len() - 1 {
            return Err(Error::Parameter(format!("ragged signal row {rec:?}")));
        }
        times.push(values[0]);
        for (c, v) in channels.iter_mut().zip(&values[1..]) {
            c.push(*v);
        }
    }
    if times.len() < 2 {
        return Err(Error::Parameter("signal needs at least two samples".into()));
    }
    let dt = times[1] - times[0];
    let uniform = times
        .iter()
        .enumerate()
        .all(|(i, t)| (t - i as f64 * dt).abs() <= 1e-9 * dt.abs().max(t.abs()).max(1.0));
    if times[0].abs() > 1e-12 || !uniform {
        return Err(Error::Parameter("signal times must be uniform and start at 0".into()));
    }
    Signal::new(dt, channels)
}

pub fn extended_signal_csv(ext: &ExtendedSignal) -> Vec<u8> {
    let mut header = vec!["t".to_string()];
    header.extend((0..ext.channels.len()).map(|c| format!("c{c}")));
    let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for i in 0..ext.len() {
        let mut row = vec![num(ext.time(i))];
        row.extend(ext.channels.iter().map(|c| num(c[i])));
        table.row(&row);
    }
    table.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub coefficients: ReflectionCoefficients,
    pub max_residual: f64,
    pub n_negative: usize,
    pub junction: Vec<JunctionMismatch>,
    /// `‖Eu‖ / ‖u‖` in the discrete `H^k` norm.
    pub norm_ratio: f64,
    #[serde(skip)]
    pub manifest: Vec<ManifestEntry>,
}

/// Extends a sampled signal to negative times; writes `extended.csv` and
/// `junction.json`.
pub fn extend_command(signal: &Signal, k: usize, lambdas: Option<&[f64]>, out_dir: &Path) -> Result<ExtensionReport> {
    let lambdas = lambdas.map_or_else(|| default_lambdas(k), <[f64]>::to_vec);
    let coefficients = reflection_coefficients(k, &lambdas)?;
    let ext = extend_signal(signal, &coefficients, None)?;
    let junction = junction_report(&ext, k)?;
    let norm_u = discrete_hk_norm(&signal.channels, signal.dt, k);
    let norm_ratio = discrete_hk_norm(&ext.channels, ext.dt, k) / norm_u;
    let mut out = OutputDir::create(out_dir)?;
    out.write("extended.csv", &extended_signal_csv(&ext))?;
    let mut report = ExtensionReport {
        max_residual: coefficients.max_residual(),
        coefficients,
        n_negative: ext.n_negative,
        junction,
        norm_ratio,
        manifest: Vec::new(),
    };
    out.write_json("junction.json", &report)?;
    report.manifest = out.finish()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut text = String::from("t,u,v\n");
        for i in 0..=200 {
            let t = i as f64 * 0.005;
            text.push_str(&format!("{t},{},{}\n", 2.0 * t + 1.0, 1.0 - t));
        }
        std::fs::write(&path, text).unwrap();
        let s = read_signal_csv(&path).unwrap();
        assert_eq!(s.channels.len(), 2);
        let report = extend_command(&s, 2, None, &dir.path().join("ext")).unwrap();
        assert!(report.max_residual < 1e-12);
        // linear data is reproduced, so every junction quotient agrees up to rounding
        assert!(report.junction.iter().all(|j| j.mismatch < 1e-6), "{:?}", report.junction);
        assert!(dir.path().join("ext/extended.csv").exists());
    }

    #[test]
    fn rejects_non_uniform_times() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "t,u\n0,1\n0.1,1\n0.3,1\n").unwrap();
        assert!(read_signal_csv(&path).is_err());
    }

    #[test]
    fn pencil_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let r = pencil_command(1.5 * std::f64::consts::PI, 3, None, dir.path()).unwrap();
        assert!((r.summary.weight_interval_linear.upper.value + 1.0 / 3.0).abs() < 1e-15);
        let csv = std::fs::read_to_string(dir.path().join("pencil.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }
}
