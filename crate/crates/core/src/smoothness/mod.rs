//! Weighted norms, Besov surrogates, best N-term approximation and empirical
//! convergence-rate estimation.

mod besov;
mod hierarchy;
mod norms;

use serde::{Deserialize, Serialize};

pub use besov::{besov_norm_moduli, moduli_of_smoothness, BesovEstimate, GridSamples, MIN_DYADIC_SCALES};
pub use hierarchy::{best_n_term_l2, log_spaced, HierarchicalCoefficient, HierarchicalField, Refinement};
pub use norms::{kondratiev_norm, l2_error, sobolev_norm, KondratievParams, QuadratureConfig};

use crate::error::{Error, Result};
use crate::field::FieldSnapshot;
use crate::mesh::Mesh;
use crate::pde::mass_matrix;

fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("spatial dimension d = {d} must be 2 or 3")))
    }
}

/// Integrability `τ` of the adaptivity scale, `1/τ = γ/d + 1/p`.
pub fn adaptivity_tau(gamma: f64, d: usize, p: f64) -> Result<f64> {
    check_dim(d)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("smoothness γ = {gamma} must be non-negative")));
    }
    if !(p > 1.0) {
        return Err(Error::Parameter(format!("integrability p = {p} must exceed 1")));
    }
    Ok(1.0 / (gamma / d as f64 + 1.0 / p))
}

/// Smoothness `γ = d(1/τ − 1/p)` recovered from `τ`.
pub fn adaptivity_gamma(tau: f64, d: usize, p: f64) -> f64 {
    d as f64 * (1.0 / tau - 1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    /// Time-derivative order.
    pub k: usize,
    pub m: f64,
    pub s: f64,
    pub a: f64,
    pub gamma: f64,
    /// Dimension of the singular set.
    pub delta: usize,
    pub d: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCheck {
    pub ok: bool,
    pub tau: f64,
    pub failed_conditions: Vec<String>,
    /// Set when the dimension differs from the three-dimensional statement.
    pub note: Option<String>,
}

/// Checks `0 ≤ γ < min(m, (d/δ)s)` and `a > (δ/d)γ`; `δ = 0` removes the
/// `s`-bound.
pub fn embedding_check(params: &EmbeddingParams) -> Result<EmbeddingCheck> {
    let EmbeddingParams { m, s, a, gamma, delta, d, p, .. } = *params;
    check_dim(d)?;
    if delta > 1 {
        return Err(Error::Parameter(format!("singular set dimension δ = {delta} must be 0 or 1")));
    }
    let (dd, del) = (d as f64, delta as f64);
    let s_bound = if delta == 0 { f64::INFINITY } else { dd / del * s };
    let mut failed = Vec::new();
    if gamma < 0.0 {
        failed.push("gamma >= 0".to_string());
    }
    if !(gamma < m) {
        failed.push(format!("gamma < m ({gamma} >= {m})"));
    }
    if !(gamma < s_bound) {
        failed.push(format!("gamma < (d/delta)*s ({gamma} >= {s_bound})"));
    }
    if !(a > del / dd * gamma) {
        failed.push(format!("a > (delta/d)*gamma ({a} <= {})", del / dd * gamma));
    }
    let tau = adaptivity_tau(gamma.max(0.0), d, p)?;
    Ok(EmbeddingCheck {
        ok: failed.is_empty(),
        tau,
        failed_conditions: failed,
        note: (d != 3).then(|| format!("d = {d} used in place of 3")),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln y` about the fitted line.
    pub rms_residual: f64,
    pub points: usize,
    pub x_range: (f64, f64),
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Parameter("need at least two (x, y) pairs".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Parameter("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("log-log fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    let (lo, hi) = x.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    Ok(LogLogFit {
        slope,
        intercept,
        rms_residual: rms,
        points: x.len(),
        x_range: (lo, hi),
    })
}

/// Minimum number of points in every rate fit.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub d: usize,
    pub p: f64,
    /// Convergence order in `h` of the uniform-refinement errors.
    pub sobolev_rate: f64,
    /// Decay exponent of the best N-term errors, `σ_N ≈ N^{−nterm_slope}`.
    pub nterm_slope: f64,
    pub besov_gamma_est: f64,
    pub tau: f64,
    /// `nterm_slope − sobolev_rate/d`: adaptive minus uniform decay per degree of freedom.
    pub gap: f64,
    pub uniform_fit: LogLogFit,
    pub nterm_fit: LogLogFit,
    pub warnings: Vec<String>,
}

fn monotone_warning(label: &str, errors: &[f64]) -> Option<String> {
    errors
        .windows(2)
        .any(|w| w[1] > w[0])
        .then(|| format!("{label} error sequence is not monotone"))
}

/// Slopes of `(h, error)` and `(N, σ_N)` sequences, each with at least
/// [`MIN_FIT_POINTS`] entries.
pub fn estimate_rates(uniform: &[(f64, f64)], nterm: &[(usize, f64)], d: usize, p: f64) -> Result<SmoothnessReport> {
    check_dim(d)?;
    if uniform.len() < MIN_FIT_POINTS || nterm.len() < MIN_FIT_POINTS {
        return Err(Error::Parameter(format!(
            "rate fits need at least {MIN_FIT_POINTS} points (got {} uniform, {} N-term)",
            uniform.len(),
            nterm.len()
        )));
    }
    let (h, e): (Vec<f64>, Vec<f64>) = uniform.iter().copied().unzip();
    let uniform_fit = fit_loglog(&h, &e)?;
    let (n, s): (Vec<f64>, Vec<f64>) = nterm.iter().map(|&(n, s)| (n as f64, s)).unzip();
    let nterm_fit = fit_loglog(&n, &s)?;
    let mut warnings = Vec::new();
    // uniform errors are listed from coarse to fine, N-term errors by growing N
    warnings.extend(monotone_warning("uniform-refinement", &e));
    warnings.extend(monotone_warning("best N-term", &s));
    if d != 3 {
        warnings.push(format!("adaptivity scale evaluated with d = {d} in place of 3"));
    }
    let sobolev_rate = uniform_fit.slope;
    let nterm_slope = -nterm_fit.slope;
    let besov_gamma_est = d as f64 * nterm_slope;
    let tau = if besov_gamma_est >= 0.0 {
        adaptivity_tau(besov_gamma_est, d, p)?
    } else {
        warnings.push("negative N-term slope; tau not defined".into());
        f64::NAN
    };
    Ok(SmoothnessReport {
        d,
        p,
        sobolev_rate,
        nterm_slope,
        besov_gamma_est,
        tau,
        gap: nterm_slope - sobolev_rate / d as f64,
        uniform_fit,
        nterm_fit,
        warnings,
    })
}

/// `(h_ℓ, ‖u_ℓ − u_{ℓ+1}‖_{L₂})` for fields on a red-refined chain, coarse to
/// fine; the differences converge at the rate of the errors.
pub fn successive_l2_differences(snapshots: &[FieldSnapshot<'_>], widths: &[f64]) -> Result<Vec<(f64, f64)>> {
    if snapshots.len() != widths.len() || snapshots.len() < 2 {
        return Err(Error::Parameter("need one width per snapshot and at least two snapshots".into()));
    }
    snapshots
        .windows(2)
        .zip(widths)
        .map(|(pair, &h)| {
            let (coarse, fine) = (&pair[0], &pair[1]);
            let r = Refinement::new(coarse.mesh, fine.mesh)?;
            let up = r.prolongate(&coarse.values, fine.mesh.n_nodes());
            let diff: Vec<f64> = fine.values.iter().zip(&up).map(|(a, b)| a - b).collect();
            Ok((h, mass_matrix(fine.mesh)?.quad_form(&diff).max(0.0).sqrt()))
        })
        .collect()
}

/// Energy self-convergence: with Galerkin orthogonality the energy defect
/// `E_{ℓ+1} − E_ℓ` behaves like `h_ℓ^{2α}`; returns the fit of `α`.
pub fn energy_self_convergence(widths: &[f64], energies: &[f64]) -> Result<(f64, LogLogFit)> {
    if widths.len() != energies.len() || widths.len() < 3 {
        return Err(Error::Parameter("need matching widths and energies on at least three levels".into()));
    }
    let defects: Vec<f64> = energies.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let fit = fit_loglog(&widths[..defects.len()], &defects)?;
    Ok((fit.slope / 2.0, fit))
}

/// Hierarchical field of the finest of `meshes` together with its N-term
/// curve on `count` log-spaced `N` in `[lo, hi]`.
pub fn nterm_sequence(meshes: &[&Mesh], values: &[f64], lo: usize, hi: usize, count: usize) -> Result<Vec<(usize, f64)>> {
    let field = HierarchicalField::new(meshes, values)?;
    Ok(field.nterm_curve(&log_spaced(lo, hi.min(field.len()), count)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_values() {
        assert_eq!(adaptivity_tau(0.0, 2, 2.0).unwrap(), 2.0);
        assert!((adaptivity_tau(2.0, 2, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((adaptivity_tau(2.0, 3, 2.0).unwrap() - 6.0 / 7.0).abs() < 1e-15);
        assert!(adaptivity_tau(1.0, 4, 2.0).is_err());
        assert!(adaptivity_tau(-1.0, 2, 2.0).is_err());
    }

    fn params(gamma: f64, a: f64) -> EmbeddingParams {
        EmbeddingParams {
            k: 1,
            m: 2.0,
            s: 0.6,
            a,
            gamma,
            delta: 1,
            d: 3,
            p: 2.0,
        }
    }

    #[test]
    fn embedding_examples() {
        let c = embedding_check(&params(1.2, 0.5)).unwrap();
        assert!(c.ok && c.note.is_none(), "{c:?}");
        let c = embedding_check(&params(2.0, 0.5)).unwrap();
        assert!(!c.ok);
        assert!(c.failed_conditions.iter().any(|f| f.starts_with("gamma < m")));
        let c = embedding_check(&EmbeddingParams { delta: 0, d: 2, ..params(1.9, 0.1) }).unwrap();
        assert!(c.ok && c.note.is_some());
        assert!(embedding_check(&EmbeddingParams { delta: 2, ..params(1.0, 1.0) }).is_err());
    }

    #[test]
    fn exact_halving_has_unit_slope() {
        let uniform = [(1.0, 1.0), (0.5, 0.5), (0.25, 0.25), (0.125, 0.125)];
        let nterm = [(1, 1.0), (4, 0.25), (16, 0.0625), (64, 0.015625)];
        let r = estimate_rates(&uniform, &nterm, 2, 2.0).unwrap();
        assert!((r.sobolev_rate - 1.0).abs() < 1e-14);
        assert!((r.nterm_slope - 1.0).abs() < 1e-14);
        assert_eq!(r.besov_gamma_est, 2.0 * r.nterm_slope);
        assert!((r.gap - 0.5).abs() < 1e-14);
        assert!(estimate_rates(&uniform[..3], &nterm, 2, 2.0).is_err());
    }

    #[test]
    fn non_monotone_errors_warn() {
        let uniform = [(1.0, 1.0), (0.5, 0.6), (0.25, 0.7), (0.125, 0.1)];
        let nterm = [(1, 1.0), (4, 0.25), (16, 0.0625), (64, 0.015625)];
        let r = estimate_rates(&uniform, &nterm, 3, 2.0).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }

    proptest::proptest! {
        #[test]
        fn tau_inverts(gamma in 0.0f64..6.0, p in 1.1f64..8.0, d in 2usize..=3) {
            let tau = adaptivity_tau(gamma, d, p).unwrap();
            proptest::prop_assert!((adaptivity_gamma(tau, d, p) - gamma).abs() < 1e-9);
        }

        #[test]
        fn embedding_is_monotone(gamma in 0.0f64..3.0, shrink in 0.0f64..1.0, a in -1.0f64..2.0, grow in 0.0f64..1.0, delta in 0usize..=1) {
            let base = EmbeddingParams { delta, ..params(gamma, a) };
            if embedding_check(&base).unwrap().ok {
                let moved = EmbeddingParams { gamma: gamma * shrink, a: a + grow, ..base };
                proptest::prop_assert!(embedding_check(&moved).unwrap().ok);
            }
        }
    }
}
