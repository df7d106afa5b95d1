//! Corner operator pencils, eigenvalue-free strips around the energy line and
//! the admissible Kondratiev weight exponents derived from them.
//!
//! For the Dirichlet Laplacian (m = 1) the pencil on the angular interval
//! `(0, θ)` reads `A(λ)U = -U'' - λ²U` and its spectrum is `±kπ/θ`. The
//! numeric route discretizes `U''` by central differences and solves the
//! resulting quadratic eigenproblem `(K - λ²I)U = 0`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ENERGY_LINE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PencilMethod {
    ClosedForm,
    Numeric,
    UserSupplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex<f64>> for Eigenvalue {
    fn from(c: Complex<f64>) -> Self {
        Self { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilSpectrum {
    pub theta: f64,
    pub order_m: u32,
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Eigenvalue>,
    pub method: PencilMethod,
}

impl PencilSpectrum {
    /// Validates and sorts a spectrum; rejects eigenvalues on `Re λ = m - 1`.
    pub fn new(theta: f64, order_m: u32, mut eigenvalues: Vec<Eigenvalue>, method: PencilMethod) -> Result<Self> {
        if order_m == 0 {
            return Err(Error::Parameter("pencil order m must be at least 1".into()));
        }
        let energy = order_m as f64 - 1.0;
        if let Some(e) = eigenvalues.iter().find(|e| (e.re - energy).abs() < ENERGY_LINE_TOL) {
            return Err(Error::DegeneratePencil(e.re));
        }
        eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(Self {
            theta,
            order_m,
            eigenvalues,
            method,
        })
    }

    pub fn energy_line(&self) -> f64 {
        self.order_m as f64 - 1.0
    }

    /// Positive real parts in increasing order.
    pub fn positive_real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.re).filter(|r| *r > 0.0).collect()
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 2.0 * PI + 1e-12) {
        return Err(Error::Domain(format!("corner angle {theta} outside (0, 2π]")));
    }
    Ok(())
}

/// `λ_k = ±kπ/θ`, `k = 1..=count`.
pub fn laplace_pencil_closed_form(theta: f64, count: usize) -> Result<PencilSpectrum> {
    check_angle(theta)?;
    if count == 0 {
        return Err(Error::Parameter("eigenvalue count must be at least 1".into()));
    }
    let eigs = (1..=count)
        .flat_map(|k| {
            let l = k as f64 * PI / theta;
            [Eigenvalue { re: l, im: 0.0 }, Eigenvalue { re: -l, im: 0.0 }]
        })
        .collect();
    PencilSpectrum::new(theta, 1, eigs, PencilMethod::ClosedForm)
}

/// Eigenvalues of the symmetric tridiagonal matrix `tridiag(off, diag, off)`
/// below `x`, counted with the LDLᵀ inertia recurrence.
fn sturm_count(diag: f64, off: f64, n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..n {
        let coupling = if i == 0 { 0.0 } else { off * off / d };
        d = diag - x - coupling;
        if d == 0.0 {
            d = -f64::EPSILON * (diag.abs() + x.abs());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th smallest eigenvalue (0-based) of a constant symmetric tridiagonal matrix by bisection.
fn tridiagonal_eigenvalue(diag: f64, off: f64, n: usize, k: usize) -> f64 {
    let radius = 2.0 * off.abs();
    let (mut lo, mut hi) = (diag - radius, diag + radius);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, n, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Central-difference discretization of the m = 1 Laplace pencil with
/// `n_grid` interior points on `(0, θ)`.
///
/// The companion linearization of `(K - λ²I)U = 0` has spectrum `±√μ` for the
/// eigenvalues `μ` of the symmetric tridiagonal `K`, which are found by Sturm
/// bisection. [`QuadraticPencil::companion_eigenvalues`] solves the same
/// linearization densely and is used to cross-check this route.
pub fn pencil_eigenvalues_numeric(theta: f64, count: usize, n_grid: usize) -> Result<PencilSpectrum> {
    check_angle(theta)?;
    if count == 0 {
        return Err(Error::Parameter("eigenvalue count must be at least 1".into()));
    }
    if n_grid < 8 * count {
        return Err(Error::Parameter(format!(
            "n_grid = {n_grid} must be at least 8·count = {}",
            8 * count
        )));
    }
    let h = theta / (n_grid + 1) as f64;
    let (diag, off) = (2.0 / (h * h), -1.0 / (h * h));
    let mut eigs = Vec::with_capacity(2 * count);
    for k in 0..count {
        let mu = tridiagonal_eigenvalue(diag, off, n_grid, k);
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Numeric(format!("non-positive pencil eigenvalue {mu}")));
        }
        let l = mu.sqrt();
        eigs.push(Eigenvalue { re: l, im: 0.0 });
        eigs.push(Eigenvalue { re: -l, im: 0.0 });
    }
    PencilSpectrum::new(theta, 1, eigs, PencilMethod::Numeric)
}

/// Matrix pencil `K0 + λ K1 + λ² K2`.
#[derive(Debug, Clone)]
pub struct QuadraticPencil {
    pub k0: DMatrix<f64>,
    pub k1: DMatrix<f64>,
    pub k2: DMatrix<f64>,
}

impl QuadraticPencil {
    /// Dense version of the angular Laplace pencil with `n` interior points.
    pub fn angular_laplace(theta: f64, n: usize) -> Self {
        let h = theta / (n + 1) as f64;
        let mut k0 = DMatrix::zeros(n, n);
        for i in 0..n {
            k0[(i, i)] = 2.0 / (h * h);
            if i + 1 < n {
                k0[(i, i + 1)] = -1.0 / (h * h);
                k0[(i + 1, i)] = -1.0 / (h * h);
            }
        }
        Self {
            k0,
            k1: DMatrix::zeros(n, n),
            k2: -DMatrix::identity(n, n),
        }
    }

    /// Eigenvalues of the first companion linearization
    /// `[0 I; -K2⁻¹K0  -K2⁻¹K1] z = λ z`, sorted by real part.
    pub fn companion_eigenvalues(&self) -> Result<Vec<Complex<f64>>> {
        let n = self.k0.nrows();
        let lu = self.k2.clone().lu();
        let a = lu
            .solve(&(-&self.k0))
            .ok_or_else(|| Error::Singular("leading pencil coefficient is singular".into()))?;
        let b = lu
            .solve(&(-&self.k1))
            .ok_or_else(|| Error::Singular("leading pencil coefficient is singular".into()))?;
        let mut c = DMatrix::zeros(2 * n, 2 * n);
        c.view_mut((0, n), (n, n)).copy_from(&DMatrix::<f64>::identity(n, n));
        c.view_mut((n, 0), (n, n)).copy_from(&a);
        c.view_mut((n, n), (n, n)).copy_from(&b);
        let mut eigs: Vec<Complex<f64>> = c.complex_eigenvalues().iter().copied().collect();
        if eigs.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(Error::Numeric("companion eigen-solver failed".into()));
        }
        eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(eigs)
    }
}

/// Widths of the eigenvalue-free strip around the energy line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripWidths {
    /// `+∞` when no eigenvalue lies left of the energy line.
    pub delta_minus: f64,
    /// `+∞` when no eigenvalue lies right of the energy line.
    pub delta_plus: f64,
}

/// `δ- = (m-1) - max{Re λ < m-1}`, `δ+ = min{Re λ > m-1} - (m-1)`, using real
/// parts only.
pub fn strip_delta(spectrum: &PencilSpectrum) -> Result<StripWidths> {
    let energy = spectrum.energy_line();
    let mut delta_minus = f64::INFINITY;
    let mut delta_plus = f64::INFINITY;
    for e in &spectrum.eigenvalues {
        let gap = e.re - energy;
        if gap.abs() < ENERGY_LINE_TOL {
            return Err(Error::DegeneratePencil(e.re));
        }
        if gap < 0.0 {
            delta_minus = delta_minus.min(-gap);
        } else {
            delta_plus = delta_plus.min(gap);
        }
    }
    Ok(StripWidths {
        delta_minus,
        delta_plus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub inclusive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightInterval {
    pub lower: Bound,
    pub upper: Bound,
    pub nonlinear_constraint_applied: bool,
    pub empty: bool,
}

impl WeightInterval {
    pub fn contains(&self, a: f64) -> bool {
        if self.empty {
            return false;
        }
        let above = if self.lower.inclusive { a >= self.lower.value } else { a > self.lower.value };
        let below = if self.upper.inclusive { a <= self.upper.value } else { a < self.upper.value };
        above && below
    }

    /// Set inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &WeightInterval) -> bool {
        if self.empty {
            return true;
        }
        if other.empty {
            return false;
        }
        let lower_ok = self.lower.value > other.lower.value
            || (self.lower.value == other.lower.value && (other.lower.inclusive || !self.lower.inclusive));
        let upper_ok = self.upper.value < other.upper.value
            || (self.upper.value == other.upper.value && (other.upper.inclusive || !self.upper.inclusive));
        lower_ok && upper_ok
    }
}

impl fmt::Display for WeightInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "∅");
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lower.inclusive { '[' } else { '(' },
            self.lower.value,
            self.upper.value,
            if self.upper.inclusive { ']' } else { ')' },
        )
    }
}

fn tighter_lower(a: Bound, b: Bound) -> Bound {
    if a.value > b.value || (a.value == b.value && !a.inclusive) {
        a
    } else {
        b
    }
}

fn tighter_upper(a: Bound, b: Bound) -> Bound {
    if a.value < b.value || (a.value == b.value && !a.inclusive) {
        a
    } else {
        b
    }
}

/// Weight exponents `a` with `-δ- < a + m < δ+` and `a ∈ [-m, m]`; the
/// nonlinear theory additionally requires `a ≥ -1/2`.
pub fn admissible_weights(strips: &StripWidths, m: u32, nonlinear: bool) -> WeightInterval {
    let m = m as f64;
    let mut lower = tighter_lower(
        Bound { value: -strips.delta_minus - m, inclusive: false },
        Bound { value: -m, inclusive: true },
    );
    if nonlinear {
        lower = tighter_lower(lower, Bound { value: -0.5, inclusive: true });
    }
    let upper = tighter_upper(
        Bound { value: strips.delta_plus - m, inclusive: false },
        Bound { value: m, inclusive: true },
    );
    let empty = lower.value > upper.value
        || (lower.value == upper.value && !(lower.inclusive && upper.inclusive));
    WeightInterval {
        lower,
        upper,
        nonlinear_constraint_applied: nonlinear,
        empty,
    }
}

/// Upper end `min(1, π/θ - 1)` of the weight range `-1 ≤ a < ·` for the heat
/// equation at a corner of angle θ.
pub fn heat_weight_bound(theta: f64) -> Result<f64> {
    check_angle(theta)?;
    Ok((PI / theta - 1.0).min(1.0))
}

/// Strip widths and both weight intervals for one corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilSummary {
    pub theta: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub weight_interval_linear: WeightInterval,
    pub weight_interval_nonlinear: WeightInterval,
}

pub fn summarize(spectrum: &PencilSpectrum) -> Result<PencilSummary> {
    let strips = strip_delta(spectrum)?;
    Ok(PencilSummary {
        theta: spectrum.theta,
        delta_minus: strips.delta_minus,
        delta_plus: strips.delta_plus,
        weight_interval_linear: admissible_weights(&strips, spectrum.order_m, false),
        weight_interval_nonlinear: admissible_weights(&strips, spectrum.order_m, true),
    })
}
