//! Reflection extension of sampled signals across `t = 0` and Faà di Bruno
//! expansions of `∂_t^r (g^j)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest smoothness order accepted for the Vandermonde solve.
pub const MAX_ORDER: usize = 12;

/// Iterative refinement sweeps after the pivoted LU solve.
const REFINEMENT_SWEEPS: usize = 3;

/// Coefficients with `Σ_j a_j (−λ_j)^l = 1` for `l = 0..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionCoefficients {
    pub k: usize,
    pub lambdas: Vec<f64>,
    pub a: Vec<f64>,
}

/// `λ = (k+2, k+1, …, 2)`.
pub fn default_lambdas(k: usize) -> Vec<f64> {
    (2..=k + 2).rev().map(|v| v as f64).collect()
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// Dot product evaluated as if in twice the working precision.
fn dot2(x: &[f64], y: &[f64], init: f64) -> f64 {
    let (mut s, mut c) = (init, 0.0);
    for (a, b) in x.iter().zip(y) {
        let p = a * b;
        let e = a.mul_add(*b, -p);
        let (t, q) = two_sum(s, p);
        s = t;
        c += q + e;
    }
    s + c
}

impl ReflectionCoefficients {
    fn rows(&self) -> Vec<Vec<f64>> {
        (0..=self.k)
            .map(|l| self.lambdas.iter().map(|lam| (-lam).powi(l as i32)).collect())
            .collect()
    }

    /// `Σ_j a_j (−λ_j)^l − 1` for each `l`, with compensated summation.
    pub fn residuals(&self) -> Vec<f64> {
        self.rows().iter().map(|row| dot2(row, &self.a, -1.0)).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn reflection_coefficients(k: usize, lambdas: &[f64]) -> Result<ReflectionCoefficients> {
    if k > MAX_ORDER {
        return Err(Error::Parameter(format!("order k = {k} exceeds the supported maximum {MAX_ORDER}")));
    }
    if lambdas.len() != k + 1 {
        return Err(Error::Parameter(format!("need {} lambdas for k = {k}, got {}", k + 1, lambdas.len())));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 1.0 && l.is_finite())) {
        return Err(Error::Parameter(format!("every lambda must exceed 1, got {bad}")));
    }
    for (i, a) in lambdas.iter().enumerate() {
        if lambdas[i + 1..].contains(a) {
            return Err(Error::Singular(format!("duplicate lambda {a}")));
        }
    }
    if lambdas.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Parameter("lambdas must be strictly decreasing".into()));
    }

    let mut coeffs = ReflectionCoefficients {
        k,
        lambdas: lambdas.to_vec(),
        a: vec![0.0; k + 1],
    };
    let rows = coeffs.rows();
    let n = k + 1;
    let v = DMatrix::from_fn(n, n, |l, j| rows[l][j]);
    let lu = v.lu();
    let solve = |rhs: DVector<f64>| lu.solve(&rhs).ok_or_else(|| Error::Singular("Vandermonde matrix is singular".into()));
    coeffs.a = solve(DVector::from_element(n, 1.0))?.iter().copied().collect();
    for _ in 0..REFINEMENT_SWEEPS {
        let r = DVector::from_vec(coeffs.residuals());
        if r.iter().all(|x| *x == 0.0) {
            break;
        }
        let delta = solve(-r)?;
        for (a, d) in coeffs.a.iter_mut().zip(delta.iter()) {
            *a += d;
        }
    }
    if coeffs.a.iter().any(|a| !a.is_finite()) {
        return Err(Error::Singular("Vandermonde solve produced non-finite coefficients".into()));
    }
    Ok(coeffs)
}

/// Uniformly sampled vector-valued signal on `[0, T]`, `T = (n−1)·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub dt: f64,
    pub channels: Vec<Vec<f64>>,
}

impl Signal {
    pub fn new(dt: f64, channels: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("sample spacing must be positive, got {dt}")));
        }
        let n = channels.first().map_or(0, Vec::len);
        if n < 2 || channels.iter().any(|c| c.len() != n) {
            return Err(Error::Parameter("channels must share a length of at least 2".into()));
        }
        Ok(Self { dt, channels })
    }

    pub fn from_fn(n: usize, horizon: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = horizon / (n - 1) as f64;
        Self::new(dt, vec![(0..n).map(|i| f(i as f64 * dt)).collect()])
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }
}

/// Samples at `t_i = (i − n_negative)·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedSignal {
    pub dt: f64,
    pub n_negative: usize,
    pub channels: Vec<Vec<f64>>,
}

impl ExtendedSignal {
    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.n_negative as f64) * self.dt
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Lagrange interpolation on the sample window nearest to `x` (in index units).
fn interpolate(samples: &[f64], x: f64, points: usize) -> f64 {
    let n = samples.len();
    let points = points.min(n);
    let start = ((x.floor() as isize) - (points as isize - 1) / 2).clamp(0, (n - points) as isize) as usize;
    let nodes = start..start + points;
    nodes
        .clone()
        .map(|i| {
            let li: f64 = nodes
                .clone()
                .filter(|&m| m != i)
                .map(|m| (x - m as f64) / (i as f64 - m as f64))
                .product();
            li * samples[i]
        })
        .sum()
}

/// Number of negative samples that only need `u` on `[0, T]`.
pub fn max_negative_samples(signal: &Signal, coeffs: &ReflectionCoefficients) -> usize {
    let lam_max = coeffs.lambdas[0];
    (((signal.len() - 1) as f64 / lam_max) * (1.0 + 1e-12)).floor() as usize
}

/// `Eu(−s) = Σ_j a_j u(λ_j s)` on `n_negative` samples left of 0 (default: the
/// full range `[−T/λ_1, 0)`), identity on `[0, T]`.
pub fn extend_signal(
    signal: &Signal,
    coeffs: &ReflectionCoefficients,
    n_negative: Option<usize>,
) -> Result<ExtendedSignal> {
    let available = max_negative_samples(signal, coeffs);
    let n_neg = n_negative.unwrap_or(available);
    if n_neg > available {
        return Err(Error::Range(format!(
            "{n_neg} negative samples need u beyond T; at most {available} are available"
        )));
    }
    let points = (coeffs.k + 2).max(8);
    let last = (signal.len() - 1) as f64;
    let channels = signal
        .channels
        .iter()
        .map(|u| {
            let mut out = Vec::with_capacity(n_neg + u.len());
            for i in (1..=n_neg).rev() {
                let value = coeffs
                    .lambdas
                    .iter()
                    .zip(&coeffs.a)
                    .map(|(lam, a)| {
                        let x = (lam * i as f64).min(last);
                        let nearest = x.round();
                        let ux = if (x - nearest).abs() < 1e-9 * x.max(1.0) {
                            u[nearest as usize]
                        } else {
                            interpolate(u, x, points)
                        };
                        a * ux
                    })
                    .sum();
                out.push(value);
            }
            out.extend_from_slice(u);
            out
        })
        .collect();
    Ok(ExtendedSignal {
        dt: signal.dt,
        n_negative: n_neg,
        channels,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Δ^r u_{start} / dt^r` with forward differences.
fn forward_difference(u: &[f64], start: usize, r: usize, dt: f64) -> f64 {
    let sum: f64 = (0..=r)
        .map(|i| {
            let sign = if (r - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(r, i) * u[start + i]
        })
        .sum();
    sum / dt.powi(r as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionMismatch {
    pub order: usize,
    pub left: f64,
    pub right: f64,
    pub mismatch: f64,
}

/// One-sided first-order difference quotients of orders `0..=max_order` at
/// `t = 0`, worst channel per order.
pub fn junction_report(ext: &ExtendedSignal, max_order: usize) -> Result<Vec<JunctionMismatch>> {
    let right_len = ext.len() - ext.n_negative;
    if ext.n_negative < max_order || right_len <= max_order {
        return Err(Error::Range(format!("need {max_order} samples on each side of 0")));
    }
    Ok((0..=max_order)
        .map(|order| {
            let mut worst = JunctionMismatch {
                order,
                left: 0.0,
                right: 0.0,
                mismatch: -1.0,
            };
            for u in &ext.channels {
                let right = forward_difference(u, ext.n_negative, order, ext.dt);
                let left = forward_difference(u, ext.n_negative - order, order, ext.dt);
                let mismatch = (right - left).abs();
                if mismatch > worst.mismatch {
                    worst = JunctionMismatch {
                        order,
                        left,
                        right,
                        mismatch,
                    };
                }
            }
            worst
        })
        .collect())
}

/// Discrete `H^k` norm `(Σ_{r≤k} Σ_i dt·|Δ^r u_i / dt^r|²)^{1/2}` summed over channels.
pub fn discrete_hk_norm(channels: &[Vec<f64>], dt: f64, k: usize) -> f64 {
    channels
        .iter()
        .map(|u| {
            (0..=k)
                .map(|r| {
                    (0..u.len().saturating_sub(r))
                        .map(|i| dt * forward_difference(u, i, r, dt).powi(2))
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Exponent tuple `(κ_1, …, κ_r)` with `Σ i·κ_i = r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaaTuple {
    pub r: usize,
    pub kappa: Vec<usize>,
}

impl FaaTuple {
    /// `Σ κ_i`, the number of inner derivative factors.
    pub fn total(&self) -> usize {
        self.kappa.iter().sum()
    }

    /// `r! / (κ_1!·…·κ_r!)`.
    pub fn multinomial(&self) -> f64 {
        let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
        fact(self.r) / self.kappa.iter().map(|&k| fact(k)).product::<f64>()
    }
}

/// All tuples in descending lexicographic order.
pub fn faa_di_bruno_tuples(r: usize) -> Result<Vec<FaaTuple>> {
    if r == 0 {
        return Err(Error::Parameter("derivative order r must be at least 1".into()));
    }
    fn fill(i: usize, remaining: usize, kappa: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let r = kappa.len();
        if i > r {
            if remaining == 0 {
                out.push(kappa.clone());
            }
            return;
        }
        for k in (0..=remaining / i).rev() {
            kappa[i - 1] = k;
            fill(i + 1, remaining - k * i, kappa, out);
        }
        kappa[i - 1] = 0;
    }
    let mut out = Vec::new();
    fill(1, r, &mut vec![0; r], &mut out);
    Ok(out.into_iter().map(|kappa| FaaTuple { r, kappa }).collect())
}

/// `∂^r (g^j)` from samples of `g, g', …, g^{(r)}` (`derivs[i]` holds `g^{(i)}`).
pub fn derivative_of_power(derivs: &[Vec<f64>], j: u32, r: usize) -> Result<Vec<f64>> {
    if derivs.len() <= r {
        return Err(Error::Parameter(format!("need derivatives up to order {r}, got {}", derivs.len().saturating_sub(1))));
    }
    let n = derivs[0].len();
    if derivs.iter().any(|d| d.len() != n) {
        return Err(Error::Parameter("derivative samples differ in length".into()));
    }
    if r == 0 {
        return Ok(derivs[0].iter().map(|g| g.powi(j as i32)).collect());
    }
    let tuples = faa_di_bruno_tuples(r)?;
    let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
    let mut out = vec![0.0; n];
    for t in tuples.iter().filter(|t| t.total() <= j as usize) {
        let s = t.total();
        let falling: f64 = (0..s).map(|i| (j as usize - i) as f64).product();
        let c = t.multinomial() * falling;
        for (x, o) in out.iter_mut().enumerate() {
            let mut term = c * derivs[0][x].powi((j as usize - s) as i32);
            for (i, &k) in t.kappa.iter().enumerate() {
                if k > 0 {
                    term *= (derivs[i + 1][x] / fact(i + 1)).powi(k as i32);
                }
            }
            *o += term;
        }
    }
    Ok(out)
}

/// Finite-difference weights for the derivatives `0..=order` at `x0` from
/// nodes `xs` (Fornberg's recursion). `w[m][i]` weights node `i` for order `m`.
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative of order `order` at every sample using a `width`-point stencil,
/// centred where possible and shifted inward near the ends.
pub fn fd_derivative(samples: &[f64], dt: f64, order: usize, width: usize) -> Result<Vec<f64>> {
    let n = samples.len();
    if width <= order || width > n {
        return Err(Error::Parameter(format!("stencil width {width} unsuitable for order {order} on {n} samples")));
    }
    Ok((0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let xs: Vec<f64> = (start..start + width).map(|m| (m as f64 - i as f64) * dt).collect();
            let w = fornberg_weights(0.0, &xs, order);
            w[order].iter().zip(&samples[start..start + width]).map(|(w, u)| w * u).sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Lagrange basis at nodes `−λ_j` evaluated at 1.
    fn lagrange_oracle(lambdas: &[f64]) -> Vec<f64> {
        (0..lambdas.len())
            .map(|j| {
                (0..lambdas.len())
                    .filter(|&i| i != j)
                    .map(|i| (1.0 + lambdas[i]) / (lambdas[i] - lambdas[j]))
                    .product()
            })
            .collect()
    }

    #[test]
    fn small_systems_by_hand() {
        assert_eq!(reflection_coefficients(0, &[2.0]).unwrap().a, vec![1.0]);
        let c = reflection_coefficients(1, &[3.0, 2.0]).unwrap();
        assert!((c.a[0] + 3.0).abs() < 1e-14 && (c.a[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn residuals_and_oracle_up_to_order_six() {
        for k in 0..=6 {
            let lam = default_lambdas(k);
            let c = reflection_coefficients(k, &lam).unwrap();
            assert!(c.max_residual() < 1e-12, "k = {k}: {}", c.max_residual());
            for (a, b) in c.a.iter().zip(lagrange_oracle(&lam)) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_bad_lambdas() {
        assert!(matches!(reflection_coefficients(1, &[2.0, 2.0]), Err(Error::Singular(_))));
        assert!(matches!(reflection_coefficients(1, &[3.0, 1.0]), Err(Error::Parameter(_))));
        assert!(matches!(reflection_coefficients(1, &[2.0, 3.0]), Err(Error::Parameter(_))));
        assert!(matches!(reflection_coefficients(1, &[2.0]), Err(Error::Parameter(_))));
        assert!(reflection_coefficients(13, &default_lambdas(13)).is_err());
    }

    #[test]
    fn extension_of_low_degree_polynomials() {
        let c = reflection_coefficients(1, &[3.0, 2.0]).unwrap();
        let one = Signal::from_fn(31, 1.0, |_| 1.0).unwrap();
        let e = extend_signal(&one, &c, None).unwrap();
        assert_eq!(e.n_negative, 10);
        assert!(e.channels[0].iter().all(|v| (v - 1.0).abs() < 1e-14));

        let lin = Signal::from_fn(31, 1.0, |t| t).unwrap();
        let e = extend_signal(&lin, &c, None).unwrap();
        for i in 0..e.len() {
            assert!((e.channels[0][i] - e.time(i)).abs() < 1e-14);
        }

        let sq = Signal::from_fn(31, 1.0, |t| t * t).unwrap();
        let e = extend_signal(&sq, &c, None).unwrap();
        let s = -e.time(0);
        assert!((e.channels[0][0] + 11.0 * s * s).abs() < 1e-13);
        let report = junction_report(&e, 2).unwrap();
        assert!(report[2].mismatch > 20.0);
    }

    #[test]
    fn range_is_limited_by_the_largest_lambda() {
        let c = reflection_coefficients(1, &[3.0, 2.0]).unwrap();
        let u = Signal::from_fn(31, 1.0, |t| t).unwrap();
        assert!(matches!(extend_signal(&u, &c, Some(11)), Err(Error::Range(_))));
    }

    #[test]
    fn non_integer_lambdas_interpolate() {
        let lam = [2.5, 1.5];
        let c = reflection_coefficients(1, &lam).unwrap();
        let u = Signal::from_fn(101, 1.0, |t| 2.0 * t - 1.0).unwrap();
        let e = extend_signal(&u, &c, None).unwrap();
        for i in 0..e.len() {
            assert!((e.channels[0][i] - (2.0 * e.time(i) - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn tuples_for_three() {
        let t: Vec<Vec<usize>> = faa_di_bruno_tuples(3).unwrap().into_iter().map(|t| t.kappa).collect();
        assert_eq!(t, vec![vec![3, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]);
        assert_eq!(faa_di_bruno_tuples(1).unwrap()[0].kappa, vec![1]);
        assert!(faa_di_bruno_tuples(0).is_err());
    }

    /// Partition counts by the standard coin-change recurrence.
    fn partitions(n: usize) -> usize {
        let mut p = vec![0usize; n + 1];
        p[0] = 1;
        for part in 1..=n {
            for v in part..=n {
                p[v] += p[v - part];
            }
        }
        p[n]
    }

    #[test]
    fn tuple_counts_are_partition_numbers() {
        assert_eq!(faa_di_bruno_tuples(6).unwrap().len(), 11);
        for r in 1..=12 {
            let tuples = faa_di_bruno_tuples(r).unwrap();
            assert_eq!(tuples.len(), partitions(r));
            for t in &tuples {
                assert_eq!(t.kappa.iter().enumerate().map(|(i, k)| (i + 1) * k).sum::<usize>(), r);
                assert!(t.kappa[r - 1] <= 1);
            }
        }
    }

    #[test]
    fn power_of_sine_at_zero() {
        let derivs = vec![vec![0.0], vec![1.0], vec![0.0]];
        assert_eq!(derivative_of_power(&derivs, 2, 1).unwrap(), vec![0.0]);
        assert_eq!(derivative_of_power(&derivs, 2, 2).unwrap(), vec![2.0]);
        assert_eq!(derivative_of_power(&[vec![1.5]], 3, 0).unwrap(), vec![1.5f64.powi(3)]);
    }

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    proptest::proptest! {
        #[test]
        fn extension_reproduces_polynomials(k in 0usize..=4, coef in proptest::collection::vec(-2.0f64..2.0, 5)) {
            let c = reflection_coefficients(k, &default_lambdas(k)).unwrap();
            let p = |t: f64| coef[..=k].iter().rev().fold(0.0, |acc, a| acc * t + a);
            let u = Signal::from_fn(61, 2.0, p).unwrap();
            let e = extend_signal(&u, &c, None).unwrap();
            for i in 0..e.len() {
                let exact = p(e.time(i));
                proptest::prop_assert!((e.channels[0][i] - exact).abs() < 1e-10 * (1.0 + exact.abs()));
            }
        }
    }
}
