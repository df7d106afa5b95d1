use std::f64::consts::PI;

use proptest::prelude::*;

use cornerpde::calculus::{derivative_of_power, extend_signal, reflection_coefficients, Signal};
use cornerpde::domain::PolygonalDomain;
use cornerpde::field::FieldSnapshot;
use cornerpde::mesh::{mesh_uniform, Mesh};
use cornerpde::pencil::{admissible_weights, laplace_pencil_closed_form, strip_delta, summarize};
use cornerpde::smoothness::{
    adaptivity_gamma, adaptivity_tau, best_n_term_l2, embedding_check, kondratiev_norm, sobolev_norm,
    EmbeddingParams, HierarchicalField, KondratievParams, QuadratureConfig,
};

fn angle() -> impl Strategy<Value = f64> {
    (0.05f64..=2.0).prop_map(|t| t * PI)
}

/// Strictly decreasing values above 1 with gaps of at least 0.1.
fn lambdas(k: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.1f64..1.5, k + 1).prop_map(|gaps| {
        let mut v: Vec<f64> = gaps
            .iter()
            .scan(1.05, |acc, g| {
                *acc += g;
                Some(*acc)
            })
            .collect();
        v.reverse();
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strip_widths_equal_first_eigenvalue(theta in angle()) {
        let s = strip_delta(&laplace_pencil_closed_form(theta, 3).unwrap()).unwrap();
        prop_assert!((s.delta_minus - PI / theta).abs() <= 1e-12 * (PI / theta));
        prop_assert!((s.delta_plus - PI / theta).abs() <= 1e-12 * (PI / theta));
    }

    #[test]
    fn weights_shrink_as_the_angle_opens(t1 in angle(), t2 in angle()) {
        let (small, large) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = summarize(&laplace_pencil_closed_form(small, 2).unwrap()).unwrap();
        let b = summarize(&laplace_pencil_closed_form(large, 2).unwrap()).unwrap();
        prop_assert!(b.weight_interval_linear.is_subset_of(&a.weight_interval_linear));
        prop_assert!(b.weight_interval_nonlinear.is_subset_of(&a.weight_interval_nonlinear));
    }

    #[test]
    fn convex_corners_admit_nonlinear_weights(t in 0.05f64..=1.0) {
        let s = strip_delta(&laplace_pencil_closed_form(t * PI, 2).unwrap()).unwrap();
        let w = admissible_weights(&s, 1, true);
        prop_assert!(!w.empty);
        prop_assert!(w.contains(-0.5));
    }

    #[test]
    fn tau_inverts(gamma in 0.0f64..20.0, p in 1.01f64..10.0, d in 2usize..=3) {
        let tau = adaptivity_tau(gamma, d, p).unwrap();
        prop_assert!((adaptivity_gamma(tau, d, p) - gamma).abs() <= 1e-12 * gamma.max(1.0));
    }

    #[test]
    fn embedding_check_is_monotone(
        gamma in 0.0f64..4.0, shrink in 0.0f64..1.0, a in -1.0f64..3.0, grow in 0.0f64..2.0,
        m in 0.5f64..4.0, s in 0.1f64..3.0, delta in 0usize..=1, d in 2usize..=3,
    ) {
        let base = EmbeddingParams { k: 1, m, s, a, gamma, delta, d, p: 2.0 };
        if embedding_check(&base).unwrap().ok {
            let tighter = EmbeddingParams { gamma: gamma * shrink, a: a + grow, ..base };
            prop_assert!(embedding_check(&tighter).unwrap().ok);
        }
    }

    #[test]
    fn best_n_term_is_scale_equivariant(
        c in proptest::collection::vec(-5.0f64..5.0, 1..60), n in 0usize..60, s in -4.0f64..4.0,
    ) {
        let (_, e) = best_n_term_l2(&c, n);
        let scaled: Vec<f64> = c.iter().map(|v| s * v).collect();
        let (_, es) = best_n_term_l2(&scaled, n);
        prop_assert!((es - s.abs() * e).abs() <= 1e-12 * (1.0 + e * s.abs()));
    }

    #[test]
    fn extension_reproduces_polynomials(
        k in 0usize..=4,
        seed in proptest::collection::vec(-2.0f64..2.0, 5),
        lam in lambdas(4),
    ) {
        let lam = &lam[4 - k..];
        let coeffs = reflection_coefficients(k, lam).unwrap();
        let poly = |t: f64| seed[..=k].iter().rev().fold(0.0, |acc, c| acc * t + c);
        let signal = Signal::from_fn(401, 1.0, poly).unwrap();
        let ext = extend_signal(&signal, &coeffs, None).unwrap();
        let scale = seed.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
        for (i, v) in ext.channels[0].iter().enumerate() {
            let t = ext.time(i);
            prop_assert!((v - poly(t)).abs() <= 1e-9 * scale, "t = {t}: {v} vs {}", poly(t));
        }
    }

    #[test]
    fn zeroth_derivative_of_power_is_the_power(g in proptest::collection::vec(-3.0f64..3.0, 1..20), j in 0u32..6) {
        let out = derivative_of_power(std::slice::from_ref(&g), j, 0).unwrap();
        for (o, x) in out.iter().zip(&g) {
            prop_assert_eq!(*o, x.powi(j as i32));
        }
    }
}

#[test]
fn unweighted_norm_is_bounded_by_l2() {
    // only the re-entrant corner is singular, so ρ stays away from zero elsewhere
    let d = PolygonalDomain::l_shape().with_singular_vertices(&[2]).unwrap();
    let mesh = mesh_uniform(&d, 1.0 / 8.0).unwrap();
    let u = FieldSnapshot::interpolate(&mesh, |p| (1.0 - p[0] * p[0]) * (1.0 - p[1] * p[1]) + 0.3);
    let params = KondratievParams::new(0, 2.0, 0.0).unwrap();
    let k = kondratiev_norm(&u, &params, &d.weight(), &QuadratureConfig::default()).unwrap();
    let l2 = sobolev_norm(&u, 0).unwrap();
    assert!((k - l2).abs() <= 1e-12 * l2, "{k} vs {l2}");

    // with the weight ρ^{-pa} for a < 0 the norm falls to the lower bound min ρ·‖u‖ at worst
    let params = KondratievParams::new(0, 2.0, -1.0).unwrap();
    let k = kondratiev_norm(&u, &params, &d.weight(), &QuadratureConfig::default()).unwrap();
    assert!(k <= l2 && k > 0.0, "{k} vs {l2}");
}

#[test]
fn kondratiev_norm_is_stable_under_depth_doubling() {
    let theta = 1.5 * PI;
    let d = PolygonalDomain::sector(theta, 1.0).unwrap();
    let mesh = mesh_uniform(&d, 1.0 / 8.0).unwrap();
    let u = FieldSnapshot::interpolate(&mesh, |x| x[0].hypot(x[1]).powf(2.0 / 3.0));
    for a in [-1.0, 0.0, 0.5] {
        let params = KondratievParams::new(1, 2.0, a).unwrap();
        let k8 = kondratiev_norm(&u, &params, &d.weight(), &QuadratureConfig { order: 4, depth: 8 }).unwrap();
        let k16 = kondratiev_norm(&u, &params, &d.weight(), &QuadratureConfig { order: 4, depth: 16 }).unwrap();
        assert!((k8 - k16).abs() / k16 < 1e-3, "a = {a}: {k8} vs {k16}");
    }
}

#[test]
fn nterm_errors_are_scale_equivariant_on_meshes() {
    let d = PolygonalDomain::l_shape();
    let meshes: Vec<Mesh> = (1..=4).map(|k| mesh_uniform(&d, 1.0 / f64::from(1u32 << k)).unwrap()).collect();
    let refs: Vec<&Mesh> = meshes.iter().collect();
    let u: Vec<f64> = meshes[3].nodes().iter().map(|p| (p[0] * p[0] + p[1] * p[1]).powf(1.0 / 3.0)).collect();
    let ns = [1, 5, 20, 80];
    let base = HierarchicalField::new(&refs, &u).unwrap().nterm_curve(&ns);
    let scaled: Vec<f64> = u.iter().map(|v| -2.5 * v).collect();
    let other = HierarchicalField::new(&refs, &scaled).unwrap().nterm_curve(&ns);
    for ((_, a), (_, b)) in base.iter().zip(&other) {
        assert!((b - 2.5 * a).abs() <= 1e-10 * a.max(1e-300), "{a} vs {b}");
    }
}
