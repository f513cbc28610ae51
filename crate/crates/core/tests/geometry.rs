mod common;

use std::sync::Arc;

use common::{gaussian_alpha_gamma, hyperbolic_plane_gamma, koszul_fd, max_diff, points};
use proptest::prelude::*;
use subgeo_core::builtins::{build, gaussian, hyperbolic};
use subgeo_core::field::{christoffel_values, ConnectionRef, ExprConnection, ExprMetric, MetricRef};
use subgeo_core::geometry::{
    check_constant_curvature, check_curvature_duality, check_dual_involution, check_is_statistical, curvature,
    duality_residual, nabla_g, torsion, DualConnection, LeviCivita,
};
use subgeo_core::{BoxDomain, DiffMode};

const JET: DiffMode = DiffMode::Jet;

fn flat_plane() -> (ConnectionRef, MetricRef) {
    (
        Arc::new(ExprConnection::zero(2, JET)),
        Arc::new(ExprMetric::diagonal(&["1", "1"], JET).unwrap()),
    )
}

fn plane_samples() -> Vec<Vec<f64>> {
    points(&BoxDomain::cube(2, -1.0, 1.0).unwrap(), 32, 3)
}

#[test]
fn euclidean_christoffels_vanish() {
    let m = build("euclidean:2", JET).unwrap().manifold;
    let lc = LeviCivita::new(m.metric.clone());
    for p in points(&m.domain, 8, 1) {
        assert!(christoffel_values(&lc, &p).unwrap().data().iter().all(|&c| c == 0.0));
    }
}

#[test]
fn hyperbolic_plane_table_at_unit_height() {
    let m = hyperbolic(2, JET).unwrap().manifold;
    let got = christoffel_values(m.connection.as_ref(), &[0.0, 1.0]).unwrap();
    assert_eq!(got.data(), hyperbolic_plane_gamma(1.0).as_slice());
    let fd = koszul_fd(m.metric.as_ref(), &[0.0, 1.0]);
    assert!(max_diff(got.data(), &fd) <= 1e-8);
}

#[test]
fn fisher_levi_civita_matches_koszul_oracle() {
    let m = gaussian(0.0, JET).unwrap().manifold;
    let lc = LeviCivita::new(m.metric.clone());
    let got = christoffel_values(&lc, &[0.0, 1.0]).unwrap();
    let fd = koszul_fd(m.metric.as_ref(), &[0.0, 1.0]);
    assert!(max_diff(got.data(), &fd) <= 1e-8, "{:?} vs {fd:?}", got.data());
}

#[test]
fn alpha_family_matches_closed_form() {
    for alpha in [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
        let m = gaussian(alpha, JET).unwrap().manifold;
        for p in points(&m.domain, 16, 5) {
            let got = christoffel_values(m.connection.as_ref(), &p).unwrap();
            let want = gaussian_alpha_gamma(alpha, p[1]);
            assert!(max_diff(got.data(), &want) <= 1e-12, "alpha {alpha} at {p:?}");
        }
    }
}

#[test]
fn torsion_examples() {
    let m = hyperbolic(2, JET).unwrap().manifold;
    assert!(torsion(m.connection.as_ref(), &[0.3, 1.2])
        .unwrap()
        .iter()
        .all(|t| t.abs() < 1e-15));

    let mut c = ExprConnection::zero(2, JET);
    c.set(0, 0, 1, "1").unwrap();
    let tor = torsion(&c, &[0.0, 0.0]).unwrap();
    // [k][i][j]: Tor^1_12 = 1, Tor^1_21 = -1
    assert_eq!(tor, vec![0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn levi_civita_is_metric() {
    for name in ["hyperbolic:3", "gaussian:alpha=0"] {
        let m = build(name, JET).unwrap().manifold;
        let lc = LeviCivita::new(m.metric.clone());
        for p in points(&m.domain, 16, 2) {
            let c = nabla_g(&lc, m.metric.as_ref(), &p).unwrap();
            assert!(c.iter().all(|x| x.abs() <= 1e-9), "{name} at {p:?}");
        }
    }
}

#[test]
fn cubic_form_of_flat_connection() {
    let (flat, _) = flat_plane();
    let g = ExprMetric::diagonal(&["1", "x1^2+1"], JET).unwrap();
    let c = nabla_g(flat.as_ref(), &g, &[1.0, 0.0]).unwrap();
    // [i][j][k]; only C_122 = ∂1 g22 = 2 x1
    let mut want = vec![0.0; 8];
    want[3] = 2.0;
    assert_eq!(c, want);
}

#[test]
fn e_connection_cubic_form_is_symmetric() {
    let m = gaussian(1.0, JET).unwrap().manifold;
    for p in points(&m.domain, 32, 9) {
        let c = nabla_g(m.connection.as_ref(), m.metric.as_ref(), &p).unwrap();
        let s = p[1].powi(3);
        // equals the Fisher skewness tensor
        let mut t = vec![0.0; 8];
        for idx in [1, 2, 4] {
            t[idx] = 2.0 / s;
        }
        t[7] = 8.0 / s;
        assert!(max_diff(&c, &t) <= 1e-11, "{c:?} vs {t:?}");
    }
}

#[test]
fn statistical_examples() {
    let (flat, delta) = flat_plane();
    let r = check_is_statistical(flat.as_ref(), delta.as_ref(), &plane_samples(), 1e-8).unwrap();
    assert!(r.passed());
    assert_eq!(r.max_residual, 0.0);

    let h = hyperbolic(2, JET).unwrap().manifold;
    let r = check_is_statistical(
        h.connection.as_ref(),
        h.metric.as_ref(),
        &points(&h.domain, 32, 1),
        1e-8,
    )
    .unwrap();
    assert!(r.passed());

    let mut bent = ExprConnection::zero(2, JET);
    bent.set(0, 1, 1, "1").unwrap();
    let r = check_is_statistical(&bent, delta.as_ref(), &plane_samples(), 1e-8).unwrap();
    assert!(!r.passed());
    assert_eq!(r.component("torsion"), Some(0.0));
    assert_eq!(r.component("cubic_asymmetry"), Some(1.0));
    let c = nabla_g(&bent, delta.as_ref(), &[0.0, 0.0]).unwrap();
    assert_eq!((c[3], c[5]), (0.0, -1.0));
}

#[test]
fn dual_of_levi_civita_is_itself() {
    let h = hyperbolic(2, JET).unwrap().manifold;
    let dual = DualConnection::new(h.connection.clone(), h.metric.clone());
    for p in points(&h.domain, 16, 4) {
        let a = christoffel_values(h.connection.as_ref(), &p).unwrap();
        let b = christoffel_values(&dual, &p).unwrap();
        assert!(max_diff(a.data(), b.data()) <= 1e-12);
    }
}

#[test]
fn dual_of_e_connection_is_m_connection() {
    let e = gaussian(1.0, JET).unwrap().manifold;
    let dual = DualConnection::new(e.connection.clone(), e.metric.clone());
    for p in points(&e.domain, 16, 6) {
        let got = christoffel_values(&dual, &p).unwrap();
        assert!(max_diff(got.data(), &gaussian_alpha_gamma(-1.0, p[1])) <= 1e-12);
        assert!(duality_residual(e.connection.as_ref(), &dual, e.metric.as_ref(), &p).unwrap() <= 1e-8);
    }
}

#[test]
fn dual_involution_on_builtins() {
    for name in ["euclidean:2", "hyperbolic:2", "gaussian:alpha=1", "gaussian:alpha=-0.5"] {
        let m = build(name, JET).unwrap().manifold;
        let r = check_dual_involution(&m.connection, &m.metric, &points(&m.domain, 32, 8), 1e-9).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
        assert!(r.component("involution").unwrap() <= 1e-9);
        assert!(r.component("mean_is_levi_civita").unwrap() <= 1e-8);
    }
}

#[test]
fn curvature_examples() {
    let (flat, _) = flat_plane();
    assert!(curvature(flat.as_ref(), &[0.2, 0.1]).unwrap().iter().all(|&r| r == 0.0));

    let h = hyperbolic(2, JET).unwrap().manifold;
    let r = curvature(h.connection.as_ref(), &[0.0, 1.0]).unwrap();
    // R^k_lij laid out [k][l][i][j]; R(∂1,∂2)∂2 = -∂1
    let at = |k: usize, l: usize, i: usize, j: usize| r[((k * 2 + l) * 2 + i) * 2 + j];
    assert!((at(0, 1, 0, 1) + 1.0).abs() <= 1e-12);
    assert!((at(1, 0, 0, 1) - 1.0).abs() <= 1e-12);

    let mut line = ExprConnection::zero(1, JET);
    line.set(0, 0, 0, "sin(x1)").unwrap();
    assert_eq!(curvature(&line, &[0.4]).unwrap(), vec![0.0]);
}

#[test]
fn curvature_duality_examples() {
    let (flat, delta) = flat_plane();
    let r = check_curvature_duality(&flat, &delta, &plane_samples(), 1e-8).unwrap();
    assert!(r.passed());
    for name in ["hyperbolic:2", "gaussian:alpha=1", "gaussian:alpha=-1"] {
        let m = build(name, JET).unwrap().manifold;
        let r = check_curvature_duality(&m.connection, &m.metric, &points(&m.domain, 32, 0), 1e-7).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
    }
}

#[test]
fn constant_curvature_examples() {
    let cases = [
        ("euclidean:3", 0.0, 1e-12),
        ("hyperbolic:2", -1.0, 1e-6),
        ("gaussian:alpha=1", 0.0, 1e-8),
    ];
    for (name, k, tol) in cases {
        let m = build(name, JET).unwrap().manifold;
        let pts = points(&m.domain, 32, 0);
        let r = check_constant_curvature(m.connection.as_ref(), m.metric.as_ref(), k, &pts, tol).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
        let wrong = check_constant_curvature(m.connection.as_ref(), m.metric.as_ref(), k + 0.5, &pts, tol).unwrap();
        assert!(!wrong.passed(), "{name} accepted k + 0.5");
    }
}

#[test]
fn alpha_curvature_constant() {
    for alpha in [-0.5, 0.0, 0.5] {
        let model = gaussian(alpha, JET).unwrap();
        let m = &model.manifold;
        let k = -(1.0 - alpha * alpha) / 2.0;
        let r = check_constant_curvature(
            m.connection.as_ref(),
            m.metric.as_ref(),
            k,
            &points(&m.domain, 32, 1),
            1e-8,
        )
        .unwrap();
        assert!(r.passed(), "alpha {alpha}: {r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn duality_identity_holds(alpha in -2.0f64..2.0, mu in -1.0f64..1.0, sigma in 0.5f64..2.0) {
        let m = gaussian(alpha, JET).unwrap().manifold;
        let dual = DualConnection::new(m.connection.clone(), m.metric.clone());
        let p = [mu, sigma];
        prop_assert!(duality_residual(m.connection.as_ref(), &dual, m.metric.as_ref(), &p).unwrap() <= 1e-8);
        // the dual of the alpha member is the -alpha member
        let got = christoffel_values(&dual, &p).unwrap();
        prop_assert!(max_diff(got.data(), &gaussian_alpha_gamma(-alpha, sigma)) <= 1e-11);
    }

    #[test]
    fn mean_of_dual_pair_is_levi_civita(alpha in -2.0f64..2.0, mu in -1.0f64..1.0, sigma in 0.5f64..2.0) {
        let m = gaussian(alpha, JET).unwrap().manifold;
        let p = [mu, sigma];
        let a = christoffel_values(m.connection.as_ref(), &p).unwrap();
        let b = christoffel_values(&DualConnection::new(m.connection.clone(), m.metric.clone()), &p).unwrap();
        let mean: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| 0.5 * (x + y)).collect();
        prop_assert!(max_diff(&mean, &koszul_fd(m.metric.as_ref(), &p)) <= 1e-8);
    }

    #[test]
    fn hyperbolic_levi_civita_matches_koszul(x in -1.0f64..1.0, y in -1.0f64..1.0, z in 0.5f64..3.0) {
        let m = hyperbolic(3, JET).unwrap().manifold;
        let p = [x, y, z];
        let got = christoffel_values(m.connection.as_ref(), &p).unwrap();
        prop_assert!(max_diff(got.data(), &koszul_fd(m.metric.as_ref(), &p)) <= 1e-8);
    }
}
