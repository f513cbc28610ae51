mod common;

use std::sync::Arc;

use common::{max_diff, points};
use subgeo_core::builtins::{build, euclidean, gaussian, hyperbolic, perturbed};
use subgeo_core::field::{ExprScalar, ScalarRef};
use subgeo_core::geometry::{check_is_statistical, Manifold};
use subgeo_core::submersion::checks::{
    affine_residual, check_affine_hd, check_conformal_defect, check_conformal_metric, check_difference_tensor,
    check_dual_conformal_pair, check_four_conditions, check_gauss_weingarten, check_induced_statistical,
    check_lemma_components, check_projectable, check_semi_riemannian, check_tensoriality, conformal_defect,
    induced_connection, induced_metric, lemma_residuals,
};
use subgeo_core::submersion::{HorizontalRule, SubmersionSetup};
use subgeo_core::{DiffMode, Matrix};

const JET: DiffMode = DiffMode::Jet;

fn scalar(text: &str, dim: usize) -> ScalarRef {
    Arc::new(ExprScalar::parse(text, dim, JET).unwrap())
}

fn identity_setup(m: &Manifold) -> SubmersionSetup {
    let n = m.dim();
    let coords = (1..=n).map(|i| scalar(&format!("x{i}"), n)).collect();
    SubmersionSetup::new(m.clone(), m.clone(), coords, HorizontalRule::MetricOrthogonal, None).unwrap()
}

fn hyperbolic_setup(n: usize) -> SubmersionSetup {
    hyperbolic(n, JET).unwrap().submersion.unwrap()
}

fn samples(setup: &SubmersionSetup, count: usize) -> Vec<Vec<f64>> {
    points(&setup.total.domain, count, 0)
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

#[test]
fn hyperbolic_split_at_unit_height() {
    for n in [2, 3, 4] {
        let setup = hyperbolic_setup(n);
        let mut p = vec![0.0; n];
        p[n - 1] = 1.0;
        let f = setup.frame(&p).unwrap();
        let v = f.vertical_basis();
        assert_eq!(v.len(), 1);
        assert!(max_diff(&f.horizontal(&v[0]), &vec![0.0; n]) <= 1e-15);
        assert!(v[0][..n - 1].iter().all(|&c| c == 0.0) && v[0][n - 1] != 0.0);
        for (a, lift) in f.horizontal_basis().iter().enumerate() {
            assert!(max_diff(lift, &unit(n, a)) <= 1e-15);
        }
    }
}

#[test]
fn identity_submersion_is_degenerate_but_clean() {
    for name in ["euclidean:2", "hyperbolic:2", "gaussian:alpha=1"] {
        let m = build(name, JET).unwrap().manifold;
        let setup = identity_setup(&m);
        let pts = samples(&setup, 16);
        let f = setup.frame(&pts[0]).unwrap();
        assert!(f.vertical_basis().is_empty());
        let w = [0.3, -0.7];
        assert!(max_diff(&f.lift_vector(&w), &w) <= 1e-15);
        assert!(max_diff(induced_metric(&f).data(), f.g().data()) <= 1e-15);
        assert!(max_diff(induced_connection(&f).data(), f.gamma.data()) <= 1e-15);
        for check in [
            check_semi_riemannian(&setup, &pts, 1e-12).unwrap(),
            check_affine_hd(&setup, &pts, 1e-12).unwrap(),
            check_gauss_weingarten(&setup, &pts, 1e-12).unwrap(),
            check_projectable(&setup, &pts, 1e-12).unwrap(),
            check_induced_statistical(&setup, &pts, 1e-8).unwrap(),
            check_lemma_components(&setup, &pts, 1e-12).unwrap(),
        ] {
            assert!(check.passed(), "{name}: {check:?}");
        }
        let lemma = lemma_residuals(&setup, &f).unwrap();
        assert_eq!(lemma.fiber_cubic_form, 0.0);
        assert_eq!(lemma.vertical_tensor_t, 0.0);
        let four = check_four_conditions(&setup, &pts, 1e-8).unwrap();
        assert_eq!(four.bool_detail("biconditional_holds"), Some(true));
    }
}

#[test]
fn fundamental_tensor_on_horizontal_pair() {
    let setup = hyperbolic_setup(3);
    let f = setup.frame(&[0.0, 0.0, 1.0]).unwrap();
    let e1 = unit(3, 0);
    assert!(max_diff(&f.a_tensor(&e1, &e1), &unit(3, 2)) <= 1e-12);
    // T only sees the vertical part of its first slot
    assert!(max_diff(&f.t_tensor(&e1, &unit(3, 1)), &[0.0; 3]) <= 1e-15);
}

#[test]
fn tensors_vanish_without_vertical_space() {
    let setup = identity_setup(&hyperbolic(2, JET).unwrap().manifold);
    let f = setup.frame(&[0.2, 1.3]).unwrap();
    for (a, b) in [(0, 0), (0, 1), (1, 1)] {
        assert!(max_diff(&f.a_tensor(&unit(2, a), &unit(2, b)), &[0.0; 2]) <= 1e-15);
        assert!(max_diff(&f.t_tensor(&unit(2, a), &unit(2, b)), &[0.0; 2]) <= 1e-15);
    }
}

#[test]
fn projectors_split_the_tangent_space() {
    for name in ["hyperbolic:3", "gaussian:alpha=0.5", "tangent_bundle_of:hyperbolic:2"] {
        let setup = build(name, JET).unwrap().submersion.unwrap();
        for p in samples(&setup, 16) {
            let f = setup.frame(&p).unwrap();
            let n = f.n();
            let ph = f.p_h.values();
            let pv = f.p_v.values();
            let sum = Matrix::from_fn(n, n, |i, j| ph.get(i, j) + pv.get(i, j));
            assert!(max_diff(sum.data(), Matrix::identity(n).data()) <= 1e-12, "{name}");
            let killed = f.j.values().matmul(&pv);
            assert!(killed.norm_inf() <= 1e-12, "{name}");
        }
    }
}

#[test]
fn hyperbolic_is_conformal_not_isometric() {
    for n in [2, 3] {
        let setup = hyperbolic_setup(n);
        let pts = samples(&setup, 32);
        assert!(!check_semi_riemannian(&setup, &pts, 1e-8).unwrap().passed());
        let r = check_conformal_metric(&setup, &pts, 1e-8).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.max_residual <= 1e-14);
    }
}

#[test]
fn wrong_conformal_factor_fails() {
    let good = hyperbolic_setup(2);
    let bad = SubmersionSetup {
        phi: Some(scalar("-2*log(x2)", 2)),
        ..good.clone()
    };
    assert!(!check_conformal_metric(&bad, &samples(&bad, 32), 1e-8).unwrap().passed());
}

#[test]
fn semi_riemannian_examples() {
    let setup = euclidean(3, JET).unwrap().submersion.unwrap();
    let pts = samples(&setup, 32);
    assert!(check_semi_riemannian(&setup, &pts, 1e-12).unwrap().passed());
    // without a conformal factor the conformal check is the isometry check
    assert!(check_conformal_metric(&setup, &pts, 1e-12).unwrap().passed());
}

#[test]
fn gauss_weingarten_on_hyperbolic_space() {
    for n in [2, 3] {
        let setup = hyperbolic_setup(n);
        let r = check_gauss_weingarten(&setup, &samples(&setup, 32), 1e-9).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn induced_metric_at_unit_height_is_euclidean() {
    let setup = hyperbolic_setup(3);
    let f = setup.frame(&[0.4, -0.2, 1.0]).unwrap();
    assert!(max_diff(induced_metric(&f).data(), Matrix::identity(2).data()) <= 1e-14);
}

#[test]
fn hyperbolic_horizontal_derivative_is_projectable() {
    let setup = hyperbolic_setup(2);
    let induced: Vec<Vec<f64>> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&y| induced_connection(&setup.frame(&[0.3, y]).unwrap()).data().to_vec())
        .collect();
    assert!(max_diff(&induced[0], &induced[1]) <= 1e-12);
    assert!(max_diff(&induced[1], &induced[2]) <= 1e-12);
    assert!(check_projectable(&setup, &samples(&setup, 32), 1e-8).unwrap().passed());
}

#[test]
fn affine_hd_on_hyperbolic_space() {
    let setup = hyperbolic_setup(3);
    let r = check_affine_hd(&setup, &samples(&setup, 32), 1e-8).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn induced_structure_of_gaussian_family_is_statistical() {
    for alpha in [0.0, 1.0, -1.0] {
        let setup = gaussian(alpha, JET).unwrap().submersion.unwrap();
        let pts = samples(&setup, 64);
        let total =
            check_is_statistical(setup.total.connection.as_ref(), setup.total.metric.as_ref(), &pts, 1e-8).unwrap();
        assert!(total.passed());
        let r = check_induced_statistical(&setup, &pts, 1e-7).unwrap();
        assert!(r.passed() && r.max_residual <= 1e-7, "alpha {alpha}: {r:?}");
    }
}

#[test]
fn difference_tensor_examples() {
    for name in ["hyperbolic:2", "gaussian:alpha=1", "gaussian:alpha=0.3"] {
        let setup = build(name, JET).unwrap().submersion.unwrap();
        let r = check_difference_tensor(&setup, &samples(&setup, 32), 1e-8, 0).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
        assert!(r.component("twice_levi_civita_offset").is_some());
    }
}

#[test]
fn conformal_defect_vanishes_for_levi_civita_pairs() {
    for n in [2, 3, 4] {
        let setup = hyperbolic_setup(n);
        let mut p = vec![0.0; n];
        p[n - 1] = 1.0;
        assert!(conformal_defect(&setup.frame(&p).unwrap())
            .iter()
            .all(|d| d.abs() <= 1e-14));
        let r = check_conformal_defect(&setup, &samples(&setup, 64), 1e-8).unwrap();
        assert!(r.passed() && r.max_residual <= 1e-8, "n = {n}: {r:?}");
    }
}

// with φ constant every dφ term drops and the defect is the lowered affine defect
#[test]
fn constant_factor_reduces_to_affine_defect() {
    let base = gaussian(0.4, JET).unwrap().submersion.unwrap();
    let setup = SubmersionSetup {
        phi: Some(scalar("0.7", 2)),
        ..base
    };
    for p in samples(&setup, 16) {
        let f = setup.frame(&p).unwrap();
        let ind = induced_connection(&f);
        let m = f.m();
        let mut lowered = Vec::new();
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut s = 0.0;
                    for k in 0..m {
                        s += (ind.get(k, a, b) - f.base_gamma.get(k, a, b)) * f.base_metric.get(k, c);
                    }
                    lowered.push(s);
                }
            }
        }
        assert!(max_diff(&conformal_defect(&f), &lowered) <= 1e-14);
        assert!(affine_residual(&f) <= 1e-12);
    }
}

#[test]
fn dual_conformal_pair_examples() {
    for name in ["hyperbolic:2", "gaussian:alpha=1", "gaussian:alpha=-1", "euclidean:2"] {
        let setup = build(name, JET).unwrap().submersion.unwrap();
        let r = check_dual_conformal_pair(&setup, &samples(&setup, 32), 1e-8).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
        assert!(r.component("primal_defect").is_some() && r.component("dual_defect").is_some());
    }
}

#[test]
fn lemma_components_on_reference_setups() {
    for name in [
        "hyperbolic:3",
        "gaussian:alpha=1",
        "hyperbolic:2",
        "tangent_bundle_of:euclidean:2",
    ] {
        let setup = build(name, JET).unwrap().submersion.unwrap();
        let r = check_lemma_components(&setup, &samples(&setup, 64), 1e-7).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
        for key in [
            "base_cubic_form",
            "difference_vertical",
            "horizontal_tensor_a",
            "difference_horizontal",
            "vertical_tensor_t",
            "fiber_cubic_form",
        ] {
            assert!(r.component(key).unwrap() <= 1e-7, "{name}: {key}");
        }
    }
}

#[test]
fn four_conditions_on_hyperbolic_space() {
    let setup = hyperbolic_setup(3);
    let r = check_four_conditions(&setup, &samples(&setup, 32), 1e-8).unwrap();
    assert!(r.passed(), "{r:?}");
    assert_eq!(r.bool_detail("conditions_hold"), Some(true));
    assert_eq!(r.bool_detail("total_statistical"), Some(true));
}

#[test]
fn perturbed_connection_fails_both_sides() {
    for name in ["hyperbolic:2", "gaussian:alpha=0.5"] {
        let model = build(name, JET).unwrap();
        let bad = perturbed(&model, 0.25, JET).unwrap();
        let setup = bad.submersion.unwrap();
        let r = check_four_conditions(&setup, &samples(&setup, 32), 1e-8).unwrap();
        assert_eq!(r.bool_detail("conditions_hold"), Some(false), "{name}");
        assert_eq!(r.bool_detail("total_statistical"), Some(false), "{name}");
        assert_eq!(r.bool_detail("biconditional_holds"), Some(true), "{name}");
    }
}

#[test]
fn tensoriality_on_builtins() {
    for name in [
        "hyperbolic:3",
        "gaussian:alpha=-1",
        "tangent_bundle_of:gaussian:alpha=1",
    ] {
        let setup = build(name, JET).unwrap().submersion.unwrap();
        let r = check_tensoriality(&setup, &samples(&setup, 16), 1e-7, 3).unwrap();
        assert!(r.passed(), "{name}: {r:?}");
    }
}

#[test]
fn bundle_projection_has_fibre_directions_vertical() {
    let setup = build("tangent_bundle_of:hyperbolic:2", JET)
        .unwrap()
        .submersion
        .unwrap();
    let f = setup.frame(&[0.1, 1.2, 0.5, -0.3]).unwrap();
    for v in f.vertical_basis() {
        assert!(v[0].abs() <= 1e-15 && v[1].abs() <= 1e-15);
    }
}
