use approx::assert_relative_eq;
use proptest::prelude::*;
use subgeo_core::fd::partials;
use subgeo_core::{jet_seed, sample, solve_linear, BoxDomain, Error, Jet, Matrix};

#[test]
fn seed_sets_value_and_unit_slot() {
    let x = jet_seed(&[2.0, 3.0], 0, 2).unwrap();
    assert_eq!(x.value(), 2.0);
    assert_eq!(x.partial(&[1, 0]), Some(1.0));
    assert_eq!(x.partial(&[0, 1]), Some(0.0));
    assert_eq!(&x.coeffs()[3..], &[0.0, 0.0, 0.0]);

    let y = jet_seed(&[0.0, 1.0], 1, 1).unwrap();
    assert_eq!(y.coeffs(), &[1.0, 0.0, 1.0]);
}

#[test]
fn seed_rejects_bad_index() {
    assert!(matches!(jet_seed(&[0.0], 1, 1), Err(Error::Contract(_))));
}

// raw partials: the x^2 slot holds d^2/dx^2 = 2, not the Taylor coefficient 1
#[test]
fn square_stores_raw_partials() {
    let x = jet_seed(&[2.0], 0, 2).unwrap();
    let sq = &x * &x;
    assert_eq!(sq.coeffs(), &[4.0, 4.0, 2.0]);
}

#[test]
fn product_of_two_variables() {
    let v = Jet::variables(&[1.5, -2.0], 3);
    let p = &(&v[0] * &v[0]) * &v[1];
    // x^2 y
    assert_eq!(p.value(), 1.5 * 1.5 * -2.0);
    assert_eq!(p.partial(&[1, 0]), Some(2.0 * 1.5 * -2.0));
    assert_eq!(p.partial(&[2, 1]), Some(2.0));
    assert_eq!(p.partial(&[1, 1]), Some(3.0));
    assert_eq!(p.partial(&[0, 2]), Some(0.0));
}

#[test]
fn derivative_lowers_order() {
    let v = Jet::variables(&[0.4], 3);
    let s = v[0].sin();
    let d = s.d(0);
    assert_eq!(d.order(), 2);
    assert_relative_eq!(d.value(), 0.4f64.cos(), epsilon = 1e-15);
    assert_relative_eq!(d.coeffs()[2], -(0.4f64.cos()), epsilon = 1e-15);
}

#[test]
fn solve_small_systems() {
    let i3 = Matrix::identity(3);
    assert_eq!(solve_linear(&i3, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    let d = Matrix::from_vec(2, 2, vec![2.0, 0.0, 0.0, 4.0]);
    assert_eq!(solve_linear(&d, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
}

#[test]
fn solve_hilbert_three() {
    let h = Matrix::from_fn(3, 3, |i, j| 1.0 / (i + j + 1) as f64);
    let b = h.mul_vec(&[1.0, 1.0, 1.0]);
    for xi in solve_linear(&h, &b).unwrap() {
        assert!((xi - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn singular_matrix_is_reported() {
    let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
    assert!(matches!(
        solve_linear(&a, &[1.0, 1.0]),
        Err(Error::SingularMatrix { .. })
    ));
}

#[test]
fn sample_examples() {
    let unit = BoxDomain::new(vec![(0.0, 1.0)]).unwrap();
    let one = sample(&unit, 1, 7).unwrap();
    assert_eq!(one.len(), 1);
    assert!(one.points[0][0] > 0.0 && one.points[0][0] < 1.0);
    assert_eq!(one.points, sample(&unit, 1, 7).unwrap().points);

    let half_plane = BoxDomain::new(vec![(-1.0, 1.0), (0.5, 2.0)]).unwrap();
    let s = sample(&half_plane, 64, 0).unwrap();
    assert_eq!(s.len(), 64);
    assert!(s.iter().all(|p| half_plane.contains_strictly(p)));
}

#[test]
fn inverted_box_is_rejected() {
    assert!(BoxDomain::new(vec![(1.0, -1.0)]).is_err());
}

/// `f(x, y) = exp(x) sin(y) / (1 + x^2 y^2)` written with jets.
fn composite_jet(v: &[Jet]) -> Jet {
    let num = &v[0].exp() * &v[1].sin();
    let den = (&(&v[0] * &v[0]) * &(&v[1] * &v[1])) + 1.0;
    &num * &den.recip()
}

fn composite(p: &[f64]) -> f64 {
    p[0].exp() * p[1].sin() / (1.0 + p[0] * p[0] * p[1] * p[1])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_rule_matches_central_differences(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let p = [x, y];
        let j = composite_jet(&Jet::variables(&p, 2));
        for i in 0..2 {
            let h = 1e-6 * (1.0 + p[i].abs());
            let (mut lo, mut hi) = (p, p);
            lo[i] -= h;
            hi[i] += h;
            let fd1 = (composite(&hi) - composite(&lo)) / (2.0 * h);
            prop_assert!(rel(j.d1(i), fd1) <= 1e-6);
            // second derivative from the first-order jets at shifted points
            let h2 = 1e-4 * (1.0 + p[i].abs());
            let (mut lo, mut hi) = (p, p);
            lo[i] -= h2;
            hi[i] += h2;
            let dl = composite_jet(&Jet::variables(&lo, 1)).d1(i);
            let dh = composite_jet(&Jet::variables(&hi, 1)).d1(i);
            let mut alpha = [0u8; 2];
            alpha[i] = 2;
            prop_assert!(rel(j.partial(&alpha).unwrap(), (dh - dl) / (2.0 * h2)) <= 1e-4);
        }
    }

    #[test]
    fn product_rule_is_exact(a in -2.0f64..2.0, b in 0.5f64..2.0) {
        let v = Jet::variables(&[a, b], 3);
        let f = v[0].sin();
        let g = v[1].ln();
        let fg = &f * &g;
        // d/da d/db (sin a ln b) = cos a / b ; d^2/db^2 = -sin a / b^2
        prop_assert!((fg.partial(&[1, 1]).unwrap() - a.cos() / b).abs() <= 1e-14);
        prop_assert!((fg.partial(&[0, 2]).unwrap() + a.sin() / (b * b)).abs() <= 1e-14);
        prop_assert!((fg.partial(&[1, 2]).unwrap() + a.cos() / (b * b)).abs() <= 1e-14);
    }

    #[test]
    fn solve_round_trip(
        entries in prop::collection::vec(-1.0f64..1.0, 16),
        x in prop::collection::vec(-10.0f64..10.0, 4),
    ) {
        // diagonally dominant, hence well conditioned
        let a = Matrix::from_fn(4, 4, |i, j| entries[i * 4 + j] + if i == j { 5.0 } else { 0.0 });
        let b = a.mul_vec(&x);
        let got = solve_linear(&a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            prop_assert!((g - e).abs() <= 1e-9);
        }
    }

    #[test]
    fn fd_partials_track_jets(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let p = [x, y];
        let exact = composite_jet(&Jet::variables(&p, 3));
        let approx = partials(|q| Ok(composite(q)), &p, 3).unwrap();
        for (k, (e, a)) in exact.coeffs().iter().zip(&approx).enumerate() {
            prop_assert!(rel(*e, *a) <= 1e-6, "slot {k}: {e} vs {a}");
        }
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), count in 1usize..40) {
        let d = BoxDomain::new(vec![(-1.0, 1.0), (0.5, 3.0), (-2.0, 0.0)]).unwrap();
        let a = sample(&d, count, seed).unwrap();
        let b = sample(&d, count, seed).unwrap();
        prop_assert_eq!(&a.points, &b.points);
        prop_assert!(a.iter().all(|p| d.contains_strictly(p)));
    }
}
