use std::f64::consts::E;

use proptest::prelude::*;
use subgeo_core::expr::{eval_f64, eval_jet, parse, parse_bundle, BinOp, Func, Node};
use subgeo_core::fd::partials;
use subgeo_core::Error;

#[test]
fn reciprocal_square_at_unit_height() {
    let ast = parse("1/(x2^2)", 2).unwrap();
    let j = eval_jet(&ast, &[0.0, 1.0], 1).unwrap();
    assert_eq!(j.coeffs(), &[1.0, 0.0, -2.0]);
}

#[test]
fn exponential_times_coordinate() {
    let ast = parse("exp(x1)*x2", 2).unwrap();
    let j = eval_jet(&ast, &[0.0, 1.0], 1).unwrap();
    assert_eq!(j.coeffs(), &[1.0, 1.0, 1.0]);
}

#[test]
fn negated_log_second_order() {
    let ast = parse("-log(x2)", 2).unwrap();
    let j = eval_jet(&ast, &[0.0, E], 2).unwrap();
    let oracle = partials(|p| Ok(-p[1].ln()), &[0.0, E], 2).unwrap();
    assert!((j.value() + 1.0).abs() < 1e-15);
    assert!((j.partial(&[0, 1]).unwrap() + 1.0 / E).abs() < 1e-15);
    assert!((j.partial(&[0, 2]).unwrap() - 1.0 / (E * E)).abs() < 1e-15);
    for (a, b) in j.coeffs().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn malformed_input_reports_offset() {
    match parse("x1+*x2", 2) {
        Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
        other => panic!("expected a syntax error, got {other:?}"),
    }
}

#[test]
fn log_of_negative_is_a_domain_error() {
    let ast = parse("log(x1)", 1).unwrap();
    assert!(matches!(eval_jet(&ast, &[-1.0], 1), Err(Error::EvalDomain { .. })));
}

#[test]
fn fibre_variables_need_a_bundle_chart() {
    assert!(parse("u1*x1", 2).is_err());
    let ast = parse_bundle("u1*x1", 2).unwrap();
    assert_eq!(eval_f64(&ast, &[2.0, 0.0, 3.0, 0.0]).unwrap(), 6.0);
}

type Box2 = [(f64, f64); 2];

/// Entries used by the builtin models, on their chart boxes.
const BUILTIN_EXPRESSIONS: &[(&str, usize, Box2)] = &[
    ("1/(x2^2)", 2, [(-1.0, 1.0), (0.5, 3.0)]),
    ("2/(x2^2)", 2, [(-1.0, 1.0), (0.5, 2.0)]),
    ("x1/(x2^2)", 2, [(-1.0, 1.0), (0.5, 2.0)]),
    ("-1/(2*x2^2)", 2, [(-1.0, 1.0), (0.5, 2.0)]),
    ("-log(x2)", 2, [(-1.0, 1.0), (0.5, 3.0)]),
    ("x1", 2, [(-1.0, 1.0), (-1.0, 1.0)]),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn builtin_expressions_match_central_differences(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        for (text, dim, b) in BUILTIN_EXPRESSIONS {
            let p = [b[0].0 + s * (b[0].1 - b[0].0), b[1].0 + t * (b[1].1 - b[1].0)];
            let ast = parse(text, *dim).unwrap();
            let j = eval_jet(&ast, &p, 2).unwrap();
            let f = |q: &[f64]| eval_f64(&ast, q);
            for i in 0..2 {
                let h = 1e-6 * (1.0 + p[i].abs());
                let (mut lo, mut hi) = (p, p);
                lo[i] -= h;
                hi[i] += h;
                let d1 = (f(&hi).unwrap() - f(&lo).unwrap()) / (2.0 * h);
                prop_assert!(rel(j.d1(i), d1) <= 1e-6, "{text} d{i}");
                let h = 1e-4 * (1.0 + p[i].abs());
                let (mut lo, mut hi) = (p, p);
                lo[i] -= h;
                hi[i] += h;
                let d2 = (f(&hi).unwrap() - 2.0 * f(&p).unwrap() + f(&lo).unwrap()) / (h * h);
                let mut alpha = [0u8; 2];
                alpha[i] = 2;
                prop_assert!(rel(j.partial(&alpha).unwrap(), d2) <= 1e-4, "{text} d{i}d{i}");
            }
        }
    }

    #[test]
    fn printing_round_trips(node in arb_node()) {
        let text = node.to_string();
        let ast = parse(&text, 3).unwrap();
        prop_assert_eq!(ast.to_string(), text);
        let again = parse(&ast.to_string(), 3).unwrap();
        prop_assert_eq!(again, ast);
    }

    #[test]
    fn jet_value_equals_plain_evaluation(node in arb_node(), x in -0.9f64..0.9, y in 0.5f64..2.0) {
        let ast = parse(&node.to_string(), 3).unwrap();
        let p = [x, y, 1.0];
        match (eval_f64(&ast, &p), eval_jet(&ast, &p, 2)) {
            (Ok(a), Ok(j)) => prop_assert!(a == j.value() || (a - j.value()).abs() <= 1e-12 * a.abs().max(1.0)),
            (Err(_), j) => prop_assert!(j.is_err()),
            // non-differentiable points such as sqrt(0) only fail for jets
            (Ok(_), Err(_)) => {}
        }
    }
}

fn arb_node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (0u32..20).prop_map(|k| Node::Const(f64::from(k) / 4.0)),
        (1usize..=3).prop_map(|index| Node::Var {
            kind: subgeo_core::expr::VarKind::X,
            index
        }),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (inner.clone(), inner.clone(), 0usize..4).prop_map(|(a, b, op)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][op];
                Node::Binary(op, Box::new(a), Box::new(b))
            }),
            (inner.clone(), -3i32..=3).prop_map(|(a, e)| Node::Pow(Box::new(a), e)),
            (inner, 0usize..6).prop_map(|(a, f)| Node::Call(Func::ALL[f], Box::new(a))),
        ]
    })
}
