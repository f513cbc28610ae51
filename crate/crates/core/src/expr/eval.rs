use super::{BinOp, ExprAst, Func, Node};
use crate::error::{Error, Result};
use crate::jet::{jet_seed, Jet};

fn domain(what: &str, point: &[f64]) -> Error {
    Error::EvalDomain {
        what: what.to_string(),
        point: point.to_vec(),
    }
}

fn check_arity(ast: &ExprAst, len: usize) -> Result<()> {
    if len == ast.arity() {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "expression expects {} coordinates, got {len}",
            ast.arity()
        )))
    }
}

/// Plain value of the expression at `point`.
pub fn eval_f64(ast: &ExprAst, point: &[f64]) -> Result<f64> {
    check_arity(ast, point.len())?;
    let v = value(ast, ast.root(), point)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain("non-finite expression value", point))
    }
}

fn value(ast: &ExprAst, node: &Node, p: &[f64]) -> Result<f64> {
    Ok(match node {
        Node::Const(c) => *c,
        Node::Var { kind, index } => p[ast.slot(*kind, *index)],
        Node::Neg(a) => -value(ast, a, p)?,
        Node::Binary(op, a, b) => {
            let (a, b) = (value(ast, a, p)?, value(ast, b, p)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(domain("division by zero", p));
                    }
                    a / b
                }
            }
        }
        Node::Pow(a, e) => {
            let a = value(ast, a, p)?;
            if *e < 0 && a == 0.0 {
                return Err(domain("negative power of zero", p));
            }
            a.powi(*e)
        }
        Node::Call(f, a) => {
            let a = value(ast, a, p)?;
            match f {
                Func::Exp => a.exp(),
                Func::Log if a <= 0.0 => return Err(domain("log of a non-positive value", p)),
                Func::Log => a.ln(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Sqrt if a < 0.0 => return Err(domain("sqrt of a negative value", p)),
                Func::Sqrt => a.sqrt(),
                Func::Tanh => a.tanh(),
            }
        }
    })
}

/// Jet of the expression at `point`, seeding every chart variable at `order`.
pub fn eval_jet(ast: &ExprAst, point: &[f64], order: usize) -> Result<Jet> {
    check_arity(ast, point.len())?;
    let vars = (0..point.len())
        .map(|i| jet_seed(point, i, order))
        .collect::<Result<Vec<_>>>()?;
    eval_on(ast, &vars)
}

/// Evaluate over arbitrary input jets (one per chart variable).
pub fn eval_on(ast: &ExprAst, vars: &[Jet]) -> Result<Jet> {
    check_arity(ast, vars.len())?;
    let out = jet(ast, ast.root(), vars)?;
    if out.coeffs().iter().all(|c| c.is_finite()) {
        Ok(out)
    } else {
        Err(domain("non-finite expression derivative", &point_of(vars)))
    }
}

fn point_of(vars: &[Jet]) -> Vec<f64> {
    vars.iter().map(Jet::value).collect()
}

fn jet(ast: &ExprAst, node: &Node, vars: &[Jet]) -> Result<Jet> {
    Ok(match node {
        Node::Const(c) => vars[0].constant_like(*c),
        Node::Var { kind, index } => vars[ast.slot(*kind, *index)].clone(),
        Node::Neg(a) => -jet(ast, a, vars)?,
        Node::Binary(op, a, b) => {
            let (a, b) = (jet(ast, a, vars)?, jet(ast, b, vars)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.value() == 0.0 {
                        return Err(domain("division by zero", &point_of(vars)));
                    }
                    a / b
                }
            }
        }
        Node::Pow(a, e) => {
            let a = jet(ast, a, vars)?;
            if *e < 0 && a.value() == 0.0 {
                return Err(domain("negative power of zero", &point_of(vars)));
            }
            a.powi(*e)
        }
        Node::Call(f, a) => {
            let a = jet(ast, a, vars)?;
            match f {
                Func::Exp => a.exp(),
                Func::Log if a.value() <= 0.0 => return Err(domain("log of a non-positive value", &point_of(vars))),
                Func::Log => a.ln(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Sqrt if a.value() <= 0.0 => return Err(domain("sqrt at or below zero", &point_of(vars))),
                Func::Sqrt => a.sqrt(),
                Func::Tanh => a.tanh(),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_relative_eq;

    #[test]
    fn reciprocal_square_first_order() {
        let ast = parse("1/(x2^2)", 2).unwrap();
        let j = eval_jet(&ast, &[0.0, 1.0], 1).unwrap();
        assert_eq!(j.value(), 1.0);
        assert_eq!(j.d1(0), 0.0);
        assert_eq!(j.d1(1), -2.0);
    }

    #[test]
    fn exp_times_variable() {
        let ast = parse("exp(x1)*x2", 2).unwrap();
        let j = eval_jet(&ast, &[0.0, 1.0], 1).unwrap();
        assert_eq!(j.coeffs(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn negated_log_second_order() {
        let e = std::f64::consts::E;
        let ast = parse("-log(x2)", 2).unwrap();
        let j = eval_jet(&ast, &[0.0, e], 2).unwrap();
        assert_relative_eq!(j.value(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(j.d1(1), -1.0 / e, epsilon = 1e-15);
        assert_relative_eq!(j.partial(&[0, 2]).unwrap(), 1.0 / (e * e), epsilon = 1e-15);
    }

    #[test]
    fn domain_errors_carry_the_point() {
        let ast = parse("log(x1)", 1).unwrap();
        assert_eq!(
            eval_jet(&ast, &[-1.0], 1).unwrap_err(),
            Error::EvalDomain {
                what: "log of a non-positive value".into(),
                point: vec![-1.0]
            }
        );
        let div = parse("1/x1", 1).unwrap();
        assert!(matches!(eval_f64(&div, &[0.0]), Err(Error::EvalDomain { .. })));
        assert!(matches!(eval_jet(&div, &[0.0], 1), Err(Error::EvalDomain { .. })));
        assert!(matches!(eval_jet(&div, &[1.0], 4), Err(Error::Contract(_))));
    }

    #[test]
    fn f64_and_jet_values_agree() {
        let ast = parse("sqrt(x1)*tanh(x2)-sin(x1)/cos(x2)+x1^-3", 2).unwrap();
        let p = [0.7, -0.4];
        let v = eval_f64(&ast, &p).unwrap();
        assert_relative_eq!(eval_jet(&ast, &p, 3).unwrap().value(), v, epsilon = 1e-14);
    }
}
