//! Field abstractions evaluated over jets.
//!
//! Every field takes one input jet per chart coordinate and returns jets in
//! the same jet space, so fields compose freely: a base-manifold metric can be
//! evaluated on the first `n` coordinates of a tangent-bundle jet space.
//!
//! Derived fields differentiate their ingredients and therefore lose
//! derivative orders; [`MetricField::loss`] and friends report how many, so
//! callers can seed deep enough and fail early with
//! [`Error::OrderBudget`](crate::Error::OrderBudget) otherwise.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, ExprAst};
use crate::jet::{compose_multivariate, layout, Jet, MAX_ORDER};
use crate::linalg::Matrix;

/// How expression leaves produce derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffMode {
    /// Exact truncated-Taylor arithmetic.
    #[default]
    Jet,
    /// Central finite differences of expression values.
    Fd,
}

impl DiffMode {
    pub fn name(self) -> &'static str {
        match self {
            DiffMode::Jet => "jet",
            DiffMode::Fd => "fd",
        }
    }

    /// Default residual tolerance for checks run in this mode.
    pub fn default_tolerance(self) -> f64 {
        match self {
            DiffMode::Jet => 1e-8,
            DiffMode::Fd => 1e-4,
        }
    }
}

impl fmt::Display for DiffMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Connection coefficients `Γ^k_ij` with `∇_{∂i} ∂j = Γ^k_ij ∂k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel<S = Jet> {
    n: usize,
    data: Vec<S>,
}

impl<S: Clone> Christoffel<S> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    data.push(f(k, i, j));
                }
            }
        }
        Christoffel { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^k_ij`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> &S {
        &self.data[(k * self.n + i) * self.n + j]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }
}

impl Christoffel<Jet> {
    pub fn values(&self) -> Christoffel<f64> {
        Christoffel {
            n: self.n,
            data: self.data.iter().map(Jet::value).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(MAX_ORDER)
    }
}

impl Christoffel<f64> {
    /// `Γ(a, b)^k = Γ^k_ij a^i b^j`.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    if a[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        s += self.get(k, i, j) * a[i] * b[j];
                    }
                }
                s
            })
            .collect()
    }
}

pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn loss(&self) -> usize {
        0
    }
    fn eval(&self, x: &[Jet]) -> Result<Jet>;
}

pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;
    fn loss(&self) -> usize {
        0
    }
    fn eval(&self, x: &[Jet]) -> Result<Matrix<Jet>>;
}

pub trait Connection: Send + Sync {
    fn dim(&self) -> usize;
    fn loss(&self) -> usize;
    fn eval(&self, x: &[Jet]) -> Result<Christoffel>;
}

/// Order of the jets in `x` (the smallest if they differ).
pub fn input_order(x: &[Jet]) -> usize {
    x.iter().map(Jet::order).min().unwrap_or(0)
}

/// Seeds for a field that needs to differentiate its ingredients `need` times.
///
/// Returns identity jets of the field's own dimension at the values of `x`,
/// at the order of `x`.
pub fn own_seeds(x: &[Jet], dim: usize, need: usize) -> Result<Vec<Jet>> {
    if x.len() != dim {
        return Err(Error::Contract(format!(
            "field of dimension {dim} evaluated on {} coordinates",
            x.len()
        )));
    }
    let order = input_order(x);
    if order < need {
        return Err(Error::OrderBudget {
            needed: need,
            available: order,
        });
    }
    let point: Vec<f64> = x.iter().map(Jet::value).collect();
    Ok(Jet::variables(&point, order))
}

fn is_identity_seeds(x: &[Jet]) -> bool {
    let Some(first) = x.first() else {
        return false;
    };
    let d = first.dim();
    if x.len() != d {
        return false;
    }
    x.iter().enumerate().all(|(i, xi)| {
        xi.order() == first.order()
            && xi.coeffs()[1..].iter().enumerate().all(
                |(k, &c)| {
                    if xi.order() >= 1 && k == i {
                        c == 1.0
                    } else {
                        c == 0.0
                    }
                },
            )
    })
}

/// Move a jet computed on identity seeds of its own chart onto input jets `x`.
pub fn reembed(inner: &Jet, x: &[Jet]) -> Jet {
    if is_identity_seeds(x) && inner.dim() == x.len() {
        return inner.truncate(input_order(x));
    }
    compose_multivariate(inner.coeffs(), x)
}

/// As [`reembed`], from raw partials in the layout of `x.len()` variables.
pub fn reembed_coeffs(partials: &[f64], order: usize, x: &[Jet]) -> Jet {
    if is_identity_seeds(x) {
        let n = layout(x.len()).len(order);
        return Jet::from_coeffs(x.len(), order, partials[..n].to_vec());
    }
    compose_multivariate(partials, x)
}

pub fn reembed_matrix(inner: &Matrix<Jet>, x: &[Jet]) -> Matrix<Jet> {
    if is_identity_seeds(x) && inner.get(0, 0).dim() == x.len() {
        return inner.clone();
    }
    inner.map(|e| reembed(e, x))
}

pub fn reembed_christoffel(inner: &Christoffel, x: &[Jet]) -> Christoffel {
    if is_identity_seeds(x) && inner.get(0, 0, 0).dim() == x.len() {
        return inner.clone();
    }
    Christoffel::from_fn(inner.dim(), |k, i, j| reembed(inner.get(k, i, j), x))
}

/// Evaluate an expression on input jets in the requested mode.
pub fn eval_expr(ast: &ExprAst, mode: DiffMode, x: &[Jet]) -> Result<Jet> {
    match mode {
        DiffMode::Jet => expr::eval_on(ast, x),
        DiffMode::Fd => {
            let point: Vec<f64> = x.iter().map(Jet::value).collect();
            let order = input_order(x);
            let p = crate::fd::partials(|q| expr::eval_f64(ast, q), &point, order)?;
            let out = reembed_coeffs(&p, order, x);
            if out.coeffs().iter().all(|c| c.is_finite()) {
                Ok(out)
            } else {
                Err(Error::EvalDomain {
                    what: "non-finite finite-difference derivative".into(),
                    point,
                })
            }
        }
    }
}

/// Scalar field given by an expression.
#[derive(Debug, Clone)]
pub struct ExprScalar {
    ast: ExprAst,
    mode: DiffMode,
}

impl ExprScalar {
    pub fn new(ast: ExprAst, mode: DiffMode) -> Self {
        ExprScalar { ast, mode }
    }

    pub fn parse(text: &str, dim: usize, mode: DiffMode) -> Result<Self> {
        Ok(ExprScalar::new(expr::parse(text, dim)?, mode))
    }

    pub fn ast(&self) -> &ExprAst {
        &self.ast
    }
}

impl ScalarField for ExprScalar {
    fn dim(&self) -> usize {
        self.ast.arity()
    }

    fn eval(&self, x: &[Jet]) -> Result<Jet> {
        eval_expr(&self.ast, self.mode, x)
    }
}

/// Symmetric metric whose entries `g_ij` (`i <= j`) are expressions.
#[derive(Debug, Clone)]
pub struct ExprMetric {
    n: usize,
    /// Upper triangle, row-major; `None` is the zero entry.
    entries: Vec<Option<ExprAst>>,
    mode: DiffMode,
}

impl ExprMetric {
    /// From a full `n x n` grid of expression texts; the grid must be symmetric
    /// as text after parsing (entries compared structurally).
    pub fn from_grid(grid: &[Vec<String>], mode: DiffMode) -> Result<Self> {
        let n = grid.len();
        if n == 0 || grid.iter().any(|row| row.len() != n) {
            return Err(Error::Contract("metric grid must be square and nonempty".into()));
        }
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                let a = expr::parse(&grid[i][j], n)?;
                let b = expr::parse(&grid[j][i], n)?;
                if a != b {
                    return Err(Error::Contract(format!(
                        "metric grid is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                entries.push(Some(a));
            }
        }
        Ok(ExprMetric { n, entries, mode })
    }

    /// Diagonal metric from one expression per coordinate.
    pub fn diagonal(diag: &[&str], mode: DiffMode) -> Result<Self> {
        let n = diag.len();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                entries.push(if i == j { Some(expr::parse(diag[i], n)?) } else { None });
            }
        }
        Ok(ExprMetric { n, entries, mode })
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }
}

impl MetricField for ExprMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[Jet]) -> Result<Matrix<Jet>> {
        if x.len() != self.n {
            return Err(Error::Contract(format!(
                "metric of dimension {} evaluated on {} coordinates",
                self.n,
                x.len()
            )));
        }
        let mut upper = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            upper.push(match e {
                Some(ast) => eval_expr(ast, self.mode, x)?,
                None => x[0].constant_like(0.0),
            });
        }
        Ok(Matrix::from_fn(self.n, self.n, |i, j| upper[self.slot(i, j)].clone()))
    }
}

/// Connection whose coefficients are expressions; unset coefficients are zero.
#[derive(Debug, Clone)]
pub struct ExprConnection {
    n: usize,
    coeffs: Vec<Option<ExprAst>>,
    mode: DiffMode,
}

impl ExprConnection {
    pub fn zero(n: usize, mode: DiffMode) -> Self {
        ExprConnection {
            n,
            coeffs: vec![None; n * n * n],
            mode,
        }
    }

    /// Set `Γ^k_ij` (zero-based indices).
    pub fn set(&mut self, k: usize, i: usize, j: usize, text: &str) -> Result<()> {
        let ast = expr::parse(text, self.n)?;
        let n = self.n;
        self.coeffs[(k * n + i) * n + j] = Some(ast);
        Ok(())
    }

    /// From a `[k][i][j]` grid of texts; empty strings count as zero.
    pub fn from_grid(grid: &[Vec<Vec<String>>], mode: DiffMode) -> Result<Self> {
        let n = grid.len();
        if n == 0
            || grid
                .iter()
                .any(|plane| plane.len() != n || plane.iter().any(|row| row.len() != n))
        {
            return Err(Error::Contract("christoffel grid must be n x n x n".into()));
        }
        let mut conn = ExprConnection::zero(n, mode);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let text = grid[k][i][j].trim();
                    if !text.is_empty() {
                        conn.set(k, i, j, text)?;
                    }
                }
            }
        }
        Ok(conn)
    }
}

impl Connection for ExprConnection {
    fn dim(&self) -> usize {
        self.n
    }

    fn loss(&self) -> usize {
        0
    }

    fn eval(&self, x: &[Jet]) -> Result<Christoffel> {
        if x.len() != self.n {
            return Err(Error::Contract(format!(
                "connection of dimension {} evaluated on {} coordinates",
                self.n,
                x.len()
            )));
        }
        let zero = x[0].constant_like(0.0);
        let mut data = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            data.push(match c {
                Some(ast) => eval_expr(ast, self.mode, x)?,
                None => zero.clone(),
            });
        }
        Ok(Christoffel { n: self.n, data })
    }
}

/// Evaluate a metric at a point with identity seeds of the given order.
pub fn metric_at(g: &dyn MetricField, p: &[f64], order: usize) -> Result<Matrix<Jet>> {
    g.eval(&Jet::variables(p, order))
}

/// Connection values at a point.
pub fn christoffel_values(conn: &dyn Connection, p: &[f64]) -> Result<Christoffel<f64>> {
    Ok(conn.eval(&Jet::variables(p, conn.loss()))?.values())
}

pub fn metric_values(g: &dyn MetricField, p: &[f64]) -> Result<Matrix<f64>> {
    Ok(g.eval(&Jet::variables(p, g.loss()))?.values())
}

pub type MetricRef = Arc<dyn MetricField>;
pub type ConnectionRef = Arc<dyn Connection>;
pub type ScalarRef = Arc<dyn ScalarField>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expr_metric_symmetry_enforced() {
        let bad = vec![
            vec!["1".to_string(), "x1".to_string()],
            vec!["x2".to_string(), "1".to_string()],
        ];
        assert!(ExprMetric::from_grid(&bad, DiffMode::Jet).is_err());
        let good = vec![
            vec!["1".to_string(), "x1".to_string()],
            vec!["x1".to_string(), "2".to_string()],
        ];
        let g = ExprMetric::from_grid(&good, DiffMode::Jet).unwrap();
        let m = metric_at(&g, &[0.5, 0.0], 1).unwrap();
        assert_eq!(m.get(1, 0).value(), 0.5);
        assert_eq!(m.get(0, 1).d1(0), 1.0);
        assert_eq!(m.get(1, 1).value(), 2.0);
    }

    #[test]
    fn reembed_onto_larger_jet_space() {
        // f(x) = x^2 on R, pulled back along x = y0 + 2 y1 in two variables
        let inner = Jet::variable(&[1.0], 0, 2) * Jet::variable(&[1.0], 0, 2);
        let y = Jet::variables(&[0.0, 0.5], 2);
        let x = [y[0].clone() + y[1].clone() * 2.0];
        let out = reembed(&inner, &x);
        assert_eq!(out.value(), 1.0);
        assert_eq!(out.d1(0), 2.0);
        assert_eq!(out.d1(1), 4.0);
        assert_eq!(out.partial(&[0, 2]).unwrap(), 8.0);
    }

    #[test]
    fn fd_mode_matches_jets() {
        let ast = expr::parse("exp(x1)*sin(x2)/x2", 2).unwrap();
        let x = Jet::variables(&[0.3, 0.8], 3);
        let a = eval_expr(&ast, DiffMode::Jet, &x).unwrap();
        let b = eval_expr(&ast, DiffMode::Fd, &x).unwrap();
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((p - q).abs() < 1e-5 * (1.0 + p.abs()), "{p} vs {q}");
        }
    }
}
