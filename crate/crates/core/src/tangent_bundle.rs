//! The tangent bundle `TM` with coordinates `(x^1..x^n; u^1..u^n)` and the
//! lifts of functions, vector fields, metrics and connections from `M`.
//!
//! Coordinate formulas use `N^a_i = u^k Γ^a_ik`, so that the horizontal lift
//! of `∂_i` is `E_i = ∂/∂x^i - N^a_i ∂/∂u^a`. Every formula here is checked
//! against its defining frame rules by [`check_defining_rules`].

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::check::{CheckResult, Status, Sweep};
use crate::error::{Error, Result};
use crate::field::{
    own_seeds, reembed_christoffel, reembed_matrix, Christoffel, Connection, ConnectionRef, DiffMode, ExprScalar,
    MetricField, MetricRef, ScalarRef,
};
use crate::geometry::{self, DualConnection, Manifold};
use crate::jet::{Jet, MAX_ORDER};
use crate::linalg::Matrix;
use crate::sampling::BoxDomain;
use crate::submersion::checks::{self as sub_checks, lemma_residuals};
use crate::submersion::{
    bilinear, connection_values, norm_inf, sub, Distribution, Frame, HorizontalRule, SubmersionSetup,
};

fn zero_like(j: &Jet) -> Jet {
    j.constant_like(0.0)
}

/// Identity seeds of the bundle chart, split into base and fibre parts.
fn bundle_seeds(x: &[Jet], n: usize, need: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let mut seeds = own_seeds(x, 2 * n, need)?;
    let u = seeds.split_off(n);
    Ok((seeds, u))
}

/// `N^a_i = u^k Γ^a_ik`, indexed `[a][i]`.
fn connection_map(gamma: &Christoffel, u: &[Jet]) -> Vec<Vec<Jet>> {
    let n = gamma.dim();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|i| {
                    let mut acc = zero_like(gamma.get(a, i, 0));
                    for (k, uk) in u.iter().enumerate() {
                        acc += &(uk.clone() * gamma.get(a, i, k).clone());
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Sasaki metric: `g^s(X^H, Y^H) = g^s(X^v, Y^v) = g(X, Y)`, mixed terms zero.
pub struct SasakiMetric {
    g: MetricRef,
    conn: ConnectionRef,
}

impl SasakiMetric {
    pub fn new(g: MetricRef, conn: ConnectionRef) -> Self {
        SasakiMetric { g, conn }
    }
}

impl MetricField for SasakiMetric {
    fn dim(&self) -> usize {
        2 * self.g.dim()
    }

    fn loss(&self) -> usize {
        self.g.loss().max(self.conn.loss())
    }

    fn eval(&self, x: &[Jet]) -> Result<Matrix<Jet>> {
        let n = self.g.dim();
        let (xs, u) = bundle_seeds(x, n, self.loss())?;
        let g = self.g.eval(&xs)?;
        let nm = connection_map(&self.conn.eval(&xs)?, &u);
        // (N^T g)_{ib} = N^a_i g_ab
        let ntg: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|b| {
                        let mut acc = zero_like(g.get(0, 0));
                        for a in 0..n {
                            acc += &(nm[a][i].clone() * g.get(a, b).clone());
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let inner = Matrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
            (true, true) => {
                let mut acc = g.get(r, c).clone();
                for b in 0..n {
                    acc += &(ntg[r][b].clone() * nm[b][c].clone());
                }
                acc
            }
            (true, false) => ntg[r][c - n].clone(),
            (false, true) => ntg[c][r - n].clone(),
            (false, false) => g.get(r - n, c - n).clone(),
        });
        Ok(reembed_matrix(&inner, x))
    }
}

/// Horizontal lift metric: `g^H(X^H, Y^v) = g(X, Y)`, other frame pairs zero.
pub struct HorizontalLiftMetric {
    g: MetricRef,
    conn: ConnectionRef,
}

impl HorizontalLiftMetric {
    pub fn new(g: MetricRef, conn: ConnectionRef) -> Self {
        HorizontalLiftMetric { g, conn }
    }
}

impl MetricField for HorizontalLiftMetric {
    fn dim(&self) -> usize {
        2 * self.g.dim()
    }

    fn loss(&self) -> usize {
        self.g.loss().max(self.conn.loss())
    }

    fn eval(&self, x: &[Jet]) -> Result<Matrix<Jet>> {
        let n = self.g.dim();
        let (xs, u) = bundle_seeds(x, n, self.loss())?;
        let g = self.g.eval(&xs)?;
        let nm = connection_map(&self.conn.eval(&xs)?, &u);
        let inner = Matrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
            (true, true) => {
                let mut acc = zero_like(g.get(0, 0));
                for a in 0..n {
                    acc += &(nm[a][c].clone() * g.get(r, a).clone());
                    acc += &(nm[a][r].clone() * g.get(a, c).clone());
                }
                acc
            }
            (true, false) => g.get(r, c - n).clone(),
            (false, true) => g.get(r - n, c).clone(),
            (false, false) => zero_like(g.get(0, 0)),
        });
        Ok(reembed_matrix(&inner, x))
    }
}

/// Complete lift metric, blocks `[[u^k ∂_k g, g], [g, 0]]`.
pub struct CompleteLiftMetric {
    g: MetricRef,
}

impl CompleteLiftMetric {
    pub fn new(g: MetricRef) -> Self {
        CompleteLiftMetric { g }
    }
}

impl MetricField for CompleteLiftMetric {
    fn dim(&self) -> usize {
        2 * self.g.dim()
    }

    fn loss(&self) -> usize {
        self.g.loss() + 1
    }

    fn eval(&self, x: &[Jet]) -> Result<Matrix<Jet>> {
        let n = self.g.dim();
        let (xs, u) = bundle_seeds(x, n, self.loss())?;
        let g = self.g.eval(&xs)?;
        let inner = Matrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
            (true, true) => {
                let mut acc = zero_like(&g.get(r, c).d(0));
                for (k, uk) in u.iter().enumerate() {
                    acc += &(uk.clone() * g.get(r, c).d(k));
                }
                acc
            }
            (true, false) => g.get(r, c - n).clone(),
            (false, true) => g.get(r - n, c).clone(),
            (false, false) => zero_like(g.get(0, 0)),
        });
        Ok(reembed_matrix(&inner, x))
    }
}

/// Complete lift `∇^c`: base block `Γ`, vertical block `u^l ∂_l Γ`, mixed blocks `Γ`.
pub struct CompleteLiftConnection {
    conn: ConnectionRef,
}

impl CompleteLiftConnection {
    pub fn new(conn: ConnectionRef) -> Self {
        CompleteLiftConnection { conn }
    }
}

impl Connection for CompleteLiftConnection {
    fn dim(&self) -> usize {
        2 * self.conn.dim()
    }

    fn loss(&self) -> usize {
        self.conn.loss() + 1
    }

    fn eval(&self, x: &[Jet]) -> Result<Christoffel> {
        let n = self.conn.dim();
        let (xs, u) = bundle_seeds(x, n, self.loss())?;
        let gamma = self.conn.eval(&xs)?;
        let zero = zero_like(&gamma.get(0, 0, 0).d(0));
        let inner = Christoffel::from_fn(2 * n, |k, i, j| match (k < n, i < n, j < n) {
            (true, true, true) => gamma.get(k, i, j).clone(),
            (false, true, true) => {
                let g = gamma.get(k - n, i, j);
                let mut acc = zero.clone();
                for (l, ul) in u.iter().enumerate() {
                    acc += &(ul.clone() * g.d(l));
                }
                acc
            }
            (false, false, true) => gamma.get(k - n, i - n, j).clone(),
            (false, true, false) => gamma.get(k - n, i, j - n).clone(),
            _ => zero.clone(),
        });
        Ok(reembed_christoffel(&inner, x))
    }
}

/// Horizontal lift `∇^H`, determined by `∇^H_{X^H} Y^H = (∇_X Y)^H`,
/// `∇^H_{X^H} Y^v = (∇_X Y)^v` and zero derivatives along vertical lifts.
pub struct HorizontalLiftConnection {
    conn: ConnectionRef,
}

impl HorizontalLiftConnection {
    pub fn new(conn: ConnectionRef) -> Self {
        HorizontalLiftConnection { conn }
    }
}

impl Connection for HorizontalLiftConnection {
    fn dim(&self) -> usize {
        2 * self.conn.dim()
    }

    fn loss(&self) -> usize {
        self.conn.loss() + 1
    }

    fn eval(&self, x: &[Jet]) -> Result<Christoffel> {
        let n = self.conn.dim();
        let (xs, u) = bundle_seeds(x, n, self.loss())?;
        let gamma = self.conn.eval(&xs)?;
        let zero = zero_like(&gamma.get(0, 0, 0).d(0));
        // u-component of ∇_{∂x_j} ∂x_i:
        // u^l (∂_j Γ^a_il - Γ^k_ji Γ^a_kl + Γ^a_jc Γ^c_il)
        let vertical = |a: usize, j: usize, i: usize| -> Jet {
            let mut acc = zero.clone();
            for (l, ul) in u.iter().enumerate() {
                let mut t = gamma.get(a, i, l).d(j);
                for k in 0..n {
                    t -= &(gamma.get(k, j, i).clone() * gamma.get(a, k, l).clone());
                    t += &(gamma.get(a, j, k).clone() * gamma.get(k, i, l).clone());
                }
                acc += &(ul.clone() * t);
            }
            acc
        };
        let inner = Christoffel::from_fn(2 * n, |k, i, j| match (k < n, i < n, j < n) {
            (true, true, true) => gamma.get(k, i, j).clone(),
            (false, true, true) => vertical(k - n, i, j),
            (false, true, false) => gamma.get(k - n, i, j - n).clone(),
            (false, false, true) => gamma.get(k - n, j, i - n).clone(),
            _ => zero.clone(),
        });
        Ok(reembed_christoffel(&inner, x))
    }
}

/// Columns `E_i = ∂/∂x^i - N^a_i ∂/∂u^a`.
pub struct HorizontalLiftDistribution {
    conn: ConnectionRef,
}

impl HorizontalLiftDistribution {
    pub fn new(conn: ConnectionRef) -> Self {
        HorizontalLiftDistribution { conn }
    }
}

impl Distribution for HorizontalLiftDistribution {
    fn dim(&self) -> usize {
        2 * self.conn.dim()
    }

    fn rank(&self) -> usize {
        self.conn.dim()
    }

    fn loss(&self) -> usize {
        self.conn.loss()
    }

    fn columns(&self, x: &[Jet]) -> Result<Matrix<Jet>> {
        let n = self.conn.dim();
        let gamma = self.conn.eval(&x[..n])?;
        let nm = connection_map(&gamma, &x[n..]);
        let one = gamma.get(0, 0, 0).constant_like(1.0);
        Ok(Matrix::from_fn(2 * n, n, |r, i| {
            if r < n {
                if r == i {
                    one.clone()
                } else {
                    zero_like(&one)
                }
            } else {
                -nm[r - n][i].clone()
            }
        }))
    }
}

/// A vector field on the base chart.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>>;
}

/// `X^i(x) = a^i + B^i_j x^j + q^i |x|^2`.
#[derive(Debug, Clone)]
pub struct QuadraticField {
    pub a: Vec<f64>,
    pub b: Matrix<f64>,
    pub q: Vec<f64>,
}

impl QuadraticField {
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut a = vec![0.0; n];
        a[i] = 1.0;
        QuadraticField {
            a,
            b: Matrix::from_fn(n, n, |_, _| 0.0),
            q: vec![0.0; n],
        }
    }

    pub fn random(n: usize, rng: &mut ChaCha8Rng) -> Self {
        QuadraticField {
            a: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            b: Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)),
            q: (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        }
    }
}

impl VectorField for QuadraticField {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let mut r2 = zero_like(&x[0]);
        for xi in x {
            r2 += &(xi.clone() * xi.clone());
        }
        Ok((0..self.dim())
            .map(|i| {
                let mut acc = x[0].constant_like(self.a[i]) + r2.clone() * self.q[i];
                for (j, xj) in x.iter().enumerate() {
                    acc += &(xj * *self.b.get(i, j));
                }
                acc
            })
            .collect())
    }
}

/// `f(x) = c·x + x^T D x`.
#[derive(Debug, Clone)]
pub struct QuadraticFunction {
    pub c: Vec<f64>,
    pub d: Matrix<f64>,
}

impl QuadraticFunction {
    pub fn random(n: usize, rng: &mut ChaCha8Rng) -> Self {
        QuadraticFunction {
            c: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            d: Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)),
        }
    }

    pub fn eval(&self, x: &[Jet]) -> Jet {
        let mut acc = zero_like(&x[0]);
        for (i, xi) in x.iter().enumerate() {
            acc += &(xi * self.c[i]);
            for (j, xj) in x.iter().enumerate() {
                acc += &(xi.clone() * xj.clone() * *self.d.get(i, j));
            }
        }
        acc
    }
}

/// Bundle-chart jets at `(x; u)`.
pub struct BundlePoint {
    pub n: usize,
    pub seeds: Vec<Jet>,
}

impl BundlePoint {
    pub fn new(point: &[f64], order: usize) -> Result<Self> {
        if !point.len().is_multiple_of(2) {
            return Err(Error::Contract(format!("bundle point has odd length {}", point.len())));
        }
        Ok(BundlePoint {
            n: point.len() / 2,
            seeds: Jet::variables(point, order.min(MAX_ORDER)),
        })
    }

    pub fn x(&self) -> &[Jet] {
        &self.seeds[..self.n]
    }

    pub fn u(&self) -> &[Jet] {
        &self.seeds[self.n..]
    }

    fn zero(&self) -> Jet {
        zero_like(&self.seeds[0])
    }

    /// `f^v = f ∘ π`.
    pub fn vertical_function(&self, f: &QuadraticFunction) -> Jet {
        f.eval(self.x())
    }

    /// `f^c = u^i ∂_i f`.
    pub fn complete_function(&self, f: &QuadraticFunction) -> Jet {
        let fx = f.eval(self.x());
        let mut acc = zero_like(&fx.d(0));
        for (i, ui) in self.u().iter().enumerate() {
            acc += &(ui.clone() * fx.d(i));
        }
        acc
    }

    pub fn vertical(&self, field: &dyn VectorField) -> Result<Vec<Jet>> {
        let xv = field.eval(self.x())?;
        Ok((0..self.n).map(|_| self.zero()).chain(xv).collect())
    }

    /// `X^c = X^i ∂/∂x^i + u^j ∂_j X^i ∂/∂u^i`.
    pub fn complete(&self, field: &dyn VectorField) -> Result<Vec<Jet>> {
        let xv = field.eval(self.x())?;
        let lower: Vec<Jet> = xv
            .iter()
            .map(|xi| {
                let mut acc = zero_like(&xi.d(0));
                for (j, uj) in self.u().iter().enumerate() {
                    acc += &(uj.clone() * xi.d(j));
                }
                acc
            })
            .collect();
        Ok(xv.into_iter().chain(lower).collect())
    }

    /// `γ(∇X) = u^j (∂_j X^i + X^k Γ^i_jk) ∂/∂u^i`.
    pub fn gamma_operator(&self, conn: &dyn Connection, field: &dyn VectorField) -> Result<Vec<Jet>> {
        let xv = field.eval(self.x())?;
        let gamma = conn.eval(self.x())?;
        let lower: Vec<Jet> = (0..self.n)
            .map(|i| {
                let mut acc = zero_like(&xv[i].d(0));
                for (j, uj) in self.u().iter().enumerate() {
                    let mut t = xv[i].d(j);
                    for (k, xk) in xv.iter().enumerate() {
                        t += &(xk.clone() * gamma.get(i, j, k).clone());
                    }
                    acc += &(uj.clone() * t);
                }
                acc
            })
            .collect();
        Ok((0..self.n).map(|_| self.zero()).chain(lower).collect())
    }

    /// `X^H = X^i ∂/∂x^i - X^j u^k Γ^i_jk ∂/∂u^i`.
    pub fn horizontal(&self, conn: &dyn Connection, field: &dyn VectorField) -> Result<Vec<Jet>> {
        let xv = field.eval(self.x())?;
        let gamma = conn.eval(self.x())?;
        let lower: Vec<Jet> = (0..self.n)
            .map(|i| {
                let mut acc = zero_like(gamma.get(0, 0, 0));
                for (j, xj) in xv.iter().enumerate() {
                    for (k, uk) in self.u().iter().enumerate() {
                        acc -= &(xj.clone() * uk.clone() * gamma.get(i, j, k).clone());
                    }
                }
                acc
            })
            .collect();
        Ok(xv.into_iter().chain(lower).collect())
    }

    /// `∇_X Y` on the base as a field in bundle-chart jets.
    pub fn base_covariant(&self, conn: &dyn Connection, x: &dyn VectorField, y: &dyn VectorField) -> Result<Vec<Jet>> {
        let xv = x.eval(self.x())?;
        let yv = y.eval(self.x())?;
        let gamma = conn.eval(self.x())?;
        Ok((0..self.n)
            .map(|i| {
                let mut acc = zero_like(&yv[i].d(0));
                for j in 0..self.n {
                    acc += &(xv[j].clone() * yv[i].d(j));
                    for k in 0..self.n {
                        acc += &(gamma.get(i, j, k).clone() * xv[j].clone() * yv[k].clone());
                    }
                }
                acc
            })
            .collect())
    }
}

/// Values of the vertical lift of a base vector field already in bundle jets.
fn vertical_values(z: &[Jet]) -> Vec<f64> {
    let n = z.len();
    (0..n).map(|_| 0.0).chain(z.iter().map(Jet::value)).collect()
}

/// Values of `Z^c` for a base field given in bundle jets.
fn complete_values(z: &[Jet], u: &[f64]) -> Vec<f64> {
    let lower: Vec<f64> = z.iter().map(|zi| (0..u.len()).map(|l| u[l] * zi.d1(l)).sum()).collect();
    z.iter().map(Jet::value).chain(lower).collect()
}

/// Values of `Z^H` for a base field given in bundle jets.
fn horizontal_values(z: &[Jet], u: &[f64], gamma: &Christoffel<f64>) -> Vec<f64> {
    let zv: Vec<f64> = z.iter().map(Jet::value).collect();
    let n = zv.len();
    let lower: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s -= zv[j] * u[k] * gamma.get(i, j, k);
                }
            }
            s
        })
        .collect();
    zv.into_iter().chain(lower).collect()
}

fn vals(f: &[Jet]) -> Vec<f64> {
    f.iter().map(Jet::value).collect()
}

/// The lifted metrics and connections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Sasaki,
    HorizontalMetric,
    CompleteMetric,
    CompleteConnection,
    HorizontalConnection,
}

impl LiftKind {
    pub const ALL: [LiftKind; 5] = [
        LiftKind::Sasaki,
        LiftKind::HorizontalMetric,
        LiftKind::CompleteMetric,
        LiftKind::CompleteConnection,
        LiftKind::HorizontalConnection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LiftKind::Sasaki => "sasaki_metric",
            LiftKind::HorizontalMetric => "horizontal_lift_metric",
            LiftKind::CompleteMetric => "complete_lift_metric",
            LiftKind::CompleteConnection => "complete_lift_connection",
            LiftKind::HorizontalConnection => "horizontal_lift_connection",
        }
    }
}

/// `TM` over a base manifold, with velocity box `[-1, 1]^n` by default.
#[derive(Clone)]
pub struct TangentBundle {
    pub base: Manifold,
    pub velocity: BoxDomain,
}

impl std::fmt::Debug for TangentBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TangentBundle")
            .field("base", &self.base.name)
            .finish_non_exhaustive()
    }
}

impl TangentBundle {
    pub fn new(base: Manifold) -> Result<Self> {
        let velocity = BoxDomain::cube(base.dim(), -1.0, 1.0)?;
        Ok(TangentBundle { base, velocity })
    }

    pub fn n(&self) -> usize {
        self.base.dim()
    }

    pub fn domain(&self) -> BoxDomain {
        self.base.domain.product(&self.velocity)
    }

    pub fn sasaki(&self) -> MetricRef {
        Arc::new(SasakiMetric::new(
            self.base.metric.clone(),
            self.base.connection.clone(),
        ))
    }

    pub fn horizontal_metric(&self) -> MetricRef {
        Arc::new(HorizontalLiftMetric::new(
            self.base.metric.clone(),
            self.base.connection.clone(),
        ))
    }

    pub fn complete_metric(&self) -> MetricRef {
        Arc::new(CompleteLiftMetric::new(self.base.metric.clone()))
    }

    pub fn complete_connection(&self) -> ConnectionRef {
        Arc::new(CompleteLiftConnection::new(self.base.connection.clone()))
    }

    pub fn horizontal_connection(&self) -> ConnectionRef {
        Arc::new(HorizontalLiftConnection::new(self.base.connection.clone()))
    }

    /// `(TM, ∇^c, g^s)`.
    pub fn manifold(&self) -> Manifold {
        Manifold {
            name: format!("T({})", self.base.name),
            domain: self.domain(),
            metric: self.sasaki(),
            connection: self.complete_connection(),
        }
    }

    /// `π: (TM, ∇^c, g^s) -> (M, ∇, g)` with `H` spanned by the `E_i`.
    pub fn submersion(&self) -> Result<SubmersionSetup> {
        let n = self.n();
        let projection = (1..=n)
            .map(|i| Ok(Arc::new(ExprScalar::parse(&format!("x{i}"), 2 * n, DiffMode::Jet)?) as ScalarRef))
            .collect::<Result<Vec<_>>>()?;
        let dist = HorizontalLiftDistribution::new(self.base.connection.clone());
        SubmersionSetup::new(
            self.manifold(),
            self.base.clone(),
            projection,
            HorizontalRule::Explicit(Arc::new(dist)),
            None,
        )
    }
}

fn metric_rule_residuals(
    tm: &TangentBundle,
    kind: LiftKind,
    p: &[f64],
    x: &dyn VectorField,
    y: &dyn VectorField,
) -> Result<Vec<(&'static str, f64)>> {
    let base = &tm.base;
    let bp = BundlePoint::new(p, base.connection.loss().max(base.metric.loss()) + 1)?;
    let g = base.metric.eval(bp.x())?;
    let (xh, yh) = (
        vals(&bp.horizontal(base.connection.as_ref(), x)?),
        vals(&bp.horizontal(base.connection.as_ref(), y)?),
    );
    let (xv, yv) = (vals(&bp.vertical(x)?), vals(&bp.vertical(y)?));
    let xb = x.eval(bp.x())?;
    let yb = y.eval(bp.x())?;
    // g(X, Y) as a jet on the bundle chart
    let mut gxy = zero_like(&g.get(0, 0).clone());
    for i in 0..tm.n() {
        for j in 0..tm.n() {
            gxy += &(xb[i].clone() * g.get(i, j).clone() * yb[j].clone());
        }
    }
    let metric = |m: MetricRef| -> Result<Matrix<f64>> { crate::field::metric_values(m.as_ref(), p) };
    Ok(match kind {
        LiftKind::Sasaki => {
            let gs = metric(tm.sasaki())?;
            vec![
                ("horizontal_horizontal", bilinear(&gs, &xh, &yh) - gxy.value()),
                ("horizontal_vertical", bilinear(&gs, &xh, &yv)),
                ("vertical_vertical", bilinear(&gs, &xv, &yv) - gxy.value()),
            ]
        }
        LiftKind::HorizontalMetric => {
            let gh = metric(tm.horizontal_metric())?;
            vec![
                ("horizontal_horizontal", bilinear(&gh, &xh, &yh)),
                ("horizontal_vertical", bilinear(&gh, &xh, &yv) - gxy.value()),
                ("vertical_vertical", bilinear(&gh, &xv, &yv)),
            ]
        }
        LiftKind::CompleteMetric => {
            let gc = metric(tm.complete_metric())?;
            let xc = vals(&bp.complete(x)?);
            let yc = vals(&bp.complete(y)?);
            let u: Vec<f64> = vals(bp.u());
            let gxy_c: f64 = (0..tm.n()).map(|l| u[l] * gxy.d1(l)).sum();
            vec![
                ("complete_complete", bilinear(&gc, &xc, &yc) - gxy_c),
                ("complete_vertical", bilinear(&gc, &xc, &yv) - gxy.value()),
                ("vertical_vertical", bilinear(&gc, &xv, &yv)),
            ]
        }
        _ => unreachable!("not a metric lift"),
    })
}

fn connection_rule_residuals(
    tm: &TangentBundle,
    kind: LiftKind,
    p: &[f64],
    x: &dyn VectorField,
    y: &dyn VectorField,
) -> Result<Vec<(&'static str, f64)>> {
    let base = tm.base.connection.as_ref();
    let bp = BundlePoint::new(p, base.loss() + 2)?;
    let u = vals(bp.u());
    let z = bp.base_covariant(base, x, y)?;
    let base_gamma = base.eval(bp.x())?.values();
    let out = match kind {
        LiftKind::CompleteConnection => {
            let gamma = connection_values(tm.complete_connection().as_ref(), p)?;
            let (xc, yc) = (bp.complete(x)?, bp.complete(y)?);
            let (xv, yv) = (bp.vertical(x)?, bp.vertical(y)?);
            let zc = complete_values(&z, &u);
            let zv = vertical_values(&z);
            vec![
                (
                    "complete_complete",
                    norm_inf(&sub(&Frame::covariant(&gamma, &vals(&xc), &yc), &zc)),
                ),
                (
                    "complete_vertical",
                    norm_inf(&sub(&Frame::covariant(&gamma, &vals(&xc), &yv), &zv)),
                ),
                (
                    "vertical_complete",
                    norm_inf(&sub(&Frame::covariant(&gamma, &vals(&xv), &yc), &zv)),
                ),
                (
                    "vertical_vertical",
                    norm_inf(&Frame::covariant(&gamma, &vals(&xv), &yv)),
                ),
            ]
        }
        LiftKind::HorizontalConnection => {
            let gamma = connection_values(tm.horizontal_connection().as_ref(), p)?;
            let (xh, yh) = (bp.horizontal(base, x)?, bp.horizontal(base, y)?);
            let (xv, yv) = (bp.vertical(x)?, bp.vertical(y)?);
            let zh = horizontal_values(&z, &u, &base_gamma);
            let zv = vertical_values(&z);
            vec![
                (
                    "horizontal_horizontal",
                    norm_inf(&sub(&Frame::covariant(&gamma, &vals(&xh), &yh), &zh)),
                ),
                (
                    "horizontal_vertical",
                    norm_inf(&sub(&Frame::covariant(&gamma, &vals(&xh), &yv), &zv)),
                ),
                (
                    "vertical_horizontal",
                    norm_inf(&Frame::covariant(&gamma, &vals(&xv), &yh)),
                ),
                (
                    "vertical_vertical",
                    norm_inf(&Frame::covariant(&gamma, &vals(&xv), &yv)),
                ),
            ]
        }
        _ => unreachable!("not a connection lift"),
    };
    Ok(out)
}

/// Residuals of the defining frame rules of one lifted object, on
/// coordinate fields and random quadratic fields.
pub fn check_defining_rules(
    tm: &TangentBundle,
    kind: LiftKind,
    samples: &[Vec<f64>],
    tol: f64,
    seed: u64,
) -> Result<CheckResult> {
    let n = tm.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11f7);
    let sweep = Sweep::run(samples.iter().map(Vec::as_slice), |p, r| {
        let mut fields: Vec<QuadraticField> = (0..n).map(|i| QuadraticField::coordinate(n, i)).collect();
        fields.push(QuadraticField::random(n, &mut rng));
        fields.push(QuadraticField::random(n, &mut rng));
        for x in &fields {
            for y in &fields {
                let res = match kind {
                    LiftKind::Sasaki | LiftKind::HorizontalMetric | LiftKind::CompleteMetric => {
                        metric_rule_residuals(tm, kind, p, x, y)?
                    }
                    _ => connection_rule_residuals(tm, kind, p, x, y)?,
                };
                for (name, v) in res {
                    r.record(name, v);
                }
            }
        }
        Ok(())
    })?;
    Ok(sweep.finish(kind.name(), "defining rules of the lifted object", tol))
}

/// Algebraic lift identities: `X^c(f^c) = (Xf)^c`, `[X^v, Y^v] = 0`,
/// `X^H = X^c - γ(∇X)`, `π_* X^H = X` and agreement of `X^H` with the
/// horizontal lift of the submersion frame.
pub fn check_lift_identities(tm: &TangentBundle, samples: &[Vec<f64>], tol: f64, seed: u64) -> Result<CheckResult> {
    let n = tm.n();
    let setup = tm.submersion()?;
    let conn = tm.base.connection.as_ref();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3c91);
    let sweep = Sweep::run(samples.iter().map(Vec::as_slice), |p, r| {
        let bp = BundlePoint::new(p, conn.loss() + 2)?;
        let x = QuadraticField::random(n, &mut rng);
        let y = QuadraticField::random(n, &mut rng);
        let f = QuadraticFunction::random(n, &mut rng);

        let xc = bp.complete(&x)?;
        let fc = bp.complete_function(&f);
        let fx = f.eval(bp.x());
        let xb = x.eval(bp.x())?;
        let mut xf = zero_like(&fx.d(0));
        for (i, xi) in xb.iter().enumerate() {
            xf += &(xi.clone() * fx.d(i));
        }
        let xf_c = bp.complete_function_of(&xf);
        r.record("complete_of_derivative", fc.directional(&vals(&xc)) - xf_c);

        let (xv, yv) = (bp.vertical(&x)?, bp.vertical(&y)?);
        let bracket: Vec<f64> = (0..2 * n)
            .map(|k| yv[k].directional(&vals(&xv)) - xv[k].directional(&vals(&yv)))
            .collect();
        r.record("vertical_bracket", norm_inf(&bracket));

        let xh = vals(&bp.horizontal(conn, &x)?);
        let gam = vals(&bp.gamma_operator(conn, &x)?);
        r.record(
            "horizontal_is_complete_minus_gamma",
            norm_inf(&sub(&xh, &sub(&vals(&xc), &gam))),
        );
        r.record("projects_to_field", norm_inf(&sub(&xh[..n], &vals(&xb))));

        let frame = setup.frame(p)?;
        r.record(
            "matches_submersion_lift",
            norm_inf(&sub(&xh, &frame.lift_vector(&vals(&xb)))),
        );
        Ok(())
    })?;
    Ok(sweep.finish("lift_identities", "lifts of functions and vector fields", tol))
}

impl BundlePoint {
    /// `h^c = u^i ∂_i h` for a base function given in bundle jets.
    pub fn complete_function_of(&self, h: &Jet) -> f64 {
        self.u().iter().enumerate().map(|(i, ui)| ui.value() * h.d1(i)).sum()
    }
}

/// `(TM, ∇^c) -> (M, ∇)` is an affine submersion with horizontal distribution.
pub fn check_affine_projection(tm: &TangentBundle, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let mut res = sub_checks::check_affine_hd(&tm.submersion()?, samples, tol)?;
    res.name = "tm_affine_submersion".into();
    res.reference = "natural projection is an affine submersion with horizontal distribution".into();
    Ok(res)
}

/// `(TM, g^s) -> (M, g)` is a semi-Riemannian submersion.
pub fn check_sasaki_projection(tm: &TangentBundle, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let mut res = sub_checks::check_semi_riemannian(&tm.submersion()?, samples, tol)?;
    res.name = "tm_semi_riemannian_submersion".into();
    res.reference = "natural projection is a semi-Riemannian submersion for the Sasaki metric".into();
    Ok(res)
}

/// `(TM, ∇^c, g^s)` is statistical exactly when the four conditions hold;
/// passes when both verdicts agree. The six cubic-form component identities
/// are reported alongside.
pub fn check_tm_statistical(tm: &TangentBundle, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let setup = tm.submersion()?;
    let four = sub_checks::check_four_conditions(&setup, samples, tol)?;
    let sweep = Sweep::run(samples.iter().map(Vec::as_slice), |p, r| {
        let frame = setup.frame(p)?;
        lemma_residuals(&setup, &frame)?.record(r);
        Ok(())
    })?;
    let lemma = sweep.finish("lemma", "", tol);
    let conditions = four.bool_detail("conditions_hold").unwrap_or(false);
    let statistical = four.bool_detail("total_statistical").unwrap_or(false);
    let premise_ok = four.status != Status::PremiseFailed && four.status != Status::Error;
    let status = if !premise_ok {
        four.status
    } else if lemma.status == Status::Error {
        Status::Error
    } else {
        Status::from_pass(conditions == statistical)
    };
    let mut out = four.clone();
    out.name = "tm_statistical".into();
    out.reference = "statistical structure of the complete lift with the Sasaki metric".into();
    out.status = status;
    for (k, v) in &lemma.components {
        out.components.insert(format!("lemma_{k}"), *v);
    }
    out.max_residual = out.components.values().copied().fold(0.0, f64::max);
    Ok(out.detail("lemma_max", lemma.max_residual))
}

/// (a) `(TM, ∇^c, g^c)` statistical.
pub fn check_complete_lift_statistical(tm: &TangentBundle, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let premise = geometry::is_statistical(
        tm.base.connection.as_ref(),
        tm.base.metric.as_ref(),
        &base_points(tm, samples),
        tol,
    )?;
    let mut res = geometry::check_is_statistical(
        tm.complete_connection().as_ref(),
        tm.complete_metric().as_ref(),
        samples,
        tol,
    )?;
    res.name = "tm_complete_lift_statistical".into();
    res.reference = "complete lifts of a statistical structure".into();
    if !premise {
        res.status = Status::PremiseFailed;
    }
    Ok(res.detail("premise_base_statistical", premise))
}

/// (b) the dual of `∇^c` for `g^c` is the complete lift of the dual.
pub fn check_complete_lift_dual(tm: &TangentBundle, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let premise = geometry::is_statistical(
        tm.base.connection.as_ref(),
        tm.base.metric.as_ref(),
        &base_points(tm, samples),
        tol,
    )?;
    let lhs = DualConnection::new(tm.complete_connection(), tm.complete_metric());
    let rhs = CompleteLiftConnection::new(Arc::new(DualConnection::new(
        tm.base.connection.clone(),
        tm.base.metric.clone(),
    )));
    let sweep = Sweep::run(samples.iter().map(Vec::as_slice), |p, r| {
        let a = connection_values(&lhs, p)?;
        let b = connection_values(&rhs, p)?;
        r.record("coefficients", norm_inf(&sub(a.data(), b.data())));
        Ok(())
    })?;
    let mut res = sweep.finish(
        "tm_complete_lift_dual",
        "conjugate of the complete lift connection",
        tol,
    );
    if !premise && res.status != Status::Error {
        res.status = Status::PremiseFailed;
    }
    Ok(res.detail("premise_base_statistical", premise))
}

/// (c) `(TM, ∇^H, g^s)` statistical exactly when `∇g = 0`.
pub fn check_horizontal_lift_statistical(tm: &TangentBundle, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let base_pts = base_points(tm, samples);
    let premise = geometry::is_statistical(tm.base.connection.as_ref(), tm.base.metric.as_ref(), &base_pts, tol)?;
    let mut parallel = Sweep::new();
    for p in &base_pts {
        parallel.point(p, |r| {
            r.record_all(
                "nabla_g",
                geometry::nabla_g(tm.base.connection.as_ref(), tm.base.metric.as_ref(), p)?,
            );
            Ok(())
        })?;
    }
    let stat = geometry::check_is_statistical(tm.horizontal_connection().as_ref(), tm.sasaki().as_ref(), samples, tol)?;
    let metric_parallel = parallel.complete_enough() && parallel.max() <= tol;
    let holds = stat.passed() == metric_parallel;
    let symmetric = stat.component("cubic_asymmetry").is_some_and(|c| c <= tol);
    let status = if stat.status == Status::Error || !parallel.complete_enough() {
        Status::Error
    } else if !premise {
        Status::PremiseFailed
    } else {
        Status::from_pass(holds)
    };
    let mut res = stat.clone();
    res.name = "tm_horizontal_lift_statistical".into();
    res.reference = "horizontal lift connection with the Sasaki metric".into();
    res.status = status;
    res.components.insert("base_nabla_g".into(), parallel.max());
    Ok(res
        .detail("premise_base_statistical", premise)
        .detail("base_metric_parallel", metric_parallel)
        .detail("lift_statistical", stat.passed())
        .detail("biconditional_holds", holds)
        .detail("cubic_form_biconditional_holds", symmetric == metric_parallel))
}

/// Base points `π(p)` of bundle samples.
pub fn base_points(tm: &TangentBundle, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    samples.iter().map(|p| p[..tm.n()].to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ExprConnection, ExprMetric};
    use crate::geometry::LeviCivita;

    fn h2() -> TangentBundle {
        let g: MetricRef = Arc::new(ExprMetric::diagonal(&["1/(x2^2)", "1/(x2^2)"], DiffMode::Jet).unwrap());
        TangentBundle::new(Manifold {
            name: "h2".into(),
            domain: BoxDomain::new(vec![(-1.0, 1.0), (0.5, 2.0)]).unwrap(),
            metric: g.clone(),
            connection: Arc::new(LeviCivita::new(g)),
        })
        .unwrap()
    }

    fn flat() -> TangentBundle {
        let g: MetricRef = Arc::new(ExprMetric::diagonal(&["1", "1"], DiffMode::Jet).unwrap());
        TangentBundle::new(Manifold {
            name: "r2".into(),
            domain: BoxDomain::cube(2, -1.0, 1.0).unwrap(),
            metric: g,
            connection: Arc::new(ExprConnection::zero(2, DiffMode::Jet)),
        })
        .unwrap()
    }

    #[test]
    fn flat_lifts_are_standard() {
        let tm = flat();
        let p = [0.3, -0.2, 0.5, 0.7];
        let gs = crate::field::metric_values(tm.sasaki().as_ref(), &p).unwrap();
        assert_eq!(gs, Matrix::identity(4));
        let gh = crate::field::metric_values(tm.horizontal_metric().as_ref(), &p).unwrap();
        assert_eq!(
            gh,
            Matrix::from_fn(4, 4, |i, j| if (i + 2 == j) || (j + 2 == i) { 1.0 } else { 0.0 })
        );
    }

    #[test]
    fn sasaki_mixed_entry_on_h2() {
        let tm = h2();
        // at x = (0,1), u = (1,0): N^a_1 = Γ^a_11, and only Γ^2_11 = 1
        let gs = crate::field::metric_values(tm.sasaki().as_ref(), &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((gs.get(0, 3) - 1.0).abs() < 1e-14);
        assert!(gs.get(0, 2).abs() < 1e-14);
    }

    #[test]
    fn horizontal_lift_of_first_coordinate_field() {
        let tm = h2();
        let bp = BundlePoint::new(&[0.0, 1.0, 0.0, 1.0], 3).unwrap();
        let x = QuadraticField::coordinate(2, 0);
        let xh = vals(&bp.horizontal(tm.base.connection.as_ref(), &x).unwrap());
        assert!(norm_inf(&sub(&xh, &[1.0, 0.0, 1.0, 0.0])) < 1e-14, "{xh:?}");
    }

    #[test]
    fn horizontal_connection_torsion_on_curved_base() {
        let tm = h2();
        let tor = geometry::torsion(tm.horizontal_connection().as_ref(), &[0.0, 1.0, 0.3, 0.4]).unwrap();
        assert!(norm_inf(&tor) > 1e-3);
        let tor = geometry::torsion(tm.complete_connection().as_ref(), &[0.0, 1.0, 0.3, 0.4]).unwrap();
        assert!(norm_inf(&tor) < 1e-14);
    }
}
