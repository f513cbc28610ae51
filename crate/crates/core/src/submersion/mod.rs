//! Submersions with a horizontal distribution.
//!
//! A [`Frame`] evaluates everything a pointwise identity needs at one total
//! space point: the differential `J = dπ`, a vertical basis, the horizontal
//! lift operator `L` and the projector fields `P_H = L J`, `P_V = I - P_H`.
//! All of these are jets in the total chart, so covariant derivatives of the
//! fields they define are exact.

pub mod checks;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, ExprAst};
use crate::field::{eval_expr, input_order, Christoffel, DiffMode, ScalarRef};
use crate::geometry::{cubic_form_from, DualConnection, Manifold};
use crate::jet::{Jet, MAX_ORDER};
use crate::linalg::Matrix;

/// A field of `rank` tangent vectors on an `n`-dimensional chart.
pub trait Distribution: Send + Sync {
    fn dim(&self) -> usize;
    fn rank(&self) -> usize;
    fn loss(&self) -> usize {
        0
    }
    /// `n x rank` matrix whose columns span the distribution.
    fn columns(&self, x: &[Jet]) -> Result<Matrix<Jet>>;
}

/// Columns given by expressions.
pub struct ExprDistribution {
    n: usize,
    columns: Vec<Vec<ExprAst>>,
    mode: DiffMode,
}

impl ExprDistribution {
    pub fn parse(columns: &[Vec<String>], n: usize, mode: DiffMode) -> Result<Self> {
        let columns = columns
            .iter()
            .map(|col| {
                if col.len() != n {
                    return Err(Error::Contract(format!(
                        "horizontal column has {} components, expected {n}",
                        col.len()
                    )));
                }
                col.iter().map(|t| expr::parse(t, n)).collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExprDistribution { n, columns, mode })
    }
}

impl Distribution for ExprDistribution {
    fn dim(&self) -> usize {
        self.n
    }

    fn rank(&self) -> usize {
        self.columns.len()
    }

    fn columns(&self, x: &[Jet]) -> Result<Matrix<Jet>> {
        let mut cols = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            cols.push(
                col.iter()
                    .map(|e| eval_expr(e, self.mode, x))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Matrix::from_fn(self.n, cols.len(), |i, j| cols[j][i].clone()))
    }
}

#[derive(Clone)]
pub enum HorizontalRule {
    /// `H = V^⊥` with respect to the total metric.
    MetricOrthogonal,
    Explicit(Arc<dyn Distribution>),
}

impl HorizontalRule {
    pub fn is_metric_orthogonal(&self) -> bool {
        matches!(self, HorizontalRule::MetricOrthogonal)
    }
}

/// `π: M -> B` with a horizontal rule and an optional conformal factor.
#[derive(Clone)]
pub struct SubmersionSetup {
    pub total: Manifold,
    pub base: Manifold,
    pub projection: Vec<ScalarRef>,
    pub horizontal: HorizontalRule,
    pub phi: Option<ScalarRef>,
    /// Columns of `dπ` solved for when building the vertical basis.
    pub pivot: Vec<usize>,
}

impl std::fmt::Debug for SubmersionSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubmersionSetup")
            .field("total", &self.total)
            .field("base", &self.base)
            .field("pivot", &self.pivot)
            .finish_non_exhaustive()
    }
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, &mut Vec::new(), &mut out);
    out
}

/// Column subset of `j` (m x n) with the best conditioned square block.
fn best_pivot(j: &Matrix<f64>) -> Option<Vec<usize>> {
    let (m, n) = (j.rows(), j.cols());
    let scale = j.norm_inf().max(f64::MIN_POSITIVE);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for cols in combinations(n, m) {
        let block = Matrix::from_fn(m, m, |r, c| *j.get(r, cols[c]));
        let det = block.determinant_value().abs() / scale.powi(m as i32);
        if det > 1e-10 && best.as_ref().is_none_or(|(b, _)| det > *b + 1e-12) {
            best = Some((det, cols));
        }
    }
    best.map(|(_, c)| c)
}

impl SubmersionSetup {
    /// Build a setup, choosing the pivot columns at the centre of the box.
    pub fn new(
        total: Manifold,
        base: Manifold,
        projection: Vec<ScalarRef>,
        horizontal: HorizontalRule,
        phi: Option<ScalarRef>,
    ) -> Result<Self> {
        let (n, m) = (total.dim(), base.dim());
        if projection.len() != m || m > n || m == 0 {
            return Err(Error::Contract(format!(
                "projection has {} components for a base of dimension {m} and total dimension {n}",
                projection.len()
            )));
        }
        if let HorizontalRule::Explicit(d) = &horizontal {
            if d.rank() != m || d.dim() != n {
                return Err(Error::Contract(format!(
                    "explicit horizontal distribution must have {m} columns of length {n}"
                )));
            }
        }
        let mut setup = SubmersionSetup {
            total,
            base,
            projection,
            horizontal,
            phi,
            pivot: Vec::new(),
        };
        let center = setup.total.domain.center();
        let j = setup.differential(&center)?.values();
        setup.pivot = best_pivot(&j).ok_or(Error::RankDrop { point: center })?;
        Ok(setup)
    }

    pub fn n(&self) -> usize {
        self.total.dim()
    }

    pub fn m(&self) -> usize {
        self.base.dim()
    }

    /// Non-pivot columns: the coordinates that parametrize a fibre.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.n()).filter(|c| !self.pivot.contains(c)).collect()
    }

    /// Same map and distribution with other connections.
    pub fn with_connections(
        &self,
        total: crate::field::ConnectionRef,
        base: crate::field::ConnectionRef,
    ) -> SubmersionSetup {
        SubmersionSetup {
            total: self.total.with_connection(total),
            base: self.base.with_connection(base),
            ..self.clone()
        }
    }

    /// The setup with both connections replaced by their duals.
    pub fn dual(&self) -> SubmersionSetup {
        self.with_connections(
            Arc::new(DualConnection::new(
                self.total.connection.clone(),
                self.total.metric.clone(),
            )),
            Arc::new(DualConnection::new(
                self.base.connection.clone(),
                self.base.metric.clone(),
            )),
        )
    }

    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>> {
        let x = Jet::variables(p, 0);
        self.projection.iter().map(|f| f.eval(&x).map(|j| j.value())).collect()
    }

    fn differential(&self, p: &[f64]) -> Result<Matrix<Jet>> {
        let x = Jet::variables(p, 1);
        let pi = self.projection.iter().map(|f| f.eval(&x)).collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_fn(self.m(), self.n(), |a, k| pi[a].d(k)))
    }

    pub fn frame(&self, p: &[f64]) -> Result<Frame> {
        Frame::new(self, p)
    }

    /// Points of the fibre through `p`, varying the free coordinates over
    /// `fractions` of their box range and solving for the pivot coordinates.
    pub fn fiber_points(&self, p: &[f64], fractions: &[f64]) -> Result<Vec<Vec<f64>>> {
        let b = self.project(p)?;
        let free = self.free_columns();
        let bounds = self.total.domain.bounds();
        let mut out = vec![p.to_vec()];
        if free.is_empty() {
            return Ok(out);
        }
        for &t in fractions {
            let mut q = p.to_vec();
            for &c in &free {
                let (lo, hi) = bounds[c];
                q[c] = lo + t * (hi - lo);
            }
            if let Some(q) = self.solve_onto(q, &b)? {
                if self.total.domain.contains_strictly(&q) && out.iter().all(|r| dist_inf(r, &q) > 1e-6) {
                    out.push(q);
                }
            }
        }
        Ok(out)
    }

    /// Newton iteration on the pivot coordinates so that `π(q) = b`.
    fn solve_onto(&self, mut q: Vec<f64>, b: &[f64]) -> Result<Option<Vec<f64>>> {
        for _ in 0..50 {
            let val = match self.project(&q) {
                Ok(v) => v,
                Err(e) if e.is_point_incident() => return Ok(None),
                Err(e) => return Err(e),
            };
            let r: Vec<f64> = val.iter().zip(b).map(|(x, y)| x - y).collect();
            if r.iter().all(|x| x.abs() <= 1e-13 * (1.0 + x.abs())) {
                return Ok(Some(q));
            }
            let j = self.differential(&q)?.values();
            let block = Matrix::from_fn(self.m(), self.m(), |a, c| *j.get(a, self.pivot[c]));
            let step = match crate::linalg::solve_linear(&block, &r) {
                Ok(s) => s,
                Err(_) => return Ok(None),
            };
            for (c, s) in self.pivot.iter().zip(step) {
                q[*c] -= s;
            }
            if q.iter().any(|x| !x.is_finite()) {
                return Ok(None);
            }
        }
        Ok(None)
    }
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

/// Vector field given by jets in the total chart.
pub type JetField = Vec<Jet>;

/// Split of the tangent space and the fields that define it, at one point.
pub struct Frame {
    pub point: Vec<f64>,
    pub base_point: Vec<f64>,
    /// Identity seeds at `point`.
    pub seeds: Vec<Jet>,
    /// `dπ`, `m x n`.
    pub j: Matrix<Jet>,
    /// Vertical basis fields, `n x (n - m)`.
    pub vertical: Matrix<Jet>,
    /// Horizontal lifts of the base coordinate fields, `n x m`.
    pub lift: Matrix<Jet>,
    pub p_h: Matrix<Jet>,
    pub p_v: Matrix<Jet>,
    pub metric: Matrix<Jet>,
    /// Total connection coefficients at `point`.
    pub gamma: Christoffel<f64>,
    /// Conformal factor (zero when the setup has none).
    pub phi: Jet,
    pub base_metric: Matrix<f64>,
    pub base_gamma: Christoffel<f64>,
}

fn require_order(have: usize, need: usize) -> Result<()> {
    if have < need {
        Err(Error::OrderBudget {
            needed: need,
            available: have,
        })
    } else {
        Ok(())
    }
}

impl Frame {
    pub fn new(setup: &SubmersionSetup, p: &[f64]) -> Result<Frame> {
        let (n, m) = (setup.n(), setup.m());
        let seeds = Jet::variables(p, MAX_ORDER);
        let pi = setup
            .projection
            .iter()
            .map(|f| f.eval(&seeds))
            .collect::<Result<Vec<_>>>()?;
        require_order(input_order(&pi), 2)?;
        let j = Matrix::from_fn(m, n, |a, k| pi[a].d(k));
        let metric = setup.total.metric.eval(&seeds)?;

        let vertical = vertical_basis(&j, &setup.pivot, p)?;
        let h = match &setup.horizontal {
            HorizontalRule::MetricOrthogonal => metric.solve(&j.transpose()).map_err(|e| rank_error(e, p))?,
            HorizontalRule::Explicit(d) => d.columns(&seeds)?,
        };
        let jh = j.matmul(&h);
        let minv = jh.inverse().map_err(|e| rank_error(e, p))?;
        let lift = h.matmul(&minv);
        let p_h = lift.matmul(&j);
        let one = seeds[0].constant_like(1.0);
        let p_v = Matrix::from_fn(n, n, |a, b| {
            let id = if a == b { one.clone() } else { one.constant_like(0.0) };
            id - p_h.get(a, b).clone()
        });
        require_order(p_h.get(0, 0).order(), 1)?;

        let gamma = setup
            .total
            .connection
            .eval(&seeds_for(p, setup.total.connection.loss()))?;
        let phi = match &setup.phi {
            Some(f) => f.eval(&seeds)?,
            None => seeds[0].constant_like(0.0),
        };
        require_order(phi.order(), 1)?;
        let base_point: Vec<f64> = pi.iter().map(Jet::value).collect();
        let base_metric = setup
            .base
            .metric
            .eval(&Jet::variables(&base_point, setup.base.metric.loss()))?
            .values();
        let base_gamma = setup
            .base
            .connection
            .eval(&seeds_for(&base_point, setup.base.connection.loss()))?
            .values();
        Ok(Frame {
            point: p.to_vec(),
            base_point,
            seeds,
            j,
            vertical,
            lift,
            p_h,
            p_v,
            metric,
            gamma: gamma.values(),
            phi,
            base_metric,
            base_gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.j.cols()
    }

    pub fn m(&self) -> usize {
        self.j.rows()
    }

    /// Values of the total metric.
    pub fn g(&self) -> Matrix<f64> {
        self.metric.values()
    }

    pub fn g_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        bilinear(&self.g(), a, b)
    }

    pub fn base_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        bilinear(&self.base_metric, a, b)
    }

    pub fn lift_field(&self, a: usize) -> JetField {
        self.lift.column(a)
    }

    pub fn vertical_field(&self, f: usize) -> JetField {
        self.vertical.column(f)
    }

    /// Horizontal lift of a base vector at this point.
    pub fn lift_vector(&self, w: &[f64]) -> Vec<f64> {
        self.lift.values().mul_vec(w)
    }

    pub fn horizontal_basis(&self) -> Vec<Vec<f64>> {
        (0..self.m()).map(|a| values(&self.lift_field(a))).collect()
    }

    pub fn vertical_basis(&self) -> Vec<Vec<f64>> {
        (0..self.n() - self.m())
            .map(|f| values(&self.vertical_field(f)))
            .collect()
    }

    pub fn horizontal(&self, v: &[f64]) -> Vec<f64> {
        self.p_h.values().mul_vec(v)
    }

    pub fn vertical_part(&self, v: &[f64]) -> Vec<f64> {
        self.p_v.values().mul_vec(v)
    }

    /// `π_* v`.
    pub fn push(&self, v: &[f64]) -> Vec<f64> {
        self.j.values().mul_vec(v)
    }

    pub fn dphi(&self, v: &[f64]) -> f64 {
        self.phi.directional(v)
    }

    pub fn conformal_scale(&self) -> f64 {
        (2.0 * self.phi.value()).exp()
    }

    /// Constant extension of a vector.
    pub fn constant_field(&self, v: &[f64]) -> JetField {
        v.iter().map(|&c| self.seeds[0].constant_like(c)).collect()
    }

    /// Extension `v + B (x - p)`.
    pub fn affine_field(&self, v: &[f64], b: &Matrix<f64>) -> JetField {
        let n = self.n();
        (0..n)
            .map(|k| {
                let mut f = self.seeds[0].constant_like(v[k]);
                for i in 0..n {
                    let c = *b.get(k, i);
                    if c != 0.0 {
                        f += &((self.seeds[i].clone() + (-self.point[i])) * c);
                    }
                }
                f
            })
            .collect()
    }

    pub fn apply(m: &Matrix<Jet>, f: &[Jet]) -> JetField {
        (0..m.rows())
            .map(|r| {
                let mut acc = f[0].constant_like(0.0);
                for (c, fc) in f.iter().enumerate() {
                    acc += &(m.get(r, c).clone() * fc.clone());
                }
                acc
            })
            .collect()
    }

    /// `(∇_w Y)(p)` for the connection with coefficients `gamma`.
    pub fn covariant(gamma: &Christoffel<f64>, w: &[f64], y: &[Jet]) -> Vec<f64> {
        let yv = values(y);
        let corr = gamma.contract(w, &yv);
        y.iter().zip(corr).map(|(yk, c)| yk.directional(w) + c).collect()
    }

    pub fn nabla(&self, w: &[f64], y: &[Jet]) -> Vec<f64> {
        Frame::covariant(&self.gamma, w, y)
    }

    /// `T_E F` for the connection `gamma` with extension `f_field` of `F`.
    pub fn t_tensor_with(&self, gamma: &Christoffel<f64>, e: &[f64], f_field: &[Jet]) -> Vec<f64> {
        let ve = self.vertical_part(e);
        let vf = Frame::apply(&self.p_v, f_field);
        let hf = Frame::apply(&self.p_h, f_field);
        let a = self.horizontal(&Frame::covariant(gamma, &ve, &vf));
        let b = self.vertical_part(&Frame::covariant(gamma, &ve, &hf));
        add(&a, &b)
    }

    /// `A_E F` for the connection `gamma` with extension `f_field` of `F`.
    pub fn a_tensor_with(&self, gamma: &Christoffel<f64>, e: &[f64], f_field: &[Jet]) -> Vec<f64> {
        let he = self.horizontal(e);
        let vf = Frame::apply(&self.p_v, f_field);
        let hf = Frame::apply(&self.p_h, f_field);
        let a = self.vertical_part(&Frame::covariant(gamma, &he, &hf));
        let b = self.horizontal(&Frame::covariant(gamma, &he, &vf));
        add(&a, &b)
    }

    pub fn t_tensor(&self, e: &[f64], f: &[f64]) -> Vec<f64> {
        self.t_tensor_with(&self.gamma, e, &self.constant_field(f))
    }

    pub fn a_tensor(&self, e: &[f64], f: &[f64]) -> Vec<f64> {
        self.a_tensor_with(&self.gamma, e, &self.constant_field(f))
    }

    /// Base cubic form `(∇*_{e_a} g_B)(e_b, e_c)` at the base point.
    pub fn base_cubic_form(&self, setup: &SubmersionSetup) -> Result<Vec<f64>> {
        crate::geometry::nabla_g(
            setup.base.connection.as_ref(),
            setup.base.metric.as_ref(),
            &self.base_point,
        )
    }

    /// Total cubic form at the point, laid out `[i][j][k]`.
    pub fn cubic_form(&self, setup: &SubmersionSetup) -> Result<Vec<f64>> {
        let conn = setup.total.connection.as_ref();
        let g = setup.total.metric.as_ref();
        let x = seeds_for(&self.point, (g.loss() + 1).max(conn.loss()));
        Ok(cubic_form_from(&g.eval(&x)?, &conn.eval(&x)?)
            .iter()
            .map(Jet::value)
            .collect())
    }

    /// `max |g(h, v)|` over the horizontal and vertical bases, relative to
    /// the metric scale.
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.g();
        let scale = g.norm_inf().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for h in self.horizontal_basis() {
            for v in self.vertical_basis() {
                worst = worst.max(bilinear(&g, &h, &v).abs() / scale);
            }
        }
        worst
    }
}

fn seeds_for(p: &[f64], order: usize) -> Vec<Jet> {
    Jet::variables(p, order.min(MAX_ORDER))
}

fn rank_error(e: Error, p: &[f64]) -> Error {
    match e {
        Error::SingularMatrix { .. } => Error::RankDrop { point: p.to_vec() },
        other => other,
    }
}

/// `v_f = e_f - sum_P (J_P^{-1} J_f)_P e_P` for every free column `f`.
fn vertical_basis(j: &Matrix<Jet>, pivot: &[usize], p: &[f64]) -> Result<Matrix<Jet>> {
    let (m, n) = (j.rows(), j.cols());
    let build = |pivot: &[usize]| -> Result<Matrix<Jet>> {
        let free: Vec<usize> = (0..n).filter(|c| !pivot.contains(c)).collect();
        let one = j.get(0, 0).constant_like(1.0);
        if free.is_empty() {
            return Ok(Matrix::from_vec(n, 0, Vec::new()));
        }
        let jp = Matrix::from_fn(m, m, |a, c| j.get(a, pivot[c]).clone());
        let jf = Matrix::from_fn(m, free.len(), |a, c| j.get(a, free[c]).clone());
        let c = jp.solve(&jf)?;
        Ok(Matrix::from_fn(n, free.len(), |row, col| {
            if let Some(pos) = pivot.iter().position(|&q| q == row) {
                -c.get(pos, col).clone()
            } else if row == free[col] {
                one.clone()
            } else {
                one.constant_like(0.0)
            }
        }))
    };
    match build(pivot) {
        Ok(v) => Ok(v),
        Err(Error::SingularMatrix { .. }) => {
            let local = best_pivot(&j.values()).ok_or(Error::RankDrop { point: p.to_vec() })?;
            log::warn!("pivot columns {pivot:?} degenerate at {p:?}; using {local:?}");
            build(&local).map_err(|e| rank_error(e, p))
        }
        Err(e) => Err(e),
    }
}

pub fn values(f: &[Jet]) -> Vec<f64> {
    f.iter().map(Jet::value).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter()
        .fold(0.0, |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

pub fn bilinear(g: &Matrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += a[i] * g.get(i, j) * b[j];
        }
    }
    s
}

/// `C(a, b, c)` for a cubic form laid out `[i][j][k]`.
pub fn trilinear(c: &[f64], a: &[f64], b: &[f64], d: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if b[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                s += c[(i * n + j) * n + k] * a[i] * b[j] * d[k];
            }
        }
    }
    s
}

/// A connection evaluated on the identity seeds of a point.
pub fn connection_values(conn: &dyn crate::field::Connection, p: &[f64]) -> Result<Christoffel<f64>> {
    Ok(conn.eval(&seeds_for(p, conn.loss()))?.values())
}
