//! Metric and connection calculus on a single chart.
//!
//! Index conventions: `Γ^k_ij` is stored at `[k][i][j]` with
//! `∇_{∂i} ∂j = Γ^k_ij ∂k`; the cubic form is `C_ijk = (∇_{∂i} g)(∂j, ∂k)`;
//! curvature `R^k_lij` means `R(∂i, ∂j) ∂l = R^k_lij ∂k`.

use std::sync::Arc;

use crate::check::{CheckResult, Sweep};
use crate::error::Result;
use crate::field::{
    own_seeds, reembed_christoffel, Christoffel, Connection, ConnectionRef, MetricField, MetricRef, ScalarRef,
};
use crate::jet::Jet;
use crate::linalg::Matrix;
use crate::sampling::BoxDomain;

/// A chart with a metric and an affine connection.
#[derive(Clone)]
pub struct Manifold {
    pub name: String,
    pub domain: BoxDomain,
    pub metric: MetricRef,
    pub connection: ConnectionRef,
}

impl Manifold {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// The same chart with a different connection.
    pub fn with_connection(&self, connection: ConnectionRef) -> Manifold {
        Manifold {
            connection,
            ..self.clone()
        }
    }

    /// The same chart with its Levi-Civita connection.
    pub fn levi_civita(&self) -> Manifold {
        self.with_connection(Arc::new(LeviCivita::new(self.metric.clone())))
    }

    pub fn dual(&self) -> Manifold {
        self.with_connection(Arc::new(DualConnection::new(
            self.connection.clone(),
            self.metric.clone(),
        )))
    }
}

impl std::fmt::Debug for Manifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Manifold")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

fn half(j: Jet) -> Jet {
    j * 0.5
}

/// Levi-Civita coefficients from a metric jet matrix (order drops by one).
pub fn levi_civita_from(g: &Matrix<Jet>) -> Result<Christoffel> {
    let n = g.rows();
    let ginv = g.inverse()?;
    // dg[l][(i, j)] = ∂_l g_ij
    let dg: Vec<Matrix<Jet>> = (0..n).map(|l| g.map(|e| e.d(l))).collect();
    let first = |i: usize, j: usize, l: usize| -> Jet {
        dg[i].get(j, l).clone() + dg[j].get(i, l).clone() - dg[l].get(i, j).clone()
    };
    let lowered: Vec<Jet> = (0..n * n * n)
        .map(|idx| {
            let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
            half(first(i, j, l))
        })
        .collect();
    Ok(Christoffel::from_fn(n, |k, i, j| {
        let mut acc = lowered[0].constant_like(0.0);
        for l in 0..n {
            acc += &(ginv.get(k, l).clone() * lowered[(i * n + j) * n + l].clone());
        }
        acc
    }))
}

/// Cubic form `C_ijk` as jets from metric and connection jets.
pub fn cubic_form_from(g: &Matrix<Jet>, gamma: &Christoffel) -> Vec<Jet> {
    let n = g.rows();
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut c = g.get(j, k).d(i);
                for l in 0..n {
                    c -= &(gamma.get(l, i, j).clone() * g.get(l, k).clone());
                    c -= &(gamma.get(l, i, k).clone() * g.get(j, l).clone());
                }
                out.push(c);
            }
        }
    }
    out
}

/// Levi-Civita connection of a metric field.
pub struct LeviCivita {
    g: MetricRef,
}

impl LeviCivita {
    pub fn new(g: MetricRef) -> Self {
        LeviCivita { g }
    }
}

impl Connection for LeviCivita {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn loss(&self) -> usize {
        self.g.loss() + 1
    }

    fn eval(&self, x: &[Jet]) -> Result<Christoffel> {
        let seeds = own_seeds(x, self.dim(), self.loss())?;
        let g = self.g.eval(&seeds)?;
        Ok(reembed_christoffel(&levi_civita_from(&g)?, x))
    }
}

/// Dual connection: `∂i g_jk = Γ^l_ij g_lk + g_jl Γ̄^l_ik`.
pub struct DualConnection {
    conn: ConnectionRef,
    g: MetricRef,
}

impl DualConnection {
    pub fn new(conn: ConnectionRef, g: MetricRef) -> Self {
        DualConnection { conn, g }
    }
}

/// `Γ̄^l_ik = g^{lj} (∂i g_jk - Γ^m_ij g_mk)`.
pub fn dual_from(g: &Matrix<Jet>, gamma: &Christoffel) -> Result<Christoffel> {
    let n = g.rows();
    let ginv = g.inverse()?;
    let mut inner = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut t = g.get(j, k).d(i);
                for m in 0..n {
                    t -= &(gamma.get(m, i, j).clone() * g.get(m, k).clone());
                }
                inner.push(t);
            }
        }
    }
    Ok(Christoffel::from_fn(n, |l, i, k| {
        let mut acc = inner[0].constant_like(0.0);
        for j in 0..n {
            acc += &(ginv.get(l, j).clone() * inner[(i * n + j) * n + k].clone());
        }
        acc
    }))
}

impl Connection for DualConnection {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn loss(&self) -> usize {
        (self.g.loss() + 1).max(self.conn.loss())
    }

    fn eval(&self, x: &[Jet]) -> Result<Christoffel> {
        let seeds = own_seeds(x, self.dim(), self.loss())?;
        let g = self.g.eval(&seeds)?;
        let gamma = self.conn.eval(&seeds)?;
        Ok(reembed_christoffel(&dual_from(&g, &gamma)?, x))
    }
}

/// Coefficient-wise sum of two connections (a connection plus a tensor).
pub struct SumConnection {
    a: ConnectionRef,
    b: ConnectionRef,
}

impl SumConnection {
    pub fn new(a: ConnectionRef, b: ConnectionRef) -> Self {
        SumConnection { a, b }
    }
}

impl Connection for SumConnection {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn loss(&self) -> usize {
        self.a.loss().max(self.b.loss())
    }

    fn eval(&self, x: &[Jet]) -> Result<Christoffel> {
        let a = self.a.eval(x)?;
        let b = self.b.eval(x)?;
        Ok(Christoffel::from_fn(a.dim(), |k, i, j| {
            a.get(k, i, j).clone() + b.get(k, i, j).clone()
        }))
    }
}

/// The flat connection whose affine coordinates are `θ(x)`.
///
/// `Γ^k_ij = (∂x^k/∂θ^a) ∂i ∂j θ^a`.
pub struct ChartFlatConnection {
    theta: Vec<ScalarRef>,
}

impl ChartFlatConnection {
    pub fn new(theta: Vec<ScalarRef>) -> Self {
        ChartFlatConnection { theta }
    }
}

impl Connection for ChartFlatConnection {
    fn dim(&self) -> usize {
        self.theta.len()
    }

    fn loss(&self) -> usize {
        2 + self.theta.iter().map(|t| t.loss()).max().unwrap_or(0)
    }

    fn eval(&self, x: &[Jet]) -> Result<Christoffel> {
        let n = self.dim();
        let seeds = own_seeds(x, n, self.loss())?;
        let theta = self.theta.iter().map(|t| t.eval(&seeds)).collect::<Result<Vec<_>>>()?;
        let jac = Matrix::from_fn(n, n, |a, k| theta[a].d(k));
        let jinv = jac.inverse()?;
        let hess: Vec<Vec<Jet>> = theta
            .iter()
            .map(|t| (0..n * n).map(|ij| t.d(ij / n).d(ij % n)).collect())
            .collect();
        let inner = Christoffel::from_fn(n, |k, i, j| {
            let mut acc = hess[0][0].constant_like(0.0);
            for (a, h) in hess.iter().enumerate() {
                acc += &(jinv.get(k, a).clone() * h[i * n + j].clone());
            }
            acc
        });
        Ok(reembed_christoffel(&inner, x))
    }
}

/// `Γ^(α) = Γ^LC - (α/2) g^{-1} C` where `C` is the cubic form of a
/// reference connection (the `α = 1` member).
pub struct AlphaConnection {
    g: MetricRef,
    reference: ConnectionRef,
    alpha: f64,
}

impl AlphaConnection {
    pub fn new(g: MetricRef, reference: ConnectionRef, alpha: f64) -> Self {
        AlphaConnection { g, reference, alpha }
    }
}

impl Connection for AlphaConnection {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn loss(&self) -> usize {
        (self.g.loss() + 1).max(self.reference.loss())
    }

    fn eval(&self, x: &[Jet]) -> Result<Christoffel> {
        let n = self.dim();
        let seeds = own_seeds(x, n, self.loss())?;
        let g = self.g.eval(&seeds)?;
        let lc = levi_civita_from(&g)?;
        let reference = self.reference.eval(&seeds)?;
        let c = cubic_form_from(&g, &reference);
        let ginv = g.inverse()?;
        let inner = Christoffel::from_fn(n, |k, i, j| {
            let mut corr = lc.get(k, i, j).constant_like(0.0);
            for l in 0..n {
                corr += &(ginv.get(k, l).clone() * c[(i * n + j) * n + l].clone());
            }
            lc.get(k, i, j).clone() - corr * (0.5 * self.alpha)
        });
        Ok(reembed_christoffel(&inner, x))
    }
}

/// Connection coefficients at `p` with `extra` derivative orders kept.
pub fn christoffel_jets(conn: &dyn Connection, p: &[f64], extra: usize) -> Result<Christoffel> {
    conn.eval(&Jet::variables(p, conn.loss() + extra))
}

pub fn metric_jets(g: &dyn MetricField, p: &[f64], extra: usize) -> Result<Matrix<Jet>> {
    g.eval(&Jet::variables(p, g.loss() + extra))
}

/// `Tor^k_ij = Γ^k_ij - Γ^k_ji` at `p`.
pub fn torsion(conn: &dyn Connection, p: &[f64]) -> Result<Vec<f64>> {
    let gamma = christoffel_jets(conn, p, 0)?.values();
    let n = gamma.dim();
    let mut out = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out.push(gamma.get(k, i, j) - gamma.get(k, j, i));
            }
        }
    }
    Ok(out)
}

/// Cubic form `C_ijk = (∇_{∂i} g)(∂j, ∂k)` at `p`, laid out `[i][j][k]`.
pub fn nabla_g(conn: &dyn Connection, g: &dyn MetricField, p: &[f64]) -> Result<Vec<f64>> {
    let order = (g.loss() + 1).max(conn.loss());
    let x = Jet::variables(p, order);
    let gm = g.eval(&x)?;
    let gamma = conn.eval(&x)?;
    Ok(cubic_form_from(&gm, &gamma).iter().map(Jet::value).collect())
}

/// Curvature `R^k_lij` at `p`, laid out `[k][l][i][j]`.
pub fn curvature(conn: &dyn Connection, p: &[f64]) -> Result<Vec<f64>> {
    let gamma = christoffel_jets(conn, p, 1)?;
    let n = gamma.dim();
    let v = gamma.values();
    let mut out = vec![0.0; n * n * n * n];
    for k in 0..n {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut r = gamma.get(k, j, l).d1(i) - gamma.get(k, i, l).d1(j);
                    for m in 0..n {
                        r += v.get(k, i, m) * v.get(m, j, l) - v.get(k, j, m) * v.get(m, i, l);
                    }
                    out[((k * n + l) * n + i) * n + j] = r;
                }
            }
        }
    }
    Ok(out)
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter()
        .fold(0.0, |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Residual pieces of the statistical condition at one point:
/// `(max |Tor|, max |C_ijk - C_jik|)`.
pub fn statistical_residuals(conn: &dyn Connection, g: &dyn MetricField, p: &[f64]) -> Result<(f64, f64)> {
    let n = g.dim();
    let tor = max_abs(torsion(conn, p)?);
    let c = nabla_g(conn, g, p)?;
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                asym = asym.max((c[(i * n + j) * n + k] - c[(j * n + i) * n + k]).abs());
            }
        }
    }
    Ok((tor, asym))
}

fn points(samples: &[Vec<f64>]) -> impl Iterator<Item = &[f64]> {
    samples.iter().map(Vec::as_slice)
}

pub fn check_is_statistical(
    conn: &dyn Connection,
    g: &dyn MetricField,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckResult> {
    let sweep = Sweep::run(points(samples), |p, r| {
        let (tor, asym) = statistical_residuals(conn, g, p)?;
        r.record("torsion", tor);
        r.record("cubic_asymmetry", asym);
        Ok(())
    })?;
    Ok(sweep.finish("is_statistical", "torsion-free with symmetric cubic form", tol))
}

/// Whether `(∇, g)` passes the statistical test on `samples`.
pub fn is_statistical(conn: &dyn Connection, g: &dyn MetricField, samples: &[Vec<f64>], tol: f64) -> Result<bool> {
    Ok(check_is_statistical(conn, g, samples, tol)?.passed())
}

/// Duality residual `∂i g_jk - Γ^l_ij g_lk - g_jl Γ̄^l_ik` at `p`.
pub fn duality_residual(conn: &dyn Connection, dual: &dyn Connection, g: &dyn MetricField, p: &[f64]) -> Result<f64> {
    let n = g.dim();
    let gm = metric_jets(g, p, 1)?;
    let a = christoffel_jets(conn, p, 0)?.values();
    let b = christoffel_jets(dual, p, 0)?.values();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut r = gm.get(j, k).d1(i);
                for l in 0..n {
                    r -= a.get(l, i, j) * gm.get(l, k).value() + gm.get(j, l).value() * b.get(l, i, k);
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

fn christoffel_distance(a: &Christoffel<f64>, b: &Christoffel<f64>) -> f64 {
    max_abs(a.data().iter().zip(b.data()).map(|(x, y)| x - y))
}

/// Dual connection residuals: defining identity, involution and, for
/// statistical pairs, `∇ + ∇̄ = 2 ∇^LC`.
pub fn check_dual_involution(
    conn: &ConnectionRef,
    g: &MetricRef,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckResult> {
    let dual: ConnectionRef = Arc::new(DualConnection::new(conn.clone(), g.clone()));
    let dual2 = DualConnection::new(dual.clone(), g.clone());
    let lc = LeviCivita::new(g.clone());
    let statistical = is_statistical(conn.as_ref(), g.as_ref(), samples, tol)?;
    let sweep = Sweep::run(points(samples), |p, r| {
        r.record(
            "duality",
            duality_residual(conn.as_ref(), dual.as_ref(), g.as_ref(), p)?,
        );
        let a = christoffel_jets(conn.as_ref(), p, 0)?.values();
        let b = christoffel_jets(&dual2, p, 0)?.values();
        r.record("involution", christoffel_distance(&a, &b));
        if statistical {
            let d = christoffel_jets(dual.as_ref(), p, 0)?.values();
            let l = christoffel_jets(&lc, p, 0)?.values();
            let mid = max_abs(
                a.data()
                    .iter()
                    .zip(d.data())
                    .zip(l.data())
                    .map(|((x, y), z)| x + y - 2.0 * z),
            );
            r.record("mean_is_levi_civita", mid);
        }
        Ok(())
    })?;
    Ok(sweep
        .finish("dual_involution", "dual connection identity and involution", tol)
        .detail("statistical", statistical))
}

/// `g(R(X,Y)Z, W) + g(Z, R̄(X,Y)W)` over coordinate quadruples.
pub fn check_curvature_duality(
    conn: &ConnectionRef,
    g: &MetricRef,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckResult> {
    let name = "curvature_duality";
    let reference = "curvature of a connection against its dual";
    let statistical = is_statistical(conn.as_ref(), g.as_ref(), samples, tol)?;
    let dual = DualConnection::new(conn.clone(), g.clone());
    let sweep = Sweep::run(points(samples), |p, r| {
        let n = g.dim();
        let gm = metric_jets(g.as_ref(), p, 0)?.values();
        let ra = curvature(conn.as_ref(), p)?;
        let rb = curvature(&dual, p)?;
        let at = |r: &[f64], k: usize, l: usize, i: usize, j: usize| r[((k * n + l) * n + i) * n + j];
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        let mut s = 0.0;
                        for k in 0..n {
                            s += at(&ra, k, l, i, j) * gm.get(k, m) + gm.get(l, k) * at(&rb, k, m, i, j);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        r.record("curvature_duality", worst);
        Ok(())
    })?;
    let status = if statistical {
        None
    } else {
        Some(crate::check::Status::PremiseFailed)
    };
    let res = match status {
        Some(s) => sweep.finish_with(name, reference, tol, s),
        None => sweep.finish(name, reference, tol),
    };
    Ok(res.detail("premise_statistical", statistical))
}

/// `R(X,Y)Z - k (g(Y,Z) X - g(X,Z) Y)` over coordinate triples.
pub fn check_constant_curvature(
    conn: &dyn Connection,
    g: &dyn MetricField,
    k: f64,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckResult> {
    let sweep = Sweep::run(points(samples), |p, r| {
        let n = g.dim();
        let gm = metric_jets(g, p, 0)?.values();
        let rc = curvature(conn, p)?;
        let mut worst = 0.0f64;
        for a in 0..n {
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let model = k
                            * (gm.get(j, l) * f64::from(u8::from(a == i)) - gm.get(i, l) * f64::from(u8::from(a == j)));
                        worst = worst.max((rc[((a * n + l) * n + i) * n + j] - model).abs());
                    }
                }
            }
        }
        r.record("curvature", worst);
        Ok(())
    })?;
    Ok(sweep
        .finish("constant_curvature", "curvature of constant sectional type", tol)
        .detail("k", k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{DiffMode, ExprConnection, ExprMetric};

    fn hyperbolic2() -> MetricRef {
        Arc::new(ExprMetric::diagonal(&["1/(x2^2)", "1/(x2^2)"], DiffMode::Jet).unwrap())
    }

    #[test]
    fn hyperbolic_levi_civita_table() {
        let lc = LeviCivita::new(hyperbolic2());
        let g = christoffel_jets(&lc, &[0.0, 1.0], 0).unwrap().values();
        let expect = |k, i, j| match (k, i, j) {
            (0, 0, 1) | (0, 1, 0) => -1.0,
            (1, 0, 0) => 1.0,
            (1, 1, 1) => -1.0,
            _ => 0.0,
        };
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!((g.get(k, i, j) - expect(k, i, j)).abs() < 1e-14);
                }
            }
        }
    }

    /// Row-major offset of a multi-index in dimension 2.
    fn at(idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, i| acc * 2 + i)
    }

    #[test]
    fn hyperbolic_sectional_curvature() {
        let lc = LeviCivita::new(hyperbolic2());
        let r = curvature(&lc, &[0.3, 1.7]).unwrap();
        // R(∂1,∂2)∂2 = R^1_212 ∂1 = -g_22 ∂1 for k = -1
        let g22 = 1.0 / (1.7f64 * 1.7);
        let r1_212 = r[at(&[0, 1, 0, 1])];
        assert!((r1_212 + g22).abs() < 1e-12, "{r1_212}");
    }

    #[test]
    fn flat_connection_with_curved_metric() {
        let g = ExprMetric::diagonal(&["1", "x1^2+1"], DiffMode::Jet).unwrap();
        let flat = ExprConnection::zero(2, DiffMode::Jet);
        let c = nabla_g(&flat, &g, &[1.0, 0.0]).unwrap();
        // C_122 = ∂1 g_22 = 2 x1
        assert_eq!(c[at(&[0, 1, 1])], 2.0);
        assert_eq!(c[at(&[1, 0, 1])], 0.0);
    }

    #[test]
    fn torsion_of_asymmetric_coefficient() {
        let mut conn = ExprConnection::zero(2, DiffMode::Jet);
        conn.set(0, 0, 1, "1").unwrap();
        let t = torsion(&conn, &[0.0, 0.0]).unwrap();
        assert_eq!(t[at(&[0, 0, 1])], 1.0);
        assert_eq!(t[at(&[0, 1, 0])], -1.0);
    }

    #[test]
    fn lone_christoffel_breaks_symmetry() {
        let g = ExprMetric::diagonal(&["1", "1"], DiffMode::Jet).unwrap();
        let mut conn = ExprConnection::zero(2, DiffMode::Jet);
        conn.set(0, 1, 1, "1").unwrap();
        let c = nabla_g(&conn, &g, &[0.2, 0.4]).unwrap();
        // C_221 = -Γ^1_22 g_11 = -1, C_122 = 0
        assert_eq!(c[at(&[1, 1, 0])], -1.0);
        assert_eq!(c[at(&[0, 1, 1])], 0.0);
        let samples = vec![vec![0.2, 0.4]];
        assert!(!is_statistical(&conn, &g, &samples, 1e-8).unwrap());
    }
}
