//! Geodesic integration and identities for fields along curves.

use std::fmt::Write as _;

use crate::check::{CheckResult, Status, Sweep};
use crate::error::{Error, Result};
use crate::field::{Christoffel, Connection, MetricField};
use crate::sampling::BoxDomain;
use crate::submersion::{add, bilinear, connection_values, norm_inf, scale, sub, Frame, SubmersionSetup};

/// Nodes of a fixed-step integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub step: f64,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn endpoint(&self) -> &[f64] {
        self.points.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// CSV with header `t,x1..xn,v1..vn`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        for i in 1..=n {
            let _ = write!(out, ",v{i}");
        }
        out.push('\n');
        for ((t, x), v) in self.times.iter().zip(&self.points).zip(&self.velocities) {
            let _ = write!(out, "{t:.16e}");
            for c in x.iter().chain(v) {
                let _ = write!(out, ",{c:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

fn acceleration(conn: &dyn Connection, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    Ok(scale(&connection_values(conn, x)?.contract(v, v), -1.0))
}

/// Classic RK4 for `ẍ^k = -Γ^k_ij ẋ^i ẋ^j`.
pub fn integrate_geodesic(
    conn: &dyn Connection,
    domain: &BoxDomain,
    p0: &[f64],
    v0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    if !(h > 0.0) || !(t_end > 0.0) {
        return Err(Error::Contract(format!(
            "need h > 0 and t_end > 0, got h = {h}, t_end = {t_end}"
        )));
    }
    if p0.len() != conn.dim() || v0.len() != conn.dim() {
        return Err(Error::Contract(
            "initial state does not match the chart dimension".into(),
        ));
    }
    if !domain.contains(p0) {
        return Err(Error::BoundaryExit { t: 0.0 });
    }
    let steps = (t_end / h).round() as usize;
    let mut traj = Trajectory {
        step: h,
        times: vec![0.0],
        points: vec![p0.to_vec()],
        velocities: vec![v0.to_vec()],
    };
    let (mut x, mut v) = (p0.to_vec(), v0.to_vec());
    for s in 1..=steps {
        let a1 = acceleration(conn, &x, &v)?;
        let x2 = add(&x, &scale(&v, h / 2.0));
        let v2 = add(&v, &scale(&a1, h / 2.0));
        let a2 = acceleration(conn, &x2, &v2)?;
        let x3 = add(&x, &scale(&v2, h / 2.0));
        let v3 = add(&v, &scale(&a2, h / 2.0));
        let a3 = acceleration(conn, &x3, &v3)?;
        let x4 = add(&x, &scale(&v3, h));
        let v4 = add(&v, &scale(&a3, h));
        let a4 = acceleration(conn, &x4, &v4)?;
        for k in 0..x.len() {
            x[k] += h / 6.0 * (v[k] + 2.0 * v2[k] + 2.0 * v3[k] + v4[k]);
            v[k] += h / 6.0 * (a1[k] + 2.0 * a2[k] + 2.0 * a3[k] + a4[k]);
        }
        let t = s as f64 * h;
        if !domain.contains(&x) || x.iter().any(|c| !c.is_finite()) {
            return Err(Error::BoundaryExit { t });
        }
        traj.times.push(t);
        traj.points.push(x.clone());
        traj.velocities.push(v.clone());
    }
    Ok(traj)
}

/// Fourth-order time derivative of a sampled vector series.
///
/// Central five-point stencils inside, one-sided ones at the two nodes
/// nearest each end.
pub fn time_derivative(series: &[Vec<f64>], h: f64) -> Result<Vec<Vec<f64>>> {
    let len = series.len();
    if len < 5 {
        return Err(Error::Contract(format!("need at least 5 nodes, got {len}")));
    }
    let combine = |idx: [usize; 5], w: [f64; 5]| -> Vec<f64> {
        (0..series[0].len())
            .map(|k| idx.iter().zip(w).map(|(&i, c)| c * series[i][k]).sum::<f64>() / (12.0 * h))
            .collect()
    };
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let d = match i {
            0 => combine([0, 1, 2, 3, 4], [-25.0, 48.0, -36.0, 16.0, -3.0]),
            1 => combine([0, 1, 2, 3, 4], [-3.0, -10.0, 18.0, -6.0, 1.0]),
            _ if i == len - 2 => {
                let b = len - 5;
                combine([b, b + 1, b + 2, b + 3, b + 4], [-1.0, 6.0, -18.0, 10.0, 3.0])
            }
            _ if i == len - 1 => {
                let b = len - 5;
                combine([b, b + 1, b + 2, b + 3, b + 4], [3.0, -16.0, 36.0, -48.0, 25.0])
            }
            _ => combine([i - 2, i - 1, i, i + 1, i + 2], [1.0, -8.0, 0.0, 8.0, -1.0]),
        };
        out.push(d);
    }
    Ok(out)
}

/// Connection values at every node.
pub fn node_connections(conn: &dyn Connection, traj: &Trajectory) -> Result<Vec<Christoffel<f64>>> {
    traj.points.iter().map(|p| connection_values(conn, p)).collect()
}

fn covariant_with(gammas: &[Christoffel<f64>], traj: &Trajectory, field: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let dot = time_derivative(field, traj.step)?;
    Ok(dot
        .iter()
        .zip(gammas)
        .zip(traj.velocities.iter().zip(field))
        .map(|((d, g), (v, e))| add(d, &g.contract(v, e)))
        .collect())
}

/// `E'^k = dE^k/dt + Γ^k_ij σ'^i E^j` at every node.
pub fn covariant_along_curve(conn: &dyn Connection, traj: &Trajectory, field: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if field.len() != traj.len() {
        return Err(Error::Contract("field and trajectory lengths differ".into()));
    }
    covariant_with(&node_connections(conn, traj)?, traj, field)
}

/// `max_t ||σ''||`.
pub fn geodesic_residual(conn: &dyn Connection, traj: &Trajectory) -> Result<f64> {
    let acc = covariant_along_curve(conn, traj, &traj.velocities)?;
    Ok(acc.iter().map(|a| norm_inf(a)).fold(0.0, f64::max))
}

/// `max_t |g(σ', σ')(t) - g(σ', σ')(0)|`.
pub fn energy_drift(g: &dyn MetricField, traj: &Trajectory) -> Result<f64> {
    let mut e0 = None;
    let mut worst = 0.0f64;
    for (p, v) in traj.points.iter().zip(&traj.velocities) {
        let e = bilinear(&crate::field::metric_values(g, p)?, v, v);
        let base = *e0.get_or_insert(e);
        worst = worst.max((e - base).abs());
    }
    Ok(worst)
}

/// Per-node quantities of a curve through a submersion.
struct CurveFrames {
    frames: Vec<Frame>,
    gammas: Vec<Christoffel<f64>>,
    /// `X = H(σ')` and `U = V(σ')`.
    x: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    /// `β' = π_* σ'`.
    beta_dot: Vec<Vec<f64>>,
}

impl CurveFrames {
    fn new(setup: &SubmersionSetup, traj: &Trajectory) -> Result<CurveFrames> {
        let frames = traj.points.iter().map(|p| setup.frame(p)).collect::<Result<Vec<_>>>()?;
        let gammas = frames.iter().map(|f| f.gamma.clone()).collect();
        let x = frames
            .iter()
            .zip(&traj.velocities)
            .map(|(f, v)| f.horizontal(v))
            .collect();
        let u = frames
            .iter()
            .zip(&traj.velocities)
            .map(|(f, v)| f.vertical_part(v))
            .collect();
        let beta_dot = frames.iter().zip(&traj.velocities).map(|(f, v)| f.push(v)).collect();
        Ok(CurveFrames {
            frames,
            gammas,
            x,
            u,
            beta_dot,
        })
    }

    /// Base covariant derivative of `π_* E` along `π ∘ σ`.
    fn base_derivative(&self, traj: &Trajectory, pushed: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let dot = time_derivative(pushed, traj.step)?;
        Ok(dot
            .iter()
            .enumerate()
            .map(|(t, d)| add(d, &self.frames[t].base_gamma.contract(&self.beta_dot[t], &pushed[t])))
            .collect())
    }
}

/// Node-wise residuals of the two decomposition identities for a field
/// `E` along a curve: the base-metric pairing of `π_* H(E')` and the
/// vertical part `V(E') = A_X H + T_U H + V(V')`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveResiduals {
    pub horizontal: Vec<f64>,
    pub vertical: Vec<f64>,
}

impl CurveResiduals {
    pub fn max_horizontal(&self) -> f64 {
        self.horizontal.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_vertical(&self) -> f64 {
        self.vertical.iter().copied().fold(0.0, f64::max)
    }
}

fn decomposition(
    setup: &SubmersionSetup,
    traj: &Trajectory,
    cf: &CurveFrames,
    e: &[Vec<f64>],
) -> Result<CurveResiduals> {
    let e_prime = covariant_with(&cf.gammas, traj, e)?;
    let hs: Vec<Vec<f64>> = cf.frames.iter().zip(e).map(|(f, e)| f.horizontal(e)).collect();
    let vs: Vec<Vec<f64>> = cf.frames.iter().zip(e).map(|(f, e)| f.vertical_part(e)).collect();
    let v_prime = covariant_with(&cf.gammas, traj, &vs)?;
    let pushed: Vec<Vec<f64>> = cf.frames.iter().zip(e).map(|(f, e)| f.push(e)).collect();
    let e_star_prime = cf.base_derivative(traj, &pushed)?;
    let m = setup.m();
    let mut out = CurveResiduals {
        horizontal: Vec::with_capacity(traj.len()),
        vertical: Vec::with_capacity(traj.len()),
    };
    for (t, f) in cf.frames.iter().enumerate() {
        let (x, u, h, v) = (&cf.x[t], &cf.u[t], &hs[t], &vs[t]);
        let xs = &cf.beta_dot[t];
        let es = &pushed[t];
        let tensors = add(&add(&f.a_tensor(h, u), &f.a_tensor(x, v)), &f.t_tensor(u, v));
        let lhs = f.push(&e_prime[t]);
        let (dphi_x, dphi_h) = (f.dphi(x), f.dphi(h));
        let mut worst = 0.0f64;
        for c in 0..m {
            let ec: Vec<f64> = (0..m).map(|i| if i == c { 1.0 } else { 0.0 }).collect();
            let dphi_z = f.dphi(&values_of_lift(f, c));
            let rhs = f.base_dot(&e_star_prime[t], &ec) - dphi_z * f.base_dot(xs, es)
                + dphi_x * f.base_dot(es, &ec)
                + dphi_h * f.base_dot(&ec, xs)
                + f.base_dot(&f.push(&tensors), &ec);
            worst = worst.max((f.base_dot(&lhs, &ec) - rhs).abs());
        }
        out.horizontal.push(worst);
        let expected = add(
            &add(&f.a_tensor(x, h), &f.t_tensor(u, h)),
            &f.vertical_part(&v_prime[t]),
        );
        out.vertical
            .push(norm_inf(&sub(&f.vertical_part(&e_prime[t]), &expected)));
    }
    Ok(out)
}

fn values_of_lift(f: &Frame, c: usize) -> Vec<f64> {
    f.horizontal_basis().swap_remove(c)
}

/// Decomposition residuals for a field `e` given at every node of `traj`.
pub fn curve_decomposition_residuals(
    setup: &SubmersionSetup,
    traj: &Trajectory,
    e: &[Vec<f64>],
) -> Result<CurveResiduals> {
    if e.len() != traj.len() {
        return Err(Error::Contract("field and trajectory lengths differ".into()));
    }
    let cf = CurveFrames::new(setup, traj)?;
    decomposition(setup, traj, &cf, e)
}

/// The decomposition identities for `E = σ'`.
pub fn sigma_second_residuals(setup: &SubmersionSetup, traj: &Trajectory) -> Result<CurveResiduals> {
    curve_decomposition_residuals(setup, traj, &traj.velocities)
}

/// Node-wise quantities for the geodesic projection statement.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTerms {
    /// `max_c |g_B(π_*(2 A_X U + T_U U), e_c) + 2 dφ(X) g_B(π_* X, e_c) - dφ(Z̃_c) |π_* X|^2|`.
    pub condition: Vec<f64>,
    /// `|(π ∘ σ)''|` on the base.
    pub base_acceleration: Vec<f64>,
}

pub fn projection_terms(setup: &SubmersionSetup, traj: &Trajectory) -> Result<ProjectionTerms> {
    let cf = CurveFrames::new(setup, traj)?;
    let base_acc = cf.base_derivative(traj, &cf.beta_dot)?;
    let m = setup.m();
    let mut condition = Vec::with_capacity(traj.len());
    for (t, f) in cf.frames.iter().enumerate() {
        let (x, u, xs) = (&cf.x[t], &cf.u[t], &cf.beta_dot[t]);
        let tensors = add(&scale(&f.a_tensor(x, u), 2.0), &f.t_tensor(u, u));
        let pushed = f.push(&tensors);
        let dphi_x = f.dphi(x);
        let speed2 = f.base_dot(xs, xs);
        let mut worst = 0.0f64;
        for c in 0..m {
            let ec: Vec<f64> = (0..m).map(|i| if i == c { 1.0 } else { 0.0 }).collect();
            let dphi_z = f.dphi(&values_of_lift(f, c));
            let r = f.base_dot(&pushed, &ec) + 2.0 * dphi_x * f.base_dot(xs, &ec) - dphi_z * speed2;
            worst = worst.max(r.abs());
        }
        condition.push(worst);
    }
    Ok(ProjectionTerms {
        condition,
        base_acceleration: base_acc.iter().map(|a| norm_inf(a)).collect(),
    })
}

/// The projection of a geodesic is a base geodesic exactly when the
/// tensor condition vanishes along it; passes when both verdicts agree.
pub fn check_geodesic_projection(setup: &SubmersionSetup, traj: &Trajectory, tol: f64) -> Result<CheckResult> {
    let name = "geodesic_projection";
    let reference = "projection of a geodesic through a conformal submersion";
    let premise = geodesic_residual(setup.total.connection.as_ref(), traj)?;
    let terms = projection_terms(setup, traj)?;
    let cg = sigma_second_residuals(setup, traj)?;
    let mut sweep = Sweep::new();
    for (t, p) in traj.points.iter().enumerate() {
        sweep.point(p, |r| {
            r.record("condition", terms.condition[t]);
            r.record("base_acceleration", terms.base_acceleration[t]);
            r.record("second_derivative_horizontal", cg.horizontal[t]);
            r.record("second_derivative_vertical", cg.vertical[t]);
            Ok(())
        })?;
    }
    let condition_holds = sweep.component("condition") <= tol;
    let base_geodesic = sweep.component("base_acceleration") <= tol;
    let status = if premise > 10.0 * tol {
        Status::PremiseFailed
    } else {
        Status::from_pass(condition_holds == base_geodesic)
    };
    Ok(sweep
        .finish_with(name, reference, tol, status)
        .detail("geodesic_residual", premise)
        .detail("condition_holds", condition_holds)
        .detail("base_geodesic", base_geodesic)
        .detail("biconditional_holds", condition_holds == base_geodesic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{DiffMode, ExprConnection, ExprMetric};
    use crate::geometry::LeviCivita;
    use std::sync::Arc;

    fn h2() -> (LeviCivita, BoxDomain) {
        let g = Arc::new(ExprMetric::diagonal(&["1/(x2^2)", "1/(x2^2)"], DiffMode::Jet).unwrap());
        (
            LeviCivita::new(g),
            BoxDomain::new(vec![(-3.0, 3.0), (0.1, 5.0)]).unwrap(),
        )
    }

    #[test]
    fn flat_line() {
        let conn = ExprConnection::zero(2, DiffMode::Jet);
        let dom = BoxDomain::cube(2, -2.0, 2.0).unwrap();
        let tr = integrate_geodesic(&conn, &dom, &[0.0, 0.0], &[1.0, 1.0], 1.0, 1e-2).unwrap();
        assert_eq!(tr.len(), 101);
        assert!(norm_inf(&sub(tr.endpoint(), &[1.0, 1.0])) < 1e-12);
    }

    #[test]
    fn vertical_ray() {
        let (conn, dom) = h2();
        let tr = integrate_geodesic(&conn, &dom, &[0.0, 1.0], &[0.0, 1.0], 1.0, 1e-3).unwrap();
        assert!(norm_inf(&sub(tr.endpoint(), &[0.0, std::f64::consts::E])) < 1e-6);
        assert!(geodesic_residual(&conn, &tr).unwrap() < 1e-6);
    }

    #[test]
    fn stencil_is_exact_on_quartics() {
        let h = 0.1;
        let series: Vec<Vec<f64>> = (0..7).map(|i| vec![(i as f64 * h).powi(4)]).collect();
        let d = time_derivative(&series, h).unwrap();
        for (i, di) in d.iter().enumerate() {
            let t = i as f64 * h;
            assert!((di[0] - 4.0 * t.powi(3)).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn boundary_exit_reports_time() {
        let conn = ExprConnection::zero(1, DiffMode::Jet);
        let dom = BoxDomain::cube(1, -1.0, 1.0).unwrap();
        let err = integrate_geodesic(&conn, &dom, &[0.0], &[1.0], 2.0, 0.25).unwrap_err();
        assert_eq!(err, Error::BoundaryExit { t: 1.25 });
    }

    #[test]
    fn csv_header() {
        let conn = ExprConnection::zero(2, DiffMode::Jet);
        let dom = BoxDomain::cube(2, -2.0, 2.0).unwrap();
        let tr = integrate_geodesic(&conn, &dom, &[0.0, 0.0], &[1.0, 0.0], 0.5, 0.25).unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x1,x2,v1,v2"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0"));
        assert_eq!(csv.lines().count(), 4);
    }
}
