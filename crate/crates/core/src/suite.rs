//! Check registry and dispatch over a [`Model`].

use std::borrow::Cow;

use crate::builtins::{GeodesicJob, Model};
use crate::check::{CheckResult, Detail, Status, Sweep};
use crate::error::{Error, Result};
use crate::field::{christoffel_values, DiffMode, MetricField};
use crate::geodesics::{self, Trajectory};
use crate::geometry;
use crate::jet::{Jet, MAX_ORDER};
use crate::sampling::sample;
use crate::submersion::{checks as sc, SubmersionSetup};
use crate::tangent_bundle::{self as tb, LiftKind, TangentBundle};

/// What a check needs from a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Manifold,
    Submersion,
    Geodesic,
    Bundle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckSpec {
    pub name: &'static str,
    pub scope: Scope,
    /// Statement under test, used as the report reference.
    pub anchor: &'static str,
}

/// All checks, alphabetical.
pub const CHECKS: &[CheckSpec] = &[
    CheckSpec {
        name: "affine_hd",
        scope: Scope::Submersion,
        anchor: "affine submersion with horizontal distribution",
    },
    CheckSpec {
        name: "conformal_defect",
        scope: Scope::Submersion,
        anchor: "conformal submersion with horizontal distribution",
    },
    CheckSpec {
        name: "conformal_metric",
        scope: Scope::Submersion,
        anchor: "conformal submersion on horizontal vectors",
    },
    CheckSpec {
        name: "constant_curvature",
        scope: Scope::Manifold,
        anchor: "statistical manifold of constant curvature",
    },
    CheckSpec {
        name: "curvature_duality",
        scope: Scope::Manifold,
        anchor: "curvature tensors of dual connections",
    },
    CheckSpec {
        name: "curve_decomposition",
        scope: Scope::Geodesic,
        anchor: "horizontal and vertical parts of E' along a curve",
    },
    CheckSpec {
        name: "difference_tensor",
        scope: Scope::Submersion,
        anchor: "difference of a connection and its dual",
    },
    CheckSpec {
        name: "dual_conformal_pair",
        scope: Scope::Submersion,
        anchor: "dual connections share the conformal submersion",
    },
    CheckSpec {
        name: "dual_involution",
        scope: Scope::Manifold,
        anchor: "dual connection identity and involution",
    },
    CheckSpec {
        name: "four_conditions",
        scope: Scope::Submersion,
        anchor: "statistical total space from fibre, base and tensor conditions",
    },
    CheckSpec {
        name: "gauss_weingarten",
        scope: Scope::Submersion,
        anchor: "decomposition of covariant derivatives",
    },
    CheckSpec {
        name: "geodesic_projection",
        scope: Scope::Geodesic,
        anchor: "projection of a geodesic is a geodesic iff the tensor condition holds",
    },
    CheckSpec {
        name: "geodesic_residual",
        scope: Scope::Geodesic,
        anchor: "integrated curve is a geodesic",
    },
    CheckSpec {
        name: "induced_statistical",
        scope: Scope::Submersion,
        anchor: "induced statistical structure on the base",
    },
    CheckSpec {
        name: "is_statistical",
        scope: Scope::Manifold,
        anchor: "torsion-free with symmetric cubic form",
    },
    CheckSpec {
        name: "jet_fd_agreement",
        scope: Scope::Manifold,
        anchor: "jet derivatives against finite differences",
    },
    CheckSpec {
        name: "lemma_components",
        scope: Scope::Submersion,
        anchor: "component identities for the cubic form",
    },
    CheckSpec {
        name: "projectable",
        scope: Scope::Submersion,
        anchor: "projectability of the horizontal covariant derivative",
    },
    CheckSpec {
        name: "semi_riemannian",
        scope: Scope::Submersion,
        anchor: "submersion preserving lengths of horizontal vectors",
    },
    CheckSpec {
        name: "tensoriality",
        scope: Scope::Submersion,
        anchor: "fundamental tensors T and A are tensorial",
    },
    CheckSpec {
        name: "tm_affine_submersion",
        scope: Scope::Bundle,
        anchor: "natural projection of (TM, complete lift) is affine with horizontal distribution",
    },
    CheckSpec {
        name: "tm_complete_lift_dual",
        scope: Scope::Bundle,
        anchor: "conjugate of the complete lift is the complete lift of the conjugate",
    },
    CheckSpec {
        name: "tm_complete_lift_statistical",
        scope: Scope::Bundle,
        anchor: "complete lifts of a statistical structure are statistical",
    },
    CheckSpec {
        name: "tm_defining_rules",
        scope: Scope::Bundle,
        anchor: "defining rules of lifted metrics and connections",
    },
    CheckSpec {
        name: "tm_horizontal_lift_statistical",
        scope: Scope::Bundle,
        anchor: "horizontal lift with Sasaki metric is statistical iff the metric is parallel",
    },
    CheckSpec {
        name: "tm_lift_identities",
        scope: Scope::Bundle,
        anchor: "lifts of functions and vector fields, gamma operator",
    },
    CheckSpec {
        name: "tm_semi_riemannian_submersion",
        scope: Scope::Bundle,
        anchor: "natural projection of (TM, Sasaki metric) is semi-Riemannian",
    },
    CheckSpec {
        name: "tm_statistical",
        scope: Scope::Bundle,
        anchor: "(TM, complete lift, Sasaki metric) statistical iff four conditions",
    },
];

pub fn spec(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Default tolerance of a check in a differentiation mode.
pub fn default_tolerance(name: &str, mode: DiffMode) -> f64 {
    match (name, mode) {
        ("jet_fd_agreement", _) => 1e-4,
        ("curve_decomposition", _) => 1e-5,
        ("geodesic_projection" | "geodesic_residual", DiffMode::Jet) => 1e-6,
        ("dual_involution", DiffMode::Jet) => 1e-9,
        ("tensoriality", DiffMode::Jet) => 1e-7,
        (_, m) => m.default_tolerance(),
    }
}

/// Checks applicable to a model whose verdicts are expected to be
/// meaningful for it.
pub fn default_checks(model: &Model) -> Vec<&'static str> {
    let mut out = vec!["dual_involution", "jet_fd_agreement"];
    if model.bundle.is_some() {
        out.extend(CHECKS.iter().filter(|c| c.scope == Scope::Bundle).map(|c| c.name));
        out.extend(["gauss_weingarten", "tensoriality", "projectable"]);
    } else {
        out.extend(["is_statistical", "curvature_duality"]);
        if model.curvature.is_some() {
            out.push("constant_curvature");
        }
        if let Some(s) = &model.submersion {
            out.extend(
                CHECKS
                    .iter()
                    .filter(|c| c.scope == Scope::Submersion)
                    .map(|c| c.name)
                    .filter(|&c| c != "semi_riemannian" || s.phi.is_none()),
            );
            if !model.geodesics.is_empty() {
                out.extend(["geodesic_residual", "geodesic_projection", "curve_decomposition"]);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Run-wide parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteContext {
    pub samples: usize,
    pub seed: u64,
    pub mode: DiffMode,
}

impl Default for SuiteContext {
    fn default() -> Self {
        SuiteContext {
            samples: 64,
            seed: 0,
            mode: DiffMode::Jet,
        }
    }
}

/// Builds the model under test in a given mode (for cross-mode checks).
pub type ModelBuilder<'a> = &'a (dyn Fn(DiffMode) -> Result<Model> + Sync);

fn need_submersion(model: &Model) -> Result<&SubmersionSetup> {
    model
        .submersion
        .as_ref()
        .ok_or_else(|| Error::Contract(format!("model `{}` has no submersion", model.name)))
}

/// The model's bundle, or the tangent bundle of its manifold.
fn bundle_of(model: &Model) -> Result<Cow<'_, TangentBundle>> {
    match &model.bundle {
        Some(b) => Ok(Cow::Borrowed(b)),
        None => Ok(Cow::Owned(TangentBundle::new(model.manifold.clone())?)),
    }
}

/// Run one check; errors become results with [`Status::Error`].
pub fn run_check(name: &str, model: &Model, ctx: &SuiteContext, tol: Option<f64>, build: ModelBuilder) -> CheckResult {
    let spec = spec(name);
    let anchor = spec.map_or("", |s| s.anchor);
    let tol = tol.unwrap_or_else(|| default_tolerance(name, ctx.mode));
    let mut res = match dispatch(name, model, ctx, tol, build) {
        Ok(r) => r,
        Err(e) => CheckResult::error(name, anchor, tol, &e),
    };
    res.name = name.to_string();
    res.reference = anchor.to_string();
    res
}

fn dispatch(name: &str, model: &Model, ctx: &SuiteContext, tol: f64, build: ModelBuilder) -> Result<CheckResult> {
    let m = &model.manifold;
    if spec(name).is_some_and(|c| c.scope == Scope::Bundle) {
        let tm = bundle_of(model)?;
        let pts = sample(&tm.domain(), ctx.samples, ctx.seed)?.points;
        return dispatch_bundle(name, &tm, &pts, tol, ctx.seed);
    }
    let pts = sample(&m.domain, ctx.samples, ctx.seed)?.points;
    let s = || need_submersion(model);
    match name {
        "is_statistical" => geometry::check_is_statistical(m.connection.as_ref(), m.metric.as_ref(), &pts, tol),
        "dual_involution" => geometry::check_dual_involution(&m.connection, &m.metric, &pts, tol),
        "curvature_duality" => geometry::check_curvature_duality(&m.connection, &m.metric, &pts, tol),
        "constant_curvature" => match model.curvature {
            Some(k) => Ok(
                geometry::check_constant_curvature(m.connection.as_ref(), m.metric.as_ref(), k, &pts, tol)?
                    .detail("k", k),
            ),
            None => Ok(inconclusive(name, tol, "no curvature constant configured")),
        },
        "jet_fd_agreement" => check_jet_fd_agreement(model, ctx, tol, build),
        "semi_riemannian" => sc::check_semi_riemannian(s()?, &pts, tol),
        "conformal_metric" => sc::check_conformal_metric(s()?, &pts, tol),
        "conformal_defect" => sc::check_conformal_defect(s()?, &pts, tol),
        "affine_hd" => sc::check_affine_hd(s()?, &pts, tol),
        "projectable" => sc::check_projectable(s()?, &pts, tol),
        "induced_statistical" => sc::check_induced_statistical(s()?, &pts, tol),
        "gauss_weingarten" => sc::check_gauss_weingarten(s()?, &pts, tol),
        "tensoriality" => sc::check_tensoriality(s()?, &pts, tol, ctx.seed),
        "difference_tensor" => sc::check_difference_tensor(s()?, &pts, tol, ctx.seed),
        "dual_conformal_pair" => sc::check_dual_conformal_pair(s()?, &pts, tol),
        "lemma_components" => sc::check_lemma_components(s()?, &pts, tol),
        "four_conditions" => sc::check_four_conditions(s()?, &pts, tol),
        "geodesic_residual" => check_geodesic_residual(model, tol),
        "geodesic_projection" => check_geodesic_projection(model, s()?, tol),
        "curve_decomposition" => check_curve_decomposition(model, s()?, tol),
        other => Err(Error::Contract(format!("unknown check `{other}`"))),
    }
}

fn dispatch_bundle(name: &str, tm: &TangentBundle, pts: &[Vec<f64>], tol: f64, seed: u64) -> Result<CheckResult> {
    match name {
        "tm_defining_rules" => check_tm_defining_rules(tm, pts, tol, seed),
        "tm_lift_identities" => tb::check_lift_identities(tm, pts, tol, seed),
        "tm_affine_submersion" => tb::check_affine_projection(tm, pts, tol),
        "tm_semi_riemannian_submersion" => tb::check_sasaki_projection(tm, pts, tol),
        "tm_statistical" => tb::check_tm_statistical(tm, pts, tol),
        "tm_complete_lift_statistical" => tb::check_complete_lift_statistical(tm, pts, tol),
        "tm_complete_lift_dual" => tb::check_complete_lift_dual(tm, pts, tol),
        "tm_horizontal_lift_statistical" => tb::check_horizontal_lift_statistical(tm, pts, tol),
        other => Err(Error::Contract(format!("unknown check `{other}`"))),
    }
}

fn inconclusive(name: &str, tol: f64, why: &str) -> CheckResult {
    CheckResult::empty(name, "", tol, Status::Inconclusive).detail("reason", why)
}

fn check_tm_defining_rules(tm: &TangentBundle, pts: &[Vec<f64>], tol: f64, seed: u64) -> Result<CheckResult> {
    let mut out: Option<CheckResult> = None;
    for kind in LiftKind::ALL {
        let r = tb::check_defining_rules(tm, kind, pts, tol, seed)?;
        let acc = out.get_or_insert_with(|| {
            let mut base = r.clone();
            base.components.clear();
            base.incidents.clear();
            base.max_residual = 0.0;
            base
        });
        for (k, v) in &r.components {
            acc.components.insert(format!("{}.{k}", kind.name()), *v);
        }
        acc.incidents.extend(r.incidents.iter().cloned());
        acc.samples_used = acc.samples_used.min(r.samples_used);
        acc.max_residual = acc.max_residual.max(r.max_residual);
        if r.status != Status::Pass && acc.status == Status::Pass || r.status == Status::Error {
            acc.status = r.status;
        }
    }
    Ok(out.expect("at least one lift kind"))
}

/// Relative difference `|a - b| / max(1, |a|)`.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
}

/// Jet derivatives of the metric and connection against the finite
/// difference build of the same model, and first derivatives against
/// central differences of jet values, on 16 probes.
fn check_jet_fd_agreement(model: &Model, ctx: &SuiteContext, tol: f64, build: ModelBuilder) -> Result<CheckResult> {
    const PROBES: usize = 16;
    let other = build(DiffMode::Fd)?;
    let (a, b) = (&model.manifold, &other.manifold);
    let probes = sample(&a.domain, PROBES, ctx.seed ^ 0xfd)?.points;
    let g_order = (a.metric.loss() + 2).min(MAX_ORDER);
    let c_order = (a.connection.loss() + 1).min(MAX_ORDER);
    let coeffs = |j: &Jet| j.coeffs().to_vec();
    let sweep = Sweep::run(probes.iter().map(Vec::as_slice), |p, r| {
        let x = |o: usize| Jet::variables(p, o);
        let ga = a.metric.eval(&x(g_order))?;
        let gb = b.metric.eval(&x(g_order))?;
        let worst = ga
            .data()
            .iter()
            .zip(gb.data())
            .map(|(u, v)| max_rel(&coeffs(u), &coeffs(v)))
            .fold(0.0, f64::max);
        r.record("fd_mode_metric", worst);
        let ca = a.connection.eval(&x(c_order))?;
        let cb = b.connection.eval(&x(c_order))?;
        let worst = ca
            .data()
            .iter()
            .zip(cb.data())
            .map(|(u, v)| max_rel(&coeffs(u), &coeffs(v)))
            .fold(0.0, f64::max);
        r.record("fd_mode_connection", worst);
        r.record("stencil_metric", stencil_metric(a.metric.as_ref(), p)?);
        if a.connection.loss() < MAX_ORDER {
            r.record("stencil_connection", stencil_connection(a.connection.as_ref(), p)?);
        }
        Ok(())
    })?;
    Ok(sweep
        .finish("jet_fd_agreement", "", tol)
        .detail("probes", PROBES as f64))
}

fn stencil_step(x: f64) -> f64 {
    1e-5 * (1.0 + x.abs())
}

fn stencil_metric(g: &dyn MetricField, p: &[f64]) -> Result<f64> {
    let jets = g.eval(&Jet::variables(p, g.loss() + 1))?;
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let h = stencil_step(p[i]);
        let (mut lo, mut hi) = (p.to_vec(), p.to_vec());
        lo[i] -= h;
        hi[i] += h;
        let gl = crate::field::metric_values(g, &lo)?;
        let gh = crate::field::metric_values(g, &hi)?;
        for (k, jet) in jets.data().iter().enumerate() {
            let fd = (gh.data()[k] - gl.data()[k]) / (2.0 * h);
            worst = worst.max(rel(jet.d1(i), fd));
        }
    }
    Ok(worst)
}

fn stencil_connection(conn: &dyn crate::field::Connection, p: &[f64]) -> Result<f64> {
    let jets = conn.eval(&Jet::variables(p, conn.loss() + 1))?;
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let h = stencil_step(p[i]);
        let (mut lo, mut hi) = (p.to_vec(), p.to_vec());
        lo[i] -= h;
        hi[i] += h;
        let cl = christoffel_values(conn, &lo)?;
        let ch = christoffel_values(conn, &hi)?;
        for (k, jet) in jets.data().iter().enumerate() {
            let fd = (ch.data()[k] - cl.data()[k]) / (2.0 * h);
            worst = worst.max(rel(jet.d1(i), fd));
        }
    }
    Ok(worst)
}

fn integrate(model: &Model, job: &GeodesicJob) -> Result<Trajectory> {
    let m = &model.manifold;
    geodesics::integrate_geodesic(m.connection.as_ref(), &m.domain, &job.p0, &job.v0, job.t_end, job.h)
}

fn no_jobs(model: &Model, name: &str, tol: f64) -> Option<CheckResult> {
    model
        .geodesics
        .is_empty()
        .then(|| inconclusive(name, tol, "model has no geodesic jobs"))
}

/// Combine per-job results: components are prefixed by the job name.
fn merge_jobs(name: &str, tol: f64, parts: Vec<(String, CheckResult)>) -> CheckResult {
    let mut out = CheckResult::empty(name, "", tol, Status::Pass);
    for (job, r) in parts {
        for (k, v) in &r.components {
            out.components.insert(format!("{job}.{k}"), *v);
        }
        for (k, v) in &r.details {
            out.details.insert(format!("{job}.{k}"), v.clone());
        }
        out.samples_used += r.samples_used;
        out.samples_total += r.samples_total;
        out.max_residual = out.max_residual.max(r.max_residual);
        out.incidents.extend(r.incidents);
        out.status = worse(out.status, r.status);
    }
    out
}

fn worse(a: Status, b: Status) -> Status {
    let rank = |s: Status| match s {
        Status::Pass => 0,
        Status::Inconclusive => 1,
        Status::PremiseFailed => 2,
        Status::Fail => 3,
        Status::Error => 4,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn check_geodesic_residual(model: &Model, tol: f64) -> Result<CheckResult> {
    let name = "geodesic_residual";
    if let Some(r) = no_jobs(model, name, tol) {
        return Ok(r);
    }
    let mut parts = Vec::new();
    for job in &model.geodesics {
        let traj = integrate(model, job)?;
        let res = geodesics::geodesic_residual(model.manifold.connection.as_ref(), &traj)?;
        let mut sweep = Sweep::new();
        sweep.point(&job.p0, |r| {
            r.record("acceleration", res);
            Ok(())
        })?;
        let mut r = sweep.finish(name, "", tol);
        r.samples_used = traj.len();
        r.samples_total = traj.len();
        let r = r.detail("endpoint", Detail::Text(format!("{:?}", traj.endpoint())));
        parts.push((job.name.clone(), r));
    }
    Ok(merge_jobs(name, tol, parts))
}

fn check_geodesic_projection(model: &Model, setup: &SubmersionSetup, tol: f64) -> Result<CheckResult> {
    let name = "geodesic_projection";
    if let Some(r) = no_jobs(model, name, tol) {
        return Ok(r);
    }
    let mut parts = Vec::new();
    for job in &model.geodesics {
        let traj = integrate(model, job)?;
        parts.push((
            job.name.clone(),
            geodesics::check_geodesic_projection(setup, &traj, tol)?,
        ));
    }
    Ok(merge_jobs(name, tol, parts))
}

/// A smooth non-geodesic field along a trajectory.
pub fn generic_field(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.times
        .iter()
        .map(|&t| {
            let n = traj.points[0].len();
            (0..n).map(|k| (t + k as f64).cos() + 0.25 * (2.0 * t).sin()).collect()
        })
        .collect()
}

fn check_curve_decomposition(model: &Model, setup: &SubmersionSetup, tol: f64) -> Result<CheckResult> {
    let name = "curve_decomposition";
    if let Some(r) = no_jobs(model, name, tol) {
        return Ok(r);
    }
    let mut parts = Vec::new();
    for job in &model.geodesics {
        let traj = integrate(model, job)?;
        let vel = geodesics::sigma_second_residuals(setup, &traj)?;
        let gen = geodesics::curve_decomposition_residuals(setup, &traj, &generic_field(&traj))?;
        let mut sweep = Sweep::new();
        for (t, p) in traj.points.iter().enumerate() {
            sweep.point(p, |r| {
                r.record("velocity_horizontal", vel.horizontal[t]);
                r.record("velocity_vertical", vel.vertical[t]);
                r.record("generic_horizontal", gen.horizontal[t]);
                r.record("generic_vertical", gen.vertical[t]);
                Ok(())
            })?;
        }
        parts.push((job.name.clone(), sweep.finish(name, "", tol)));
    }
    Ok(merge_jobs(name, tol, parts))
}

/// Run a list of checks sequentially.
pub fn run_checks(names: &[&str], model: &Model, ctx: &SuiteContext, build: ModelBuilder) -> Vec<CheckResult> {
    names.iter().map(|n| run_check(n, model, ctx, None, build)).collect()
}
