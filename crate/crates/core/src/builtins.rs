//! Builtin models: `euclidean:n`, `hyperbolic:n`, `gaussian:alpha=A` and
//! `tangent_bundle_of:<builtin>`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{ConnectionRef, DiffMode, ExprConnection, ExprMetric, ExprScalar, MetricRef, ScalarRef};
use crate::geometry::{AlphaConnection, ChartFlatConnection, LeviCivita, Manifold, SumConnection};
use crate::sampling::BoxDomain;
use crate::submersion::{HorizontalRule, SubmersionSetup};
use crate::tangent_bundle::TangentBundle;

/// Initial data of a geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicJob {
    pub name: String,
    pub p0: Vec<f64>,
    pub v0: Vec<f64>,
    pub t_end: f64,
    pub h: f64,
}

impl GeodesicJob {
    pub fn new(name: &str, p0: Vec<f64>, v0: Vec<f64>) -> Self {
        GeodesicJob {
            name: name.to_string(),
            p0,
            v0,
            t_end: 1.0,
            h: 1e-3,
        }
    }
}

/// A manifold with its optional submersion, bundle structure and geodesic jobs.
#[derive(Clone)]
pub struct Model {
    pub name: String,
    pub manifold: Manifold,
    pub submersion: Option<SubmersionSetup>,
    /// Set when the model is a tangent bundle.
    pub bundle: Option<TangentBundle>,
    /// Constant `k` with `R(X,Y)Z = k (g(Y,Z)X - g(X,Z)Y)`, when known.
    pub curvature: Option<f64>,
    pub geodesics: Vec<GeodesicJob>,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("name", &self.name)
            .field("dim", &self.manifold.dim())
            .field("curvature", &self.curvature)
            .field("geodesics", &self.geodesics)
            .finish_non_exhaustive()
    }
}

/// Builtin names with a one-line description, alphabetical.
pub const BUILTINS: [(&str, &str); 4] = [
    (
        "euclidean:n",
        "flat R^n with the standard metric; submersion dropping the last coordinate",
    ),
    (
        "gaussian:alpha=A",
        "normal family (mu, sigma) with Fisher metric and alpha-connection over the mu-line",
    ),
    (
        "hyperbolic:n",
        "upper half-space with metric delta/x_n^2, conformal submersion onto R^(n-1)",
    ),
    (
        "tangent_bundle_of:<builtin>",
        "tangent bundle with complete lift connection and Sasaki metric",
    ),
];

fn scalar(text: &str, dim: usize, mode: DiffMode) -> Result<ScalarRef> {
    Ok(Arc::new(ExprScalar::parse(text, dim, mode)?))
}

fn drop_last(n: usize, mode: DiffMode) -> Result<Vec<ScalarRef>> {
    (1..n).map(|i| scalar(&format!("x{i}"), n, mode)).collect()
}

fn flat(n: usize, domain: BoxDomain, mode: DiffMode) -> Result<Manifold> {
    let ones = vec!["1"; n];
    Ok(Manifold {
        name: format!("euclidean:{n}"),
        domain,
        metric: Arc::new(ExprMetric::diagonal(&ones, mode)?),
        connection: Arc::new(ExprConnection::zero(n, mode)),
    })
}

pub fn euclidean(n: usize, mode: DiffMode) -> Result<Model> {
    if n == 0 {
        return Err(Error::Contract("euclidean dimension must be at least 1".into()));
    }
    let manifold = flat(n, BoxDomain::cube(n, -1.0, 1.0)?, mode)?;
    let submersion = if n >= 2 {
        let base = flat(n - 1, BoxDomain::cube(n - 1, -1.0, 1.0)?, mode)?;
        Some(SubmersionSetup::new(
            manifold.clone(),
            base,
            drop_last(n, mode)?,
            HorizontalRule::MetricOrthogonal,
            None,
        )?)
    } else {
        None
    };
    let mut v0 = vec![0.0; n];
    v0[0] = 0.5;
    Ok(Model {
        name: format!("euclidean:{n}"),
        manifold,
        submersion,
        bundle: None,
        curvature: Some(0.0),
        geodesics: vec![GeodesicJob::new("line", vec![0.0; n], v0)],
    })
}

pub fn hyperbolic(n: usize, mode: DiffMode) -> Result<Model> {
    if n < 2 {
        return Err(Error::Contract("hyperbolic dimension must be at least 2".into()));
    }
    let entry = format!("1/(x{n}^2)");
    let diag = vec![entry.as_str(); n];
    let g: MetricRef = Arc::new(ExprMetric::diagonal(&diag, mode)?);
    let mut bounds = vec![(-1.0, 1.0); n];
    bounds[n - 1] = (0.5, 3.0);
    let manifold = Manifold {
        name: format!("hyperbolic:{n}"),
        domain: BoxDomain::new(bounds)?,
        metric: g.clone(),
        connection: Arc::new(LeviCivita::new(g)),
    };
    let base = flat(n - 1, BoxDomain::cube(n - 1, -1.0, 1.0)?, mode)?;
    let submersion = SubmersionSetup::new(
        manifold.clone(),
        base,
        drop_last(n, mode)?,
        HorizontalRule::MetricOrthogonal,
        Some(scalar(&format!("-log(x{n})"), n, mode)?),
    )?;
    let start: Vec<f64> = (0..n).map(|i| if i == n - 1 { 1.0 } else { 0.0 }).collect();
    let along = |first: f64, last: f64| -> Vec<f64> {
        (0..n)
            .map(|i| match i {
                0 => first,
                _ if i == n - 1 => last,
                _ => 0.0,
            })
            .collect()
    };
    Ok(Model {
        name: format!("hyperbolic:{n}"),
        manifold,
        submersion: Some(submersion),
        bundle: None,
        curvature: Some(-1.0),
        geodesics: vec![
            GeodesicJob::new("vertical", start.clone(), along(0.0, 1.0)),
            GeodesicJob::new("semicircle", start.clone(), along(1.0, 0.0)),
            GeodesicJob::new("generic", start, along(0.3, 0.4)),
        ],
    })
}

/// Fisher metric `diag(1/σ², 2/σ²)` and its `α`-connection on `(μ, σ)`.
pub fn gaussian(alpha: f64, mode: DiffMode) -> Result<Model> {
    if !alpha.is_finite() {
        return Err(Error::Contract(format!("alpha must be finite, got {alpha}")));
    }
    let g: MetricRef = Arc::new(ExprMetric::diagonal(&["1/(x2^2)", "2/(x2^2)"], mode)?);
    // natural parameters of the normal family
    let theta = vec![scalar("x1/(x2^2)", 2, mode)?, scalar("-1/(2*x2^2)", 2, mode)?];
    let exponential: ConnectionRef = Arc::new(ChartFlatConnection::new(theta));
    let connection: ConnectionRef = Arc::new(AlphaConnection::new(g.clone(), exponential, alpha));
    let manifold = Manifold {
        name: format!("gaussian:alpha={alpha}"),
        domain: BoxDomain::new(vec![(-1.0, 1.0), (0.5, 2.0)])?,
        metric: g,
        connection,
    };
    let base = flat(1, BoxDomain::cube(1, -1.0, 1.0)?, mode)?;
    let submersion = SubmersionSetup::new(
        manifold.clone(),
        base,
        drop_last(2, mode)?,
        HorizontalRule::MetricOrthogonal,
        Some(scalar("-log(x2)", 2, mode)?),
    )?;
    Ok(Model {
        name: format!("gaussian:alpha={alpha}"),
        manifold,
        submersion: Some(submersion),
        bundle: None,
        curvature: Some(-(1.0 - alpha * alpha) / 2.0),
        geodesics: vec![GeodesicJob::new("drift", vec![0.0, 1.0], vec![0.3, 0.2])],
    })
}

pub fn tangent_bundle_of(inner: &Model) -> Result<Model> {
    let tm = TangentBundle::new(inner.manifold.clone())?;
    let manifold = tm.manifold();
    let submersion = tm.submersion()?;
    Ok(Model {
        name: format!("tangent_bundle_of:{}", inner.name),
        manifold,
        submersion: Some(submersion),
        bundle: Some(tm),
        curvature: None,
        geodesics: Vec::new(),
    })
}

/// The model with `Γ^1_nn` shifted by `eps` on the total space.
///
/// A torsion-free perturbation that breaks the symmetry of the cubic form.
pub fn perturbed(model: &Model, eps: f64, mode: DiffMode) -> Result<Model> {
    let n = model.manifold.dim();
    let mut shift = ExprConnection::zero(n, mode);
    shift.set(0, n - 1, n - 1, &format!("{eps:e}"))?;
    let conn: ConnectionRef = Arc::new(SumConnection::new(model.manifold.connection.clone(), Arc::new(shift)));
    let manifold = model.manifold.with_connection(conn.clone());
    let submersion = model
        .submersion
        .as_ref()
        .map(|s| s.with_connections(conn, s.base.connection.clone()));
    Ok(Model {
        name: format!("perturbed({})", model.name),
        manifold,
        submersion,
        bundle: None,
        curvature: None,
        geodesics: model.geodesics.clone(),
    })
}

/// Build a builtin by name.
pub fn build(name: &str, mode: DiffMode) -> Result<Model> {
    let bad = |why: &str| Error::Contract(format!("builtin `{name}`: {why}"));
    if let Some(inner) = name.strip_prefix("tangent_bundle_of:") {
        return tangent_bundle_of(&build(inner, mode)?);
    }
    let (family, arg) = name
        .split_once(':')
        .ok_or_else(|| bad("expected <family>:<parameter>"))?;
    match family {
        "euclidean" => euclidean(arg.parse().map_err(|_| bad("dimension must be an integer"))?, mode),
        "hyperbolic" => hyperbolic(arg.parse().map_err(|_| bad("dimension must be an integer"))?, mode),
        "gaussian" => {
            let a = arg
                .strip_prefix("alpha=")
                .ok_or_else(|| bad("expected alpha=<number>"))?;
            gaussian(a.parse().map_err(|_| bad("alpha must be a number"))?, mode)
        }
        _ => Err(bad(&format!(
            "unknown family; known: {}",
            BUILTINS.iter().map(|b| b.0).collect::<Vec<_>>().join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        for name in [
            "euclidean:2",
            "hyperbolic:3",
            "gaussian:alpha=-1",
            "tangent_bundle_of:hyperbolic:2",
        ] {
            let m = build(name, DiffMode::Jet).unwrap();
            assert_eq!(m.name, name);
        }
        assert!(build("sphere:2", DiffMode::Jet).is_err());
        assert!(build("hyperbolic:x", DiffMode::Jet).is_err());
        assert!(build("gaussian:1", DiffMode::Jet).is_err());
    }

    #[test]
    fn bundle_dimension() {
        let m = build("tangent_bundle_of:gaussian:alpha=1", DiffMode::Jet).unwrap();
        assert_eq!(m.manifold.dim(), 4);
        assert_eq!(m.submersion.unwrap().m(), 2);
    }
}
