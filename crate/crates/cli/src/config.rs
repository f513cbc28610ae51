//! Suite configuration files.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use subgeo_core::builtins::{self, GeodesicJob, Model};
use subgeo_core::field::{ConnectionRef, ExprConnection, ExprMetric, ExprScalar, MetricRef, ScalarRef};
use subgeo_core::geometry::{LeviCivita, Manifold};
use subgeo_core::submersion::{ExprDistribution, HorizontalRule, SubmersionSetup};
use subgeo_core::suite::{self, SuiteContext};
use subgeo_core::tangent_bundle::TangentBundle;
use subgeo_core::{BoxDomain, DiffMode};

use crate::error::CliError;

pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Jet,
    Fd,
}

impl From<Mode> for DiffMode {
    fn from(m: Mode) -> DiffMode {
        match m {
            Mode::Jet => DiffMode::Jet,
            Mode::Fd => DiffMode::Fd,
        }
    }
}

/// Raw file contents.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub checks: Option<Vec<CheckEntry>>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub geodesics: Option<Vec<JobConfig>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum ModelConfig {
    Builtin(String),
    Inline(Box<InlineModel>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineModel {
    #[serde(default = "inline_name")]
    pub name: String,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub metric: MetricConfig,
    #[serde(default)]
    pub connection: ConnectionConfig,
    #[serde(default)]
    pub submersion: Option<SubmersionConfig>,
    #[serde(default)]
    pub curvature: Option<f64>,
    /// Replace the model by its tangent bundle.
    #[serde(default)]
    pub tangent_bundle: bool,
}

fn inline_name() -> String {
    "inline".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmersionConfig {
    pub projection: Vec<String>,
    pub base: BaseConfig,
    #[serde(default)]
    pub phi: Option<String>,
    /// Columns spanning `H`; metric orthogonal complement of `V` when absent.
    #[serde(default)]
    pub horizontal: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    #[serde(default)]
    pub metric: Option<MetricConfig>,
    #[serde(default)]
    pub connection: ConnectionConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MetricConfig {
    Grid(Vec<Vec<String>>),
    Diagonal { diagonal: Vec<String> },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(untagged)]
pub enum ConnectionConfig {
    #[default]
    #[serde(skip)]
    LeviCivita,
    Named(String),
    Christoffel(Vec<Vec<Vec<String>>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CheckEntry {
    Name(String),
    Full(CheckOverride),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOverride {
    pub name: String,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Chart box of the total space, replacing the model's own.
    #[serde(default)]
    pub boxes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub name: String,
    pub p0: Vec<f64>,
    pub v0: Vec<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_t_end() -> f64 {
    1.0
}

fn default_h() -> f64 {
    1e-3
}

/// A requested check and its tolerance override.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRequest {
    pub name: &'static str,
    pub tolerance: Option<f64>,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub model: ModelConfig,
    /// Empty means the model's default checks.
    pub checks: Vec<CheckRequest>,
    pub samples: usize,
    pub seed: u64,
    pub mode: DiffMode,
    pub boxes: Option<Vec<[f64; 2]>>,
    pub geodesics: Option<Vec<JobConfig>>,
}

impl SuiteConfig {
    pub fn context(&self) -> SuiteContext {
        SuiteContext {
            samples: self.samples,
            seed: self.seed,
            mode: self.mode,
        }
    }

    /// The model in a given differentiation mode.
    pub fn build_model(&self, mode: DiffMode) -> Result<Model, CliError> {
        let mut model = match &self.model {
            ModelConfig::Builtin(name) => {
                builtins::build(name, mode).map_err(|e| CliError::schema("model.builtin", e.to_string()))?
            }
            ModelConfig::Inline(m) => build_inline(m, mode)?,
        };
        if let Some(b) = &self.boxes {
            model = with_box(model, b)?;
        }
        if let Some(jobs) = &self.geodesics {
            let n = model.manifold.dim();
            model.geodesics = jobs
                .iter()
                .enumerate()
                .map(|(i, j)| {
                    if j.p0.len() != n || j.v0.len() != n {
                        return Err(CliError::schema(
                            &format!("geodesics[{i}]"),
                            format!("p0 and v0 must have {n} components"),
                        ));
                    }
                    if !(j.h > 0.0 && j.t_end > 0.0) {
                        return Err(CliError::schema(
                            &format!("geodesics[{i}]"),
                            "t_end and h must be positive",
                        ));
                    }
                    Ok(GeodesicJob {
                        name: j.name.clone(),
                        p0: j.p0.clone(),
                        v0: j.v0.clone(),
                        t_end: j.t_end,
                        h: j.h,
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        Ok(model)
    }

    /// Requested check names, or the model's defaults.
    pub fn check_list(&self, model: &Model) -> Vec<CheckRequest> {
        if self.checks.is_empty() {
            suite::default_checks(model)
                .into_iter()
                .map(|name| CheckRequest { name, tolerance: None })
                .collect()
        } else {
            self.checks.clone()
        }
    }
}

pub fn load_config(path: &Path) -> Result<SuiteConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SuiteConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<SuiteConfig, CliError> {
    let mut checks: Vec<CheckRequest> = Vec::new();
    for (i, entry) in raw.checks.unwrap_or_default().into_iter().enumerate() {
        let (name, tolerance) = match entry {
            CheckEntry::Name(n) => (n, None),
            CheckEntry::Full(o) => (o.name, o.tolerance),
        };
        let spec = suite::spec(&name).ok_or_else(|| {
            CliError::schema(
                &format!("checks[{i}]"),
                format!(
                    "unknown check `{name}`; valid checks: {}",
                    suite::check_names().join(", ")
                ),
            )
        })?;
        if tolerance.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            return Err(CliError::schema(
                &format!("checks[{i}].tolerance"),
                "must be positive and finite",
            ));
        }
        if checks.iter().any(|c| c.name == spec.name) {
            return Err(CliError::schema(
                &format!("checks[{i}]"),
                format!("check `{name}` listed twice"),
            ));
        }
        checks.push(CheckRequest {
            name: spec.name,
            tolerance,
        });
    }
    checks.sort_by_key(|c| c.name);
    let samples = raw.sampling.count.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(CliError::schema("sampling.count", "must be at least 1"));
    }
    if let Some(b) = &raw.sampling.boxes {
        check_box("sampling.boxes", b)?;
    }
    if let ModelConfig::Inline(m) = &raw.model {
        check_box("model.inline.box", &m.bounds)?;
        if let Some(s) = &m.submersion {
            check_box("model.inline.submersion.base.box", &s.base.bounds)?;
        }
    }
    let config = SuiteConfig {
        model: raw.model,
        checks,
        samples,
        seed: raw.sampling.seed.unwrap_or(0),
        mode: raw.mode.map_or(DiffMode::Jet, Into::into),
        boxes: raw.sampling.boxes,
        geodesics: raw.geodesics,
    };
    // surfaces expression and dimension errors at load time
    config.build_model(config.mode)?;
    Ok(config)
}

fn check_box(at: &str, b: &[[f64; 2]]) -> Result<(), CliError> {
    BoxDomain::new(b.iter().map(|[lo, hi]| (*lo, *hi)).collect())
        .map(|_| ())
        .map_err(|e| CliError::schema(at, e.to_string()))
}

fn to_domain(b: &[[f64; 2]]) -> Result<BoxDomain, CliError> {
    BoxDomain::new(b.iter().map(|[lo, hi]| (*lo, *hi)).collect()).map_err(|e| CliError::schema("box", e.to_string()))
}

fn expr_err(at: &str) -> impl Fn(subgeo_core::Error) -> CliError + '_ {
    move |source| CliError::Expression {
        location: at.to_string(),
        source,
    }
}

fn metric(cfg: &MetricConfig, n: usize, at: &str, mode: DiffMode) -> Result<MetricRef, CliError> {
    let grid: Vec<Vec<String>> = match cfg {
        MetricConfig::Grid(g) => g.clone(),
        MetricConfig::Diagonal { diagonal } => (0..diagonal.len())
            .map(|i| {
                (0..diagonal.len())
                    .map(|j| if i == j { diagonal[i].clone() } else { "0".to_string() })
                    .collect()
            })
            .collect(),
    };
    if grid.len() != n || grid.iter().any(|r| r.len() != n) {
        return Err(CliError::schema(at, format!("metric must be {n} x {n}")));
    }
    for (i, row) in grid.iter().enumerate() {
        for (j, text) in row.iter().enumerate() {
            ExprScalar::parse(text, n, mode).map_err(expr_err(&format!("{at}[{i}][{j}]")))?;
        }
    }
    Ok(Arc::new(ExprMetric::from_grid(&grid, mode).map_err(expr_err(at))?))
}

fn connection(
    cfg: &ConnectionConfig,
    g: &MetricRef,
    n: usize,
    at: &str,
    mode: DiffMode,
) -> Result<ConnectionRef, CliError> {
    match cfg {
        ConnectionConfig::LeviCivita => Ok(Arc::new(LeviCivita::new(g.clone()))),
        ConnectionConfig::Named(s) => match s.as_str() {
            "levi_civita" => Ok(Arc::new(LeviCivita::new(g.clone()))),
            "flat" => Ok(Arc::new(ExprConnection::zero(n, mode))),
            other => Err(CliError::schema(
                at,
                format!("unknown connection `{other}`; expected levi_civita, flat or a christoffel grid"),
            )),
        },
        ConnectionConfig::Christoffel(grid) => {
            if grid.len() != n || grid.iter().any(|p| p.len() != n || p.iter().any(|r| r.len() != n)) {
                return Err(CliError::schema(
                    at,
                    format!("christoffel grid must be {n} x {n} x {n}"),
                ));
            }
            for (k, plane) in grid.iter().enumerate() {
                for (i, row) in plane.iter().enumerate() {
                    for (j, text) in row.iter().enumerate() {
                        if !text.trim().is_empty() {
                            ExprScalar::parse(text, n, mode).map_err(expr_err(&format!("{at}[{k}][{i}][{j}]")))?;
                        }
                    }
                }
            }
            Ok(Arc::new(ExprConnection::from_grid(grid, mode).map_err(expr_err(at))?))
        }
    }
}

fn scalar(text: &str, n: usize, at: &str, mode: DiffMode) -> Result<ScalarRef, CliError> {
    Ok(Arc::new(ExprScalar::parse(text, n, mode).map_err(expr_err(at))?))
}

fn build_inline(cfg: &InlineModel, mode: DiffMode) -> Result<Model, CliError> {
    let at = "model.inline";
    let n = cfg.bounds.len();
    let g = metric(&cfg.metric, n, &format!("{at}.metric"), mode)?;
    let conn = connection(&cfg.connection, &g, n, &format!("{at}.connection"), mode)?;
    let manifold = Manifold {
        name: cfg.name.clone(),
        domain: to_domain(&cfg.bounds)?,
        metric: g,
        connection: conn,
    };
    let submersion = match &cfg.submersion {
        None => None,
        Some(s) => {
            let at = format!("{at}.submersion");
            let m = s.base.bounds.len();
            if s.projection.len() != m {
                return Err(CliError::schema(
                    &format!("{at}.projection"),
                    format!("expected {m} components to match the base box"),
                ));
            }
            let base_metric = match &s.base.metric {
                Some(c) => metric(c, m, &format!("{at}.base.metric"), mode)?,
                None => metric(
                    &MetricConfig::Diagonal {
                        diagonal: vec!["1".to_string(); m],
                    },
                    m,
                    &format!("{at}.base.metric"),
                    mode,
                )?,
            };
            let base_conn = connection(
                &s.base.connection,
                &base_metric,
                m,
                &format!("{at}.base.connection"),
                mode,
            )?;
            let base = Manifold {
                name: format!("{}/base", cfg.name),
                domain: to_domain(&s.base.bounds)?,
                metric: base_metric,
                connection: base_conn,
            };
            let projection = s
                .projection
                .iter()
                .enumerate()
                .map(|(i, t)| scalar(t, n, &format!("{at}.projection[{i}]"), mode))
                .collect::<Result<Vec<_>, _>>()?;
            let phi = s
                .phi
                .as_deref()
                .map(|t| scalar(t, n, &format!("{at}.phi"), mode))
                .transpose()?;
            let horizontal = match &s.horizontal {
                None => HorizontalRule::MetricOrthogonal,
                Some(cols) => HorizontalRule::Explicit(Arc::new(
                    ExprDistribution::parse(cols, n, mode).map_err(expr_err(&format!("{at}.horizontal")))?,
                )),
            };
            Some(
                SubmersionSetup::new(manifold.clone(), base, projection, horizontal, phi)
                    .map_err(|e| CliError::schema(&at, e.to_string()))?,
            )
        }
    };
    let model = Model {
        name: cfg.name.clone(),
        manifold,
        submersion,
        bundle: None,
        curvature: cfg.curvature,
        geodesics: Vec::new(),
    };
    if cfg.tangent_bundle {
        builtins::tangent_bundle_of(&model).map_err(|e| CliError::schema(at, e.to_string()))
    } else {
        Ok(model)
    }
}

/// Replace the chart box of the total space.
///
/// For a tangent bundle the box covers base and velocity coordinates.
fn with_box(mut model: Model, bounds: &[[f64; 2]]) -> Result<Model, CliError> {
    let n = model.manifold.dim();
    if bounds.len() != n {
        return Err(CliError::schema(
            "sampling.boxes",
            format!("model `{}` has dimension {n}, box has {}", model.name, bounds.len()),
        ));
    }
    let domain = to_domain(bounds)?;
    if let Some(tm) = &model.bundle {
        let k = tm.n();
        let mut base = tm.base.clone();
        base.domain = domain.select(&(0..k).collect::<Vec<_>>());
        let bundle = TangentBundle {
            base,
            velocity: domain.select(&(k..2 * k).collect::<Vec<_>>()),
        };
        model.manifold = bundle.manifold();
        model.submersion = Some(
            bundle
                .submersion()
                .map_err(|e| CliError::schema("sampling.boxes", e.to_string()))?,
        );
        model.bundle = Some(bundle);
        return Ok(model);
    }
    model.manifold.domain = domain.clone();
    if let Some(s) = &mut model.submersion {
        s.total.domain = domain;
    }
    Ok(model)
}
