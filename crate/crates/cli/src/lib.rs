//! Config-driven check harness behind the `subgeo` binary.

pub mod config;
pub mod error;
pub mod report;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;
use subgeo_core::builtins::{GeodesicJob, BUILTINS};
use subgeo_core::check::CheckResult;
use subgeo_core::geodesics::{integrate_geodesic, Trajectory};
use subgeo_core::suite::{self, CHECKS};
use subgeo_core::DiffMode;

pub use config::{load_config, parse_config, SuiteConfig};
pub use error::CliError;
pub use report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCIDENTS: i32 = 3;

/// Incident rate above which a run is considered numerically broken.
pub const MAX_INCIDENT_RATE: f64 = 0.1;

pub const SEED_ENV: &str = "SUBGEO_SEED";

/// Command-line overrides of a loaded config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub mode: Option<DiffMode>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl SuiteConfig {
    /// Apply `SUBGEO_SEED` (if given) and then explicit overrides.
    pub fn apply(&mut self, env_seed: Option<&str>, o: Overrides) -> Result<(), CliError> {
        if let Some(s) = env_seed {
            self.seed = s
                .trim()
                .parse()
                .map_err(|_| CliError::schema(SEED_ENV, format!("`{s}` is not an unsigned integer")))?;
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some(n) = o.samples {
            if n == 0 {
                return Err(CliError::schema("--samples", "must be at least 1"));
            }
            self.samples = n;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        Ok(())
    }
}

fn run_guarded(name: &str, f: impl FnOnce() -> CheckResult) -> CheckResult {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".to_string());
        let reference = suite::spec(name).map_or("", |s| s.anchor);
        CheckResult::error(name, reference, f64::NAN, &subgeo_core::Error::Contract(msg))
    })
}

/// Run every requested check concurrently; the report lists them by name.
pub fn run_suite(config: &SuiteConfig) -> Result<Report, CliError> {
    let model = config.build_model(config.mode)?;
    let builder = |mode: DiffMode| {
        config
            .build_model(mode)
            .map_err(|e| subgeo_core::Error::Contract(e.to_string()))
    };
    let ctx = config.context();
    let requests = config.check_list(&model);
    let mut checks: Vec<report::CheckReport> = requests
        .par_iter()
        .map(|req| {
            log::info!("running {}", req.name);
            let start = Instant::now();
            let r = run_guarded(req.name, || {
                suite::run_check(req.name, &model, &ctx, req.tolerance, &builder)
            });
            log::info!("{} {}", req.name, r.status);
            report::CheckReport::new(r, start.elapsed())
        })
        .collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(Report {
        schema: report::SCHEMA,
        metadata: report::Metadata {
            version: env!("CARGO_PKG_VERSION"),
            model: model.name.clone(),
            mode: config.mode.name(),
            seed: config.seed,
            samples: config.samples,
        },
        summary: report::Summary::of(&checks),
        checks,
    })
}

/// Exit code of a finished run.
pub fn exit_code(report: &Report) -> i32 {
    if report.summary.incident_rate > MAX_INCIDENT_RATE {
        EXIT_INCIDENTS
    } else if report.all_passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Integrate a named geodesic job of the configured model.
pub fn run_geodesic(config: &SuiteConfig, job: &str) -> Result<Trajectory, CliError> {
    let model = config.build_model(config.mode)?;
    let GeodesicJob { p0, v0, t_end, h, .. } = model.geodesics.iter().find(|j| j.name == job).ok_or_else(|| {
        let known: Vec<&str> = model.geodesics.iter().map(|j| j.name.as_str()).collect();
        CliError::schema("--job", format!("no job `{job}`; known jobs: [{}]", known.join(", ")))
    })?;
    let m = &model.manifold;
    integrate_geodesic(m.connection.as_ref(), &m.domain, p0, v0, *t_end, *h).map_err(|source| CliError::Integration {
        job: job.to_string(),
        source,
    })
}

/// One line per check: `name [statement]`, alphabetical.
pub fn list_checks() -> String {
    CHECKS.iter().map(|c| format!("{} [{}]\n", c.name, c.anchor)).collect()
}

/// One line per builtin family, alphabetical.
pub fn list_builtins() -> String {
    let mut rows: Vec<_> = BUILTINS.to_vec();
    rows.sort_unstable();
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    rows.iter().map(|(n, d)| format!("{n:<width$}  {d}\n")).collect()
}
