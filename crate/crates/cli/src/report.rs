//! JSON suite reports.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use subgeo_core::check::{CheckResult, Detail, Status};

pub const SCHEMA: &str = "subgeo-report/1";

/// Incidents listed per check; the rest are only counted.
pub const MAX_LISTED_INCIDENTS: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub metadata: Metadata,
    pub summary: Summary,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub model: String,
    pub mode: &'static str,
    pub seed: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub premise_failed: usize,
    pub error: usize,
    /// Rejected sample points over attempted sample points.
    pub incident_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IncidentReport {
    pub point: Vec<f64>,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub reference: String,
    pub samples_used: usize,
    pub samples_total: usize,
    /// `null` when nothing could be evaluated.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub status: &'static str,
    pub wall_time_s: f64,
    pub components: BTreeMap<String, Option<f64>>,
    pub details: BTreeMap<String, Value>,
    pub incident_count: usize,
    pub incidents: Vec<IncidentReport>,
    #[serde(skip)]
    pub outcome: Status,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl CheckReport {
    pub fn new(r: CheckResult, wall: Duration) -> CheckReport {
        let details = r
            .details
            .into_iter()
            .map(|(k, d)| {
                let v = match d {
                    Detail::Bool(b) => Value::Bool(b),
                    Detail::Number(x) => finite(x).map_or(Value::Null, Value::from),
                    Detail::Text(s) => Value::String(s),
                };
                (k, v)
            })
            .collect();
        CheckReport {
            name: r.name,
            reference: r.reference,
            samples_used: r.samples_used,
            samples_total: r.samples_total,
            max_residual: finite(r.max_residual),
            tolerance: r.tolerance,
            status: r.status.as_str(),
            wall_time_s: wall.as_secs_f64(),
            components: r.components.into_iter().map(|(k, v)| (k, finite(v))).collect(),
            details,
            incident_count: r.incidents.len(),
            incidents: r
                .incidents
                .into_iter()
                .take(MAX_LISTED_INCIDENTS)
                .map(|i| IncidentReport {
                    point: i.point,
                    message: i.message,
                })
                .collect(),
            outcome: r.status,
        }
    }
}

impl Summary {
    pub fn of(checks: &[CheckReport]) -> Summary {
        let mut s = Summary {
            total: checks.len(),
            ..Summary::default()
        };
        let (mut rejected, mut attempted) = (0usize, 0usize);
        for c in checks {
            match c.outcome {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Inconclusive => s.inconclusive += 1,
                Status::PremiseFailed => s.premise_failed += 1,
                Status::Error => s.error += 1,
            }
            rejected += c.incident_count;
            attempted += c.samples_total;
        }
        if attempted > 0 {
            s.incident_rate = rejected as f64 / attempted as f64;
        }
        s
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn all_passed(&self) -> bool {
        self.summary.pass == self.summary.total
    }

    /// Plain-text table, one line per check.
    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = format!(
            "model {} mode {} seed {} samples {}\n",
            self.metadata.model, self.metadata.mode, self.metadata.seed, self.metadata.samples
        );
        for c in &self.checks {
            let residual = c.max_residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
            out.push_str(&format!(
                "{:<14} {:<width$}  residual {:>10}  tol {:.0e}  {}/{}\n",
                c.status.to_uppercase(),
                c.name,
                residual,
                c.tolerance,
                c.samples_used,
                c.samples_total,
            ));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "{} checks: {} pass, {} fail, {} inconclusive, {} premise failed, {} error\n",
            s.total, s.pass, s.fail, s.inconclusive, s.premise_failed, s.error
        ));
        out
    }
}
