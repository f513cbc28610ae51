//! Check results and the per-sample residual sweep.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Outcome of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    /// Not enough information to decide (for example singleton fibres).
    Inconclusive,
    /// A hypothesis of the tested statement does not hold.
    PremiseFailed,
    /// Evaluation failed or too many samples were rejected.
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
            Status::PremiseFailed => "premise_failed",
            Status::Error => "error",
        }
    }

    pub fn from_pass(pass: bool) -> Status {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detail {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl From<bool> for Detail {
    fn from(b: bool) -> Self {
        Detail::Bool(b)
    }
}

impl From<f64> for Detail {
    fn from(x: f64) -> Self {
        Detail::Number(x)
    }
}

impl From<&str> for Detail {
    fn from(s: &str) -> Self {
        Detail::Text(s.to_string())
    }
}

impl From<String> for Detail {
    fn from(s: String) -> Self {
        Detail::Text(s)
    }
}

/// A sample point that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Incident {
    pub point: Vec<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// Short anchor describing the statement under test.
    pub reference: String,
    pub samples_used: usize,
    pub samples_total: usize,
    /// Largest residual over evaluated samples; NaN when nothing evaluated.
    pub max_residual: f64,
    pub tolerance: f64,
    pub status: Status,
    /// Largest residual per named component.
    pub components: BTreeMap<String, f64>,
    pub details: BTreeMap<String, Detail>,
    pub incidents: Vec<Incident>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn error(name: &str, reference: &str, tolerance: f64, err: &Error) -> CheckResult {
        let mut details = BTreeMap::new();
        details.insert("error".to_string(), Detail::Text(err.to_string()));
        CheckResult {
            name: name.to_string(),
            reference: reference.to_string(),
            samples_used: 0,
            samples_total: 0,
            max_residual: f64::NAN,
            tolerance,
            status: Status::Error,
            components: BTreeMap::new(),
            details,
            incidents: Vec::new(),
        }
    }

    /// A result with no samples and the given status.
    pub fn empty(name: &str, reference: &str, tolerance: f64, status: Status) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            reference: reference.to_string(),
            samples_used: 0,
            samples_total: 0,
            max_residual: 0.0,
            tolerance,
            status,
            components: BTreeMap::new(),
            details: BTreeMap::new(),
            incidents: Vec::new(),
        }
    }

    pub fn detail(mut self, key: &str, value: impl Into<Detail>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn bool_detail(&self, key: &str) -> Option<bool> {
        match self.details.get(key) {
            Some(Detail::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn number_detail(&self, key: &str) -> Option<f64> {
        match self.details.get(key) {
            Some(Detail::Number(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn component(&self, key: &str) -> Option<f64> {
        self.components.get(key).copied()
    }
}

/// Residuals recorded at one sample point.
#[derive(Debug, Default)]
pub struct Residuals {
    entries: Vec<(String, f64)>,
}

impl Residuals {
    pub fn record(&mut self, component: &str, value: f64) {
        self.entries.push((component.to_string(), value.abs()));
    }

    pub fn record_all(&mut self, component: &str, values: impl IntoIterator<Item = f64>) {
        let m = values.into_iter().fold(0.0f64, |m, v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(v.abs())
            }
        });
        self.record(component, m);
    }
}

/// Accumulates residual maxima over sample points.
///
/// Point-local failures ([`Error::is_point_incident`]) and non-finite
/// residuals are recorded as incidents; any other error aborts the sweep.
#[derive(Debug, Default)]
pub struct Sweep {
    attempted: usize,
    evaluated: usize,
    components: BTreeMap<String, f64>,
    incidents: Vec<Incident>,
}

impl Sweep {
    pub fn new() -> Sweep {
        Sweep::default()
    }

    pub fn point<F>(&mut self, p: &[f64], f: F) -> Result<()>
    where
        F: FnOnce(&mut Residuals) -> Result<()>,
    {
        self.attempted += 1;
        let mut r = Residuals::default();
        match f(&mut r) {
            Ok(()) => {
                if let Some((name, _)) = r.entries.iter().find(|(_, v)| !v.is_finite()) {
                    self.incidents.push(Incident {
                        point: p.to_vec(),
                        message: format!("non-finite residual in {name}"),
                    });
                    return Ok(());
                }
                self.evaluated += 1;
                for (name, v) in r.entries {
                    let slot = self.components.entry(name).or_insert(0.0);
                    *slot = slot.max(v);
                }
                Ok(())
            }
            Err(e) if e.is_point_incident() => {
                self.incidents.push(Incident {
                    point: p.to_vec(),
                    message: e.to_string(),
                });
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    pub fn run<'a, I, F>(points: I, mut f: F) -> Result<Sweep>
    where
        I: IntoIterator<Item = &'a [f64]>,
        F: FnMut(&[f64], &mut Residuals) -> Result<()>,
    {
        let mut sweep = Sweep::new();
        for p in points {
            sweep.point(p, |r| f(p, r))?;
        }
        Ok(sweep)
    }

    pub fn attempted(&self) -> usize {
        self.attempted
    }

    pub fn evaluated(&self) -> usize {
        self.evaluated
    }

    /// At least 90% of the attempted samples evaluated.
    pub fn complete_enough(&self) -> bool {
        self.attempted > 0 && self.evaluated * 10 >= self.attempted * 9
    }

    pub fn max_over(&self, keys: &[&str]) -> f64 {
        keys.iter()
            .filter_map(|k| self.components.get(*k))
            .fold(0.0, |m: f64, &v| m.max(v))
    }

    pub fn max(&self) -> f64 {
        if self.evaluated == 0 {
            return f64::NAN;
        }
        self.components.values().fold(0.0, |m: f64, &v| m.max(v))
    }

    pub fn component(&self, key: &str) -> f64 {
        self.components.get(key).copied().unwrap_or(0.0)
    }

    /// Result whose verdict is `max residual <= tolerance`.
    pub fn finish(self, name: &str, reference: &str, tolerance: f64) -> CheckResult {
        let max = self.max();
        let status = if !self.complete_enough() {
            Status::Error
        } else {
            Status::from_pass(max <= tolerance)
        };
        self.finish_with(name, reference, tolerance, status)
    }

    /// Result with an externally decided verdict (an incomplete sweep still
    /// reports [`Status::Error`]).
    pub fn finish_with(self, name: &str, reference: &str, tolerance: f64, status: Status) -> CheckResult {
        let status = if self.complete_enough() { status } else { Status::Error };
        let mut details = BTreeMap::new();
        if !self.complete_enough() {
            details.insert(
                "error".to_string(),
                Detail::Text(format!(
                    "only {} of {} samples evaluated",
                    self.evaluated, self.attempted
                )),
            );
        }
        CheckResult {
            name: name.to_string(),
            reference: reference.to_string(),
            samples_used: self.evaluated,
            samples_total: self.attempted,
            max_residual: self.max(),
            tolerance,
            status,
            components: self.components,
            details,
            incidents: self.incidents,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidents_do_not_abort() {
        let pts = [vec![1.0], vec![-1.0], vec![2.0]];
        let sweep = Sweep::run(pts.iter().map(Vec::as_slice), |p, r| {
            if p[0] < 0.0 {
                return Err(Error::EvalDomain {
                    what: "log".into(),
                    point: p.to_vec(),
                });
            }
            r.record("a", p[0] - 1.0);
            Ok(())
        })
        .unwrap();
        assert_eq!(sweep.evaluated(), 2);
        assert_eq!(sweep.attempted(), 3);
        let res = sweep.finish("x", "", 10.0);
        // 2 of 3 is below the 90% floor
        assert_eq!(res.status, Status::Error);
        assert_eq!(res.incidents.len(), 1);
        assert_eq!(res.max_residual, 1.0);
    }

    #[test]
    fn contract_errors_abort() {
        let pts = [vec![1.0]];
        let out = Sweep::run(pts.iter().map(Vec::as_slice), |_, _| Err(Error::Contract("bad".into())));
        assert!(out.is_err());
    }

    #[test]
    fn non_finite_residual_is_an_incident() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let sweep = Sweep::run(pts.iter().map(Vec::as_slice), |p, r| {
            r.record("a", if p[0] == 3.0 { f64::NAN } else { 0.0 });
            Ok(())
        })
        .unwrap();
        let res = sweep.finish("x", "", 1e-8);
        assert_eq!(res.status, Status::Pass);
        assert_eq!(res.samples_used, 19);
    }
}
