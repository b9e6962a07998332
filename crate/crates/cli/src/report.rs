//! Versioned JSON verification reports and their CSV case table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{SuiteConfig, SuiteId};

pub const SCHEMA: &str = "1";

/// Non-finite values travel as `null` and read back as `+inf`.
mod lossy_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    #[serde(with = "lossy_f64")]
    pub value: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Residual {
            name: name.to_owned(),
            value,
            tolerance,
        }
    }

    pub fn passes(&self) -> bool {
        self.value <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub status: Status,
    pub residuals: Vec<Residual>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Case {
    /// Status is derived: pass iff there is no error and every residual is within tolerance.
    pub fn new(
        id: String,
        params: BTreeMap<String, serde_json::Value>,
        residuals: Vec<Residual>,
        error: Option<String>,
    ) -> Self {
        let ok = error.is_none() && residuals.iter().all(Residual::passes);
        Case {
            id,
            params,
            status: if ok { Status::Pass } else { Status::Fail },
            residuals,
            error,
        }
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
    }
}

/// The configuration fields that determine a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub metric: String,
    pub family: Option<String>,
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub step: Option<f64>,
}

impl From<&SuiteConfig> for ConfigEcho {
    fn from(c: &SuiteConfig) -> Self {
        ConfigEcho {
            metric: c.metric.clone(),
            family: c.family.clone(),
            samples: c.samples,
            seed: c.seed,
            tol: c.tol,
            step: c.step,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    #[serde(default)]
    pub max_residuals: BTreeMap<String, MaxResidual>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxResidual {
    #[serde(with = "lossy_f64")]
    pub value: f64,
    pub tolerance: f64,
}

impl Summary {
    pub fn of(cases: &[Case]) -> Self {
        let mut max_residuals: BTreeMap<String, MaxResidual> = BTreeMap::new();
        for r in cases.iter().flat_map(|c| &c.residuals) {
            let v = if r.value.is_nan() {
                f64::INFINITY
            } else {
                r.value
            };
            max_residuals
                .entry(r.name.clone())
                .and_modify(|m| {
                    m.value = m.value.max(v);
                    m.tolerance = m.tolerance.min(r.tolerance);
                })
                .or_insert(MaxResidual {
                    value: v,
                    tolerance: r.tolerance,
                });
        }
        let passed = cases.iter().filter(|c| c.status == Status::Pass).count();
        Summary {
            total: cases.len(),
            passed,
            failed: cases.len() - passed,
            max_residuals,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: SuiteId,
    pub config: ConfigEcho,
    pub cases: Vec<Case>,
    pub summary: Summary,
    pub library_version: String,
    pub wall_time_s: f64,
}

impl VerificationReport {
    pub fn new(config: &SuiteConfig, cases: Vec<Case>, wall_time_s: f64) -> Self {
        VerificationReport {
            schema: SCHEMA.to_owned(),
            suite: config.suite,
            config: config.into(),
            summary: Summary::of(&cases),
            cases,
            library_version: kcircles::VERSION.to_owned(),
            wall_time_s,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per residual; a failed case without residuals gets a single row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,case,status,residual,value,tolerance,error\n");
        for c in &self.cases {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
            };
            let error = c.error.as_deref().map(csv_quote).unwrap_or_default();
            if c.residuals.is_empty() {
                let _ = writeln!(out, "{},{},{status},,,,{error}", self.suite, c.id);
            }
            for r in &c.residuals {
                let _ = writeln!(
                    out,
                    "{},{},{status},{},{:.16e},{:e},{error}",
                    self.suite, c.id, r.name, r.value, r.tolerance
                );
            }
        }
        out
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Several reports bundled with a combined summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergedReport {
    pub schema: String,
    pub suites: Vec<SuiteId>,
    pub summary: Summary,
    pub reports: Vec<VerificationReport>,
}

impl MergedReport {
    pub fn new(reports: Vec<VerificationReport>) -> Self {
        let summary = Summary {
            total: reports.iter().map(|r| r.summary.total).sum(),
            passed: reports.iter().map(|r| r.summary.passed).sum(),
            failed: reports.iter().map(|r| r.summary.failed).sum(),
            max_residuals: BTreeMap::new(),
        };
        MergedReport {
            schema: SCHEMA.to_owned(),
            suites: reports.iter().map(|r| r.suite).collect(),
            summary,
            reports,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(id: &str, value: f64) -> Case {
        Case::new(
            id.into(),
            BTreeMap::new(),
            vec![Residual::new("r", value, 1e-6)],
            None,
        )
    }

    #[test]
    fn status_follows_residuals() {
        assert_eq!(case("a", 1e-7).status, Status::Pass);
        assert_eq!(case("a", 1e-6).status, Status::Pass);
        assert_eq!(case("a", 2e-6).status, Status::Fail);
        assert_eq!(case("a", f64::NAN).status, Status::Fail);
        let errored = Case::new("e".into(), BTreeMap::new(), vec![], Some("boom".into()));
        assert_eq!(errored.status, Status::Fail);
    }

    #[test]
    fn summary_and_round_trip() {
        let config = SuiteConfig::new(SuiteId::Kahler);
        let report = VerificationReport::new(
            &config,
            vec![case("a", 1e-7), case("b", f64::INFINITY)],
            0.5,
        );
        assert_eq!((report.summary.passed, report.summary.failed), (1, 1));
        assert_eq!(report.summary.max_residuals["r"].value, f64::INFINITY);
        let json = report.to_json();
        assert!(json.contains("\"schema\": \"1\""));
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn csv_table() {
        let config = SuiteConfig::new(SuiteId::Kahler);
        let errored = Case::new(
            "c".into(),
            BTreeMap::new(),
            vec![],
            Some("say \"hi\"".into()),
        );
        let report = VerificationReport::new(&config, vec![case("a", 0.0), errored], 0.0);
        let csv = report.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "kahler,a,pass,r,0.0000000000000000e0,1e-6,");
        assert_eq!(lines[2], "kahler,c,fail,,,,\"say \"\"hi\"\"\"");
    }
}
