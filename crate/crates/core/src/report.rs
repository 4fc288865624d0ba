//! Check reports: one record per (check, instance), JSON first, markdown as a
//! rendering of the same records.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::audit::{Outcome, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    /// Which object(s) of the scenario the record is about.
    pub instance: String,
    /// Digest of the scenario the check ran on.
    pub scenario: String,
    pub status: Status,
    pub margin: f64,
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub witness: Value,
    /// Wall time of the check that produced the record.
    pub runtime_ms: f64,
}

impl Record {
    pub fn new(check: &str, instance: impl Into<String>, scenario: &str, outcome: Outcome, runtime_ms: f64) -> Self {
        Self {
            check: check.to_string(),
            instance: instance.into(),
            scenario: scenario.to_string(),
            status: outcome.status,
            margin: outcome.margin,
            witness: outcome.witness,
            runtime_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub finding: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub summary: Summary,
    pub records: Vec<Record>,
}

impl Report {
    /// Sorts records by check id and instance and fills in the summary.
    pub fn new(scenario: String, seed: u64, mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| a.check.cmp(&b.check).then_with(|| a.instance.cmp(&b.instance)));
        let mut summary = Summary::default();
        for r in &records {
            match r.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Finding => summary.finding += 1,
                Status::Skipped => summary.skipped += 1,
            }
        }
        Self { scenario, seed, summary, records }
    }

    /// True when no record failed. Findings do not fail a run.
    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// SHA-256 of the JSON form with runtimes zeroed.
    pub fn digest(&self) -> String {
        let mut stable = self.clone();
        for r in &mut stable.records {
            r.runtime_ms = 0.0;
        }
        let json = serde_json::to_string(&stable).expect("report serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_markdown(&self) -> String {
        let s = &self.summary;
        let mut out = format!(
            "# Verification report\n\nScenario `{}`, seed {}: {} pass, {} fail, {} finding, {} skipped.\n\n",
            self.scenario, self.seed, s.pass, s.fail, s.finding, s.skipped
        );
        out.push_str("| check | instance | status | margin | runtime (ms) |\n");
        out.push_str("|---|---|---|---|---|\n");
        for r in &self.records {
            out.push_str(&format!(
                "| {} | {} | {} | {:.3e} | {:.1} |\n",
                r.check,
                r.instance.replace('|', "\\|"),
                status_word(r.status),
                r.margin,
                r.runtime_ms
            ));
        }
        let flagged: Vec<&Record> =
            self.records.iter().filter(|r| matches!(r.status, Status::Fail | Status::Finding)).collect();
        if !flagged.is_empty() {
            out.push_str("\n## Witnesses\n");
            for r in flagged {
                out.push_str(&format!(
                    "\n### {} / {} ({})\n\n```json\n{}\n```\n",
                    r.check,
                    r.instance,
                    status_word(r.status),
                    serde_json::to_string_pretty(&r.witness).unwrap_or_default()
                ));
            }
        }
        out
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Finding => "finding",
        Status::Skipped => "skipped",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_ignores_runtime_and_order() {
        let a = Record::new("b", "x", "d", Outcome::pass(0.0, Value::Null), 1.0);
        let b = Record::new("a", "y", "d", Outcome::fail(-1.0, json!({"k": 1})), 2.0);
        let r1 = Report::new("d".into(), 1, vec![a.clone(), b.clone()]);
        let mut b2 = b.clone();
        b2.runtime_ms = 99.0;
        let r2 = Report::new("d".into(), 1, vec![b2, a]);
        assert_eq!(r1.digest(), r2.digest());
        assert_eq!(r1.records[0].check, "a");
        assert!(!r1.passed());
        assert_eq!(r1.summary.fail, 1);
        let md = r1.to_markdown();
        assert!(md.contains("| a | y | fail |"));
        assert!(md.contains("\"k\": 1"));
    }
}
