//! Outcome records shared by every checker.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Finding,
    Skipped,
}

/// Result of one check: status, the smallest signed slack seen (negative
/// means violated), and a JSON witness for the worst case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: Status,
    pub margin: f64,
    pub witness: Value,
}

impl Outcome {
    /// Pass iff `margin >= -tol`.
    pub fn from_margin(margin: f64, tol: f64, witness: Value) -> Self {
        let status = if margin >= -tol { Status::Pass } else { Status::Fail };
        Self { status, margin: normalize(margin), witness }
    }

    pub fn pass(margin: f64, witness: Value) -> Self {
        Self { status: Status::Pass, margin: normalize(margin), witness }
    }

    pub fn fail(margin: f64, witness: Value) -> Self {
        Self { status: Status::Fail, margin: normalize(margin), witness }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        Self { status: Status::Skipped, margin: 0.0, witness: Value::String(reason.into()) }
    }

    /// Downgrades a failure to a finding.
    pub fn as_finding(mut self) -> Self {
        if self.status == Status::Fail {
            self.status = Status::Finding;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Combines two outcomes: worst status (fail > finding > pass > skipped),
    /// smaller margin, witness of the worse one.
    pub fn merge(self, other: Outcome) -> Outcome {
        let rank = |s: Status| match s {
            Status::Fail => 3,
            Status::Finding => 2,
            Status::Pass => 1,
            Status::Skipped => 0,
        };
        let (worse, better) = if rank(other.status) > rank(self.status)
            || (rank(other.status) == rank(self.status) && other.margin < self.margin)
        {
            (other, self)
        } else {
            (self, other)
        };
        let margin = if better.status == Status::Skipped {
            worse.margin
        } else if worse.status == Status::Skipped {
            better.margin
        } else {
            worse.margin.min(better.margin)
        };
        Outcome { status: worse.status, margin: normalize(margin), witness: worse.witness }
    }
}

/// Maps `-0.0` to `0.0` so serialized margins are stable.
pub fn normalize(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Tracks the smallest slack and the witness that produced it.
#[derive(Debug, Clone)]
pub struct Worst {
    margin: f64,
    witness: Value,
}

impl Default for Worst {
    fn default() -> Self {
        Self { margin: f64::INFINITY, witness: Value::Null }
    }
}

impl Worst {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `margin`; `witness` is only built when it becomes the worst.
    pub fn observe(&mut self, margin: f64, witness: impl FnOnce() -> Value) {
        if margin < self.margin || (margin.is_nan() && !self.margin.is_nan()) {
            self.margin = margin;
            self.witness = witness();
        }
    }

    pub fn margin(&self) -> f64 {
        if self.margin == f64::INFINITY {
            0.0
        } else {
            self.margin
        }
    }

    pub fn outcome(self, tol: f64) -> Outcome {
        let m = self.margin();
        if m.is_nan() {
            return Outcome::fail(f64::NAN, self.witness);
        }
        Outcome::from_margin(m, tol, self.witness)
    }
}
