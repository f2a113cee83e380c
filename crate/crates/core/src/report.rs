//! Check reports and deterministic artifact formatting.
//!
//! Every verification operation returns a [`CheckReport`]: a name, a pass
//! flag, and named numeric metrics. Reports serialize to JSON with sorted
//! metric keys, and the CSV formatter prints 17 significant digits, so two
//! runs with the same configuration produce byte-identical artifacts (no
//! timestamps, no map iteration nondeterminism).

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Outcome of one named verification: pass flag plus numeric evidence.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    /// Named metrics backing the verdict (residuals, margins, counts).
    pub metrics: BTreeMap<String, f64>,
    /// Human-readable notes, e.g. which step failed.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            pass: true,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Record a metric; returns `self` for chaining.
    pub fn metric(mut self, key: impl Into<String>, value: f64) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }

    /// And-combine a condition into the pass flag, noting failures.
    pub fn require(mut self, condition: bool, note_on_fail: impl Into<String>) -> Self {
        if !condition {
            self.pass = false;
            self.notes.push(note_on_fail.into());
        }
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// True when every report passed.
pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

/// Render rows of floats as CSV with 17 significant digits.
///
/// The format `{:.16e}` prints one leading digit plus 16 fractional digits,
/// enough to round-trip any f64 exactly.
pub fn csv_string<I>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            write!(out, "{v:.16e}").expect("string write");
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Pretty JSON with trailing newline; key order is whatever the value's
/// `Serialize` produces (all report types use ordered maps).
pub fn json_string(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON serialization");
    s.push('\n');
    s
}
