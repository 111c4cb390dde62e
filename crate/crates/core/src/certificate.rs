use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = concat!("unimodal ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Verified,
    Failed,
    Inconclusive,
}

impl Verdict {
    /// Verified only if every part is; any failure dominates inconclusive.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Failed, _) | (_, Failed) => Failed,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Verified,
        }
    }

    pub fn from_checks(ok: bool, decided: bool) -> Verdict {
        match (decided, ok) {
            (false, _) => Verdict::Inconclusive,
            (true, true) => Verdict::Verified,
            (true, false) => Verdict::Failed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CertRange {
    Interval { from: String, to: String },
    Samples { count: usize, description: String },
    Point { at: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub sample: String,
    pub detail: String,
}

/// Persisted record of one verified inequality or scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub statement: String,
    pub range: CertRange,
    pub verdict: Verdict,
    /// Bound values as decimal strings, keyed by name.
    pub data: BTreeMap<String, String>,
    pub precision: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<Failure>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exception_set: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub input_checksums: BTreeMap<String, String>,
    pub tool_version: String,
}

impl Certificate {
    pub fn new(statement: impl Into<String>, range: CertRange, precision: u32) -> Certificate {
        Certificate {
            statement: statement.into(),
            range,
            verdict: Verdict::Verified,
            data: BTreeMap::new(),
            precision,
            failures: Vec::new(),
            notes: Vec::new(),
            exception_set: None,
            input_checksums: BTreeMap::new(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn datum(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.data.insert(key.into(), value.to_string());
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn fail(&mut self, sample: impl Into<String>, detail: impl Into<String>) {
        self.verdict = self.verdict.combine(Verdict::Failed);
        self.failures.push(Failure {
            sample: sample.into(),
            detail: detail.into(),
        });
    }

    pub fn inconclusive(&mut self, sample: impl Into<String>, detail: impl Into<String>) {
        self.verdict = self.verdict.combine(Verdict::Inconclusive);
        self.failures.push(Failure {
            sample: sample.into(),
            detail: detail.into(),
        });
    }

    /// Merges another certificate's verdict, failures and data, prefixing its
    /// keys and samples with `label`.
    pub fn absorb(&mut self, label: &str, other: &Certificate) {
        self.verdict = self.verdict.combine(other.verdict);
        for f in &other.failures {
            self.failures.push(Failure {
                sample: format!("{label} {}", f.sample),
                detail: f.detail.clone(),
            });
        }
        for (k, v) in &other.data {
            self.data.insert(format!("{label}.{k}"), v.clone());
        }
        self.notes.extend(other.notes.iter().map(|n| format!("{label}: {n}")));
    }

    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_combine() {
        use Verdict::*;
        assert_eq!(Verified.combine(Verified), Verified);
        assert_eq!(Verified.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(Failed), Failed);
    }

    #[test]
    fn failing_marks_verdict() {
        let mut c = Certificate::new("x", CertRange::Point { at: "0".into() }, 64);
        assert!(c.is_verified());
        c.inconclusive("a", "b");
        assert_eq!(c.verdict, Verdict::Inconclusive);
        c.fail("a", "b");
        assert_eq!(c.verdict, Verdict::Failed);
        let json = c.to_json_pretty();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}
