//! Verdicts, per-check outcomes and the report envelope.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checks::{CheckId, Params};
use crate::config::Config;

pub const REPORT_VERSION: u32 = 1;

/// Ordered from best to worst so that `max` combines sub-results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS-EXACT")]
    PassExact,
    #[serde(rename = "PASS-CERTIFIED")]
    PassCertified,
    #[serde(rename = "SKIPPED")]
    Skipped,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        matches!(self, Verdict::PassExact | Verdict::PassCertified)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PassExact => "PASS-EXACT",
            Verdict::PassCertified => "PASS-CERTIFIED",
            Verdict::Skipped => "SKIPPED",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Fail => "FAIL",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: CheckId,
    pub params: Params,
    pub verdict: Verdict,
    /// Ranks, determinants, margins and counts, keyed by what they measure.
    pub evidence: BTreeMap<String, String>,
    /// Widest enclosure behind a certified verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub widest_interval: Option<String>,
    /// Command reproducing a failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproduce: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub cache_keys: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let mut s = format!("{:<18} {} {}", self.check.as_str(), self.params, self.verdict);
        if let Some(w) = &self.widest_interval {
            s.push_str(&format!("  widest {w}"));
        }
        if let Some(t) = self.seconds {
            s.push_str(&format!("  {t:.2}s"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub tool: String,
    pub config: Config,
    pub outcomes: Vec<CheckOutcome>,
    pub summary: BTreeMap<Verdict, usize>,
}

impl Report {
    pub fn new(config: Config, outcomes: Vec<CheckOutcome>) -> Self {
        let mut summary = BTreeMap::new();
        for o in &outcomes {
            *summary.entry(o.verdict).or_insert(0) += 1;
        }
        Report {
            format_version: REPORT_VERSION,
            tool: format!("nonarch-verify {}", env!("CARGO_PKG_VERSION")),
            config,
            outcomes,
            summary,
        }
    }

    pub fn worst(&self) -> Option<Verdict> {
        self.outcomes.iter().map(|o| o.verdict).filter(|v| *v != Verdict::Skipped).max()
    }
}
