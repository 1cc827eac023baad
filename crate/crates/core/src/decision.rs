//! The five-class governance decision space.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Governance decision classes, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "APPROVE")]
    Approve,
    #[serde(rename = "CONDITIONAL")]
    Conditional,
    #[serde(rename = "ESCALATE")]
    Escalate,
    #[serde(rename = "DEFER")]
    Defer,
    #[serde(rename = "DECLINE")]
    Decline,
}

impl Decision {
    /// All classes in canonical order (also the confusion-matrix axis order).
    pub const ALL: [Decision; 5] = [
        Decision::Approve,
        Decision::Conditional,
        Decision::Escalate,
        Decision::Defer,
        Decision::Decline,
    ];

    /// Canonical index of this class.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|d| *d == self).expect("class in table")
    }

    /// Class at `index % 5`, used by scripted surrogates to rotate classes.
    pub fn from_index(index: usize) -> Decision {
        Self::ALL[index % Self::ALL.len()]
    }

    /// Uppercase wire name, e.g. `DEFER`.
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Approve => "APPROVE",
            Decision::Conditional => "CONDITIONAL",
            Decision::Escalate => "ESCALATE",
            Decision::Defer => "DEFER",
            Decision::Decline => "DECLINE",
        }
    }

    /// Parse the uppercase wire name.
    pub fn parse(name: &str) -> Option<Decision> {
        Self::ALL.iter().copied().find(|d| d.as_str() == name)
    }

    /// Conservative outcomes route a case to a human instead of settling it.
    pub fn is_conservative(self) -> bool {
        matches!(self, Decision::Defer | Decision::Escalate)
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
