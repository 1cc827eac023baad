//! Rule-based ground-truth assignment.
//!
//! The rule table is shipped as data (`assets/ground_truth.toml`) so the
//! exact banding is auditable and tunable without touching code. Labels are
//! assigned on pre-stress values; the deterministic flag records whether
//! the case fell in an unambiguous band.

use super::{Case, Flag};
use crate::decision::Decision;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

const DEFAULT_TABLE: &str = include_str!("../../assets/ground_truth.toml");

/// Ground-truth label plus whether the rule engine resolved the case
/// without ambiguity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub label: Decision,
    pub deterministic: bool,
}

#[derive(Debug, Error)]
pub enum RuleTableError {
    #[error("failed to parse rule table: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("rule table is not total: final rule must be unconditional")]
    NotTotal,
    #[error("rule table is empty")]
    Empty,
}

/// One banding rule. All present conditions must hold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthRule {
    pub id: String,
    pub label: Decision,
    pub deterministic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_gt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_ge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_lt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness_lt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness_ge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount_gt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requires_flag: Option<Flag>,
}

impl GroundTruthRule {
    fn is_unconditional(&self) -> bool {
        self.risk_gt.is_none()
            && self.risk_ge.is_none()
            && self.risk_lt.is_none()
            && self.completeness_lt.is_none()
            && self.completeness_ge.is_none()
            && self.amount_gt.is_none()
            && self.flags_min.is_none()
            && self.flags_max.is_none()
            && self.requires_flag.is_none()
    }

    /// Evaluate the rule against pre-stress field values.
    pub fn matches(&self, risk: f64, completeness: f64, amount: f64, flags: &[Flag]) -> bool {
        let count = flags.len() as u32;
        self.risk_gt.map_or(true, |t| risk > t)
            && self.risk_ge.map_or(true, |t| risk >= t)
            && self.risk_lt.map_or(true, |t| risk < t)
            && self.completeness_lt.map_or(true, |t| completeness < t)
            && self.completeness_ge.map_or(true, |t| completeness >= t)
            && self.amount_gt.map_or(true, |t| amount > t)
            && self.flags_min.map_or(true, |m| count >= m)
            && self.flags_max.map_or(true, |m| count <= m)
            && self.requires_flag.map_or(true, |f| flags.contains(&f))
    }
}

/// Ordered, total rule table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthTable {
    #[serde(rename = "rule")]
    pub rules: Vec<GroundTruthRule>,
}

impl GroundTruthTable {
    pub fn from_toml(text: &str) -> Result<GroundTruthTable, RuleTableError> {
        let table: GroundTruthTable = toml::from_str(text)?;
        if table.rules.is_empty() {
            return Err(RuleTableError::Empty);
        }
        if !table.rules.last().expect("non-empty").is_unconditional() {
            return Err(RuleTableError::NotTotal);
        }
        Ok(table)
    }

    /// The embedded default table.
    pub fn default_table() -> &'static GroundTruthTable {
        static TABLE: OnceLock<GroundTruthTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            GroundTruthTable::from_toml(DEFAULT_TABLE).expect("embedded rule table is valid")
        })
    }

    /// First-match evaluation over raw field values.
    pub fn assign(&self, risk: f64, completeness: f64, amount: f64, flags: &[Flag]) -> GroundTruth {
        for rule in &self.rules {
            if rule.matches(risk, completeness, amount, flags) {
                return GroundTruth { label: rule.label, deterministic: rule.deterministic };
            }
        }
        unreachable!("rule table is total by construction")
    }
}

/// Assign ground truth to a case using the default table.
///
/// Total and pure over the case's pre-stress values: when stress has been
/// applied, the preserved original values are used, so re-running after a
/// transform reproduces the stored label.
pub fn assign_ground_truth(case: &Case) -> GroundTruth {
    let (risk, completeness, flags) = match &case.original_values {
        Some(orig) => (orig.risk, orig.completeness, orig.flags.as_slice()),
        None => (case.risk, case.completeness, case.flags.as_slice()),
    };
    GroundTruthTable::default_table().assign(risk, completeness, case.amount, flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assign(risk: f64, completeness: f64, amount: f64, flags: &[Flag]) -> GroundTruth {
        GroundTruthTable::default_table().assign(risk, completeness, amount, flags)
    }

    #[test]
    fn critical_risk_declines_deterministically() {
        let gt = assign(0.90, 0.8, 50_000.0, &[Flag::Kyc]);
        assert_eq!(gt.label, Decision::Decline);
        assert!(gt.deterministic);
    }

    #[test]
    fn clean_low_risk_approves_deterministically() {
        let gt = assign(0.20, 0.8, 50_000.0, &[]);
        assert_eq!(gt.label, Decision::Approve);
        assert!(gt.deterministic);
    }

    #[test]
    fn mid_band_single_flag_is_ambiguous() {
        let gt = assign(0.55, 0.5, 50_000.0, &[Flag::Kyc]);
        assert!(!gt.deterministic);
    }

    #[test]
    fn insider_escalates_before_later_rules() {
        let gt = assign(0.10, 0.9, 50_000.0, &[Flag::Insider]);
        assert_eq!(gt.label, Decision::Escalate);
        assert!(gt.deterministic);
    }

    #[test]
    fn table_is_total_over_a_grid() {
        // Enumerate a coarse grid over (risk, completeness, flag sets) and
        // confirm every point gets a label without panicking.
        let flag_sets: [&[Flag]; 4] =
            [&[], &[Flag::Kyc], &[Flag::Aml, Flag::Kyc], &[Flag::Aml, Flag::Sanctions, Flag::Insider]];
        for r in 0..=20 {
            for c in 0..=20 {
                for flags in flag_sets {
                    let _ = assign(r as f64 / 20.0, c as f64 / 20.0, 10_000.0, flags);
                }
            }
        }
    }

    #[test]
    fn rejects_non_total_table() {
        let text = r#"
            [[rule]]
            id = "only"
            label = "DEFER"
            deterministic = false
            risk_gt = 0.5
        "#;
        assert!(matches!(GroundTruthTable::from_toml(text), Err(RuleTableError::NotTotal)));
    }
}
