//! Mechanical hard gates.
//!
//! Gates are deterministic rules over structured case fields, evaluated in
//! a fixed order with first-match-wins semantics. Pre-model gates decide a
//! case before any model call; the single post-model gate overrides the
//! model's decision when information completeness is insufficient. Every
//! triggered gate renders a rationale template that cites the exact case
//! parameters and thresholds (three-decimal formatting, byte-stable) plus
//! the condition that would flip the outcome.
//!
//! Gate definitions are shipped as data (`assets/gates.toml`) so audits and
//! ablations read the same source of truth as the engine.

use crate::casegen::{Case, Flag};
use crate::decision::Decision;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

const DEFAULT_GATES: &str = include_str!("../assets/gates.toml");

/// Severe flags for the multi-severe-flag decline rule.
pub const SEVERE_FLAGS: [Flag; 3] = [Flag::Aml, Flag::Sanctions, Flag::Insider];

/// Gate identifiers, in pre-model evaluation order (K0_11 is post-model).
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateId {
    K0_6,
    K0_7,
    K0_8,
    K0_10,
    K0_12,
    K0_13,
    K0_14,
    K0_11,
}

impl GateId {
    pub fn as_str(self) -> &'static str {
        match self {
            GateId::K0_6 => "K0_6",
            GateId::K0_7 => "K0_7",
            GateId::K0_8 => "K0_8",
            GateId::K0_10 => "K0_10",
            GateId::K0_12 => "K0_12",
            GateId::K0_13 => "K0_13",
            GateId::K0_14 => "K0_14",
            GateId::K0_11 => "K0_11",
        }
    }
}

impl std::fmt::Display for GateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateStage {
    PreLlm,
    PostLlm,
}

#[derive(Debug, Error)]
pub enum GateError {
    #[error("failed to parse gate definitions: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("gate {gate} does not match case {case_id}; rationale cannot be rendered")]
    RuleMismatch { gate: GateId, case_id: String },
    #[error("gate file must contain exactly one post-model rule")]
    PostRuleCount,
}

/// Declarative gate rule. Conditions are conjunctive and strict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateRule {
    pub id: GateId,
    pub stage: GateStage,
    pub outcome: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_gt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount_gt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness_lt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requires_flag: Option<Flag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_flags: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_severe_flags: Option<u32>,
    /// Post-model only: replace the DEFER outcome with ESCALATE above this
    /// risk level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escalate_if_risk_gt: Option<f64>,
}

impl GateRule {
    /// Predicate over structured case fields only; prompt text never enters.
    pub fn matches(&self, case: &Case) -> bool {
        let severe = case.flags.iter().filter(|f| SEVERE_FLAGS.contains(f)).count() as u32;
        self.risk_gt.map_or(true, |t| case.risk > t)
            && self.amount_gt.map_or(true, |t| case.amount > t)
            && self.completeness_lt.map_or(true, |t| case.completeness < t)
            && self.requires_flag.map_or(true, |f| case.flags.contains(&f))
            && self.min_flags.map_or(true, |m| case.flag_count() as u32 >= m)
            && self.min_severe_flags.map_or(true, |m| severe >= m)
    }
}

/// One numeric value cited by a gate rationale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitedValue {
    pub name: String,
    pub value: f64,
}

impl CitedValue {
    fn new(name: &str, value: f64) -> CitedValue {
        CitedValue { name: name.to_string(), value }
    }
}

/// Outcome of a triggered gate: decision plus a threshold-citing rationale.
///
/// By convention a gate rationale scores 1/1/1 on the deferral checklists;
/// the rendered text also stands on its own when scored as plain text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateDecision {
    pub gate_id: GateId,
    pub decision: Decision,
    pub rationale_text: String,
    pub cited_values: Vec<CitedValue>,
}

/// Audit-log record for one gate decision (one JSONL line per record).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateAuditRecord {
    pub case_id: String,
    pub gate_id: GateId,
    pub decision: Decision,
    pub cited_values: Vec<CitedValue>,
}

impl GateAuditRecord {
    pub fn from_decision(case_id: &str, decision: &GateDecision) -> GateAuditRecord {
        GateAuditRecord {
            case_id: case_id.to_string(),
            gate_id: decision.gate_id,
            decision: decision.decision,
            cited_values: decision.cited_values.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GateFile {
    #[serde(rename = "gate")]
    gates: Vec<GateRule>,
}

/// The ordered gate set.
#[derive(Debug, Clone)]
pub struct GateSet {
    pre: Vec<GateRule>,
    post: GateRule,
}

impl GateSet {
    pub fn from_toml(text: &str) -> Result<GateSet, GateError> {
        let file: GateFile = toml::from_str(text)?;
        let (post, pre): (Vec<GateRule>, Vec<GateRule>) =
            file.gates.into_iter().partition(|g| g.stage == GateStage::PostLlm);
        if post.len() != 1 {
            return Err(GateError::PostRuleCount);
        }
        Ok(GateSet { pre, post: post.into_iter().next().expect("exactly one") })
    }

    /// The embedded default gate table.
    pub fn default_gates() -> &'static GateSet {
        static GATES: OnceLock<GateSet> = OnceLock::new();
        GATES.get_or_init(|| GateSet::from_toml(DEFAULT_GATES).expect("embedded gate table is valid"))
    }

    /// Pre-model rules in evaluation order.
    pub fn pre_rules(&self) -> &[GateRule] {
        &self.pre
    }

    /// The post-model override rule.
    pub fn post_rule(&self) -> &GateRule {
        &self.post
    }

    /// Serialize the full rule set back to TOML (for audit emission).
    pub fn to_toml(&self) -> String {
        let mut gates = self.pre.clone();
        gates.push(self.post.clone());
        toml::to_string(&GateFile { gates }).expect("gate rules serialize")
    }

    /// Evaluate the pre-model gates in order; first match wins.
    pub fn evaluate_pre_gates(&self, case: &Case) -> Option<GateDecision> {
        self.pre.iter().find(|rule| rule.matches(case)).map(|rule| {
            let (text, cited) = render_rationale_parts(rule, case, rule.outcome);
            GateDecision {
                gate_id: rule.id,
                decision: rule.outcome,
                rationale_text: text,
                cited_values: cited,
            }
        })
    }

    /// Evaluate the post-model override. Only meaningful for cases no
    /// pre-model gate decided.
    ///
    /// When completeness is below the post threshold the model decision is
    /// replaced: DEFER by default, ESCALATE above the configured risk level.
    pub fn evaluate_post_gate(&self, case: &Case, model_decision: Decision) -> Option<GateDecision> {
        let rule = &self.post;
        if !rule.matches(case) {
            return None;
        }
        let escalate = rule.escalate_if_risk_gt.map_or(false, |t| case.risk > t);
        let outcome = if escalate { Decision::Escalate } else { rule.outcome };
        let _ = model_decision; // overridden unconditionally once the gate fires
        let (text, cited) = render_rationale_parts(rule, case, outcome);
        Some(GateDecision {
            gate_id: rule.id,
            decision: outcome,
            rationale_text: text,
            cited_values: cited,
        })
    }
}

/// Render the rationale template for a rule the case actually matched.
pub fn render_gate_rationale(rule: &GateRule, case: &Case) -> Result<String, GateError> {
    if !rule.matches(case) {
        return Err(GateError::RuleMismatch { gate: rule.id, case_id: case.id.clone() });
    }
    let outcome = if rule.stage == GateStage::PostLlm
        && rule.escalate_if_risk_gt.map_or(false, |t| case.risk > t)
    {
        Decision::Escalate
    } else {
        rule.outcome
    };
    Ok(render_rationale_parts(rule, case, outcome).0)
}

fn fmt3(value: f64) -> String {
    format!("{value:.3}")
}

/// Build the template text and the list of cited numeric values.
///
/// Every template names the gate, the triggering values with their
/// thresholds, the causal chain, and the resolution condition that would
/// flip the outcome.
fn render_rationale_parts(rule: &GateRule, case: &Case, outcome: Decision) -> (String, Vec<CitedValue>) {
    let mut cited = Vec::new();
    let mut cite = |name: &str, value: f64| {
        cited.push(CitedValue::new(name, value));
        fmt3(value)
    };
    let text = match rule.id {
        GateId::K0_6 => {
            let risk = cite("risk", case.risk);
            let threshold = cite("risk_threshold", rule.risk_gt.unwrap_or(0.9));
            format!(
                "Hard gate K0_6 triggered: because the risk score ({risk}) exceeds the maximum \
                 threshold of {threshold} and the SANCTIONS flag is present, the transaction is \
                 declined under the sanctions control policy and cannot proceed to discretionary \
                 review. A favorable resolution would be possible only if rescreening cleared the \
                 sanctions match and the risk score were reduced below the {threshold} threshold."
            )
        }
        GateId::K0_7 => {
            let risk = cite("risk", case.risk);
            let threshold = cite("risk_threshold", rule.risk_gt.unwrap_or(0.85));
            let count = case.flag_count();
            format!(
                "Hard gate K0_7 triggered: because the risk score ({risk}) exceeds the threshold \
                 of {threshold} and {count} regulatory flags are present (minimum three), the \
                 case is escalated to senior compliance review. Due to the combined flag load it \
                 cannot be settled at this level; it would return to standard processing if the \
                 risk score dropped below {threshold} or the open flags were reduced to fewer \
                 than three."
            )
        }
        GateId::K0_8 => {
            let amount = cite("amount", case.amount);
            let amount_threshold = cite("amount_threshold", rule.amount_gt.unwrap_or(1_000_000.0));
            let risk = cite("risk", case.risk);
            let risk_threshold = cite("risk_threshold", rule.risk_gt.unwrap_or(0.7));
            format!(
                "Hard gate K0_8 triggered: because the transaction amount ({amount} USD) exceeds \
                 the {amount_threshold} USD threshold while the risk score ({risk}) is above \
                 {risk_threshold}, the case is escalated for senior sign-off. Large exposures at \
                 elevated risk cannot be approved mechanically; approval would be possible if the \
                 amount were reduced below the threshold or the risk score fell to {risk_threshold} \
                 or lower."
            )
        }
        GateId::K0_10 => {
            let completeness = cite("completeness", case.completeness);
            let threshold = cite("completeness_threshold", rule.completeness_lt.unwrap_or(0.15));
            format!(
                "Hard gate K0_10 triggered: because the information completeness ({completeness}) \
                 falls below the minimum threshold of {threshold}, the file cannot support any \
                 assessment of the transaction. Due to this critical information gap the case is \
                 deferred pending verification of the missing data. Specifically, additional \
                 documentation is needed to reduce the completeness risk; a favorable resolution \
                 would be possible if the completeness score were raised above {threshold}."
            )
        }
        GateId::K0_12 => {
            let risk = cite("risk", case.risk);
            let threshold = cite("risk_threshold", rule.risk_gt.unwrap_or(0.7));
            format!(
                "Hard gate K0_12 triggered: because the AML flag is present and the risk score \
                 ({risk}) exceeds the threshold of {threshold}, the transaction is declined under \
                 anti-money-laundering policy. The combination cannot be waived at desk level; \
                 the decision would change only if the AML flag were cleared through enhanced due \
                 diligence or the risk score fell below {threshold}."
            )
        }
        GateId::K0_13 => {
            let risk = cite("risk", case.risk);
            let completeness = cite("completeness", case.completeness);
            format!(
                "Hard gate K0_13 triggered: because the INSIDER flag is present, the case is \
                 escalated unconditionally to the conflicts desk; insider involvement cannot be \
                 assessed by this process regardless of other factors. The recorded risk score \
                 ({risk}) and completeness ({completeness}) are preserved for the reviewing \
                 officer. The case would return to standard processing only if the insider \
                 designation were withdrawn."
            )
        }
        GateId::K0_14 => {
            let risk = cite("risk", case.risk);
            let threshold = cite("risk_threshold", rule.risk_gt.unwrap_or(0.6));
            let severe = case.flags.iter().filter(|f| SEVERE_FLAGS.contains(f)).count();
            format!(
                "Hard gate K0_14 triggered: because {severe} severe regulatory flags are present \
                 (minimum two among AML, SANCTIONS, INSIDER) and the risk score ({risk}) exceeds \
                 the threshold of {threshold}, the transaction is declined. Multiple severe flags \
                 at elevated risk cannot be resolved without remediation; approval would require \
                 clearing the severe flags or bringing the risk score below {threshold}."
            )
        }
        GateId::K0_11 => {
            let completeness = cite("completeness", case.completeness);
            let threshold = cite("completeness_threshold", rule.completeness_lt.unwrap_or(0.3));
            if outcome == Decision::Escalate {
                let risk = cite("risk", case.risk);
                let risk_threshold = cite("risk_threshold", rule.escalate_if_risk_gt.unwrap_or(0.7));
                format!(
                    "Post-decision gate K0_11 triggered: because the information completeness \
                     ({completeness}) is below the required level of {threshold} while the risk \
                     score ({risk}) exceeds {risk_threshold}, the model decision is overridden \
                     and the case is escalated. High risk cannot be deferred on an incomplete \
                     file; the override would lift if completeness rose above {threshold}."
                )
            } else {
                format!(
                    "Post-decision gate K0_11 triggered: because the information completeness \
                     ({completeness}) is below the required level of {threshold}, the model \
                     decision is overridden and the case is deferred pending additional \
                     documentation. Specifically, the file cannot support a final determination; \
                     a favorable resolution would be possible if the completeness score were \
                     raised above {threshold}."
                )
            }
        }
    };
    (text, cited)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casegen::{GroundTruth, TaskType};

    pub(crate) fn test_case(risk: f64, completeness: f64, amount: f64, flags: &[Flag]) -> Case {
        Case {
            id: "case-test-00000".to_string(),
            task_type: TaskType::CreditApproval,
            risk,
            completeness,
            flags: flags.to_vec(),
            amount,
            jurisdiction: "US".to_string(),
            tenure: 4.0,
            counterparty_risk: 0.4,
            original_values: None,
            ground_truth: GroundTruth { label: Decision::Defer, deterministic: false },
        }
    }

    #[test]
    fn sanctions_high_risk_declines_via_k0_6() {
        let case = test_case(0.923, 0.6, 10_000.0, &[Flag::Sanctions]);
        let decision = GateSet::default_gates().evaluate_pre_gates(&case).unwrap();
        assert_eq!(decision.gate_id, GateId::K0_6);
        assert_eq!(decision.decision, Decision::Decline);
    }

    #[test]
    fn thin_file_defers_via_k0_10() {
        let case = test_case(0.5, 0.112, 10_000.0, &[]);
        let decision = GateSet::default_gates().evaluate_pre_gates(&case).unwrap();
        assert_eq!(decision.gate_id, GateId::K0_10);
        assert_eq!(decision.decision, Decision::Defer);
        assert!(decision.rationale_text.contains("0.112"));
        assert!(decision.rationale_text.contains("0.15"));
    }

    #[test]
    fn unremarkable_case_passes_all_gates() {
        let case = test_case(0.5, 0.6, 10_000.0, &[]);
        assert!(GateSet::default_gates().evaluate_pre_gates(&case).is_none());
    }

    #[test]
    fn first_match_wins_on_multi_predicate_cases() {
        // Matches both K0_6 and K0_12; order decides K0_6.
        let case = test_case(0.95, 0.6, 10_000.0, &[Flag::Sanctions, Flag::Aml]);
        let decision = GateSet::default_gates().evaluate_pre_gates(&case).unwrap();
        assert_eq!(decision.gate_id, GateId::K0_6);
    }

    #[test]
    fn boundary_equality_does_not_fire() {
        let case = test_case(0.9, 0.6, 10_000.0, &[Flag::Sanctions]);
        let gates = GateSet::default_gates();
        let hit = gates.evaluate_pre_gates(&case);
        assert!(hit.is_none(), "strict comparison: r = 0.9 must not trip K0_6, got {hit:?}");
    }

    #[test]
    fn post_gate_defers_or_escalates_on_risk() {
        let gates = GateSet::default_gates();
        let low = test_case(0.5, 0.20, 10_000.0, &[]);
        let hit = gates.evaluate_post_gate(&low, Decision::Approve).unwrap();
        assert_eq!((hit.gate_id, hit.decision), (GateId::K0_11, Decision::Defer));

        let high = test_case(0.80, 0.20, 10_000.0, &[]);
        let hit = gates.evaluate_post_gate(&high, Decision::Approve).unwrap();
        assert_eq!((hit.gate_id, hit.decision), (GateId::K0_11, Decision::Escalate));

        let fine = test_case(0.5, 0.50, 10_000.0, &[]);
        assert!(gates.evaluate_post_gate(&fine, Decision::Approve).is_none());
    }

    #[test]
    fn rationale_cites_gate_id_and_values() {
        let case = test_case(0.923, 0.6, 10_000.0, &[Flag::Sanctions]);
        let decision = GateSet::default_gates().evaluate_pre_gates(&case).unwrap();
        assert!(decision.rationale_text.contains("K0_6"));
        assert!(decision.rationale_text.contains("0.923"));
        assert!(decision.rationale_text.contains("0.9"));
        for cited in &decision.cited_values {
            assert!(
                decision.rationale_text.contains(&format!("{:.3}", cited.value)),
                "cited value {} missing from text",
                cited.value
            );
        }
    }

    #[test]
    fn render_rejects_non_matching_case() {
        let gates = GateSet::default_gates();
        let case = test_case(0.2, 0.8, 10.0, &[]);
        let rule = &gates.pre_rules()[0];
        assert!(matches!(
            render_gate_rationale(rule, &case),
            Err(GateError::RuleMismatch { gate: GateId::K0_6, .. })
        ));
    }

    #[test]
    fn gate_outcomes_use_structured_fields_only() {
        // Same structured fields, different id/jurisdiction text: same gate.
        let mut a = test_case(0.95, 0.5, 2_000_000.0, &[Flag::Aml, Flag::Sanctions]);
        let mut b = a.clone();
        b.id = "case-test-99999".to_string();
        b.jurisdiction = "LATAM".to_string();
        let gates = GateSet::default_gates();
        let da = gates.evaluate_pre_gates(&a).unwrap();
        let db = gates.evaluate_pre_gates(&b).unwrap();
        assert_eq!(da.gate_id, db.gate_id);
        assert_eq!(da.decision, db.decision);
        a.id.clear();
        b.id.clear();
    }

    #[test]
    fn roundtrips_through_toml() {
        let gates = GateSet::default_gates();
        let text = gates.to_toml();
        let reparsed = GateSet::from_toml(&text).unwrap();
        assert_eq!(gates.pre_rules().len(), reparsed.pre_rules().len());
        assert_eq!(gates.post_rule().id, reparsed.post_rule().id);
    }
}
