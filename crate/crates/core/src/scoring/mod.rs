//! Rule-based sub-scoring of deferral rationales and the observational
//! metrics CDL and DIU.
//!
//! Each deferral is scored on specificity, explanatory linkage, and
//! boundary shift via the checklist engine; mechanical deferrals (hard
//! gates and the post-model override) receive perfect sub-scores by
//! construction and skip the checklists. A deferral is vacuous when its
//! specificity or explanatory score falls below the quality floor τ.

mod checklist;

pub use checklist::{Checklist, ChecklistError, ChecklistItem, ItemKind, ItemMatch};

use crate::casegen::Case;
use crate::regimes::{DecisionRecord, DecisionSource};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

const SPEC_CHECKLIST: &str = include_str!("../../assets/checklist_spec.toml");
const EXPL_CHECKLIST: &str = include_str!("../../assets/checklist_expl.toml");
const BSHIFT_CHECKLIST: &str = include_str!("../../assets/checklist_bshift.toml");

/// Default quality floor for vacuity classification.
pub const DEFAULT_TAU: f64 = 0.3;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("record {case_id} is not a deferral (decision {decision}); scoring contract violated")]
    NotADeferral { case_id: String, decision: String },
}

/// The three deferral checklists.
pub struct Checklists {
    pub specificity: Checklist,
    pub explanatory: Checklist,
    pub boundary_shift: Checklist,
}

impl Checklists {
    /// The embedded default checklists.
    pub fn default_checklists() -> &'static Checklists {
        static LISTS: OnceLock<Checklists> = OnceLock::new();
        LISTS.get_or_init(|| Checklists {
            specificity: Checklist::from_toml(SPEC_CHECKLIST).expect("embedded spec checklist"),
            explanatory: Checklist::from_toml(EXPL_CHECKLIST).expect("embedded expl checklist"),
            boundary_shift: Checklist::from_toml(BSHIFT_CHECKLIST).expect("embedded bshift checklist"),
        })
    }
}

/// Specificity sub-score: concrete case details named in the text.
///
/// Case-aware items (flag mention, case-specific detail) match against the
/// given case's actual fields. Empty text scores 0 with a warning.
pub fn score_specificity(text: &str, case: &Case) -> f64 {
    warn_if_empty(text);
    Checklists::default_checklists().specificity.score(text, Some(case)).0
}

/// Explanatory-linkage sub-score.
pub fn score_explanatory(text: &str) -> f64 {
    warn_if_empty(text);
    Checklists::default_checklists().explanatory.score(text, None).0
}

/// Boundary-shift sub-score.
pub fn score_boundary_shift(text: &str) -> f64 {
    warn_if_empty(text);
    Checklists::default_checklists().boundary_shift.score(text, None).0
}

fn warn_if_empty(text: &str) {
    if text.trim().is_empty() {
        log::warn!("scoring empty deferral text; sub-score is 0");
    }
}

/// Sub-scores plus vacuity classification for one deferral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationaleScore {
    pub case_id: String,
    pub spec: f64,
    pub expl: f64,
    pub bshift: f64,
    /// True for gate-produced and post-override deferrals (scored 1/1/1 by
    /// convention, without the checklists).
    pub mechanical: bool,
    pub geometric_mean: f64,
    /// Vacuity at the τ given when the score was computed.
    pub vacuous: bool,
}

impl RationaleScore {
    fn new(case_id: String, spec: f64, expl: f64, bshift: f64, mechanical: bool, tau: f64) -> RationaleScore {
        let geometric_mean = (spec * expl * bshift).cbrt();
        let vacuous = !mechanical && (spec < tau || expl < tau);
        RationaleScore { case_id, spec, expl, bshift, mechanical, geometric_mean, vacuous }
    }

    /// Re-evaluate vacuity at a different quality floor.
    pub fn vacuous_at(&self, tau: f64) -> bool {
        !self.mechanical && (self.spec < tau || self.expl < tau)
    }
}

/// Per-deferral score dump record with per-item match bits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreDumpRecord {
    pub case_id: String,
    pub mechanical: bool,
    pub spec: f64,
    pub expl: f64,
    pub bshift: f64,
    pub geometric_mean: f64,
    pub vacuous: bool,
    pub spec_items: Vec<ItemMatch>,
    pub expl_items: Vec<ItemMatch>,
    pub bshift_items: Vec<ItemMatch>,
}

/// Score one deferral record.
///
/// Mechanical sources (pre-model gates, the K0_11 override) score 1/1/1
/// without the checklists; model deferrals get checklist scores against
/// the rationale text and the case's fields.
pub fn score_deferral(record: &DecisionRecord, case: &Case, tau: f64) -> Result<RationaleScore, ScoringError> {
    if record.decision != crate::Decision::Defer {
        return Err(ScoringError::NotADeferral {
            case_id: record.case_id.clone(),
            decision: record.decision.to_string(),
        });
    }
    Ok(score_rationale(record, case, tau))
}

/// Scoring without the deferral-only contract, for exploratory scoring of
/// escalations.
pub fn score_rationale(record: &DecisionRecord, case: &Case, tau: f64) -> RationaleScore {
    if record.source.is_mechanical() {
        return RationaleScore::new(record.case_id.clone(), 1.0, 1.0, 1.0, true, tau);
    }
    let spec = score_specificity(&record.rationale_text, case);
    let expl = score_explanatory(&record.rationale_text);
    let bshift = score_boundary_shift(&record.rationale_text);
    RationaleScore::new(record.case_id.clone(), spec, expl, bshift, false, tau)
}

/// Full dump (with item bits) for the score audit files.
pub fn score_dump(record: &DecisionRecord, case: &Case, tau: f64) -> ScoreDumpRecord {
    let lists = Checklists::default_checklists();
    let score = score_rationale(record, case, tau);
    let (spec_items, expl_items, bshift_items) = if score.mechanical {
        (Vec::new(), Vec::new(), Vec::new())
    } else {
        (
            lists.specificity.score(&record.rationale_text, Some(case)).1,
            lists.explanatory.score(&record.rationale_text, None).1,
            lists.boundary_shift.score(&record.rationale_text, None).1,
        )
    };
    ScoreDumpRecord {
        case_id: score.case_id.clone(),
        mechanical: score.mechanical,
        spec: score.spec,
        expl: score.expl,
        bshift: score.bshift,
        geometric_mean: score.geometric_mean,
        vacuous: score.vacuous,
        spec_items,
        expl_items,
        bshift_items,
    }
}

/// Cosmetic Deadlock Rate: fraction of deferrals that are vacuous.
///
/// Undefined (None) on an empty deferral set — never 0.
pub fn compute_cdl(scores: &[RationaleScore]) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    Some(scores.iter().filter(|s| s.vacuous).count() as f64 / scores.len() as f64)
}

/// Deferral Information Utilisation: mean geometric mean over deferrals.
pub fn compute_diu(scores: &[RationaleScore]) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    Some(scores.iter().map(|s| s.geometric_mean).sum::<f64>() / scores.len() as f64)
}

/// CDL at each τ of a grid, for ranking-stability checks.
pub fn cdl_tau_sweep(scores: &[RationaleScore], tau_grid: &[f64]) -> Vec<(f64, Option<f64>)> {
    tau_grid
        .iter()
        .map(|&tau| {
            if scores.is_empty() {
                (tau, None)
            } else {
                let vacuous = scores.iter().filter(|s| s.vacuous_at(tau)).count();
                (tau, Some(vacuous as f64 / scores.len() as f64))
            }
        })
        .collect()
}

/// Whether a decision source is decided mechanically (gate or override).
impl DecisionSource {
    pub fn is_mechanical(&self) -> bool {
        matches!(self, DecisionSource::Gate { .. } | DecisionSource::K011Override)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casegen::{Flag, GroundTruth, TaskType};
    use crate::regimes::Regime;
    use crate::Decision;

    const EXAMPLE_VACUOUS: &str = "The case requires further review due to the complexity of the \
        situation. Additional information may be needed before a final determination can be made. \
        The risk factors present warrant careful consideration.";

    fn plain_case(flags: &[Flag]) -> Case {
        Case {
            id: "case-test-00001".to_string(),
            task_type: TaskType::FraudAlert,
            risk: 0.55,
            completeness: 0.5,
            flags: flags.to_vec(),
            amount: 42_000.0,
            jurisdiction: "EU".to_string(),
            tenure: 3.0,
            counterparty_risk: 0.4,
            original_values: None,
            ground_truth: GroundTruth { label: Decision::Defer, deterministic: false },
        }
    }

    fn model_defer_record(text: &str) -> DecisionRecord {
        DecisionRecord::for_tests("case-test-00001", Regime::R1, Decision::Defer, text, DecisionSource::Model)
    }

    #[test]
    fn golden_vacuous_example_scores() {
        let case = plain_case(&[]);
        assert_eq!(score_specificity(EXAMPLE_VACUOUS, &case), 0.25);
        assert_eq!(score_explanatory(EXAMPLE_VACUOUS), 0.45);
        assert_eq!(score_boundary_shift(EXAMPLE_VACUOUS), 0.20);
    }

    #[test]
    fn golden_example_geometric_mean_and_vacuity() {
        let case = plain_case(&[]);
        let record = model_defer_record(EXAMPLE_VACUOUS);
        let score = score_deferral(&record, &case, DEFAULT_TAU).unwrap();
        assert!((score.geometric_mean - 0.283).abs() < 1e-3, "gm {}", score.geometric_mean);
        assert!(score.vacuous);
        assert!(!score.vacuous_at(0.2), "spec 0.25 passes τ = 0.2");
    }

    #[test]
    fn single_letter_text_scores_zero() {
        let case = plain_case(&[]);
        assert_eq!(score_specificity("x", &case), 0.0);
    }

    #[test]
    fn empty_text_scores_zero() {
        assert_eq!(score_explanatory(""), 0.0);
        assert_eq!(score_boundary_shift(""), 0.0);
    }

    #[test]
    fn terse_decline_has_no_boundary_shift() {
        assert_eq!(score_boundary_shift("declined."), 0.0);
    }

    #[test]
    fn flag_mention_requires_flag_on_case() {
        let text = "Deferred because the SANCTIONS flag cannot be verified against the watchlist \
                    update cycle; additional information is required before the review completes, \
                    and the completeness value must rise first.";
        let with = plain_case(&[Flag::Sanctions]);
        let without = plain_case(&[Flag::Kyc]);
        let s_with = score_specificity(text, &with);
        let s_without = score_specificity(text, &without);
        assert_eq!(s_with - s_without, 0.20, "flag item only when present on case");
    }

    #[test]
    fn mechanical_sources_score_perfectly() {
        let case = plain_case(&[]);
        let record = DecisionRecord::for_tests(
            "case-test-00001",
            Regime::R2,
            Decision::Defer,
            "whatever text",
            DecisionSource::Gate { id: crate::gates::GateId::K0_10 },
        );
        let score = score_deferral(&record, &case, DEFAULT_TAU).unwrap();
        assert_eq!((score.spec, score.expl, score.bshift), (1.0, 1.0, 1.0));
        assert_eq!(score.geometric_mean, 1.0);
        assert!(score.mechanical && !score.vacuous);
    }

    #[test]
    fn non_deferral_is_a_contract_error() {
        let case = plain_case(&[]);
        let record = DecisionRecord::for_tests(
            "case-test-00001",
            Regime::R1,
            Decision::Escalate,
            "text",
            DecisionSource::Model,
        );
        assert!(matches!(
            score_deferral(&record, &case, DEFAULT_TAU),
            Err(ScoringError::NotADeferral { .. })
        ));
    }

    #[test]
    fn zero_subscore_zeroes_geometric_mean_but_not_vacuity() {
        let score = RationaleScore::new("c".into(), 0.31, 0.31, 0.0, false, DEFAULT_TAU);
        assert_eq!(score.geometric_mean, 0.0);
        assert!(!score.vacuous, "vacuity only checks spec and expl");
    }

    #[test]
    fn aggregation_identity_reproduces_worked_example() {
        // Fifteen deferrals: 8 mechanical (1/1/1) + 7 model-generated with
        // frozen geometric means; exactly three fall below τ = 0.3.
        let mut scores: Vec<RationaleScore> = (0..8)
            .map(|i| RationaleScore::new(format!("m{i}"), 1.0, 1.0, 1.0, true, DEFAULT_TAU))
            .collect();
        for (i, gm) in [0.26, 0.31, 0.42, 0.18, 0.55, 0.29, 0.38].iter().enumerate() {
            scores.push(RationaleScore::new(format!("l{i}"), *gm, *gm, *gm, false, DEFAULT_TAU));
        }
        let cdl = compute_cdl(&scores).unwrap();
        let diu = compute_diu(&scores).unwrap();
        assert!((cdl - 0.200).abs() < 1e-12, "cdl {cdl}");
        assert!((diu - 0.693).abs() < 1e-3, "diu {diu}");

        let llm_only: Vec<RationaleScore> =
            scores.iter().filter(|s| !s.mechanical).cloned().collect();
        let llm_cdl = compute_cdl(&llm_only).unwrap();
        let llm_diu = compute_diu(&llm_only).unwrap();
        assert!((llm_cdl - 0.429).abs() < 1e-3, "llm cdl {llm_cdl}");
        assert!((llm_diu - 0.341).abs() < 1e-3, "llm diu {llm_diu}");
    }

    #[test]
    fn cdl_of_all_mechanical_is_zero() {
        let scores: Vec<RationaleScore> = (0..5)
            .map(|i| RationaleScore::new(format!("m{i}"), 1.0, 1.0, 1.0, true, DEFAULT_TAU))
            .collect();
        assert_eq!(compute_cdl(&scores), Some(0.0));
        assert_eq!(
            cdl_tau_sweep(&scores, &[0.2, 0.3, 0.4]),
            vec![(0.2, Some(0.0)), (0.3, Some(0.0)), (0.4, Some(0.0))]
        );
    }

    #[test]
    fn empty_deferral_set_is_undefined() {
        assert_eq!(compute_cdl(&[]), None);
        assert_eq!(compute_diu(&[]), None);
    }

    #[test]
    fn tau_sweep_matches_threshold_comparison() {
        let score = RationaleScore::new("c".into(), 0.25, 0.45, 0.20, false, DEFAULT_TAU);
        assert!(score.vacuous_at(0.3));
        assert!(!score.vacuous_at(0.2));
        let sweep = cdl_tau_sweep(std::slice::from_ref(&score), &[0.2, 0.3]);
        assert_eq!(sweep, vec![(0.2, Some(0.0)), (0.3, Some(1.0))]);
    }

    #[test]
    fn scorer_total_on_weird_inputs() {
        let case = plain_case(&[]);
        let long = "risk ".repeat(50_000);
        let _ = score_specificity(&long, &case);
        let _ = score_specificity("∆∅ 完全性 ❤ 0.5", &case);
        let _ = score_explanatory("\u{0000}\u{FFFF}");
    }
}
