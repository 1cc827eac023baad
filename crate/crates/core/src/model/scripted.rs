//! Deterministic scripted surrogate models.
//!
//! The surrogates stand in for a hosted LLM at desk scale. Each profile is
//! a pure function of `(prompt, sampling_control)`: decisions and text are
//! derived from the parsed case values plus stable SHA-256 hashes of the
//! prompt, never from process state, so runs replay byte-identically.
//!
//! Profiles:
//!
//! - `vacuous` — generic, compliance-sounding deferral prose in the style
//!   text-only governance elicits; framing-sensitive for a share of cases;
//!   fails the rationale-quality floor on first attempt for a calibrated
//!   fraction and improves on re-prompt.
//! - `specific` — cites case fields, framing-robust, passes quality checks.
//! - `mixer` — field-aware decisions with partial framing sensitivity and
//!   mid-grade rationale text.

use super::{DecisionModel, DeclaredMode, ModelError, PromptBundle};
use crate::casegen::{Flag, GroundTruthTable};
use crate::primitives::StructuredRationale;
use crate::rng::{hash_unit, sampling_ordinal};
use crate::Decision;
use serde::{Deserialize, Serialize};

/// Behavior constants for one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateParams {
    /// Share of cases whose first-attempt arguments fail the quality floor.
    pub i6q_fail_rate: f64,
    /// Share of cases that still fail on the first re-prompt.
    pub i6q_double_fail_rate: f64,
    /// Share of cases that fail every attempt (forced escalation).
    pub i6q_triple_fail_rate: f64,
    /// Share of cases whose decision flips under a reframed prompt.
    pub framing_flip_rate: f64,
    /// Share of diversity draws (ordinals 1+) that deviate from the modal
    /// decision; calibrated so the pooled candidate spread lands near the
    /// target diversity.
    pub candidate_alt_rate: f64,
}

/// The shipped profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateProfile {
    Vacuous,
    Specific,
    Mixer,
}

/// A deterministic scripted decision model.
#[derive(Debug, Clone)]
pub struct ScriptedSurrogate {
    profile: SurrogateProfile,
    params: SurrogateParams,
    name: String,
}

/// Case values the surrogate recovers from the prompt. Field keys may have
/// been rewritten by the reframing lexicon, so parsing is alias-tolerant.
#[derive(Debug, Clone, Default)]
struct ParsedCase {
    risk: f64,
    completeness: f64,
    amount: f64,
    flags: Vec<Flag>,
    jurisdiction: String,
}

impl ScriptedSurrogate {
    pub fn new(profile: SurrogateProfile) -> ScriptedSurrogate {
        let (params, name) = match profile {
            SurrogateProfile::Vacuous => (
                SurrogateParams {
                    i6q_fail_rate: 0.27,
                    i6q_double_fail_rate: 0.02,
                    i6q_triple_fail_rate: 0.004,
                    framing_flip_rate: 0.30,
                    candidate_alt_rate: 0.71,
                },
                "scripted:vacuous",
            ),
            SurrogateProfile::Specific => (
                SurrogateParams {
                    i6q_fail_rate: 0.0,
                    i6q_double_fail_rate: 0.0,
                    i6q_triple_fail_rate: 0.0,
                    framing_flip_rate: 0.0,
                    candidate_alt_rate: 0.71,
                },
                "scripted:specific",
            ),
            SurrogateProfile::Mixer => (
                SurrogateParams {
                    i6q_fail_rate: 0.15,
                    i6q_double_fail_rate: 0.01,
                    i6q_triple_fail_rate: 0.002,
                    framing_flip_rate: 0.15,
                    candidate_alt_rate: 0.71,
                },
                "scripted:mixer",
            ),
        };
        ScriptedSurrogate { profile, params, name: name.to_string() }
    }

    pub fn vacuous() -> ScriptedSurrogate {
        ScriptedSurrogate::new(SurrogateProfile::Vacuous)
    }

    pub fn specific() -> ScriptedSurrogate {
        ScriptedSurrogate::new(SurrogateProfile::Specific)
    }

    pub fn mixer() -> ScriptedSurrogate {
        ScriptedSurrogate::new(SurrogateProfile::Mixer)
    }

    pub fn by_name(name: &str) -> Option<ScriptedSurrogate> {
        match name {
            "scripted:vacuous" | "vacuous" => Some(Self::vacuous()),
            "scripted:specific" | "specific" => Some(Self::specific()),
            "scripted:mixer" | "mixer" => Some(Self::mixer()),
            _ => None,
        }
    }

    pub fn profile(&self) -> SurrogateProfile {
        self.profile
    }

    pub fn params(&self) -> &SurrogateParams {
        &self.params
    }

    fn parse(prompt: &PromptBundle) -> ParsedCase {
        let mut parsed = ParsedCase::default();
        for (key, value) in &prompt.fields {
            match key.as_str() {
                "risk" | "exposure" | "assessment_index" => {
                    parsed.risk = value.parse().unwrap_or(0.5);
                }
                "completeness" => {
                    parsed.completeness = value.parse().unwrap_or(0.5);
                }
                "amount" => {
                    parsed.amount = value.parse().unwrap_or(0.0);
                }
                "jurisdiction" => {
                    parsed.jurisdiction = value.clone();
                }
                "flags" => {
                    parsed.flags = value
                        .split(',')
                        .filter_map(|part| match part.trim() {
                            "AML" => Some(Flag::Aml),
                            "KYC" => Some(Flag::Kyc),
                            "SANCTIONS" => Some(Flag::Sanctions),
                            "INSIDER" => Some(Flag::Insider),
                            "CONCENTRATION" => Some(Flag::Concentration),
                            _ => None,
                        })
                        .collect();
                }
                _ => {}
            }
        }
        parsed
    }

    /// Stable per-case key: the numeric core of the prompt, identical
    /// across framings and retries.
    fn case_key(parsed: &ParsedCase) -> String {
        format!(
            "{:.6}|{:.6}|{:.2}|{}",
            parsed.risk,
            parsed.completeness,
            parsed.amount,
            parsed.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join("+")
        )
    }

    /// Modal decision for the case, before any framing flip.
    fn modal_decision(&self, parsed: &ParsedCase, key: &str) -> Decision {
        match self.profile {
            SurrogateProfile::Specific | SurrogateProfile::Mixer => GroundTruthTable::default_table()
                .assign(parsed.risk, parsed.completeness, parsed.amount, &parsed.flags)
                .label,
            SurrogateProfile::Vacuous => {
                let u = hash_unit(&format!("vacuous-base|{key}"));
                if u < 0.35 {
                    Decision::Defer
                } else if u < 0.50 {
                    Decision::Approve
                } else if u < 0.65 {
                    Decision::Conditional
                } else if u < 0.85 {
                    Decision::Escalate
                } else {
                    Decision::Decline
                }
            }
        }
    }

    /// Decision after the framing-sensitivity flip. The flip key hashes the
    /// full rendered prompt, so reframed prompts can land elsewhere.
    fn framed_decision(&self, prompt: &PromptBundle, parsed: &ParsedCase, key: &str) -> Decision {
        let modal = self.modal_decision(parsed, key);
        if self.params.framing_flip_rate == 0.0 {
            return modal;
        }
        // Render without retry feedback so retries never change the decision.
        let mut stripped = prompt.clone();
        stripped.feedback = None;
        let u = hash_unit(&format!("framing|{}", stripped.render()));
        if u < self.params.framing_flip_rate {
            Decision::from_index(modal.index() + 1)
        } else {
            modal
        }
    }

    fn attempt(prompt: &PromptBundle) -> u32 {
        prompt.feedback.as_ref().map_or(0, |f| f.retry_number)
    }

    /// Whether this attempt's arguments fail the quality floor.
    fn args_fail(&self, key: &str, attempt: u32) -> bool {
        let u = hash_unit(&format!("i6q|{key}"));
        match attempt {
            0 => u < self.params.i6q_fail_rate,
            1 => u < self.params.i6q_double_fail_rate,
            _ => u < self.params.i6q_triple_fail_rate,
        }
    }

    fn failing_arguments(key: &str) -> (Vec<String>, Vec<String>) {
        // Two degenerate shapes: too short, or long but repetitive.
        if hash_unit(&format!("i6q-shape|{key}")) < 0.5 {
            (
                vec!["insufficient documentation available".to_string()],
                vec!["requires review".to_string()],
            )
        } else {
            (
                vec!["risk risk risk gap gap gap file file file review review review".to_string()],
                vec!["case case case hold hold hold data data data check check check".to_string()],
            )
        }
    }

    fn passing_arguments(decision: Decision, parsed: &ParsedCase) -> (Vec<String>, Vec<String>) {
        let pro = format!(
            "the recorded completeness of {:.3} and amount of {:.0} leave the {} outcome supportable on the present file",
            parsed.completeness, parsed.amount, decision.as_str().to_lowercase()
        );
        let con = format!(
            "counterparty standing near {:.3} and open verification points argue for caution before settling this case",
            parsed.risk
        );
        (vec![pro], vec![con])
    }

    /// Generic prose in the register text-only governance tends to elicit.
    /// Three variants so vacuity spans the whole quality-floor sweep.
    fn vacuous_text(key: &str) -> String {
        let u = hash_unit(&format!("vacuous-tmpl|{key}"));
        if u < 0.45 {
            // Names "risk" and clears the length bar: specificity 0.25.
            "This case requires further review given the overall complexity of the circumstances. \
             Additional information may be necessary before a final determination can be reached. \
             The relevant risk factors warrant careful consideration at this time."
                .to_string()
        } else if u < 0.80 {
            // No concrete reference at all: specificity 0.
            "Further review is needed at this time due to the complexity of the situation. A final \
             determination cannot be reached on the current record."
                .to_string()
        } else {
            "The matter warrants additional consideration before any conclusion is appropriate. \
             Broader context may be relevant and careful handling is advised pending review of the \
             overall position."
                .to_string()
        }
    }

    /// Field-citing prose used by the specific profile and by retries.
    fn specific_text(decision: Decision, parsed: &ParsedCase) -> String {
        let flag_phrase = if parsed.flags.is_empty() {
            "no regulatory flags are raised".to_string()
        } else {
            format!(
                "the {} flag cannot be treated as resolved",
                parsed.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(" and ")
            )
        };
        format!(
            "Decision {}: specifically, the risk score ({:.3}) and information completeness \
             ({:.3}) drive this outcome because {flag_phrase} and the recorded amount is {:.2}. \
             A favorable resolution would be possible if updated documentation raised completeness \
             above the 0.600 standard and the open items were verified; additional documentation \
             is requested for the {} jurisdiction file pending verification.",
            decision.as_str(),
            parsed.risk,
            parsed.completeness,
            parsed.amount,
            parsed.jurisdiction,
        )
    }

    /// Short alternative-sample prose for diversity draws; deliberately
    /// thinner than the modal rationale so deterministic selection prefers
    /// the modal candidate.
    fn alternative_text(decision: Decision) -> String {
        format!(
            "An alternative classification of {} could be supported on the present record pending \
             further assessment.",
            decision.as_str()
        )
    }
}

impl DecisionModel for ScriptedSurrogate {
    fn decide(&self, prompt: &PromptBundle, sampling_control: u64) -> Result<StructuredRationale, ModelError> {
        let parsed = Self::parse(prompt);
        let key = Self::case_key(&parsed);
        let ordinal = sampling_ordinal(sampling_control);
        let attempt = Self::attempt(prompt);

        // Diversity draws (candidate ordinals 1+) may deviate from the
        // modal decision; the deviation depends on the sampling control, so
        // different committed seeds explore different alternatives.
        if (1..8).contains(&ordinal) {
            let u = hash_unit(&format!("alt|{sampling_control:016x}|{key}"));
            if u < self.params.candidate_alt_rate {
                let offset = 1 + (hash_unit(&format!("alt-class|{sampling_control:016x}|{key}")) * 4.0) as usize;
                let modal = self.framed_decision(prompt, &parsed, &key);
                let decision = Decision::from_index(modal.index() + offset);
                let (pro, con) = Self::passing_arguments(decision, &parsed);
                return Ok(StructuredRationale {
                    decision,
                    rationale_text: Self::alternative_text(decision),
                    pro_arguments: pro,
                    con_arguments: con,
                });
            }
        }

        let decision = self.framed_decision(prompt, &parsed, &key);
        let fail = self.args_fail(&key, attempt);
        let (pro_arguments, con_arguments) = if fail {
            Self::failing_arguments(&key)
        } else {
            Self::passing_arguments(decision, &parsed)
        };

        let rationale_text = match self.profile {
            SurrogateProfile::Specific => Self::specific_text(decision, &parsed),
            SurrogateProfile::Vacuous => {
                if attempt == 0 {
                    Self::vacuous_text(&key)
                } else {
                    // The re-prompt cites the quality feedback, and the
                    // surrogate responds with concrete case details.
                    Self::specific_text(decision, &parsed)
                }
            }
            SurrogateProfile::Mixer => {
                if hash_unit(&format!("mixer-style|{key}")) < 0.5 || attempt > 0 {
                    Self::specific_text(decision, &parsed)
                } else {
                    Self::vacuous_text(&key)
                }
            }
        };

        Ok(StructuredRationale { decision, rationale_text, pro_arguments, con_arguments })
    }

    fn declared_mode(&self) -> DeclaredMode {
        DeclaredMode::Structured
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn name(&self) -> &str {
        &self.name
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casegen::{generate_cases, GenParams};
    use crate::model::build_prompt;

    #[test]
    fn decisions_are_pure_in_prompt_and_control() {
        let set = generate_cases(20, 5, &GenParams::default()).unwrap();
        let model = ScriptedSurrogate::vacuous();
        for case in set.cases() {
            let prompt = build_prompt(case, super::super::default_policy());
            let a = model.decide(&prompt, 0).unwrap();
            let b = model.decide(&prompt, 0).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn vacuous_profile_defers_with_review_language() {
        let set = generate_cases(120, 42, &GenParams::default()).unwrap();
        let model = ScriptedSurrogate::vacuous();
        let mut defers = 0;
        for case in set.cases() {
            let prompt = build_prompt(case, super::super::default_policy());
            let out = model.decide(&prompt, 0).unwrap();
            if out.decision == Decision::Defer {
                defers += 1;
                assert!(
                    out.rationale_text.to_lowercase().contains("review")
                        || out.rationale_text.to_lowercase().contains("consideration"),
                    "vacuous deferral should read like generic review prose"
                );
            }
        }
        assert!(defers > 20, "vacuous profile should defer a sizable share, got {defers}");
    }

    #[test]
    fn specific_profile_cites_fields() {
        let set = generate_cases(10, 9, &GenParams::default()).unwrap();
        let model = ScriptedSurrogate::specific();
        for case in set.cases() {
            let prompt = build_prompt(case, super::super::default_policy());
            let out = model.decide(&prompt, 0).unwrap();
            assert!(out.rationale_text.contains("risk score"));
            assert!(out.rationale_text.contains(&format!("{:.3}", case.risk)));
        }
    }

    #[test]
    fn retry_attempts_keep_the_decision() {
        let set = generate_cases(30, 3, &GenParams::default()).unwrap();
        let model = ScriptedSurrogate::vacuous();
        for case in set.cases() {
            let prompt = build_prompt(case, super::super::default_policy());
            let first = model.decide(&prompt, 0).unwrap();
            let retry = model.decide(&prompt.with_feedback("argument 0 is too short", 1), 0).unwrap();
            assert_eq!(first.decision, retry.decision);
        }
    }

    #[test]
    fn modal_draw_is_control_independent() {
        let set = generate_cases(20, 8, &GenParams::default()).unwrap();
        let model = ScriptedSurrogate::vacuous();
        for case in set.cases() {
            let prompt = build_prompt(case, super::super::default_policy());
            // Ordinal 0 with different upper entropy bits: same output.
            let a = model.decide(&prompt, 0).unwrap();
            let b = model.decide(&prompt, 0xDEADBEEF00).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn by_name_resolves_profiles() {
        assert!(ScriptedSurrogate::by_name("scripted:vacuous").is_some());
        assert!(ScriptedSurrogate::by_name("specific").is_some());
        assert!(ScriptedSurrogate::by_name("gpt-17").is_none());
    }
}
