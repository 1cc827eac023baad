//! The decision-model adapter contract and prompt construction.
//!
//! A [`DecisionModel`] turns a [`PromptBundle`] plus an opaque sampling
//! control word into a [`StructuredRationale`]. Two adapters ship with the
//! harness: deterministic scripted surrogates ([`scripted`]) and a generic
//! remote HTTP endpoint ([`remote`]). Vendor-specific clients plug in by
//! implementing the same trait.

pub mod remote;
pub mod scripted;

use crate::casegen::Case;
use crate::primitives::StructuredRationale;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

const DEFAULT_POLICY: &str = include_str!("../../assets/policy.txt");

/// The governance policy text used as the system prompt in both regimes.
pub fn default_policy() -> &'static str {
    DEFAULT_POLICY
}

/// Adapter failure modes. Transport problems are retriable; malformed
/// output is a content problem and is surfaced distinctly.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("transport failure: {detail}")]
    Transport { detail: String },
    #[error("malformed model output: {detail}")]
    Malformed { detail: String },
}

/// Whether the adapter returns structured pro/con arguments or free text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredMode {
    Structured,
    FreeText,
}

/// Prompt framing variant; the reframed variant carries identical numeric
/// values in reversed field order with softened risk vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FramingVariant {
    Standard,
    Reframed,
}

/// Quality feedback attached to a re-prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackNote {
    pub text: String,
    pub retry_number: u32,
}

/// Everything a model adapter sees for one call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub policy_text: String,
    /// Case fields as (key, value) strings, in serialization order.
    pub fields: Vec<(String, String)>,
    /// Short natural-language framing of the case.
    pub narrative: String,
    pub framing: FramingVariant,
    /// Present on I6Q re-prompts.
    pub feedback: Option<FeedbackNote>,
    /// Present only when the entropy seed is deliberately observable (A3).
    pub observable_seed: Option<u64>,
}

impl PromptBundle {
    /// Render the full prompt text an LLM endpoint would receive.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.policy_text);
        out.push_str("\n\nCASE RECORD\n");
        for (key, value) in &self.fields {
            out.push_str(key);
            out.push_str(": ");
            out.push_str(value);
            out.push('\n');
        }
        out.push('\n');
        out.push_str(&self.narrative);
        if let Some(seed) = self.observable_seed {
            out.push_str(&format!("\nentropy_seed: {seed}"));
        }
        if let Some(feedback) = &self.feedback {
            out.push_str(&format!("\n[retry {}] {}", feedback.retry_number, feedback.text));
        }
        out.push('\n');
        out
    }

    /// Clone with a quality-feedback note attached.
    pub fn with_feedback(&self, text: &str, retry_number: u32) -> PromptBundle {
        let mut next = self.clone();
        next.feedback = Some(FeedbackNote { text: text.to_string(), retry_number });
        next
    }

    /// Multiset of digit-bearing tokens in the field values, for framing
    /// invariance checks.
    pub fn numeric_values(&self) -> Vec<String> {
        let mut values: Vec<String> = self
            .fields
            .iter()
            .flat_map(|(_, value)| value.split_whitespace())
            .filter(|token| token.chars().any(|c| c.is_ascii_digit()))
            .map(|token| token.to_string())
            .collect();
        values.sort();
        values
    }

    #[doc(hidden)]
    pub fn empty_for_tests() -> PromptBundle {
        PromptBundle {
            policy_text: String::new(),
            fields: Vec::new(),
            narrative: String::new(),
            framing: FramingVariant::Standard,
            feedback: None,
            observable_seed: None,
        }
    }
}

/// Canonical field serialization order for the standard framing.
pub fn case_fields(case: &Case) -> Vec<(String, String)> {
    let flags = if case.flags.is_empty() {
        "none".to_string()
    } else {
        case.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(", ")
    };
    vec![
        ("task_type".to_string(), case.task_type.as_str().to_string()),
        ("risk".to_string(), format!("{:.6}", case.risk)),
        ("completeness".to_string(), format!("{:.6}", case.completeness)),
        ("flags".to_string(), flags),
        ("amount".to_string(), format!("{:.2}", case.amount)),
        ("jurisdiction".to_string(), case.jurisdiction.clone()),
        ("tenure".to_string(), format!("{:.2}", case.tenure)),
        ("counterparty_risk".to_string(), format!("{:.6}", case.counterparty_risk)),
    ]
}

/// Narrative line for the standard framing. Uses risk vocabulary on
/// purpose so the reframing lexicon has something to soften.
pub fn case_narrative(case: &Case) -> String {
    let band = if case.risk > 0.7 {
        "a high risk transaction"
    } else if case.risk >= 0.3 {
        "a moderate risk transaction"
    } else {
        "a low risk transaction"
    };
    let file = if case.completeness < 0.3 {
        "sparsely documented"
    } else if case.completeness < 0.7 {
        "partially documented"
    } else {
        "well documented"
    };
    format!(
        "This is {band} in the {} book; the case file is {file}. Decide the case under the policy above.",
        case.jurisdiction
    )
}

/// Build the standard-framing prompt for a case.
pub fn build_prompt(case: &Case, policy_text: &str) -> PromptBundle {
    PromptBundle {
        policy_text: policy_text.to_string(),
        fields: case_fields(case),
        narrative: case_narrative(case),
        framing: FramingVariant::Standard,
        feedback: None,
        observable_seed: None,
    }
}

/// A pluggable decision model.
///
/// Implementations must be pure with respect to `(prompt, sampling_control)`
/// when they declare themselves deterministic.
pub trait DecisionModel: Send + Sync {
    fn decide(&self, prompt: &PromptBundle, sampling_control: u64) -> Result<StructuredRationale, ModelError>;

    fn declared_mode(&self) -> DeclaredMode {
        DeclaredMode::Structured
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn name(&self) -> &str;
}

/// Instrumentation wrapper counting adapter calls.
///
/// Used to prove the gate short-circuit invariant: pre-gated cases produce
/// zero model calls.
pub struct CountingModel<M: DecisionModel> {
    inner: M,
    calls: AtomicU64,
}

impl<M: DecisionModel> CountingModel<M> {
    pub fn new(inner: M) -> CountingModel<M> {
        CountingModel { inner, calls: AtomicU64::new(0) }
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<M: DecisionModel> DecisionModel for CountingModel<M> {
    fn decide(&self, prompt: &PromptBundle, sampling_control: u64) -> Result<StructuredRationale, ModelError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.decide(prompt, sampling_control)
    }

    fn declared_mode(&self) -> DeclaredMode {
        self.inner.declared_mode()
    }

    fn deterministic(&self) -> bool {
        self.inner.deterministic()
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}
