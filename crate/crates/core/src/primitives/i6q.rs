//! I6Q rationale-quality enforcement.
//!
//! Every pro/con argument must carry at least a minimum number of tokens
//! and a minimum type–token ratio. Failures trigger a re-prompt, at most
//! twice; a rationale that still fails is replaced by a forced ESCALATE
//! with a mechanical rationale citing the violations.
//!
//! Tokenization is deliberately the simplest auditable rule: lowercase,
//! split on non-alphanumeric runs.

use super::StructuredRationale;
use crate::decision::Decision;
use crate::model::{DecisionModel, ModelError, PromptBundle};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Enforcement thresholds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct I6qConfig {
    /// Floor on pro/con argument length, in tokens.
    pub min_argument_tokens: usize,
    /// Floor on argument lexical diversity (type–token ratio).
    pub min_ttr: f64,
    /// Re-prompts allowed before the forced escalation.
    pub max_retries: u32,
}

impl Default for I6qConfig {
    fn default() -> Self {
        I6qConfig { min_argument_tokens: 10, min_ttr: 0.4, max_retries: 2 }
    }
}

/// Why an argument failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum I6qReason {
    TooShort,
    LowDiversity,
}

/// One failing argument, by flat index (pro arguments first, then con).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct I6qFailure {
    pub argument_index: usize,
    pub reason: I6qReason,
}

/// Outcome of the check (and, after enforcement, the retry count used).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct I6qResult {
    pub passed: bool,
    pub failures: Vec<I6qFailure>,
    pub retry_count: u32,
}

fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

/// Type–token ratio over lowercased alphanumeric tokens; empty text is 0.
pub fn compute_ttr(text: &str) -> f64 {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return 0.0;
    }
    let distinct: HashSet<&str> = tokens.iter().map(|t| t.as_str()).collect();
    distinct.len() as f64 / tokens.len() as f64
}

/// Check every argument against the thresholds; failures name each
/// violating argument.
///
/// A structured rationale with no arguments at all is treated as one
/// zero-length argument (index 0, too short), so structured-mode adapters
/// cannot skip argumentation.
pub fn i6q_check(rationale: &StructuredRationale, config: &I6qConfig) -> I6qResult {
    let mut failures = Vec::new();
    let mut count = 0usize;
    for (index, argument) in rationale.arguments().enumerate() {
        count += 1;
        let tokens = tokenize(argument);
        if tokens.len() < config.min_argument_tokens {
            failures.push(I6qFailure { argument_index: index, reason: I6qReason::TooShort });
            continue;
        }
        let distinct: HashSet<&str> = tokens.iter().map(|t| t.as_str()).collect();
        let ttr = distinct.len() as f64 / tokens.len() as f64;
        if ttr < config.min_ttr {
            failures.push(I6qFailure { argument_index: index, reason: I6qReason::LowDiversity });
        }
    }
    if count == 0 {
        failures.push(I6qFailure { argument_index: 0, reason: I6qReason::TooShort });
    }
    I6qResult { passed: failures.is_empty(), failures, retry_count: 0 }
}

/// Mechanical rationale for a forced escalation, citing the violations.
pub fn forced_escalation_rationale(failures: &[I6qFailure], retries: u32) -> String {
    let detail: Vec<String> = failures
        .iter()
        .map(|f| {
            let reason = match f.reason {
                I6qReason::TooShort => "below the minimum token floor",
                I6qReason::LowDiversity => "below the lexical diversity floor",
            };
            format!("argument {} {}", f.argument_index, reason)
        })
        .collect();
    format!(
        "Rationale quality enforcement failed after {retries} retries: {}. The case is escalated \
         because the model could not produce a reviewable rationale; it would return to normal \
         processing if a rationale met the argument length and diversity floors.",
        detail.join("; ")
    )
}

/// Run the check-and-retry loop over an already-obtained first attempt.
///
/// `retry` is called with the 1-based retry number and the failures of the
/// previous attempt, and must produce the next attempt. After `max_retries`
/// failed retries the result is a forced ESCALATE whose rationale cites the
/// I6Q failure.
pub fn enforce_with_retries<F>(
    initial: StructuredRationale,
    config: &I6qConfig,
    mut retry: F,
) -> Result<(StructuredRationale, I6qResult), ModelError>
where
    F: FnMut(u32, &[I6qFailure]) -> Result<StructuredRationale, ModelError>,
{
    let mut attempt = initial;
    let mut retries = 0u32;
    loop {
        let mut result = i6q_check(&attempt, config);
        result.retry_count = retries;
        if result.passed {
            return Ok((attempt, result));
        }
        if retries >= config.max_retries {
            let rationale = StructuredRationale {
                decision: Decision::Escalate,
                rationale_text: forced_escalation_rationale(&result.failures, retries),
                pro_arguments: Vec::new(),
                con_arguments: Vec::new(),
            };
            return Ok((rationale, result));
        }
        retries += 1;
        attempt = retry(retries, &result.failures)?;
    }
}

/// Standalone enforcement: call the model, then retry with quality
/// feedback appended to the prompt.
///
/// Transport failures surface as errors, distinct from I6Q failures.
pub fn i6q_enforce(
    prompt: &PromptBundle,
    model: &dyn DecisionModel,
    sampling_control: u64,
    config: &I6qConfig,
) -> Result<(StructuredRationale, I6qResult), ModelError> {
    let initial = model.decide(prompt, sampling_control)?;
    enforce_with_retries(initial, config, |retry_number, failures| {
        let feedback = prompt.with_feedback(&feedback_text(failures), retry_number);
        model.decide(&feedback, sampling_control)
    })
}

/// Feedback line appended to the prompt on re-prompt.
pub fn feedback_text(failures: &[I6qFailure]) -> String {
    let detail: Vec<String> = failures
        .iter()
        .map(|f| {
            format!(
                "argument {} {}",
                f.argument_index,
                match f.reason {
                    I6qReason::TooShort => "is too short",
                    I6qReason::LowDiversity => "is too repetitive",
                }
            )
        })
        .collect();
    format!("Previous rationale failed quality checks: {}.", detail.join("; "))
}
