//! CEFL: externalized candidate generation with deterministic selection.
//!
//! Exactly K candidates are generated before scoring begins, with
//! stochastic sampling driven by the committed (hidden) entropy seed;
//! selection is a deterministic argmax over a pure content scorer, ties
//! broken by lowest index. Because the set is fixed before scoring and the
//! generator does not consult scoring-phase state, no candidate can be
//! suppressed from downstream review.

use super::entropy::{commitment_digest, EntropyCommitment};
use super::i6q::compute_ttr;
use super::StructuredRationale;
use crate::model::{DecisionModel, ModelError, PromptBundle};
use crate::rng::mix_sampling_control;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Candidates generated per case.
pub const CANDIDATE_COUNT: usize = 3;

#[derive(Debug, Error)]
pub enum CeflError {
    #[error("entropy commitment was already revealed at generation time (integrity violation)")]
    RevealedEntropy,
    #[error("seed/nonce do not match the commitment at generation time")]
    CommitmentMismatch,
    #[error("candidate set must contain exactly {expected} candidates, got {actual}")]
    WrongCandidateCount { expected: usize, actual: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Exactly K pre-generated candidates plus their entropy draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateSet {
    pub candidates: Vec<StructuredRationale>,
    /// Per-candidate sampling-control words derived from the committed seed.
    pub generation_seeds: Vec<u64>,
    /// Decision-class diversity: (distinct classes − 1) / (K − 1).
    pub spread: f64,
}

impl CandidateSet {
    /// Diversity of a decision list: (distinct − 1) / (K − 1), in [0, 1].
    pub fn spread_of(decisions: &[crate::Decision]) -> f64 {
        if decisions.len() < 2 {
            return 0.0;
        }
        let mut distinct: Vec<crate::Decision> = decisions.to_vec();
        distinct.sort();
        distinct.dedup();
        (distinct.len() - 1) as f64 / (decisions.len() - 1) as f64
    }
}

/// Generate the candidate set for a case.
///
/// The committed seed drives per-candidate sampling salts; candidate
/// construction happens strictly before any scoring. A malformed model
/// response becomes an unparseable placeholder candidate (empty argument
/// lists), which the quality check downstream will reject — consuming a
/// retry there rather than aborting the pipeline here.
pub fn cefl_generate(
    prompt: &PromptBundle,
    model: &dyn DecisionModel,
    commitment: &EntropyCommitment,
    seed: u64,
    nonce: u64,
) -> Result<CandidateSet, CeflError> {
    if commitment.is_revealed() {
        return Err(CeflError::RevealedEntropy);
    }
    if commitment_digest(seed, nonce) != commitment.digest() {
        return Err(CeflError::CommitmentMismatch);
    }
    let mut candidates = Vec::with_capacity(CANDIDATE_COUNT);
    let mut generation_seeds = Vec::with_capacity(CANDIDATE_COUNT);
    for index in 0..CANDIDATE_COUNT {
        let salt = mix_sampling_control(seed, index as u64);
        generation_seeds.push(salt);
        match model.decide(prompt, salt) {
            Ok(candidate) => candidates.push(candidate),
            Err(ModelError::Malformed { detail }) => candidates.push(StructuredRationale {
                decision: crate::Decision::Escalate,
                rationale_text: format!("[unparseable model output: {detail}]"),
                pro_arguments: Vec::new(),
                con_arguments: Vec::new(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let decisions: Vec<crate::Decision> = candidates.iter().map(|c| c.decision).collect();
    let spread = CandidateSet::spread_of(&decisions);
    Ok(CandidateSet { candidates, generation_seeds, spread })
}

/// The selected candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub index: usize,
    pub score: f64,
}

/// Deterministic argmax selection; ties break to the lowest index.
///
/// The scorer must be a pure function of candidate content — it never sees
/// the entropy seed, which is still sealed at selection time.
pub fn cefl_select<F>(set: &CandidateSet, scorer: F) -> Result<Selection, CeflError>
where
    F: Fn(&StructuredRationale) -> f64,
{
    if set.candidates.len() != CANDIDATE_COUNT {
        return Err(CeflError::WrongCandidateCount {
            expected: CANDIDATE_COUNT,
            actual: set.candidates.len(),
        });
    }
    let mut best = Selection { index: 0, score: f64::NEG_INFINITY };
    for (index, candidate) in set.candidates.iter().enumerate() {
        let score = scorer(candidate);
        if score > best.score {
            best = Selection { index, score };
        }
    }
    Ok(best)
}

/// Default content scorer: favors substantial, lexically diverse
/// rationales that cite concrete values.
///
/// Pure over the candidate text and decision; no pipeline state enters.
pub fn default_candidate_scorer(candidate: &StructuredRationale) -> f64 {
    let text = &candidate.rationale_text;
    let tokens = text.split_whitespace().count() as f64;
    let length_part = (tokens / 40.0).min(1.0);
    let ttr_part = compute_ttr(text);
    let lower = text.to_lowercase();
    let hints = [
        lower.chars().any(|c| c.is_ascii_digit()),
        lower.contains("flag"),
        lower.contains("threshold"),
    ];
    let hint_part = hints.iter().filter(|h| **h).count() as f64 / hints.len() as f64;
    0.5 * length_part + 0.3 * ttr_part + 0.2 * hint_part
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::entropy::e3_commit;
    use crate::Decision;

    fn candidate(decision: Decision, text: &str) -> StructuredRationale {
        StructuredRationale {
            decision,
            rationale_text: text.to_string(),
            pro_arguments: vec![text.to_string()],
            con_arguments: vec![text.to_string()],
        }
    }

    fn set_of(decisions: [Decision; 3]) -> CandidateSet {
        let candidates = decisions.iter().map(|d| candidate(*d, "text")).collect();
        let spread = CandidateSet::spread_of(&decisions);
        CandidateSet { candidates, generation_seeds: vec![1, 2, 3], spread }
    }

    #[test]
    fn spread_formula() {
        assert_eq!(
            CandidateSet::spread_of(&[Decision::Approve, Decision::Defer, Decision::Decline]),
            1.0
        );
        assert_eq!(
            CandidateSet::spread_of(&[Decision::Approve, Decision::Approve, Decision::Approve]),
            0.0
        );
        assert_eq!(
            CandidateSet::spread_of(&[Decision::Approve, Decision::Approve, Decision::Defer]),
            0.5
        );
    }

    #[test]
    fn select_is_argmax() {
        let set = set_of([Decision::Approve, Decision::Defer, Decision::Decline]);
        let scores = [0.2, 0.9, 0.5];
        let selection = cefl_select(&set, |c| scores[set.candidates.iter().position(|x| std::ptr::eq(x, c)).unwrap()])
            .unwrap();
        assert_eq!(selection.index, 1);
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let set = set_of([Decision::Approve, Decision::Defer, Decision::Decline]);
        let scores = [0.5, 0.5, 0.1];
        let selection = cefl_select(&set, |c| scores[set.candidates.iter().position(|x| std::ptr::eq(x, c)).unwrap()])
            .unwrap();
        assert_eq!(selection.index, 0);
    }

    #[test]
    fn selection_is_deterministic() {
        let set = set_of([Decision::Approve, Decision::Defer, Decision::Decline]);
        let a = cefl_select(&set, default_candidate_scorer).unwrap();
        let b = cefl_select(&set, default_candidate_scorer).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generation_rejects_revealed_entropy() {
        let mut commitment = e3_commit(10, 20);
        commitment.mark_scores_final();
        commitment.reveal_verify(10, 20).unwrap();
        let prompt = PromptBundle::empty_for_tests();
        let model = crate::model::scripted::ScriptedSurrogate::specific();
        let err = cefl_generate(&prompt, &model, &commitment, 10, 20).unwrap_err();
        assert!(matches!(err, CeflError::RevealedEntropy));
    }

    #[test]
    fn generation_rejects_mismatched_seed() {
        let commitment = e3_commit(10, 20);
        let prompt = PromptBundle::empty_for_tests();
        let model = crate::model::scripted::ScriptedSurrogate::specific();
        let err = cefl_generate(&prompt, &model, &commitment, 11, 20).unwrap_err();
        assert!(matches!(err, CeflError::CommitmentMismatch));
    }

    #[test]
    fn wrong_candidate_count_is_rejected() {
        let mut set = set_of([Decision::Approve, Decision::Defer, Decision::Decline]);
        set.candidates.pop();
        assert!(matches!(
            cefl_select(&set, default_candidate_scorer),
            Err(CeflError::WrongCandidateCount { expected: 3, actual: 2 })
        ));
    }
}
