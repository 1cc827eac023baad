//! The R1 and R2 decision pipelines over a pluggable model, with the four
//! ablation switches.
//!
//! R1 (text-only governance): one model call with the policy as prompt; no
//! gates, no quality enforcement, no candidate externalization, no entropy
//! protocol.
//!
//! R2 (mechanical governance) phase order per case:
//!
//! 1. pre-model hard gates — a hit decides the case with zero model calls;
//! 2. entropy commit (unless the seed is deliberately observable, A3);
//! 3. candidate generation — externalized, 3 seeded draws (agent-internal
//!    single call under A2);
//! 4. deterministic candidate selection;
//! 5. rationale-quality enforcement with bounded retries (skipped under A1);
//! 6. post-model completeness override K0_11 (DEFER outcomes become
//!    ESCALATE under A4, and model DEFERs are coerced likewise);
//! 7. entropy reveal and verification.

use crate::casegen::{Case, CaseSet, GroundTruth, StressTag};
use crate::decision::Decision;
use crate::gates::{GateId, GateSet};
use crate::model::{build_prompt, default_policy, DecisionModel, ModelError, PromptBundle};
use crate::primitives::cefl::{cefl_generate, cefl_select, default_candidate_scorer, CeflError};
use crate::primitives::entropy::{e3_commit, CommitmentAudit, IntegrityError};
use crate::primitives::i6q::{enforce_with_retries, feedback_text, I6qConfig, I6qResult};
use crate::primitives::StructuredRationale;
use crate::rng::{mix_sampling_control, stream_rng, StreamPurpose};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Governance regimes under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    R1,
    R2,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::R1, Regime::R2];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::R1 => "R1",
            Regime::R2 => "R2",
        }
    }

    pub fn parse(name: &str) -> Option<Regime> {
        Self::ALL.iter().copied().find(|r| r.as_str() == name)
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ablation switches; the experiment design flips at most one at a time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    /// A1: disable rationale-quality enforcement.
    pub disable_i6q: bool,
    /// A2: return candidate generation to the agent (single call).
    pub agent_internal_cefl: bool,
    /// A3: make the entropy seed observable (no commit–reveal).
    pub observable_entropy: bool,
    /// A4: disable the deferral option entirely.
    pub disable_defer: bool,
}

impl AblationConfig {
    pub const NONE: AblationConfig = AblationConfig {
        disable_i6q: false,
        agent_internal_cefl: false,
        observable_entropy: false,
        disable_defer: false,
    };

    pub fn active_count(&self) -> usize {
        [self.disable_i6q, self.agent_internal_cefl, self.observable_entropy, self.disable_defer]
            .iter()
            .filter(|b| **b)
            .count()
    }

    /// The paper's design ablates one primitive at a time.
    pub fn validate(&self) -> Result<(), RunError> {
        if self.active_count() > 1 {
            return Err(RunError::AblationConflict);
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match (self.disable_i6q, self.agent_internal_cefl, self.observable_entropy, self.disable_defer) {
            (true, _, _, _) => "A1",
            (_, true, _, _) => "A2",
            (_, _, true, _) => "A3",
            (_, _, _, true) => "A4",
            _ => "control",
        }
    }

    pub fn by_label(label: &str) -> Option<AblationConfig> {
        let mut cfg = AblationConfig::NONE;
        match label {
            "control" => {}
            "A1" => cfg.disable_i6q = true,
            "A2" => cfg.agent_internal_cefl = true,
            "A3" => cfg.observable_entropy = true,
            "A4" => cfg.disable_defer = true,
            _ => return None,
        }
        Some(cfg)
    }
}

/// Where a record's decision came from; exactly one source per record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSource {
    Gate { id: GateId },
    Model,
    I6qForced,
    K011Override,
}

/// One candidate with its deterministic selection score. Score records
/// carry no seed-derived fields: the scorer never sees the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub decision: Decision,
    pub score: f64,
}

/// Audit of the candidate phase: all candidates, the selected index, the
/// class spread, and the per-candidate entropy draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateAudit {
    pub candidates: Vec<ScoredCandidate>,
    pub selected_index: usize,
    pub spread: f64,
    pub generation_seeds: Vec<u64>,
}

/// One regime's output for one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub case_id: String,
    pub regime: Regime,
    pub decision: Decision,
    pub rationale_text: String,
    pub source: DecisionSource,
    pub retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_audit: Option<CandidateAudit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commitment_audit: Option<CommitmentAudit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i6q_audit: Option<I6qResult>,
    pub ground_truth: GroundTruth,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    /// True when A4 coerced a DEFER outcome into ESCALATE.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub defer_coerced: bool,
}

impl DecisionRecord {
    #[doc(hidden)]
    pub fn for_tests(
        case_id: &str,
        regime: Regime,
        decision: Decision,
        rationale_text: &str,
        source: DecisionSource,
    ) -> DecisionRecord {
        DecisionRecord {
            case_id: case_id.to_string(),
            regime,
            decision,
            rationale_text: rationale_text.to_string(),
            source,
            retries: 0,
            candidate_audit: None,
            commitment_audit: None,
            i6q_audit: None,
            ground_truth: GroundTruth { label: decision, deterministic: false },
            parse_error: None,
            defer_coerced: false,
        }
    }

    /// Mechanically decided (pre-model gate or post-model override).
    pub fn is_mechanical(&self) -> bool {
        self.source.is_mechanical()
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integrity(#[from] IntegrityError),
    #[error("candidate phase failed: {0}")]
    Cefl(String),
    #[error("at most one ablation may be active per experiment cell")]
    AblationConflict,
}

impl From<CeflError> for RunError {
    fn from(e: CeflError) -> RunError {
        match e {
            CeflError::Model(m) => RunError::Model(m),
            other => RunError::Cefl(other.to_string()),
        }
    }
}

/// Shared pipeline configuration.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub policy_text: String,
    pub i6q: I6qConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { policy_text: default_policy().to_string(), i6q: I6qConfig::default() }
    }
}

/// Per-case entropy inputs for the commit–reveal protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntropyInputs {
    pub seed: u64,
    pub nonce: u64,
}

impl EntropyInputs {
    /// Derive the default entropy inputs for a case index.
    pub fn derive(master_seed: u64, case_index: u64) -> EntropyInputs {
        let seed = stream_rng(master_seed, case_index, StreamPurpose::EntropySeed).gen();
        let nonce = stream_rng(master_seed, case_index, StreamPurpose::EntropyNonce).gen();
        EntropyInputs { seed, nonce }
    }
}

/// Run the text-only regime on one case with the standard prompt.
pub fn run_r1(case: &Case, model: &dyn DecisionModel, config: &PipelineConfig) -> Result<DecisionRecord, RunError> {
    let prompt = build_prompt(case, &config.policy_text);
    run_r1_prompted(case, &prompt, model)
}

/// R1 over an explicit prompt bundle (used by the framing intervention).
///
/// Exactly one model call. Malformed output becomes a logged parse-error
/// ESCALATE record rather than a crash; transport failures propagate.
pub fn run_r1_prompted(
    case: &Case,
    prompt: &PromptBundle,
    model: &dyn DecisionModel,
) -> Result<DecisionRecord, RunError> {
    match model.decide(prompt, 0) {
        Ok(rationale) => Ok(DecisionRecord {
            case_id: case.id.clone(),
            regime: Regime::R1,
            decision: rationale.decision,
            rationale_text: rationale.rationale_text,
            source: DecisionSource::Model,
            retries: 0,
            candidate_audit: None,
            commitment_audit: None,
            i6q_audit: None,
            ground_truth: case.ground_truth,
            parse_error: None,
            defer_coerced: false,
        }),
        Err(ModelError::Malformed { detail }) => Ok(DecisionRecord {
            case_id: case.id.clone(),
            regime: Regime::R1,
            decision: Decision::Escalate,
            rationale_text: format!("[parse error] model output could not be interpreted: {detail}"),
            source: DecisionSource::Model,
            retries: 0,
            candidate_audit: None,
            commitment_audit: None,
            i6q_audit: None,
            ground_truth: case.ground_truth,
            parse_error: Some(detail),
            defer_coerced: false,
        }),
        Err(transport) => Err(transport.into()),
    }
}

/// Run the mechanical regime on one case with the standard prompt.
pub fn run_r2(
    case: &Case,
    model: &dyn DecisionModel,
    ablation: &AblationConfig,
    entropy: EntropyInputs,
    config: &PipelineConfig,
) -> Result<DecisionRecord, RunError> {
    let prompt = build_prompt(case, &config.policy_text);
    run_r2_prompted(case, &prompt, model, ablation, entropy, config)
}

/// R2 over an explicit prompt bundle (used by the interventions).
pub fn run_r2_prompted(
    case: &Case,
    prompt: &PromptBundle,
    model: &dyn DecisionModel,
    ablation: &AblationConfig,
    entropy: EntropyInputs,
    config: &PipelineConfig,
) -> Result<DecisionRecord, RunError> {
    ablation.validate()?;
    let gates = GateSet::default_gates();

    // Phase 1: pre-model gates. A hit never reaches the model.
    if let Some(gate) = gates.evaluate_pre_gates(case) {
        let (decision, coerced) = apply_defer_policy(gate.decision, ablation);
        return Ok(DecisionRecord {
            case_id: case.id.clone(),
            regime: Regime::R2,
            decision,
            rationale_text: gate.rationale_text,
            source: DecisionSource::Gate { id: gate.gate_id },
            retries: 0,
            candidate_audit: None,
            commitment_audit: None,
            i6q_audit: None,
            ground_truth: case.ground_truth,
            parse_error: None,
            defer_coerced: coerced,
        });
    }

    // Phase 2: entropy commit. Under A3 the seed is left observable
    // instead: no commitment exists and the prompt carries the seed.
    let mut commitment = (!ablation.observable_entropy).then(|| e3_commit(entropy.seed, entropy.nonce));
    let mut prompt = prompt.clone();
    if ablation.observable_entropy {
        prompt.observable_seed = Some(entropy.seed);
    }

    // Phases 3–4: candidate generation and deterministic selection.
    let (initial, candidate_audit) = if ablation.agent_internal_cefl {
        // A2: the agent proposes and ranks internally in one call; the
        // external pre-generation guarantee is gone, so there is no
        // candidate audit to record.
        let rationale = match model.decide(&prompt, mix_sampling_control(entropy.seed, 0)) {
            Ok(r) => r,
            Err(ModelError::Malformed { detail }) => malformed_placeholder(&detail),
            Err(e) => return Err(e.into()),
        };
        (rationale, None)
    } else {
        let set = match &commitment {
            Some(c) => cefl_generate(&prompt, model, c, entropy.seed, entropy.nonce)?,
            // A3: same externalized generation, driven by the open seed.
            None => open_generate(&prompt, model, entropy.seed)?,
        };
        let selection = cefl_select(&set, default_candidate_scorer).map_err(RunError::from)?;
        let audit = CandidateAudit {
            candidates: set
                .candidates
                .iter()
                .map(|c| ScoredCandidate { decision: c.decision, score: default_candidate_scorer(c) })
                .collect(),
            selected_index: selection.index,
            spread: set.spread,
            generation_seeds: set.generation_seeds.clone(),
        };
        (set.candidates[selection.index].clone(), Some(audit))
    };

    // Candidate scores are final once selection is done.
    if let Some(c) = commitment.as_mut() {
        c.mark_scores_final();
    }

    // Phase 5: rationale-quality enforcement.
    let (enforced, i6q_result) = if ablation.disable_i6q {
        (initial, None)
    } else {
        let (rationale, result) = enforce_with_retries(initial, &config.i6q, |retry_number, failures| {
            let feedback = prompt.with_feedback(&feedback_text(failures), retry_number);
            let control = mix_sampling_control(entropy.seed, 8 + retry_number as u64);
            match model.decide(&feedback, control) {
                Ok(r) => Ok(r),
                // A parse failure consumes the retry it occurred on.
                Err(ModelError::Malformed { detail }) => Ok(malformed_placeholder(&detail)),
                Err(e) => Err(e),
            }
        })?;
        (rationale, Some(result))
    };

    let forced = i6q_result.as_ref().map_or(false, |r| !r.passed);
    let retries = i6q_result.as_ref().map_or(0, |r| r.retry_count);

    // Phase 6: post-model completeness override. Applies to model
    // decisions; a forced escalation already left the model's control.
    let mut source = if forced { DecisionSource::I6qForced } else { DecisionSource::Model };
    let mut decision = enforced.decision;
    let mut rationale_text = enforced.rationale_text;
    if !forced {
        if let Some(gate) = gates.evaluate_post_gate(case, decision) {
            let overridden = match (ablation.disable_defer, gate.decision) {
                (true, Decision::Defer) => Decision::Escalate,
                (_, d) => d,
            };
            decision = overridden;
            rationale_text = gate.rationale_text;
            source = DecisionSource::K011Override;
        }
    }

    // A4: no record may carry DEFER.
    let mut defer_coerced = false;
    if source == DecisionSource::Model {
        let (d, coerced) = apply_defer_policy(decision, ablation);
        decision = d;
        defer_coerced = coerced;
    } else if source == DecisionSource::K011Override && ablation.disable_defer {
        defer_coerced = decision == Decision::Escalate && case.risk <= 0.7;
    }

    // Phase 7: reveal and verify the committed seed.
    let commitment_audit = match commitment.as_mut() {
        Some(c) => {
            c.reveal_verify(entropy.seed, entropy.nonce)?;
            Some(c.audit())
        }
        None => None,
    };

    Ok(DecisionRecord {
        case_id: case.id.clone(),
        regime: Regime::R2,
        decision,
        rationale_text,
        source,
        retries,
        candidate_audit,
        commitment_audit,
        i6q_audit: i6q_result,
        ground_truth: case.ground_truth,
        parse_error: None,
        defer_coerced,
    })
}

fn malformed_placeholder(detail: &str) -> StructuredRationale {
    StructuredRationale {
        decision: Decision::Escalate,
        rationale_text: format!("[unparseable model output: {detail}]"),
        pro_arguments: Vec::new(),
        con_arguments: Vec::new(),
    }
}

/// Candidate generation under A3: externalized draws from the open seed,
/// no commitment to check.
fn open_generate(
    prompt: &PromptBundle,
    model: &dyn DecisionModel,
    seed: u64,
) -> Result<crate::primitives::cefl::CandidateSet, RunError> {
    use crate::primitives::cefl::{CandidateSet, CANDIDATE_COUNT};
    let mut candidates = Vec::with_capacity(CANDIDATE_COUNT);
    let mut generation_seeds = Vec::with_capacity(CANDIDATE_COUNT);
    for index in 0..CANDIDATE_COUNT {
        let salt = mix_sampling_control(seed, index as u64);
        generation_seeds.push(salt);
        match model.decide(prompt, salt) {
            Ok(candidate) => candidates.push(candidate),
            Err(ModelError::Malformed { detail }) => candidates.push(malformed_placeholder(&detail)),
            Err(e) => return Err(e.into()),
        }
    }
    let decisions: Vec<Decision> = candidates.iter().map(|c| c.decision).collect();
    let spread = CandidateSet::spread_of(&decisions);
    Ok(CandidateSet { candidates, generation_seeds, spread })
}

fn apply_defer_policy(decision: Decision, ablation: &AblationConfig) -> (Decision, bool) {
    if ablation.disable_defer && decision == Decision::Defer {
        (Decision::Escalate, true)
    } else {
        (decision, false)
    }
}

/// Per-case failure inside a cell run; one failure never aborts the cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellError {
    pub case_id: String,
    pub error: String,
}

/// One experiment cell: every case of one condition under one regime.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub regime: Regime,
    pub condition: StressTag,
    pub ablation: AblationConfig,
    pub records: Vec<DecisionRecord>,
    pub errors: Vec<CellError>,
}

impl CellRun {
    /// Gate Override Rate: mechanically decided cases over all cases.
    pub fn gor(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.is_mechanical()).count() as f64 / self.records.len() as f64
    }

    /// Pre-model gate rate alone (excluding the post-model override).
    pub fn pre_gate_rate(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records
            .iter()
            .filter(|r| matches!(r.source, DecisionSource::Gate { .. }))
            .count() as f64
            / self.records.len() as f64
    }
}

/// Run one cell. Records come back in case order regardless of `parallel`,
/// so cell output is schedule-independent.
pub fn run_cell(
    cases: &CaseSet,
    regime: Regime,
    model: &dyn DecisionModel,
    ablation: &AblationConfig,
    master_seed: u64,
    config: &PipelineConfig,
    parallel: bool,
) -> Result<CellRun, RunError> {
    ablation.validate()?;
    let run_one = |(index, case): (usize, &Case)| -> Result<DecisionRecord, (String, RunError)> {
        let result = match regime {
            Regime::R1 => run_r1(case, model, config),
            Regime::R2 => {
                let entropy = EntropyInputs::derive(master_seed, index as u64);
                run_r2(case, model, ablation, entropy, config)
            }
        };
        result.map_err(|e| (case.id.clone(), e))
    };

    let outcomes: Vec<Result<DecisionRecord, (String, RunError)>> = if parallel {
        cases.cases().par_iter().enumerate().map(run_one).collect()
    } else {
        cases.cases().iter().enumerate().map(run_one).collect()
    };

    let mut records = Vec::with_capacity(outcomes.len());
    let mut errors = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(record) => records.push(record),
            Err((case_id, error)) => errors.push(CellError { case_id, error: error.to_string() }),
        }
    }
    Ok(CellRun { regime, condition: cases.condition(), ablation: *ablation, records, errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casegen::{generate_cases, GenParams};
    use crate::model::scripted::ScriptedSurrogate;
    use crate::model::CountingModel;

    fn cases(n: usize) -> CaseSet {
        generate_cases(n, 42, &GenParams::default()).unwrap()
    }

    #[test]
    fn r1_makes_exactly_one_model_call() {
        let set = cases(5);
        let model = CountingModel::new(ScriptedSurrogate::vacuous());
        let config = PipelineConfig::default();
        for case in set.cases() {
            model.reset();
            run_r1(case, &model, &config).unwrap();
            assert_eq!(model.call_count(), 1);
        }
    }

    #[test]
    fn pre_gated_cases_never_reach_the_model() {
        let set = cases(300);
        let model = CountingModel::new(ScriptedSurrogate::vacuous());
        let config = PipelineConfig::default();
        let gates = GateSet::default_gates();
        for (index, case) in set.cases().iter().enumerate() {
            if gates.evaluate_pre_gates(case).is_some() {
                model.reset();
                let record = run_r2(
                    case,
                    &model,
                    &AblationConfig::NONE,
                    EntropyInputs::derive(42, index as u64),
                    &config,
                )
                .unwrap();
                assert_eq!(model.call_count(), 0, "gate short-circuit violated for {}", case.id);
                assert!(matches!(record.source, DecisionSource::Gate { .. }));
                assert!(record.commitment_audit.is_none());
            }
        }
    }

    #[test]
    fn r2_records_carry_verified_commitments() {
        let set = cases(60);
        let model = ScriptedSurrogate::vacuous();
        let config = PipelineConfig::default();
        let run = run_cell(&set, Regime::R2, &model, &AblationConfig::NONE, 42, &config, false).unwrap();
        for record in &run.records {
            if !matches!(record.source, DecisionSource::Gate { .. }) {
                let audit = record.commitment_audit.as_ref().expect("commitment recorded");
                assert_eq!(audit.verified, Some(true));
                let candidates = record.candidate_audit.as_ref().expect("candidates recorded");
                assert_eq!(candidates.candidates.len(), 3);
            }
        }
        assert!(run.errors.is_empty());
    }

    #[test]
    fn k011_overrides_low_completeness_model_decisions() {
        let set = cases(300);
        let model = ScriptedSurrogate::specific();
        let config = PipelineConfig::default();
        let gates = GateSet::default_gates();
        let mut seen_defer = false;
        let mut seen_escalate = false;
        for (index, case) in set.cases().iter().enumerate() {
            if gates.evaluate_pre_gates(case).is_none() && case.completeness < 0.3 {
                let record = run_r2(
                    case,
                    &model,
                    &AblationConfig::NONE,
                    EntropyInputs::derive(42, index as u64),
                    &config,
                )
                .unwrap();
                if record.source == DecisionSource::K011Override {
                    if case.risk > 0.7 {
                        assert_eq!(record.decision, Decision::Escalate);
                        seen_escalate = true;
                    } else {
                        assert_eq!(record.decision, Decision::Defer);
                        seen_defer = true;
                    }
                }
            }
        }
        assert!(seen_defer, "expected at least one K0_11 deferral in the sample");
        let _ = seen_escalate;
    }

    #[test]
    fn a4_cells_contain_no_deferrals() {
        let set = cases(300);
        let model = ScriptedSurrogate::vacuous();
        let config = PipelineConfig::default();
        let ablation = AblationConfig { disable_defer: true, ..AblationConfig::NONE };
        let run = run_cell(&set, Regime::R2, &model, &ablation, 42, &config, false).unwrap();
        assert!(run.records.iter().all(|r| r.decision != Decision::Defer));
        assert!(run.records.iter().any(|r| r.defer_coerced), "coercion should occur somewhere");
    }

    #[test]
    fn combined_ablations_are_rejected() {
        let ablation = AblationConfig { disable_i6q: true, disable_defer: true, ..AblationConfig::NONE };
        assert!(matches!(ablation.validate(), Err(RunError::AblationConflict)));
    }

    #[test]
    fn cell_runs_are_schedule_independent() {
        let set = cases(40);
        let model = ScriptedSurrogate::vacuous();
        let config = PipelineConfig::default();
        let seq = run_cell(&set, Regime::R2, &model, &AblationConfig::NONE, 42, &config, false).unwrap();
        let par = run_cell(&set, Regime::R2, &model, &AblationConfig::NONE, 42, &config, true).unwrap();
        assert_eq!(seq.records, par.records);
    }

    #[test]
    fn identical_runs_serialize_identically() {
        let set = cases(30);
        let model = ScriptedSurrogate::vacuous();
        let config = PipelineConfig::default();
        let a = run_cell(&set, Regime::R2, &model, &AblationConfig::NONE, 42, &config, false).unwrap();
        let b = run_cell(&set, Regime::R2, &model, &AblationConfig::NONE, 42, &config, false).unwrap();
        assert_eq!(crate::jsonl::to_string(&a.records), crate::jsonl::to_string(&b.records));
    }

    #[test]
    fn r1_gor_is_zero() {
        let set = cases(50);
        let model = ScriptedSurrogate::vacuous();
        let config = PipelineConfig::default();
        let run = run_cell(&set, Regime::R1, &model, &AblationConfig::NONE, 42, &config, false).unwrap();
        assert_eq!(run.gor(), 0.0);
    }

    struct MalformedModel;
    impl DecisionModel for MalformedModel {
        fn decide(&self, _prompt: &PromptBundle, _control: u64) -> Result<StructuredRationale, ModelError> {
            Err(ModelError::Malformed { detail: "not json".to_string() })
        }
        fn name(&self) -> &str {
            "test:malformed"
        }
    }

    #[test]
    fn malformed_output_becomes_a_parse_error_record() {
        let set = cases(1);
        let record = run_r1(&set.cases()[0], &MalformedModel, &PipelineConfig::default()).unwrap();
        assert_eq!(record.decision, Decision::Escalate);
        assert!(record.parse_error.is_some());
    }

    #[test]
    fn r2_malformed_output_burns_retries_then_escalates() {
        let set = cases(10);
        let config = PipelineConfig::default();
        let gates = GateSet::default_gates();
        let case = set
            .cases()
            .iter()
            .find(|c| gates.evaluate_pre_gates(c).is_none())
            .expect("some case is ungated");
        let record = run_r2(
            case,
            &MalformedModel,
            &AblationConfig::NONE,
            EntropyInputs::derive(42, 0),
            &config,
        )
        .unwrap();
        assert_eq!(record.source, DecisionSource::I6qForced);
        assert_eq!(record.decision, Decision::Escalate);
        assert_eq!(record.retries, 2);
    }
}
