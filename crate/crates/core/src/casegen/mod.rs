//! Deterministic synthetic case generation, ground truth, stress
//! transforms, and calibration reporting.
//!
//! Generation is embarrassingly parallel: every draw comes from a per-case
//! stream keyed by `(seed, case_index, purpose)`, and continuous variables
//! are sampled by inverse CDF over per-case uniforms. The inverse-CDF
//! construction matters for the sensitivity sweep: scaling the parameters
//! re-maps the same uniforms smoothly instead of re-rolling the sample.

mod ground_truth;
mod params;
mod stress;

pub use ground_truth::{assign_ground_truth, GroundTruth, GroundTruthRule, GroundTruthTable, RuleTableError};
pub use params::{FlagBases, GenParams, ParamsError};
pub use stress::{apply_stress, StressParams};

use crate::rng::{stream_rng, StreamPurpose};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CasegenError {
    #[error("cannot generate an empty case set (n = 0)")]
    EmptySet,
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("stress transform already applied (set is {0}, expected S0)")]
    AlreadyStressed(StressTag),
    #[error("calibration report requires a non-empty case set")]
    EmptyReport,
}

/// The five transaction task types, in generation rotation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    CreditApproval,
    FraudAlert,
    SanctionsScreening,
    AmlReview,
    ConcentrationRisk,
}

impl TaskType {
    pub const ALL: [TaskType; 5] = [
        TaskType::CreditApproval,
        TaskType::FraudAlert,
        TaskType::SanctionsScreening,
        TaskType::AmlReview,
        TaskType::ConcentrationRisk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::CreditApproval => "credit_approval",
            TaskType::FraudAlert => "fraud_alert",
            TaskType::SanctionsScreening => "sanctions_screening",
            TaskType::AmlReview => "aml_review",
            TaskType::ConcentrationRisk => "concentration_risk",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regulatory flags, in canonical (serialization and draw) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flag {
    #[serde(rename = "AML")]
    Aml,
    #[serde(rename = "KYC")]
    Kyc,
    #[serde(rename = "SANCTIONS")]
    Sanctions,
    #[serde(rename = "INSIDER")]
    Insider,
    #[serde(rename = "CONCENTRATION")]
    Concentration,
}

impl Flag {
    pub const ALL: [Flag; 5] =
        [Flag::Aml, Flag::Kyc, Flag::Sanctions, Flag::Insider, Flag::Concentration];

    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Aml => "AML",
            Flag::Kyc => "KYC",
            Flag::Sanctions => "SANCTIONS",
            Flag::Insider => "INSIDER",
            Flag::Concentration => "CONCENTRATION",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stress condition tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StressTag {
    S0,
    S1,
    S2,
    S3,
}

impl StressTag {
    pub const ALL: [StressTag; 4] = [StressTag::S0, StressTag::S1, StressTag::S2, StressTag::S3];

    pub fn as_str(self) -> &'static str {
        match self {
            StressTag::S0 => "S0",
            StressTag::S1 => "S1",
            StressTag::S2 => "S2",
            StressTag::S3 => "S3",
        }
    }

    pub fn parse(name: &str) -> Option<StressTag> {
        Self::ALL.iter().copied().find(|t| t.as_str() == name)
    }
}

impl fmt::Display for StressTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pre-stress copy of the fields a transform may alter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalValues {
    pub risk: f64,
    pub completeness: f64,
    pub flags: Vec<Flag>,
}

/// One synthetic banking decision case.
///
/// `flags` is kept sorted in canonical order so serialization is stable.
/// `original_values` is present iff a stress transform (S1–S3) was applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    pub task_type: TaskType,
    pub risk: f64,
    pub completeness: f64,
    pub flags: Vec<Flag>,
    pub amount: f64,
    pub jurisdiction: String,
    pub tenure: f64,
    pub counterparty_risk: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original_values: Option<OriginalValues>,
    pub ground_truth: GroundTruth,
}

impl Case {
    /// Number of distinct regulatory flags present.
    pub fn flag_count(&self) -> usize {
        self.flags.len()
    }

    /// Field-range invariants from the case contract.
    pub fn check_invariants(&self) -> bool {
        (0.0..=1.0).contains(&self.risk)
            && (0.0..=1.0).contains(&self.completeness)
            && (0.0..=1.0).contains(&self.counterparty_risk)
            && self.amount >= 0.0
            && self.tenure >= 0.0
            && self.flags.len() <= Flag::ALL.len()
    }
}

/// An immutable, condition-tagged collection of cases.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSet {
    condition: StressTag,
    seed: u64,
    cases: Vec<Case>,
}

impl CaseSet {
    pub fn new(condition: StressTag, seed: u64, cases: Vec<Case>) -> CaseSet {
        CaseSet { condition, seed, cases }
    }

    pub fn condition(&self) -> StressTag {
        self.condition
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

/// Generate `n` cases deterministically from `(seed, params)`.
///
/// Task types rotate through the canonical order, so counts are even
/// whenever `n` is divisible by five. Per-case draw order is fixed:
/// risk, completeness, amount, the five flags, tenure, counterparty risk,
/// jurisdiction.
pub fn generate_cases(n: usize, seed: u64, params: &GenParams) -> Result<CaseSet, CasegenError> {
    if n == 0 {
        return Err(CasegenError::EmptySet);
    }
    params.validate()?;

    let risk_dist = Beta::new(params.risk_alpha, params.risk_beta)
        .map_err(|e| ParamsError::OutOfRange(format!("risk beta: {e}")))?;
    let comp_dist = Beta::new(params.completeness_alpha, params.completeness_beta)
        .map_err(|e| ParamsError::OutOfRange(format!("completeness beta: {e}")))?;
    let cparty_dist = Beta::new(params.counterparty_alpha, params.counterparty_beta)
        .map_err(|e| ParamsError::OutOfRange(format!("counterparty beta: {e}")))?;
    let unit_normal =
        Normal::new(0.0, 1.0).map_err(|e| ParamsError::OutOfRange(format!("normal: {e}")))?;

    let flag_bases = [
        params.flag_bases.aml,
        params.flag_bases.kyc,
        params.flag_bases.sanctions,
        params.flag_bases.insider,
        params.flag_bases.concentration,
    ];

    let cases = (0..n)
        .map(|index| {
            let mut rng = stream_rng(seed, index as u64, StreamPurpose::CaseGen);
            let task_type = TaskType::ALL[index % TaskType::ALL.len()];

            let risk = risk_dist.inverse_cdf(unit_open(rng.gen::<f64>()));
            let completeness = comp_dist.inverse_cdf(unit_open(rng.gen::<f64>()));
            let amount = (params.amount_log_mean
                + params.amount_log_sd * unit_normal.inverse_cdf(unit_open(rng.gen::<f64>())))
            .exp();

            let mut flags = Vec::new();
            for (flag, base) in Flag::ALL.iter().zip(flag_bases) {
                let p = (base + params.flag_risk_slope * risk).clamp(0.0, 1.0);
                if rng.gen::<f64>() < p {
                    flags.push(*flag);
                }
            }

            let tenure = -(1.0 - rng.gen::<f64>()).ln() / params.tenure_rate;
            let counterparty_risk = cparty_dist.inverse_cdf(unit_open(rng.gen::<f64>()));
            let jurisdiction = params.jurisdictions
                [(rng.gen::<f64>() * params.jurisdictions.len() as f64) as usize % params.jurisdictions.len()]
            .clone();

            let ground_truth =
                GroundTruthTable::default_table().assign(risk, completeness, amount, &flags);

            Case {
                id: format!("case-{seed:08x}-{index:05}"),
                task_type,
                risk,
                completeness,
                flags,
                amount,
                jurisdiction,
                tenure,
                counterparty_risk,
                original_values: None,
                ground_truth,
            }
        })
        .collect();

    Ok(CaseSet::new(StressTag::S0, seed, cases))
}

/// Clamp a uniform draw away from the exact endpoints so inverse CDFs stay
/// finite.
fn unit_open(u: f64) -> f64 {
    u.clamp(1e-12, 1.0 - 1e-12)
}

/// Mean and sample standard deviation of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
}

fn moments(values: impl Iterator<Item = f64> + Clone) -> Moments {
    let n = values.clone().count();
    if n == 0 {
        return Moments { mean: 0.0, sd: 0.0 };
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return Moments { mean, sd: 0.0 };
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Moments { mean, sd: var.sqrt() }
}

/// Calibration statistics for one slice of the case set.
#[derive(Debug, Clone, Serialize)]
pub struct StatsRow {
    pub slice: String,
    pub n: usize,
    pub risk: Moments,
    pub completeness: Moments,
    pub flag_count: Moments,
}

/// Per-task-type and pooled dataset characteristics.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetStats {
    pub per_task: Vec<StatsRow>,
    pub pooled: StatsRow,
    /// Fraction of cases whose ground truth resolved deterministically.
    pub deterministic_fraction: f64,
    /// Fraction of cases a pre-model hard gate would decide.
    pub pre_gate_fraction: f64,
}

impl DatasetStats {
    /// Flat CSV rendering (one row per slice plus pooled).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "slice,n,risk_mean,risk_sd,completeness_mean,completeness_sd,flag_mean,flag_sd,gt_deterministic,pre_gate_rate\n",
        );
        for row in self.per_task.iter().chain(std::iter::once(&self.pooled)) {
            let (det, gate) = if row.slice == "all" {
                (format!("{:.6}", self.deterministic_fraction), format!("{:.6}", self.pre_gate_fraction))
            } else {
                (String::new(), String::new())
            };
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}\n",
                row.slice,
                row.n,
                row.risk.mean,
                row.risk.sd,
                row.completeness.mean,
                row.completeness.sd,
                row.flag_count.mean,
                row.flag_count.sd,
                det,
                gate,
            ));
        }
        out
    }
}

fn stats_row(slice: &str, cases: &[&Case]) -> StatsRow {
    StatsRow {
        slice: slice.to_string(),
        n: cases.len(),
        risk: moments(cases.iter().map(|c| c.risk)),
        completeness: moments(cases.iter().map(|c| c.completeness)),
        flag_count: moments(cases.iter().map(|c| c.flag_count() as f64)),
    }
}

/// Compute dataset characteristics: per-task-type and pooled moments,
/// ground-truth determinacy, and the pre-gate activation fraction.
pub fn calibration_report(set: &CaseSet) -> Result<DatasetStats, CasegenError> {
    if set.is_empty() {
        return Err(CasegenError::EmptyReport);
    }
    let gate_set = crate::gates::GateSet::default_gates();
    let per_task = TaskType::ALL
        .iter()
        .map(|t| {
            let slice: Vec<&Case> = set.cases().iter().filter(|c| c.task_type == *t).collect();
            stats_row(t.as_str(), &slice)
        })
        .collect();
    let all: Vec<&Case> = set.cases().iter().collect();
    let pooled = stats_row("all", &all);
    let deterministic_fraction = set
        .cases()
        .iter()
        .filter(|c| c.ground_truth.deterministic)
        .count() as f64
        / set.len() as f64;
    let pre_gate_fraction = set
        .cases()
        .iter()
        .filter(|c| gate_set.evaluate_pre_gates(c).is_some())
        .count() as f64
        / set.len() as f64;
    Ok(DatasetStats { per_task, pooled, deterministic_fraction, pre_gate_fraction })
}
