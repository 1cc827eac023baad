//! The four stress transforms.
//!
//! Transforms apply to a baseline (S0) set exactly once; pre-stress values
//! are preserved on each case so ground truth remains recomputable and
//! delta tracking stays possible. Stress draws come from their own purpose
//! stream, independent of the generation draws.

use super::{Case, CaseSet, CasegenError, OriginalValues, StressTag};
use crate::rng::{stream_rng, StreamPurpose};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Constants of the stress transforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressParams {
    /// S1: half-width of the uniform risk perturbation.
    pub s1_epsilon: f64,
    /// S1: fraction of draws forced to the positive sign.
    pub s1_positive_bias: f64,
    /// S2: completeness multiplier range.
    pub s2_multiplier: (f64, f64),
    /// S2: inclusive range of flags removed.
    pub s2_flags_removed: (usize, usize),
    /// S3: probability a case is pulled to a gate boundary.
    pub s3_probability: f64,
    /// S3: gate risk thresholds mass concentrates around.
    pub s3_thresholds: [f64; 4],
    /// S3: half-width of the jitter around the chosen threshold.
    pub s3_risk_jitter: f64,
    /// S3: centre and half-width of the completeness band.
    pub s3_completeness_center: f64,
    pub s3_completeness_jitter: f64,
}

impl Default for StressParams {
    fn default() -> Self {
        StressParams {
            s1_epsilon: 0.15,
            s1_positive_bias: 0.90,
            s2_multiplier: (0.3, 0.7),
            s2_flags_removed: (1, 2),
            s3_probability: 0.60,
            s3_thresholds: [0.3, 0.7, 0.85, 0.9],
            s3_risk_jitter: 0.05,
            s3_completeness_center: 0.3,
            s3_completeness_jitter: 0.10,
        }
    }
}

/// Apply a stress transform to a baseline set.
///
/// S0 returns the input unchanged (still tagged S0, no originals stored).
/// Applying any transform to an already-stressed set is an error.
pub fn apply_stress(set: &CaseSet, condition: StressTag, seed: u64) -> Result<CaseSet, CasegenError> {
    apply_stress_with(set, condition, seed, &StressParams::default())
}

/// [`apply_stress`] with explicit transform constants.
pub fn apply_stress_with(
    set: &CaseSet,
    condition: StressTag,
    seed: u64,
    params: &StressParams,
) -> Result<CaseSet, CasegenError> {
    if set.condition() != StressTag::S0 {
        return Err(CasegenError::AlreadyStressed(set.condition()));
    }
    if condition == StressTag::S0 {
        return Ok(set.clone());
    }
    let cases = set
        .cases()
        .iter()
        .enumerate()
        .map(|(index, case)| {
            let mut rng = stream_rng(seed, index as u64, StreamPurpose::Stress);
            let mut out = case.clone();
            out.original_values = Some(OriginalValues {
                risk: case.risk,
                completeness: case.completeness,
                flags: case.flags.clone(),
            });
            match condition {
                StressTag::S0 => unreachable!("handled above"),
                StressTag::S1 => {
                    let raw = rng.gen_range(-params.s1_epsilon..params.s1_epsilon);
                    let positive = rng.gen::<f64>() < params.s1_positive_bias;
                    let eps = if positive { raw.abs() } else { -raw.abs() };
                    out.risk = (out.risk + eps).clamp(0.0, 1.0);
                }
                StressTag::S2 => {
                    let (lo, hi) = params.s2_multiplier;
                    out.completeness *= rng.gen_range(lo..hi);
                    let (kmin, kmax) = params.s2_flags_removed;
                    let k = rng.gen_range(kmin..=kmax);
                    for _ in 0..k {
                        if out.flags.is_empty() {
                            break;
                        }
                        let victim = rng.gen_range(0..out.flags.len());
                        out.flags.remove(victim);
                    }
                }
                StressTag::S3 => {
                    if rng.gen::<f64>() < params.s3_probability {
                        let threshold =
                            params.s3_thresholds[rng.gen_range(0..params.s3_thresholds.len())];
                        let jitter = rng.gen_range(-params.s3_risk_jitter..params.s3_risk_jitter);
                        out.risk = (threshold + jitter).clamp(0.0, 1.0);
                        let cjitter = rng
                            .gen_range(-params.s3_completeness_jitter..params.s3_completeness_jitter);
                        out.completeness =
                            (params.s3_completeness_center + cjitter).clamp(0.0, 1.0);
                    }
                }
            }
            debug_assert!(out.check_invariants());
            out
        })
        .collect::<Vec<Case>>();
    Ok(CaseSet::new(condition, set.seed(), cases))
}
