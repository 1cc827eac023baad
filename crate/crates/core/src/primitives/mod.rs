//! The non-gate enforcement primitives.
//!
//! - [`i6q`] — rationale-quality enforcement: minimum argument length and
//!   lexical diversity with a bounded retry loop.
//! - [`cefl`] — externalized candidate generation: candidates are produced
//!   before and independently of scoring, then selected deterministically.
//! - [`entropy`] — commit–reveal entropy integrity: the sampling seed is
//!   hash-committed before scoring and revealed only after scores are
//!   final.

pub mod cefl;
pub mod entropy;
pub mod i6q;

pub use cefl::{default_candidate_scorer, CandidateSet, CeflError, Selection};
pub use entropy::{CommitmentAudit, EntropyCommitment, IntegrityError};
pub use i6q::{compute_ttr, i6q_check, i6q_enforce, I6qConfig, I6qFailure, I6qReason, I6qResult};

use crate::decision::Decision;
use serde::{Deserialize, Serialize};

/// A model decision with its rationale and structured pro/con arguments.
///
/// Argument lists may be empty only when the adapter declares free-text
/// mode; structured-mode adapters must argue both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredRationale {
    pub decision: Decision,
    pub rationale_text: String,
    pub pro_arguments: Vec<String>,
    pub con_arguments: Vec<String>,
}

impl StructuredRationale {
    /// Arguments in I6Q index order: pro arguments first, then con.
    pub fn arguments(&self) -> impl Iterator<Item = &String> {
        self.pro_arguments.iter().chain(self.con_arguments.iter())
    }
}
