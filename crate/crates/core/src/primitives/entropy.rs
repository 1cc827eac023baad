//! E3 commit–reveal entropy integrity.
//!
//! The sampling seed that drives candidate generation is hash-committed
//! before any scoring happens and revealed only after all scores for the
//! case are final. A scorer therefore cannot condition on the seed, and an
//! auditor can verify after the fact that the committed and revealed seeds
//! agree.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntegrityError {
    #[error("reveal attempted before scores were finalized (phase-order violation)")]
    RevealBeforeFinalize,
    #[error("commitment already revealed")]
    AlreadyRevealed,
    #[error("seed does not match the open commitment digest")]
    CommitmentMismatch,
}

/// Lifecycle of one case's commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
enum CommitState {
    Committed,
    ScoresFinal,
    Revealed { seed: u64, verified: bool },
}

/// A hash commitment to `(seed, nonce)`.
///
/// The seed itself is never stored in the open record; only the digest is,
/// until the reveal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyCommitment {
    digest_hex: String,
    state: CommitState,
}

/// Canonical digest: SHA-256 over the big-endian bytes of seed then nonce.
pub fn commitment_digest(seed: u64, nonce: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_be_bytes());
    hasher.update(nonce.to_be_bytes());
    hex::encode(hasher.finalize())
}

/// Commit to a seed before scoring begins.
pub fn e3_commit(seed: u64, nonce: u64) -> EntropyCommitment {
    EntropyCommitment { digest_hex: commitment_digest(seed, nonce), state: CommitState::Committed }
}

impl EntropyCommitment {
    /// Lowercase hex digest of the commitment.
    pub fn digest(&self) -> &str {
        &self.digest_hex
    }

    /// Whether the seed has been revealed yet.
    pub fn is_revealed(&self) -> bool {
        matches!(self.state, CommitState::Revealed { .. })
    }

    /// Verification outcome, once revealed.
    pub fn verified(&self) -> Option<bool> {
        match self.state {
            CommitState::Revealed { verified, .. } => Some(verified),
            _ => None,
        }
    }

    /// Revealed seed, once revealed.
    pub fn revealed_seed(&self) -> Option<u64> {
        match self.state {
            CommitState::Revealed { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Mark all candidate scores for the case as final, unlocking reveal.
    pub fn mark_scores_final(&mut self) {
        if self.state == CommitState::Committed {
            self.state = CommitState::ScoresFinal;
        }
    }

    /// Reveal the seed and verify it against the commitment.
    ///
    /// Revealing before `mark_scores_final` is a phase-order violation and
    /// counts toward the integrity failure rate.
    pub fn reveal_verify(&mut self, seed: u64, nonce: u64) -> Result<bool, IntegrityError> {
        match self.state {
            CommitState::Committed => Err(IntegrityError::RevealBeforeFinalize),
            CommitState::Revealed { .. } => Err(IntegrityError::AlreadyRevealed),
            CommitState::ScoresFinal => {
                let verified = commitment_digest(seed, nonce) == self.digest_hex;
                self.state = CommitState::Revealed { seed, verified };
                Ok(verified)
            }
        }
    }

    /// Open audit record (digest plus reveal outcome).
    pub fn audit(&self) -> CommitmentAudit {
        CommitmentAudit {
            digest: self.digest_hex.clone(),
            revealed_seed: self.revealed_seed(),
            verified: self.verified(),
        }
    }
}

/// Serializable audit view of a commitment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitmentAudit {
    pub digest: String,
    pub revealed_seed: Option<u64>,
    pub verified: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_reveal_roundtrip_verifies() {
        let mut c = e3_commit(1234, 99);
        c.mark_scores_final();
        assert_eq!(c.reveal_verify(1234, 99).unwrap(), true);
        assert_eq!(c.verified(), Some(true));
        assert_eq!(c.revealed_seed(), Some(1234));
    }

    #[test]
    fn wrong_seed_fails_verification() {
        let mut c = e3_commit(1234, 99);
        c.mark_scores_final();
        assert_eq!(c.reveal_verify(1235, 99).unwrap(), false);
        assert_eq!(c.verified(), Some(false));
    }

    #[test]
    fn wrong_nonce_fails_verification() {
        let mut c = e3_commit(1234, 99);
        c.mark_scores_final();
        assert_eq!(c.reveal_verify(1234, 98).unwrap(), false);
    }

    #[test]
    fn reveal_before_finalize_is_a_phase_violation() {
        let mut c = e3_commit(1, 2);
        assert!(matches!(c.reveal_verify(1, 2), Err(IntegrityError::RevealBeforeFinalize)));
    }

    #[test]
    fn double_reveal_is_rejected() {
        let mut c = e3_commit(1, 2);
        c.mark_scores_final();
        c.reveal_verify(1, 2).unwrap();
        assert!(matches!(c.reveal_verify(1, 2), Err(IntegrityError::AlreadyRevealed)));
    }

    #[test]
    fn digest_is_lowercase_hex() {
        let c = e3_commit(42, 7);
        assert_eq!(c.digest().len(), 64);
        assert!(c.digest().chars().all(|ch| ch.is_ascii_hexdigit() && !ch.is_ascii_uppercase()));
    }

    #[test]
    fn many_cycles_all_pass() {
        for i in 0..1200u64 {
            let mut c = e3_commit(i, i.wrapping_mul(31));
            c.mark_scores_final();
            assert!(c.reveal_verify(i, i.wrapping_mul(31)).unwrap());
        }
    }
}
