//! Governance-enforcement harness for synthetic banking decision pipelines.
//!
//! The crate generates seeded synthetic decision cases, runs them through a
//! text-only regime (R1) and a mechanically enforced regime (R2) over a
//! pluggable decision model, scores deferral rationales with rule-based
//! checklists, and computes governance metrics (CDL, DIU, GOR, FSR, FVS,
//! ESD) together with task metrics and bootstrap statistics.
//!
//! Module map:
//!
//! - [`casegen`] — deterministic case generation, ground truth, stress
//!   transforms, calibration reporting.
//! - [`gates`] — ordered mechanical hard gates with threshold-citing
//!   rationale templates and audit records.
//! - [`primitives`] — the non-gate enforcement primitives: I6Q rationale
//!   quality, CEFL externalized candidate generation, and E3 commit–reveal
//!   entropy integrity.
//! - [`model`] — the decision-model adapter contract, prompt bundles, the
//!   scripted surrogate profiles, and a generic remote HTTP adapter.
//! - [`regimes`] — the R1 and R2 pipelines with ablation switches A1–A4.
//! - [`scoring`] — checklist sub-scoring of deferral rationales and the
//!   observational metrics CDL and DIU.
//! - [`interventions`] — the interventional metrics FSR, FVS, and ESD.
//! - [`stats`] — multiclass MCC, macro-F1, accuracy, bootstrap confidence
//!   intervals, and Holm–Bonferroni adjustment.
//! - [`runner`] — experiment-grid orchestration, ablations, sensitivity
//!   sweeps, report emission, and manifest verification.
//!
//! All randomness flows through named, per-case derived streams
//! ([`rng::stream_rng`]), so every run is byte-reproducible for a given
//! seed and results are independent of execution schedule.

pub mod casegen;
pub mod config;
pub mod decision;
pub mod gates;
pub mod interventions;
pub mod jsonl;
pub mod model;
pub mod primitives;
pub mod regimes;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod scoring;
pub mod stats;

pub use decision::Decision;
pub use scalar::Scalar;

/// Concrete scalar used throughout the pipeline types.
///
/// The statistics kernels in [`stats`] are generic over [`Scalar`]; the
/// pipeline itself is pinned to `f64` so that serialized records and
/// rendered rationale templates are byte-stable across runs.
pub type Real = f64;
