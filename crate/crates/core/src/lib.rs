//! Deterministic millimeter-wave beam-management simulator and beam-prediction
//! library.
//!
//! The crate models a downlink between a base station carrying a uniform
//! planar array and a user terminal carrying a uniform linear array. It
//! provides:
//!
//! - a clustered spatial channel with a Ricean line-of-sight component
//!   ([`channel`]),
//! - steering-vector codebooks and noisy RSRP measurements ([`beamforming`]),
//! - exhaustive and two-level hierarchical beam search ([`beamsearch`]),
//! - labelled dataset generation for beam prediction ([`dataset`]),
//! - a linear-softmax predictor, a configurable fully-connected baseline, and
//!   complexity accounting ([`ml`]),
//! - accuracy / overhead / RSRP evaluation and scenario suites ([`eval`]).
//!
//! Every randomized quantity is driven by an explicit seed: one master seed
//! fans out to per-sample and per-measurement streams through the hash in
//! [`seeding`], so any artifact regenerates bit-identically from its recorded
//! seed. Argmax ties always resolve to the lowest index, and all beam, sample,
//! and feature indices are zero-based.

pub mod beamforming;
pub mod beamsearch;
pub mod channel;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod hashing;
pub mod ml;
pub mod seeding;

pub use beamforming::{AngleGrid, Codebook, HbsStructure, LinkBudget, RsrpReport, RxMode};
pub use beamsearch::SearchResult;
pub use channel::{ArrayGeometry, ChannelInstance, ChannelProfile, DropConfig, PathComponent, ProfileName, Sector};
pub use config::SimParams;
pub use dataset::{Dataset, FeatureStats, Sample, ScenarioId, ScenarioSpec, Split};
pub use error::{Error, Result};
pub use eval::{KpiReport, Method, ScenarioReport, SuiteReport};
pub use ml::{
    ComplexityReport, EpochStats, FcNetwork, LayerSpec, LinearSoftmaxModel, LossKind, Predictor,
    TrainConfig,
};
