//! Core algorithms for predicting and explaining zero-shot cross-lingual
//! transfer.
//!
//! The crate is `no_std` and only needs an allocator. Everything that touches
//! the filesystem, the command line or threads lives in the `xfer` companion
//! crate; this crate holds the data model and the numerics:
//!
//! * [`corpus`]: languages, typological feature matrices, transfer score
//!   tables and the pair/feature filtering rules.
//! * [`distance`]: aggregated syntactic, geographic and genetic distances.
//! * [`stats`]: ranking with ties, Kruskal-Wallis, chi-squared tails,
//!   Pearson correlation and RMSE.
//! * [`encoding`]: ordinal and one-hot design matrices with column provenance.
//! * [`learn`]: linear regression, CART, random forest, gradient boosting,
//!   cross-validation and importance estimators.
//! * [`analysis`]: correlation tables, feature screening, ablation, baseline
//!   comparison, source ranking and category rules.
//!
//! Parallel work is expressed through the [`exec::Executor`] trait so that the
//! std crate can plug in a thread pool without changing results.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod corpus;
pub mod distance;
pub mod encoding;
pub mod exec;
pub mod learn;
pub mod rng;
pub mod stats;

pub use corpus::{
    FeatureDescriptor, FeatureGroup, FeatureMatrix, LangCode, Language, LanguageRegistry,
    ScoreTable, Task, TransferRecord,
};
pub use distance::{Component, PairDistances};
pub use encoding::{ColumnSpec, PairDataset, Side};
pub use learn::{FittedModel, ModelConfig, ModelKind};

pub use exec::{Executor, Sequential};

