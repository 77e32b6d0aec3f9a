//! Whole-graph embeddings from two kinds of substructure features.
//!
//! Every graph in a dataset is described by
//!
//! * a **skeleton**: the set of anonymous random walks observed on it
//!   ([`walks`]), and
//! * a **component** vector: the set of frequent subgraph patterns it
//!   contains, mined with gSpan ([`miner`]).
//!
//! Both binary feature vectors are fed to a PV-DBOW style negative-sampling
//! objective ([`embed`]) that learns one dense vector per graph. The vectors
//! are then scored with an RBF-kernel SVM under repeated stratified k-fold
//! cross validation ([`classify`]). [`pipeline`] glues the stages together
//! with on-disk caching and is what the `skelcomp` binary drives.
//!
//! ```no_run
//! use skelcomp::pipeline::{run, PipelineConfig};
//!
//! let mut cfg = PipelineConfig::new("data", "MUTAG");
//! cfg.min_support = 0.15;
//! cfg.train.dim = 128;
//! let outcome = run(&cfg).unwrap();
//! println!("{}", outcome.report.summary_line());
//! ```

// `!(x > 0.0)` is used on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod embed;
pub mod error;
pub mod graph;
pub mod incidence;
pub mod miner;
pub mod pipeline;
pub mod seeding;
pub mod walks;

pub use error::{Error, ErrorClass};
pub use graph::{Graph, GraphDataset};
