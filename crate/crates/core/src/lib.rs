//! Statistical forensics for generated text.
//!
//! A detection language model scores every token of a document by its
//! probability, its rank in the predicted distribution, and the entropy of
//! that distribution. Text sampled from the head of a model's distribution
//! ranks conspicuously high; human text reaches into the tail more often.
//! On top of the per-token scores this crate provides the top-k bucket
//! overlay and histograms, document-level logistic-regression
//! discriminators, aggregate rank statistics, and a source-level
//! cross-validation harness.

pub mod annotation;
pub mod classifier;
mod error;
pub mod experiment;
pub mod model;
pub mod scoring;
pub mod stats;
pub mod tokenize;

pub use error::{Error, Result};
