//! Statistics for sentiment-annotated discussion threads.
//!
//! A discussion thread is an ordered chain of comments, each carrying two
//! classifier outputs: a positive probability `p_pos` and a subjective
//! probability `p_sub`, both in `[0, 1]`. This crate computes the
//! order-sensitive statistics of such chains — value histograms, per-thread
//! mean distributions, subjective cluster sizes under a threshold sweep,
//! consecutive-pair correlation ratios and PMI maps, mutual information with
//! shuffling baselines, and three-step correlations — together with the
//! randomized null models (thread shuffle, global shuffle, IID resample)
//! used as references.
//!
//! The [`synth`] module generates datasets with known structure (IID draws
//! from a marginal, first-order Markov chains over bin centers) and provides
//! exact analytic oracles for every estimator, so the whole pipeline can be
//! validated end to end without any external data.
//!
//! All randomized operations take an explicit [`nullmodel::Seed`] and use a
//! fixed, documented generator (ChaCha12), so outputs are reproducible
//! bit-for-bit given the seed.

pub mod cli;
pub mod correlations;
pub mod estimators;
pub mod ingest;
pub mod model;
pub mod nullmodel;
pub mod synth;

mod error;

pub use error::{Error, Result};
pub use model::{BinSpec, Comment, Dataset, EdgeRule, Field, Thread};
