//! Open-vocabulary unit learning and CTC decoding.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the algorithms:
//!
//! - [`textnorm`]: transcript normalization and the subword / crossword
//!   preprocessing schemes.
//! - [`bpe`]: merge-table learning, segmentation and detokenization.
//! - [`lm`]: the incremental language-model contract and an interpolated
//!   Kneser-Ney n-gram model.
//! - [`ctc`]: posteriorgrams, collapse, greedy and prefix beam search, the
//!   forward algorithm and an exhaustive decoder used as an oracle.
//! - [`wfst`]: token, lexicon and grammar transducers, composition and beam
//!   Viterbi search.
//! - [`metrics`]: WER alignment and reports, unseen-word analysis.
//! - [`rover`]: word-transition-network voting across systems.
//! - [`synth`]: deterministic synthetic transcripts for desk-scale experiments.
//!
//! File formats and the command line live in the `bpectc` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bpe;
pub mod ctc;
pub mod lm;
pub mod metrics;
pub mod rover;
pub mod synth;
pub mod textnorm;
pub mod wfst;

mod logmath;

pub use logmath::{log_add, LN_10};
