//! File formats, corpus-level pipeline steps and the `bpectc` command line
//! on top of `bpectc-core`.

pub mod formats;
pub mod io;
pub mod manifest;
pub mod pipeline;

pub use bpectc_core as core;
