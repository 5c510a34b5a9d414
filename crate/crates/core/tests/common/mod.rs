#![allow(dead_code)]

use bpectc_core::bpe::{Mode, UnitInventory};
use bpectc_core::ctc::Posteriorgram;
use bpectc_core::synth::{generate_corpus, CorpusConfig, SyntheticCorpus};
use bpectc_core::textnorm::Alphabet;
use proptest::prelude::*;

pub fn base_subword() -> UnitInventory {
    UnitInventory::base(Mode::Subword, Alphabet::english())
}

/// Normalized posteriorgram whose unit columns are the first `v - 1` units
/// of the base subword inventory.
pub fn posteriorgram(v: usize, weights: &[f64]) -> Posteriorgram {
    let units = base_subword().unit_table()[..v].to_vec();
    let rows: Vec<Vec<f64>> = weights
        .chunks(v)
        .map(|r| {
            let s: f64 = r.iter().sum();
            r.iter().map(|x| x / s).collect()
        })
        .collect();
    Posteriorgram::from_rows(units, &rows, 0.03).unwrap()
}

pub fn arb_posteriorgram(max_v: usize, max_t: usize) -> impl Strategy<Value = Posteriorgram> {
    (2..=max_v, 1..=max_t).prop_flat_map(|(v, t)| {
        prop::collection::vec(0.01f64..1.0, v * t).prop_map(move |w| posteriorgram(v, &w))
    })
}

pub fn corpus(utterances: usize, seed: u64) -> SyntheticCorpus {
    let cfg = CorpusConfig { utterances, ..CorpusConfig::default() };
    generate_corpus(&cfg, &Alphabet::english(), seed).unwrap()
}
