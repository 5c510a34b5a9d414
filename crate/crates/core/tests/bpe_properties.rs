mod common;

use std::collections::BTreeSet;

use bpectc_core::bpe::{learn_from_utterances, Mode, UnitInventory};
use bpectc_core::synth::pseudo_words;
use bpectc_core::textnorm::{Alphabet, Utterance};
use proptest::prelude::*;

const MODES: [Mode; 2] = [Mode::Subword, Mode::Crossword];

#[test]
fn round_trip_on_synthetic_corpus() {
    let corpus = common::corpus(800, 3);
    let a = Alphabet::english();
    for mode in MODES {
        for n_ops in [0, 40, 200] {
            let inv = learn_from_utterances(&corpus.utterances, n_ops, mode, &a).unwrap().inventory;
            for u in &corpus.utterances {
                let units = inv.encode_serialized(u).unwrap();
                assert_eq!(inv.detokenize(&units).unwrap(), u.text(), "{mode} {n_ops}");
            }
        }
    }
}

#[test]
fn growth_determinism_and_prefix() {
    let corpus = common::corpus(400, 11);
    let a = Alphabet::english();
    for mode in MODES {
        let full = learn_from_utterances(&corpus.utterances, 150, mode, &a).unwrap();
        let again = learn_from_utterances(&corpus.utterances, 150, mode, &a).unwrap();
        assert_eq!(full.inventory, again.inventory);
        let base = UnitInventory::base(mode, a.clone()).len();
        let done = full.stopped_early.unwrap_or(150);
        assert_eq!(full.inventory.len(), base + done);
        for k in [0, 1, 17, 90] {
            let short = learn_from_utterances(&corpus.utterances, k, mode, &a).unwrap();
            assert_eq!(short.inventory.merges(), &full.inventory.merges()[..k]);
            assert_eq!(full.inventory.truncated(k), short.inventory);
        }
    }
}

#[test]
fn replaying_merges_reproduces_learning() {
    let corpus = common::corpus(300, 5);
    let a = Alphabet::english();
    for mode in MODES {
        let learned = learn_from_utterances(&corpus.utterances, 120, mode, &a).unwrap();
        let pairs = learned.inventory.merges().iter().map(|m| (m.left.clone(), m.right.clone()));
        let replayed = UnitInventory::from_merges(mode, a.clone(), pairs).unwrap();
        assert_eq!(replayed, learned.inventory);
        // The training text after learning is exactly what encoding produces.
        let encoded: Vec<_> = match mode {
            Mode::Subword => corpus
                .utterances
                .iter()
                .flat_map(|u| u.words.iter().map(|w| Utterance::from_words("", &[w], &a).unwrap()))
                .map(|u| replayed.encode(&u).unwrap())
                .collect(),
            Mode::Crossword => corpus.utterances.iter().map(|u| replayed.encode(u).unwrap()).collect(),
        };
        assert_eq!(encoded, learned.working);
    }
}

#[test]
fn unseen_words_remain_encodable() {
    let corpus = common::corpus(300, 9);
    let a = Alphabet::english();
    let vocab = corpus.vocabulary(&a);
    let fresh = pseudo_words(300, 77, &vocab);
    for mode in MODES {
        let inv = learn_from_utterances(&corpus.utterances, 150, mode, &a).unwrap().inventory;
        for w in &fresh {
            let u = Utterance::from_words("", &[w], &a).unwrap();
            let units = inv.encode_serialized(&u).unwrap();
            assert_eq!(inv.detokenize(&units).unwrap(), *w);
        }
    }
}

fn arb_utterances() -> impl Strategy<Value = Vec<Vec<String>>> {
    let word = prop_oneof![
        8 => "[abc]{1,5}",
        1 => Just("[noise]".to_string()),
        1 => "[ab]'[st]",
    ];
    prop::collection::vec(prop::collection::vec(word, 1..5), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn learning_invariants(sents in arb_utterances(), n_ops in 0usize..30) {
        let a = Alphabet::english();
        let utts: Vec<Utterance> = sents.iter().map(|s| Utterance::from_words("", s, &a).unwrap()).collect();
        for mode in MODES {
            let learned = learn_from_utterances(&utts, n_ops, mode, &a).unwrap();
            let inv = &learned.inventory;
            let base = UnitInventory::base(mode, a.clone()).len();
            prop_assert_eq!(inv.len(), base + learned.stopped_early.unwrap_or(n_ops));
            let distinct: BTreeSet<_> = inv.units().iter().collect();
            prop_assert_eq!(distinct.len(), inv.len());
            for u in &utts {
                let units = inv.encode_serialized(u).unwrap();
                prop_assert_eq!(inv.detokenize(&units).unwrap(), u.text());
                // Noise tokens are never absorbed into larger units.
                for w in u.words.iter().filter(|w| a.is_noise(w)) {
                    prop_assert!(units.iter().any(|x| x == w));
                }
            }
        }
    }
}
