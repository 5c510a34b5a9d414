use bpectc::formats::*;
use bpectc_core::bpe::{learn_from_utterances, Mode};
use bpectc_core::ctc::{simulate_posteriorgram, Posteriorgram, SimConfig};
use bpectc_core::lm::{train_ngram_kn, KnOptions};
use bpectc_core::synth::{generate_corpus, CorpusConfig};
use bpectc_core::textnorm::{Alphabet, UnknownPolicy};
use proptest::prelude::*;

fn corpus(n: usize, seed: u64) -> Vec<bpectc_core::textnorm::Utterance> {
    let cfg = CorpusConfig { utterances: n, ..CorpusConfig::default() };
    generate_corpus(&cfg, &Alphabet::english(), seed).unwrap().utterances
}

#[test]
fn corpus_file_round_trip() {
    let utts = corpus(200, 1);
    let back = parse_corpus(&format_corpus(&utts), &Alphabet::english(), UnknownPolicy::Strict).unwrap();
    assert_eq!(back, utts);
}

#[test]
fn inventory_round_trip_both_modes() {
    let utts = corpus(300, 2);
    for mode in [Mode::Subword, Mode::Crossword] {
        let inv = learn_from_utterances(&utts, 150, mode, &Alphabet::english()).unwrap().inventory;
        let text = format_inventory(&inv);
        let back = parse_inventory(&text).unwrap();
        assert_eq!(back, inv);
        assert_eq!(format_inventory(&back), text);
        for u in utts.iter().take(50) {
            assert_eq!(back.encode_serialized(u).unwrap(), inv.encode_serialized(u).unwrap());
        }
    }
}

#[test]
fn arpa_round_trip_preserves_scores() {
    let sents: Vec<Vec<String>> = corpus(400, 3).into_iter().map(|u| u.words).collect();
    for order in 1..=4 {
        let lm = train_ngram_kn(&sents, order, &[], KnOptions::default()).unwrap();
        let text = format_arpa(&lm);
        let back = parse_arpa(&text).unwrap();
        assert_eq!(back.order(), order);
        assert_eq!(back.vocab().symbols(), lm.vocab().symbols());
        for sent in sents.iter().take(40) {
            let ids: Vec<u32> = sent.iter().map(|w| lm.vocab().id(w).unwrap()).collect();
            let mut ctx = vec![lm.vocab().bos()];
            for &w in &ids {
                let h = &ctx[ctx.len().saturating_sub(order - 1)..];
                assert!((lm.score(h, w) - back.score(h, w)).abs() < 1e-4);
                ctx.push(w);
            }
        }
        assert_eq!(format_arpa(&back), text);
    }
}

#[test]
fn arpa_count_mismatch_is_reported() {
    let sents = vec![vec!["a".to_string(), "b".to_string()]];
    let lm = train_ngram_kn(&sents, 2, &[], KnOptions::default()).unwrap();
    let text = format_arpa(&lm).replacen("ngram 2=", "ngram 2=9", 1);
    assert!(matches!(parse_arpa(&text), Err(FormatError::CountMismatch { order: 2, .. })));
}

#[test]
fn simulated_posteriorgrams_round_trip() {
    let utts = corpus(20, 4);
    let inv = learn_from_utterances(&utts, 60, Mode::Subword, &Alphabet::english()).unwrap().inventory;
    for (i, u) in utts.iter().enumerate() {
        let p = simulate_posteriorgram(u, &inv, &SimConfig { noise: 0.3, ..SimConfig::default() }, i as u64).unwrap();
        let bin = parse_posteriorgram(&format_posteriorgram_binary(&p)).unwrap();
        assert_eq!(bin.units(), p.units());
        for (a, b) in bin.values().iter().zip(p.values()) {
            assert_eq!(*a, *b as f32 as f64);
        }
        let text = parse_posteriorgram(format_posteriorgram_text(&p).as_bytes()).unwrap();
        for (a, b) in text.values().iter().zip(p.values()) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300));
        }
    }
}

#[test]
fn truncated_binary_posteriorgram_is_rejected() {
    let p = Posteriorgram::from_rows(vec!["<blk>".into(), "a".into()], &[vec![0.25, 0.75]], 0.03).unwrap();
    let mut bytes = format_posteriorgram_binary(&p);
    bytes.pop();
    assert!(parse_posteriorgram(&bytes).is_err());
}

fn arb_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..6, 1usize..12).prop_flat_map(|(v, t)| {
        prop::collection::vec(prop::collection::vec(1e-12f64..1.0, v), t).prop_map(|rows| {
            rows.into_iter()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    r.into_iter().map(|x| x / s).collect()
                })
                .collect()
        })
    })
}

proptest! {
    #[test]
    fn binary_posteriorgram_is_bit_exact_for_f32(rows in arb_rows()) {
        let units: Vec<String> = ["<blk>", "a", "b", "c", "d", "e"][..rows[0].len()].iter().map(|s| s.to_string()).collect();
        let rows32: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f32 as f64).collect()).collect();
        if let Ok(p) = Posteriorgram::from_rows(units, &rows32, 0.01) {
            let bytes = format_posteriorgram_binary(&p);
            let back = parse_posteriorgram(&bytes).unwrap();
            prop_assert_eq!(back.values(), p.values());
            prop_assert_eq!(format_posteriorgram_binary(&back), bytes);
        }
    }
}
