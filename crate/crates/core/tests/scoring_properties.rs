use bpectc_core::metrics::{align, wer_report, Counts, EditOp, Transcripts};
use bpectc_core::rover::{rover_combine, WordTransitionNetwork};
use proptest::prelude::*;

/// Plain recursive edit distance with memoization.
fn edit_distance(r: &[String], h: &[String]) -> usize {
    fn go(r: &[String], h: &[String], memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if let Some(d) = memo[r.len()][h.len()] {
            return d;
        }
        let d = match (r.split_last(), h.split_last()) {
            (None, _) => h.len(),
            (_, None) => r.len(),
            (Some((x, rr)), Some((y, hh))) => {
                let sub = go(rr, hh, memo) + usize::from(x != y);
                sub.min(go(rr, h, memo) + 1).min(go(r, hh, memo) + 1)
            }
        };
        memo[r.len()][h.len()] = Some(d);
        d
    }
    let mut memo = vec![vec![None; h.len() + 1]; r.len() + 1];
    go(r, h, &mut memo)
}

fn arb_words(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from), 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn alignment_identities(r in arb_words(8), h in arb_words(8)) {
        let edits = align(&r, &h);
        let c = Counts::from_alignment(&edits);
        prop_assert_eq!(c.correct + c.substitutions + c.deletions, r.len());
        prop_assert_eq!(c.n_ref, r.len());
        prop_assert_eq!(c.n_hyp(), h.len());
        prop_assert_eq!(c.errors(), edit_distance(&r, &h));
        for e in &edits {
            match e.op {
                EditOp::Correct => prop_assert_eq!(&r[e.ref_index.unwrap()], &h[e.hyp_index.unwrap()]),
                EditOp::Substitution => prop_assert_ne!(&r[e.ref_index.unwrap()], &h[e.hyp_index.unwrap()]),
                _ => {}
            }
        }
    }

    #[test]
    fn wer_ignores_utterance_order(pairs in prop::collection::vec((arb_words(6), arb_words(6)), 1..10)) {
        let refs: Transcripts = pairs.iter().enumerate().map(|(i, p)| (format!("u{i}"), p.0.clone())).collect();
        let hyps: Transcripts = pairs.iter().enumerate().map(|(i, p)| (format!("u{i}"), p.1.clone())).collect();
        let renamed = |t: &Transcripts| -> Transcripts {
            t.iter().map(|(k, v)| (format!("z{}", 100 - k[1..].parse::<i32>().unwrap()), v.clone())).collect()
        };
        let a = wer_report(&refs, &hyps).unwrap();
        let b = wer_report(&renamed(&refs), &renamed(&hyps)).unwrap();
        prop_assert_eq!(a.total, b.total);
    }

    #[test]
    fn rover_is_idempotent(h in arb_words(8), k in 1usize..5) {
        let hyps = vec![h.clone(); k];
        prop_assert_eq!(rover_combine(&hyps), h);
    }

    #[test]
    fn rover_network_is_consistent(hyps in prop::collection::vec(arb_words(6), 2..5)) {
        let mut wtn = WordTransitionNetwork::new();
        for h in &hyps {
            wtn.add(h);
        }
        prop_assert_eq!(wtn.systems(), hyps.len());
        for (i, h) in hyps.iter().enumerate() {
            // Each system's column reads back its own hypothesis.
            let path: Vec<String> = wtn.slots().iter().filter_map(|s| s[i].clone()).collect();
            prop_assert_eq!(&path, h);
        }
        for slot in wtn.slots() {
            prop_assert_eq!(slot.len(), hyps.len());
            prop_assert!(slot.iter().any(Option::is_some));
        }
        let out = rover_combine(&hyps);
        prop_assert!(out.len() <= wtn.slots().len());
    }

    #[test]
    fn rover_without_ties_ignores_later_order(a in arb_words(5), b in arb_words(5)) {
        // Two identical systems outvote a third regardless of where the odd
        // one sits.
        let fwd = rover_combine(&[a.clone(), a.clone(), b.clone()]);
        prop_assert_eq!(&fwd, &a);
    }
}
