//! Word error rate scoring and the unseen-word analysis.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("utterance ids present on only one side: {}", .0.join(", "))]
    MissingUtterance(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditOp {
    Correct,
    Substitution,
    Deletion,
    Insertion,
}

/// One alignment column with the reference and hypothesis positions it
/// consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edit {
    pub op: EditOp,
    pub ref_index: Option<usize>,
    pub hyp_index: Option<usize>,
}

/// Unit-cost Levenshtein alignment. Backtrace prefers correct, then
/// substitution, then deletion, then insertion.
pub fn align<R: AsRef<str>, H: AsRef<str>>(reference: &[R], hypothesis: &[H]) -> Vec<Edit> {
    let (n, m) = (reference.len(), hypothesis.len());
    let same = |i: usize, j: usize| reference[i].as_ref() == hypothesis[j].as_ref();
    let w = m + 1;
    let mut d = alloc::vec![0usize; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i;
    }
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = d[(i - 1) * w + j - 1] + usize::from(!same(i - 1, j - 1));
            d[i * w + j] = diag.min(d[(i - 1) * w + j] + 1).min(d[i * w + j - 1] + 1);
        }
    }
    let mut edits = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 && same(i - 1, j - 1) && d[(i - 1) * w + j - 1] == here {
            i -= 1;
            j -= 1;
            edits.push(Edit { op: EditOp::Correct, ref_index: Some(i), hyp_index: Some(j) });
        } else if i > 0 && j > 0 && d[(i - 1) * w + j - 1] + 1 == here {
            i -= 1;
            j -= 1;
            edits.push(Edit { op: EditOp::Substitution, ref_index: Some(i), hyp_index: Some(j) });
        } else if i > 0 && d[(i - 1) * w + j] + 1 == here {
            i -= 1;
            edits.push(Edit { op: EditOp::Deletion, ref_index: Some(i), hyp_index: None });
        } else {
            j -= 1;
            edits.push(Edit { op: EditOp::Insertion, ref_index: None, hyp_index: Some(j) });
        }
    }
    edits.reverse();
    edits
}

/// Error counts for one utterance or a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub n_ref: usize,
    pub correct: usize,
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
}

impl Counts {
    pub fn from_alignment(edits: &[Edit]) -> Self {
        let mut c = Self::default();
        for e in edits {
            match e.op {
                EditOp::Correct => c.correct += 1,
                EditOp::Substitution => c.substitutions += 1,
                EditOp::Deletion => c.deletions += 1,
                EditOp::Insertion => c.insertions += 1,
            }
        }
        c.n_ref = c.correct + c.substitutions + c.deletions;
        c
    }

    pub fn of<R: AsRef<str>, H: AsRef<str>>(reference: &[R], hypothesis: &[H]) -> Self {
        Self::from_alignment(&align(reference, hypothesis))
    }

    pub fn n_hyp(&self) -> usize {
        self.correct + self.substitutions + self.insertions
    }

    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    fn percent(&self, x: usize) -> Option<f64> {
        (self.n_ref > 0).then(|| 100.0 * x as f64 / self.n_ref as f64)
    }

    /// Percentages relative to the reference length; `None` when it is zero.
    pub fn wer(&self) -> Option<f64> {
        self.percent(self.errors())
    }

    pub fn sub_rate(&self) -> Option<f64> {
        self.percent(self.substitutions)
    }

    pub fn del_rate(&self) -> Option<f64> {
        self.percent(self.deletions)
    }

    pub fn ins_rate(&self) -> Option<f64> {
        self.percent(self.insertions)
    }
}

impl core::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Self) {
        self.n_ref += o.n_ref;
        self.correct += o.correct;
        self.substitutions += o.substitutions;
        self.deletions += o.deletions;
        self.insertions += o.insertions;
    }
}

/// Per-utterance and corpus-level counts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreReport {
    pub utterances: Vec<(String, Counts)>,
    pub total: Counts,
    /// Utterances whose reference is empty; their insertions are counted but
    /// they add nothing to the denominator.
    pub empty_references: Vec<String>,
}

impl ScoreReport {
    pub fn from_counts(mut utterances: Vec<(String, Counts)>) -> Self {
        utterances.sort_by(|a, b| a.0.cmp(&b.0));
        let mut total = Counts::default();
        let mut empty_references = Vec::new();
        for (id, c) in &utterances {
            total += *c;
            if c.n_ref == 0 {
                empty_references.push(id.clone());
            }
        }
        if !empty_references.is_empty() {
            log::warn!("{} utterance(s) have empty references", empty_references.len());
        }
        Self { utterances, total, empty_references }
    }
}

fn fmt_rate(r: Option<f64>) -> alloc::string::String {
    match r {
        Some(x) => alloc::format!("{x:.1}"),
        None => "n/a".into(),
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.total;
        writeln!(f, "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "N_ref", "Corr", "Sub%", "Del%", "Ins%", "WER%")?;
        writeln!(
            f,
            "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            t.n_ref,
            t.correct,
            fmt_rate(t.sub_rate()),
            fmt_rate(t.del_rate()),
            fmt_rate(t.ins_rate()),
            fmt_rate(t.wer())
        )
    }
}

/// Word lists keyed by utterance id.
pub type Transcripts = BTreeMap<String, Vec<String>>;

fn check_ids(refs: &Transcripts, hyps: &Transcripts) -> Result<(), MetricsError> {
    let missing: Vec<String> = refs
        .keys()
        .filter(|k| !hyps.contains_key(*k))
        .chain(hyps.keys().filter(|k| !refs.contains_key(*k)))
        .cloned()
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(MetricsError::MissingUtterance(missing))
    }
}

pub fn wer_report(refs: &Transcripts, hyps: &Transcripts) -> Result<ScoreReport, MetricsError> {
    check_ids(refs, hyps)?;
    let counts = refs.iter().map(|(id, r)| (id.clone(), Counts::of(r, &hyps[id]))).collect();
    Ok(ScoreReport::from_counts(counts))
}

/// Reference words outside the acoustic training vocabulary that the
/// hypothesis got right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UnseenReport {
    /// Correctly recognized unseen tokens, repeats included.
    pub tokens: usize,
    /// Distinct correctly recognized unseen words.
    pub words: BTreeSet<String>,
    /// Unseen tokens in the references, recognized or not.
    pub reference_tokens: usize,
}

impl UnseenReport {
    pub fn types(&self) -> usize {
        self.words.len()
    }
}

pub fn unseen_word_report(
    vocab: &BTreeSet<String>,
    refs: &Transcripts,
    hyps: &Transcripts,
) -> Result<UnseenReport, MetricsError> {
    check_ids(refs, hyps)?;
    let mut report = UnseenReport::default();
    for (id, r) in refs {
        report.reference_tokens += r.iter().filter(|w| !vocab.contains(*w)).count();
        for e in align(r, &hyps[id]) {
            if e.op == EditOp::Correct {
                let w = &r[e.ref_index.expect("correct edits have a reference word")];
                if !vocab.contains(w) {
                    report.tokens += 1;
                    report.words.insert(w.clone());
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn ops(r: &str, h: &str) -> Vec<EditOp> {
        align(&words(r), &words(h)).iter().map(|e| e.op).collect()
    }

    fn transcripts(pairs: &[(&str, &str)]) -> Transcripts {
        pairs.iter().map(|(id, w)| (id.to_string(), words(w))).collect()
    }

    #[test]
    fn single_substitution() {
        use EditOp::*;
        assert_eq!(ops("a b c", "a x c"), [Correct, Substitution, Correct]);
        let c = Counts::of(&words("a b c"), &words("a c"));
        assert_eq!((c.deletions, c.n_ref), (1, 3));
        assert!((c.wer().unwrap() - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_reference() {
        let c = Counts::of(&words(""), &words("a"));
        assert_eq!(c.insertions, 1);
        assert_eq!(c.wer(), None);
        let r = wer_report(&transcripts(&[("u1", ""), ("u2", "a b")]), &transcripts(&[("u1", "a"), ("u2", "a b")]))
            .unwrap();
        assert_eq!(r.empty_references, ["u1"]);
        assert_eq!(r.total.n_ref, 2);
        assert_eq!(r.total.wer(), Some(50.0));
    }

    #[test]
    fn tie_break_prefers_substitution_then_deletion() {
        use EditOp::*;
        assert_eq!(ops("a b", "c"), [Deletion, Substitution]);
        assert_eq!(ops("a", "b c"), [Insertion, Substitution]);
    }

    #[test]
    fn table_two_rates_sum() {
        let c = Counts { n_ref: 1000, correct: 877, substitutions: 88, deletions: 35, insertions: 24 };
        assert_eq!(fmt_rate(c.wer()), "14.7");
        assert_eq!(fmt_rate(c.sub_rate()), "8.8");
        assert_eq!(fmt_rate(c.del_rate()), "3.5");
        assert_eq!(fmt_rate(c.ins_rate()), "2.4");
    }

    #[test]
    fn report_extremes() {
        let refs = transcripts(&[("a", "x y z"), ("b", "p q")]);
        let r = wer_report(&refs, &refs).unwrap();
        assert_eq!(fmt_rate(r.total.wer()), "0.0");
        let empty = transcripts(&[("a", ""), ("b", "")]);
        let r = wer_report(&refs, &empty).unwrap();
        assert_eq!(r.total.deletions, r.total.n_ref);
        assert_eq!(fmt_rate(r.total.wer()), "100.0");
        let err = wer_report(&refs, &transcripts(&[("a", ""), ("c", "")])).unwrap_err();
        assert_eq!(err, MetricsError::MissingUtterance(vec!["b".into(), "c".into()]));
    }

    #[test]
    fn unseen_words() {
        let vocab: BTreeSet<String> = ["a", "b"].map(String::from).into();
        let refs = transcripts(&[("u", "a c")]);
        let r = unseen_word_report(&vocab, &refs, &refs).unwrap();
        assert_eq!(r.tokens, 1);
        assert_eq!(r.words, BTreeSet::from(["c".to_string()]));
        let known = transcripts(&[("u", "a b")]);
        assert_eq!(unseen_word_report(&vocab, &known, &known).unwrap().tokens, 0);
    }
}
