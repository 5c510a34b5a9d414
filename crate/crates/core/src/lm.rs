//! Language-model scoring contract and a Kneser-Ney back-off n-gram model.
//!
//! Scores are log10 in storage (the ARPA convention). Decoders convert to
//! natural log.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::logmath::log10;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// Highest supported n-gram order.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmError {
    #[error("degenerate corpus: {tokens} tokens for an order-{order} model")]
    DegenerateCorpus { tokens: usize, order: usize },
    #[error("unsupported order {0}")]
    UnsupportedOrder(usize),
    #[error("reserved symbol {0:?} inside a training sentence")]
    ReservedSymbol(String),
    #[error("order-{order} entry {ngram:?} has no stored context")]
    MissingContext { order: usize, ngram: String },
    #[error("vocabulary is missing {0:?}")]
    MissingMarker(&'static str),
    #[error("entry {0:?} has the wrong length for its order")]
    BadEntry(String),
}

/// Incremental scorer used by the decoders.
///
/// States are reachable only through [`LanguageModel::start_state`] and
/// [`LanguageModel::step`]; all scores are log10.
pub trait LanguageModel {
    type State: Clone + PartialEq;

    /// Symbol id for `symbol`; `None` if the model cannot score it at all.
    fn symbol_id(&self, symbol: &str) -> Option<u32>;

    fn start_state(&self) -> Self::State;

    /// Conditional log10 probability of `symbol` and the successor state.
    fn step(&self, state: &Self::State, symbol: u32) -> (f64, Self::State);

    /// log10 probability of ending the sentence in `state`.
    fn finish(&self, state: &Self::State) -> f64;

    /// Sum of steps plus the end-of-sentence score.
    fn sentence_logprob<S: AsRef<str>>(&self, symbols: &[S]) -> f64
    where
        Self: Sized,
    {
        let mut state = self.start_state();
        let mut total = 0.0;
        for s in symbols {
            let id = self.symbol_id(s.as_ref()).unwrap_or(u32::MAX);
            let (lp, next) = self.step(&state, id);
            total += lp;
            state = next;
        }
        total + self.finish(&state)
    }
}

/// A model that assigns zero cost to everything; beam search with it is pure
/// acoustic search.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoLm;

impl LanguageModel for NoLm {
    type State = ();

    fn symbol_id(&self, _symbol: &str) -> Option<u32> {
        Some(0)
    }

    fn start_state(&self) {}

    fn step(&self, _state: &(), _symbol: u32) -> (f64, ()) {
        (0.0, ())
    }

    fn finish(&self, _state: &()) -> f64 {
        0.0
    }
}

/// Dense symbol indexing with the three reserved markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    symbols: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Reserved markers first (`<unk>`, `<s>`, `</s>`), then the given
    /// symbols in sorted order.
    pub fn new<S: AsRef<str>>(symbols: impl IntoIterator<Item = S>) -> Self {
        let mut rest: Vec<String> = symbols
            .into_iter()
            .map(|s| s.as_ref().to_string())
            .filter(|s| s != UNK && s != BOS && s != EOS)
            .collect();
        rest.sort();
        rest.dedup();
        let symbols: Vec<String> =
            [UNK, BOS, EOS].iter().map(|s| s.to_string()).chain(rest).collect();
        let index = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        Self { symbols, index }
    }

    pub fn id(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, id: u32) -> &str {
        &self.symbols[id as usize]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn unk(&self) -> u32 {
        self.index[UNK]
    }

    pub fn bos(&self) -> u32 {
        self.index[BOS]
    }

    pub fn eos(&self) -> u32 {
        self.index[EOS]
    }

    /// Symbols the model can predict: everything but `<s>`.
    pub fn predictable(&self) -> impl Iterator<Item = u32> + '_ {
        let bos = self.bos();
        (0..self.symbols.len() as u32).filter(move |&i| i != bos)
    }
}

/// One stored n-gram: log10 probability and, for contexts of higher-order
/// entries, a log10 back-off weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGramEntry {
    pub logprob: f64,
    pub backoff: Option<f64>,
}

/// Back-off n-gram model in ARPA layout.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    vocab: Vocabulary,
    /// `levels[k]` holds the (k+1)-grams.
    levels: Vec<BTreeMap<Vec<u32>, NGramEntry>>,
}

/// History of at most `order - 1` symbols, trimmed to its longest stored
/// suffix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NGramState(Vec<u32>);

impl NGramState {
    pub fn history(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnOptions {
    /// Probability mass mixed onto `<unk>` after smoothing.
    pub unk_floor: f64,
}

impl Default for KnOptions {
    fn default() -> Self {
        Self { unk_floor: 1e-6 }
    }
}

impl NGramModel {
    /// Assembles a model from explicit tables, e.g. parsed from ARPA text.
    /// The vocabulary is the set of unigrams; `<unk>` is added with a
    /// negligible probability when absent.
    pub fn from_levels(levels: Vec<Vec<(Vec<String>, NGramEntry)>>) -> Result<Self, LmError> {
        let order = levels.len();
        if order == 0 || order > MAX_ORDER {
            return Err(LmError::UnsupportedOrder(order));
        }
        let mut unigrams: Vec<&str> = Vec::new();
        for (words, _) in &levels[0] {
            if words.len() != 1 {
                return Err(LmError::BadEntry(words.join(" ")));
            }
            unigrams.push(&words[0]);
        }
        if !unigrams.contains(&BOS) {
            return Err(LmError::MissingMarker(BOS));
        }
        if !unigrams.contains(&EOS) {
            return Err(LmError::MissingMarker(EOS));
        }
        let vocab = Vocabulary::new(unigrams.iter().copied());
        let mut tables: Vec<BTreeMap<Vec<u32>, NGramEntry>> = Vec::with_capacity(order);
        for (k, level) in levels.iter().enumerate() {
            let mut table = BTreeMap::new();
            for (words, entry) in level {
                if words.len() != k + 1 {
                    return Err(LmError::BadEntry(words.join(" ")));
                }
                let ids: Vec<u32> = words
                    .iter()
                    .map(|w| vocab.id(w).ok_or_else(|| LmError::BadEntry(words.join(" "))))
                    .collect::<Result<_, _>>()?;
                if k > 0 && !tables[k - 1].contains_key(&ids[..k]) {
                    return Err(LmError::MissingContext { order: k + 1, ngram: words.join(" ") });
                }
                table.insert(ids, *entry);
            }
            tables.push(table);
        }
        let unk = vocab.unk();
        tables[0].entry(alloc::vec![unk]).or_insert(NGramEntry { logprob: -99.0, backoff: None });
        Ok(Self { order, vocab, levels: tables })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Stored entries of n-gram order `k` (1-based).
    pub fn entries(&self, k: usize) -> &BTreeMap<Vec<u32>, NGramEntry> {
        &self.levels[k - 1]
    }

    pub fn entry(&self, ngram: &[u32]) -> Option<&NGramEntry> {
        self.levels.get(ngram.len().checked_sub(1)?)?.get(ngram)
    }

    /// log10 P(word | context) with standard back-off lookup. Only the last
    /// `order - 1` context symbols matter.
    pub fn score(&self, context: &[u32], word: u32) -> f64 {
        let keep = context.len().min(self.order - 1);
        let context = &context[context.len() - keep..];
        let mut key = [0u32; MAX_ORDER];
        let mut acc = 0.0;
        for start in 0..=context.len() {
            let h = &context[start..];
            key[..h.len()].copy_from_slice(h);
            key[h.len()] = word;
            if let Some(e) = self.levels[h.len()].get(&key[..=h.len()]) {
                return acc + e.logprob;
            }
            if !h.is_empty() {
                if let Some(b) = self.levels[h.len() - 1].get(h).and_then(|e| e.backoff) {
                    acc += b;
                }
            }
        }
        // Every vocabulary symbol has a unigram entry.
        acc + self.levels[0].get(&[self.vocab.unk()][..]).map_or(-99.0, |e| e.logprob)
    }

    /// Longest suffix of `history` (capped at `order - 1`) stored as an
    /// n-gram; histories that are not stored cannot influence any score.
    pub fn trim_history(&self, history: &[u32]) -> Vec<u32> {
        let max = history.len().min(self.order - 1);
        for len in (1..=max).rev() {
            let h = &history[history.len() - len..];
            if self.levels[len - 1].contains_key(h) {
                return h.to_vec();
            }
        }
        Vec::new()
    }

    fn map_symbol(&self, id: u32) -> u32 {
        if (id as usize) < self.vocab.len() { id } else { self.vocab.unk() }
    }

    /// Total probability mass in `context` over every predictable symbol.
    pub fn context_mass(&self, context: &[u32]) -> f64 {
        self.vocab.predictable().map(|w| libm::pow(10.0, self.score(context, w))).sum()
    }
}

impl LanguageModel for NGramModel {
    type State = NGramState;

    fn symbol_id(&self, symbol: &str) -> Option<u32> {
        Some(self.vocab.id(symbol).unwrap_or(self.vocab.unk()))
    }

    fn start_state(&self) -> NGramState {
        NGramState(self.trim_history(&[self.vocab.bos()]))
    }

    fn step(&self, state: &NGramState, symbol: u32) -> (f64, NGramState) {
        let symbol = self.map_symbol(symbol);
        let lp = self.score(&state.0, symbol);
        let mut h = state.0.clone();
        h.push(symbol);
        (lp, NGramState(self.trim_history(&h)))
    }

    fn finish(&self, state: &NGramState) -> f64 {
        self.score(&state.0, self.vocab.eos())
    }
}

/// Trains an interpolated Kneser-Ney model of the given order.
///
/// Sentences are wrapped in `<s>`/`</s>` here. The highest order and n-grams
/// starting with `<s>` use raw counts, lower orders use continuation counts.
/// Each order gets one discount `n1 / (n1 + 2 n2)` from its count-of-counts,
/// or 0.5 when either statistic is zero. The lowest level interpolates with
/// a uniform distribution over the vocabulary, so every symbol (including
/// `<unk>`) has non-zero probability. `extra_vocab` adds symbols that never
/// occur in training.
pub fn train_ngram_kn<S: AsRef<str>>(
    corpus: &[Vec<S>],
    order: usize,
    extra_vocab: &[S],
    options: KnOptions,
) -> Result<NGramModel, LmError> {
    if order == 0 || order > MAX_ORDER {
        return Err(LmError::UnsupportedOrder(order));
    }
    for sent in corpus {
        for w in sent {
            let w = w.as_ref();
            if w == BOS || w == EOS {
                return Err(LmError::ReservedSymbol(w.to_string()));
            }
        }
    }
    let tokens: usize = corpus.iter().map(|s| s.len() + 1).sum();
    if tokens < order {
        return Err(LmError::DegenerateCorpus { tokens, order });
    }
    let vocab = Vocabulary::new(
        corpus.iter().flatten().map(AsRef::as_ref).chain(extra_vocab.iter().map(AsRef::as_ref)),
    );
    let (bos, eos) = (vocab.bos(), vocab.eos());

    // Raw counts per order.
    let mut raw: Vec<BTreeMap<Vec<u32>, u64>> = alloc::vec![BTreeMap::new(); order];
    for sent in corpus {
        let mut ids = Vec::with_capacity(sent.len() + 2);
        ids.push(bos);
        ids.extend(sent.iter().map(|w| vocab.id(w.as_ref()).expect("collected above")));
        ids.push(eos);
        for k in 1..=order {
            for window in ids.windows(k) {
                if k == 1 && window[0] == bos {
                    continue;
                }
                *raw[k - 1].entry(window.to_vec()).or_insert(0) += 1;
            }
        }
    }

    // Adjusted counts.
    let mut adjusted: Vec<BTreeMap<Vec<u32>, u64>> = alloc::vec![BTreeMap::new(); order];
    adjusted[order - 1] = raw[order - 1].clone();
    for k in (0..order - 1).rev() {
        let mut cont: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for key in raw[k + 1].keys() {
            *cont.entry(key[1..].to_vec()).or_insert(0) += 1;
        }
        for (g, &c) in &raw[k] {
            let a = if g[0] == bos { c } else { cont.get(g).copied().unwrap_or(0) };
            if a > 0 {
                adjusted[k].insert(g.clone(), a);
            }
        }
    }

    let discounts: Vec<f64> = adjusted.iter().map(|level| kn_discount(level.values().copied())).collect();

    // Unigrams: discounted adjusted counts interpolated with a uniform
    // distribution over predictable symbols.
    let predictable: Vec<u32> = vocab.predictable().collect();
    let total: u64 = adjusted[0].values().sum();
    let d1 = discounts[0];
    let uniform_weight = d1 * adjusted[0].len() as f64 / total as f64;
    let uniform = 1.0 / predictable.len() as f64;
    let floor = options.unk_floor.clamp(0.0, 1.0);
    let mut levels: Vec<BTreeMap<Vec<u32>, NGramEntry>> = alloc::vec![BTreeMap::new(); order];
    for &w in &predictable {
        let a = adjusted[0].get(&alloc::vec![w]).copied().unwrap_or(0) as f64;
        let mut p = (a - d1).max(0.0) / total as f64 + uniform_weight * uniform;
        p *= 1.0 - floor;
        if w == vocab.unk() {
            p += floor;
        }
        levels[0].insert(alloc::vec![w], NGramEntry { logprob: log10(p), backoff: None });
    }
    levels[0].insert(alloc::vec![bos], NGramEntry { logprob: f64::NEG_INFINITY, backoff: None });

    let mut model = NGramModel { order, vocab, levels };

    for k in 1..order {
        let d = discounts[k];
        // Per-context totals and distinct continuations.
        let mut ctx: BTreeMap<Vec<u32>, (u64, u64)> = BTreeMap::new();
        for (g, &a) in &adjusted[k] {
            let e = ctx.entry(g[..k].to_vec()).or_insert((0, 0));
            e.0 += a;
            e.1 += 1;
        }
        let mut new_level = BTreeMap::new();
        for (g, &a) in &adjusted[k] {
            let (sum, types) = ctx[&g[..k]];
            let gamma = d * types as f64 / sum as f64;
            let lower = libm::pow(10.0, model.score(&g[1..k], g[k]));
            let p = (a as f64 - d) / sum as f64 + gamma * lower;
            new_level.insert(g.clone(), NGramEntry { logprob: log10(p), backoff: None });
        }
        for (h, &(sum, types)) in &ctx {
            let gamma = d * types as f64 / sum as f64;
            let entry = model.levels[k - 1]
                .get_mut(h)
                .expect("contexts of seen n-grams are seen");
            entry.backoff = Some(log10(gamma));
        }
        model.levels[k] = new_level;
    }
    Ok(model)
}

fn kn_discount(counts: impl Iterator<Item = u64>) -> f64 {
    let (mut n1, mut n2) = (0u64, 0u64);
    for c in counts {
        match c {
            1 => n1 += 1,
            2 => n2 += 1,
            _ => {}
        }
    }
    if n1 == 0 || n2 == 0 {
        0.5
    } else {
        n1 as f64 / (n1 + 2 * n2) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sents(lines: &[&str]) -> Vec<Vec<String>> {
        lines.iter().map(|l| l.split_whitespace().map(String::from).collect()).collect()
    }

    fn train(lines: &[&str], order: usize, floor: f64) -> NGramModel {
        train_ngram_kn(&sents(lines), order, &[], KnOptions { unk_floor: floor }).unwrap()
    }

    #[test]
    fn unigram_distribution_is_normalized() {
        let m = train(&["a a a b"], 1, 1e-6);
        let v = m.vocab();
        let mass: f64 = ["a", "b", EOS, UNK]
            .iter()
            .map(|s| libm::pow(10.0, m.score(&[], v.id(s).unwrap())))
            .sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bigram_matches_hand_computation() {
        // One sentence "<s> a b </s>": bigram and unigram discounts fall back
        // to 0.5; unigram continuation counts are 1 for a, b and </s>.
        let m = train(&["a b"], 2, 0.0);
        let v = m.vocab();
        let (a, b) = (v.id("a").unwrap(), v.id("b").unwrap());
        let p_uni = 0.5 / 3.0 + 0.5 * 3.0 / 3.0 / 4.0; // 7/24
        assert!((libm::pow(10.0, m.score(&[], a)) - p_uni).abs() < 1e-12);
        let p_ba = 0.5 + 0.5 * p_uni; // 31/48
        let p_aa = 0.5 * p_uni; // 7/48
        assert!((libm::pow(10.0, m.score(&[a], b)) - p_ba).abs() < 1e-12);
        assert!((libm::pow(10.0, m.score(&[a], a)) - p_aa).abs() < 1e-12);
        let expected = 3.0 * log10(31.0 / 48.0);
        assert!((m.sentence_logprob(&["a", "b"]) - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_is_degenerate() {
        let empty: Vec<Vec<String>> = Vec::new();
        assert!(matches!(
            train_ngram_kn(&empty, 2, &[], KnOptions::default()),
            Err(LmError::DegenerateCorpus { tokens: 0, order: 2 })
        ));
    }

    #[test]
    fn reserved_symbols_are_rejected_in_sentences() {
        assert!(matches!(
            train_ngram_kn(&sents(&["a </s> b"]), 2, &[], KnOptions::default()),
            Err(LmError::ReservedSymbol(_))
        ));
    }

    #[test]
    fn step_is_pure_and_unknown_symbols_back_off() {
        let m = train(&["a b c", "a c b"], 3, 1e-3);
        let s = m.start_state();
        let a = m.symbol_id("a").unwrap();
        assert_eq!(m.step(&s, a), m.step(&s, a));
        let zzz = m.symbol_id("zzz").unwrap();
        assert_eq!(zzz, m.vocab().unk());
        let (lp, _) = m.step(&s, zzz);
        assert!(lp.is_finite());
        // Out-of-range ids are treated as unknown as well.
        assert_eq!(m.step(&s, 10_000).0, lp);
    }

    #[test]
    fn backoff_weights_exist_only_for_contexts() {
        let m = train(&["a b c d", "a b d c", "b c a"], 3, 1e-6);
        for k in 1..m.order() {
            for (g, e) in m.entries(k) {
                let is_context = m.entries(k + 1).keys().any(|h| &h[..k] == g.as_slice());
                assert_eq!(e.backoff.is_some(), is_context, "{g:?}");
            }
        }
        for e in m.entries(m.order()).values() {
            assert!(e.backoff.is_none());
        }
    }

    #[test]
    fn extra_vocab_gets_probability_mass() {
        let m = train_ngram_kn(&sents(&["a b"]), 2, &["z".to_string()], KnOptions::default()).unwrap();
        let z = m.vocab().id("z").unwrap();
        assert!(m.score(&[], z).is_finite());
        assert!((m.context_mass(&[]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_levels_requires_contexts() {
        let e = NGramEntry { logprob: -0.5, backoff: None };
        let uni = vec![
            (vec![BOS.to_string()], e),
            (vec![EOS.to_string()], e),
            (vec!["a".to_string()], e),
        ];
        let bi = vec![(vec!["a".to_string(), "b".to_string()], e)];
        assert!(matches!(NGramModel::from_levels(vec![uni.clone(), bi]), Err(LmError::BadEntry(_))));
        let bi = vec![(vec!["a".to_string(), EOS.to_string()], e)];
        let m = NGramModel::from_levels(vec![uni, bi]).unwrap();
        assert_eq!(m.entry(&[m.vocab().unk()]).unwrap().logprob, -99.0);
    }
}
