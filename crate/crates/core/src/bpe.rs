//! Byte-pair encoding over subword or crossword unit streams.
//!
//! Learning repeatedly merges the most frequent adjacent pair of units into a
//! new unit, so every merge grows the unit set by exactly one. Single
//! characters are never removed, which keeps every word over the alphabet
//! encodable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

pub use crate::textnorm::Unit;
use crate::textnorm::{preprocess_crossword, preprocess_subword, uppercase_form, Alphabet, TextError, Utterance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BpeError {
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("merge {rank}: unit {unit:?} is not in the inventory")]
    UnknownUnit { rank: usize, unit: String },
    #[error("merge {rank}: result {unit:?} already exists")]
    DuplicateUnit { rank: usize, unit: String },
    #[error("merge {rank}: left unit {unit:?} ends a word")]
    WordFinalLeft { rank: usize, unit: String },
    #[error("merge {rank}: noise token {unit:?} cannot be merged")]
    NoiseMerge { rank: usize, unit: String },
    #[error("final unit {0:?} carries a continuation marker")]
    DanglingContinuation(String),
    #[error("unit sequence starts inside a word: {0:?}")]
    NoWordBoundary(String),
    #[error(transparent)]
    Text(#[from] TextError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Subword,
    Crossword,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Subword => "subword",
            Mode::Crossword => "crossword",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subword" => Ok(Mode::Subword),
            "crossword" => Ok(Mode::Crossword),
            other => Err(alloc::format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeRule {
    pub left: Unit,
    pub right: Unit,
    pub result: Unit,
    pub rank: usize,
}

/// Base units plus an ordered merge table.
#[derive(Debug, Clone)]
pub struct UnitInventory {
    mode: Mode,
    alphabet: Alphabet,
    merges: Vec<MergeRule>,
    units: Vec<Unit>,
    base_len: usize,
    index: BTreeMap<Unit, u32>,
    pair_rank: BTreeMap<(u32, u32), u32>,
}

impl PartialEq for UnitInventory {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode && self.alphabet == other.alphabet && self.merges == other.merges
    }
}

impl UnitInventory {
    /// Inventory with base units only.
    pub fn base(mode: Mode, alphabet: Alphabet) -> Self {
        let units = base_units(mode, &alphabet);
        let index = units.iter().enumerate().map(|(i, u)| (u.clone(), i as u32)).collect();
        Self {
            mode,
            alphabet,
            merges: Vec::new(),
            base_len: units.len(),
            units,
            index,
            pair_rank: BTreeMap::new(),
        }
    }

    /// Rebuilds an inventory from merge pairs in rank order, validating every
    /// rule.
    pub fn from_merges(
        mode: Mode,
        alphabet: Alphabet,
        pairs: impl IntoIterator<Item = (Unit, Unit)>,
    ) -> Result<Self, BpeError> {
        let mut inv = Self::base(mode, alphabet);
        for (left, right) in pairs {
            inv.push_merge(left, right)?;
        }
        Ok(inv)
    }

    fn push_merge(&mut self, left: Unit, right: Unit) -> Result<(), BpeError> {
        let rank = self.merges.len();
        let c = self.alphabet.continuation();
        let find = |u: &Unit| {
            self.index
                .get(u)
                .copied()
                .ok_or_else(|| BpeError::UnknownUnit { rank, unit: u.serialized(c) })
        };
        let (l, r) = (find(&left)?, find(&right)?);
        for u in [&left, &right] {
            if self.alphabet.is_noise(&u.text) {
                return Err(BpeError::NoiseMerge { rank, unit: u.text.clone() });
            }
        }
        if self.mode == Mode::Subword && left.word_final {
            return Err(BpeError::WordFinalLeft { rank, unit: left.serialized(c) });
        }
        let result = merged(&left, &right);
        if self.index.contains_key(&result) {
            return Err(BpeError::DuplicateUnit { rank, unit: result.serialized(c) });
        }
        let id = self.units.len() as u32;
        self.index.insert(result.clone(), id);
        self.units.push(result.clone());
        self.pair_rank.insert((l, r), rank as u32);
        self.merges.push(MergeRule { left, right, result, rank });
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    /// All units: base units first, then merge results in rank order.
    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn base_units(&self) -> &[Unit] {
        &self.units[..self.base_len]
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn contains(&self, unit: &Unit) -> bool {
        self.index.contains_key(unit)
    }

    pub fn serialize_unit(&self, unit: &Unit) -> String {
        unit.serialized(self.alphabet.continuation())
    }

    pub fn parse_unit(&self, s: &str) -> Unit {
        match self.mode {
            Mode::Subword => Unit::parse(s, self.alphabet.continuation()),
            Mode::Crossword => Unit::new(s, true),
        }
    }

    /// Blank followed by every serialized unit; the column layout of
    /// posteriorgrams produced for this inventory.
    pub fn unit_table(&self) -> Vec<String> {
        core::iter::once(self.alphabet.blank().to_string())
            .chain(self.units.iter().map(|u| self.serialize_unit(u)))
            .collect()
    }

    /// Keeps the first `k` merges.
    pub fn truncated(&self, k: usize) -> Self {
        let pairs = self.merges.iter().take(k).map(|m| (m.left.clone(), m.right.clone()));
        Self::from_merges(self.mode, self.alphabet.clone(), pairs).expect("prefix of a valid table")
    }

    /// Segments an utterance: preprocess for the inventory's mode, then apply
    /// merges in rank order, leftmost first.
    pub fn encode(&self, u: &Utterance) -> Result<Vec<Unit>, BpeError> {
        for w in &u.words {
            self.alphabet.validate_word(w)?;
        }
        let segments = match self.mode {
            Mode::Subword => preprocess_subword(u, &self.alphabet),
            Mode::Crossword => alloc::vec![preprocess_crossword(u, &self.alphabet)],
        };
        let mut out = Vec::new();
        for seg in segments {
            out.extend(self.apply(&seg).into_iter().map(|id| self.units[id as usize].clone()));
        }
        Ok(out)
    }

    /// [`UnitInventory::encode`] followed by serialization.
    pub fn encode_serialized(&self, u: &Utterance) -> Result<Vec<String>, BpeError> {
        Ok(self.encode(u)?.iter().map(|x| self.serialize_unit(x)).collect())
    }

    /// Unit ids of an encoded utterance.
    pub fn encode_ids(&self, u: &Utterance) -> Result<Vec<u32>, BpeError> {
        Ok(self.encode(u)?.iter().map(|x| self.index[x]).collect())
    }

    pub fn unit_id(&self, unit: &Unit) -> Option<u32> {
        self.index.get(unit).copied()
    }

    /// Applies merges to a preprocessed segment. Merging the lowest-ranked
    /// adjacent pair repeatedly is equivalent to applying rules one by one
    /// in rank order, because a rule can only involve units created by
    /// lower-ranked rules.
    pub fn apply(&self, segment: &[Unit]) -> Vec<u32> {
        let mut seq: Vec<u32> = segment
            .iter()
            .map(|u| *self.index.get(u).expect("preprocessed units are base units"))
            .collect();
        loop {
            let best = seq
                .windows(2)
                .filter_map(|w| self.pair_rank.get(&(w[0], w[1])).copied())
                .min();
            let Some(rank) = best else { break };
            let rule = &self.merges[rank as usize];
            let (l, r, z) = (self.index[&rule.left], self.index[&rule.right], self.index[&rule.result]);
            replace_pair(&mut seq, l, r, z);
        }
        seq
    }

    /// Detokenizes serialized units according to the inventory's mode.
    pub fn detokenize<S: AsRef<str>>(&self, units: &[S]) -> Result<String, BpeError> {
        match self.mode {
            Mode::Subword => detokenize_subword(units, self.alphabet.continuation()),
            Mode::Crossword => detokenize_crossword(units, &self.alphabet),
        }
    }

    /// Like [`UnitInventory::detokenize`] but never fails: a trailing
    /// continuation marker is dropped and a stream that starts inside a word
    /// opens one. Used for decoder output.
    pub fn detokenize_lenient<S: AsRef<str>>(&self, units: &[S]) -> String {
        match self.mode {
            Mode::Subword => {
                let c = self.alphabet.continuation();
                let mut joined = join_subword(units, c);
                if joined.ends_with(c) {
                    joined.pop();
                }
                joined
            }
            Mode::Crossword => crossword_words(units, &self.alphabet, true)
                .map(|w| w.join(" "))
                .unwrap_or_default(),
        }
    }
}

fn merged(left: &Unit, right: &Unit) -> Unit {
    let mut text = left.text.clone();
    text.push_str(&right.text);
    Unit::new(text, right.word_final)
}

fn base_units(mode: Mode, alphabet: &Alphabet) -> Vec<Unit> {
    let mut units = Vec::new();
    match mode {
        Mode::Subword => {
            for c in alphabet.characters() {
                units.push(Unit::new(c.to_string(), false));
                units.push(Unit::new(c.to_string(), true));
            }
        }
        Mode::Crossword => {
            for c in alphabet.characters() {
                units.push(Unit::new(c.to_string(), true));
            }
            for c in alphabet.characters() {
                if let Some(u) = uppercase_form(c) {
                    units.push(Unit::new(u.to_string(), true));
                }
            }
            units.push(Unit::new(alphabet.sentinel().to_string(), true));
        }
    }
    for n in alphabet.noise_tokens() {
        units.push(Unit::new(n.clone(), true));
    }
    units
}

fn replace_pair(seq: &mut Vec<u32>, l: u32, r: u32, z: u32) {
    let mut w = 0;
    let mut i = 0;
    while i < seq.len() {
        if i + 1 < seq.len() && seq[i] == l && seq[i + 1] == r {
            seq[w] = z;
            i += 2;
        } else {
            seq[w] = seq[i];
            i += 1;
        }
        w += 1;
    }
    seq.truncate(w);
}

/// Outcome of [`learn_merges`].
#[derive(Debug, Clone)]
pub struct Learned {
    pub inventory: UnitInventory,
    /// Set when fewer than the requested merges were possible.
    pub stopped_early: Option<usize>,
    /// The training sequences after the last merge, in input order.
    pub working: Vec<Vec<Unit>>,
}

/// Preprocesses utterances for `mode` into the sequences [`learn_merges`]
/// counts over: one per word (subword) or one per utterance (crossword).
pub fn training_sequences(utterances: &[Utterance], mode: Mode, alphabet: &Alphabet) -> Vec<Vec<Unit>> {
    match mode {
        Mode::Subword => utterances.iter().flat_map(|u| preprocess_subword(u, alphabet)).collect(),
        Mode::Crossword => utterances.iter().map(|u| preprocess_crossword(u, alphabet)).collect(),
    }
}

/// Learns up to `n_ops` merges.
///
/// Pairs are counted within each sequence only; pairs touching a noise token
/// are never counted. The most frequent pair wins, ties go to the
/// lexicographically smallest (left, right) serialized forms. Pairs whose
/// result would duplicate an existing unit are skipped. Learning stops early
/// when no eligible pair occurs at least twice.
pub fn learn_merges(
    sequences: &[Vec<Unit>],
    n_ops: usize,
    mode: Mode,
    alphabet: &Alphabet,
) -> Result<Learned, BpeError> {
    if sequences.iter().all(Vec::is_empty) {
        return Err(BpeError::EmptyCorpus);
    }
    let mut inv = UnitInventory::base(mode, alphabet.clone());
    for seq in sequences {
        for u in seq {
            if !inv.contains(u) {
                return Err(BpeError::UnknownUnit { rank: 0, unit: inv.serialize_unit(u) });
            }
        }
    }
    let mut table = Table::new(&inv, sequences);
    let mut stopped_early = None;
    for op in 0..n_ops {
        let Some((l, r)) = table.best_pair(&inv) else {
            log::warn!("stopping after {op} of {n_ops} merges: no pair occurs twice");
            stopped_early = Some(op);
            break;
        };
        let (left, right) = (inv.units[l as usize].clone(), inv.units[r as usize].clone());
        inv.push_merge(left, right)?;
        let z = inv.units.len() as u32 - 1;
        table.merge(l, r, z, &inv);
    }
    let working = table.expand(&inv);
    Ok(Learned { inventory: inv, stopped_early, working })
}

/// Convenience wrapper: preprocess then learn.
pub fn learn_from_utterances(
    utterances: &[Utterance],
    n_ops: usize,
    mode: Mode,
    alphabet: &Alphabet,
) -> Result<Learned, BpeError> {
    learn_merges(&training_sequences(utterances, mode, alphabet), n_ops, mode, alphabet)
}

type Pair = (u32, u32);

/// Working corpus with incremental pair statistics. Identical sequences are
/// stored once with a frequency.
struct Table {
    seqs: Vec<Vec<u32>>,
    freq: Vec<i64>,
    /// Position of each input sequence in `seqs`.
    order: Vec<usize>,
    counts: BTreeMap<Pair, i64>,
    occurs_in: BTreeMap<Pair, BTreeSet<u32>>,
    banned: BTreeSet<Pair>,
    noise: Vec<bool>,
}

impl Table {
    fn new(inv: &UnitInventory, sequences: &[Vec<Unit>]) -> Self {
        let mut distinct: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut seqs = Vec::new();
        let mut freq = Vec::new();
        let mut order = Vec::with_capacity(sequences.len());
        for s in sequences {
            let ids: Vec<u32> = s.iter().map(|u| inv.index[u]).collect();
            let slot = *distinct.entry(ids.clone()).or_insert_with(|| {
                seqs.push(ids);
                freq.push(0);
                seqs.len() - 1
            });
            freq[slot] += 1;
            order.push(slot);
        }
        let noise = inv.units.iter().map(|u| inv.alphabet.is_noise(&u.text)).collect();
        let mut t = Self {
            seqs,
            freq,
            order,
            counts: BTreeMap::new(),
            occurs_in: BTreeMap::new(),
            banned: BTreeSet::new(),
            noise,
        };
        for (s, seq) in t.seqs.clone().iter().enumerate() {
            for w in seq.windows(2) {
                t.add((w[0], w[1]), t.freq[s], s as u32);
            }
        }
        t
    }

    fn add(&mut self, pair: Pair, delta: i64, seq: u32) {
        if self.noise[pair.0 as usize] || self.noise[pair.1 as usize] {
            return;
        }
        let c = self.counts.entry(pair).or_insert(0);
        *c += delta;
        if *c == 0 {
            self.counts.remove(&pair);
        } else if delta > 0 {
            self.occurs_in.entry(pair).or_default().insert(seq);
        }
    }

    fn best_pair(&mut self, inv: &UnitInventory) -> Option<Pair> {
        loop {
            let mut best: Option<(Pair, i64)> = None;
            for (&pair, &count) in &self.counts {
                if count < 2 || self.banned.contains(&pair) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bp, bc)) => {
                        count > bc || (count == bc && self.key(inv, pair) < self.key(inv, bp))
                    }
                };
                if better {
                    best = Some((pair, count));
                }
            }
            let (pair, _) = best?;
            let result = merged(&inv.units[pair.0 as usize], &inv.units[pair.1 as usize]);
            if inv.contains(&result) {
                self.banned.insert(pair);
                continue;
            }
            return Some(pair);
        }
    }

    fn key(&self, inv: &UnitInventory, pair: Pair) -> (String, String) {
        (inv.serialize_unit(&inv.units[pair.0 as usize]), inv.serialize_unit(&inv.units[pair.1 as usize]))
    }

    /// Rewrites every occurrence of `(l, r)` as `z`, updating only the pair
    /// counts that change around each occurrence.
    fn merge(&mut self, l: u32, r: u32, z: u32, inv: &UnitInventory) {
        self.noise.resize(inv.units.len(), false);
        let affected = self.occurs_in.remove(&(l, r)).unwrap_or_default();
        for s in affected {
            let f = self.freq[s as usize];
            let mut seq = core::mem::take(&mut self.seqs[s as usize]);
            let n = seq.len();
            let mut w = 0;
            let mut i = 0;
            while i < n {
                if i + 1 < n && seq[i] == l && seq[i + 1] == r {
                    if w > 0 {
                        let prev = seq[w - 1];
                        self.add((prev, l), -f, s);
                        self.add((prev, z), f, s);
                    }
                    if i + 2 < n {
                        let next = seq[i + 2];
                        self.add((r, next), -f, s);
                        self.add((z, next), f, s);
                    }
                    self.add((l, r), -f, s);
                    seq[w] = z;
                    i += 2;
                } else {
                    seq[w] = seq[i];
                    i += 1;
                }
                w += 1;
            }
            seq.truncate(w);
            self.seqs[s as usize] = seq;
        }
        debug_assert!(!self.counts.contains_key(&(l, r)));
    }

    fn expand(&self, inv: &UnitInventory) -> Vec<Vec<Unit>> {
        self.order
            .iter()
            .map(|&s| self.seqs[s].iter().map(|&id| inv.units[id as usize].clone()).collect())
            .collect()
    }
}

fn join_subword<S: AsRef<str>>(units: &[S], continuation: char) -> String {
    let mut joined = String::new();
    for (i, u) in units.iter().enumerate() {
        if i > 0 {
            joined.push(' ');
        }
        joined.push_str(u.as_ref());
    }
    let mut marker = String::new();
    marker.push(continuation);
    marker.push(' ');
    joined.replace(&marker, "")
}

/// Joins units with spaces and deletes every continuation-marker-plus-space
/// sequence.
pub fn detokenize_subword<S: AsRef<str>>(units: &[S], continuation: char) -> Result<String, BpeError> {
    if let Some(last) = units.last() {
        if last.as_ref().ends_with(continuation) {
            return Err(BpeError::DanglingContinuation(last.as_ref().to_string()));
        }
    }
    Ok(join_subword(units, continuation))
}

/// Concatenates units and turns each uppercase character or sentinel into a
/// word start. Noise-token units are words on their own.
pub fn detokenize_crossword<S: AsRef<str>>(units: &[S], alphabet: &Alphabet) -> Result<String, BpeError> {
    Ok(crossword_words(units, alphabet, false)?.join(" "))
}

fn crossword_words<S: AsRef<str>>(
    units: &[S],
    alphabet: &Alphabet,
    lenient: bool,
) -> Result<Vec<String>, BpeError> {
    let mut words: Vec<String> = Vec::new();
    // The sentinel opens a word whose first character follows.
    let mut open = false;
    for unit in units {
        let unit = unit.as_ref();
        if alphabet.is_noise(unit) {
            words.push(unit.to_string());
            open = false;
            continue;
        }
        for c in unit.chars() {
            if c == alphabet.sentinel() {
                words.push(String::new());
                open = true;
            } else if let Some(lower) = lowercase_of_boundary(c) {
                words.push(lower.to_string());
                open = false;
            } else {
                match words.last_mut() {
                    Some(w) if open || !w.is_empty() && !alphabet.is_noise(w) => {
                        w.push(c);
                        open = false;
                    }
                    _ if lenient => words.push(c.to_string()),
                    _ => {
                        let mut all = String::new();
                        for u in units {
                            all.push_str(u.as_ref());
                        }
                        return Err(BpeError::NoWordBoundary(all));
                    }
                }
            }
        }
    }
    words.retain(|w| !w.is_empty());
    Ok(words)
}

fn lowercase_of_boundary(c: char) -> Option<char> {
    if !c.is_uppercase() {
        return None;
    }
    let mut it = c.to_lowercase();
    match (it.next(), it.next()) {
        (Some(l), None) if uppercase_form(l) == Some(c) => Some(l),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textnorm::{normalize_text, UnknownPolicy};

    fn utt(s: &str) -> Utterance {
        normalize_text(s, &Alphabet::english(), UnknownPolicy::Strict).unwrap()
    }

    fn ser(inv: &UnitInventory, units: &[Unit]) -> Vec<String> {
        units.iter().map(|u| inv.serialize_unit(u)).collect()
    }

    #[test]
    fn crossword_pair_counted_twice_is_merged() {
        let a = Alphabet::english();
        let corpus = [utt("a b"), utt("a b")];
        let learned = learn_from_utterances(&corpus, 1, Mode::Crossword, &a).unwrap();
        let m = &learned.inventory.merges()[0];
        assert_eq!((m.left.text.as_str(), m.right.text.as_str()), ("A", "B"));
        assert!(learned.inventory.contains(&Unit::new("AB", true)));
    }

    #[test]
    fn subword_most_frequent_pair_wins() {
        let a = Alphabet::english();
        let corpus = [utt("ab"), utt("ab"), utt("abc")];
        let learned = learn_from_utterances(&corpus, 1, Mode::Subword, &a).unwrap();
        let m = &learned.inventory.merges()[0];
        assert_eq!(m.left, Unit::new("a", false));
        assert_eq!(m.right, Unit::new("b", true));
        assert_eq!(m.result, Unit::new("ab", true));
    }

    #[test]
    fn ties_break_lexicographically() {
        let a = Alphabet::english();
        // (x@,y) and (p@,q) both occur twice.
        let corpus = [utt("xy pq"), utt("pq xy")];
        let learned = learn_from_utterances(&corpus, 1, Mode::Subword, &a).unwrap();
        assert_eq!(learned.inventory.merges()[0].left, Unit::new("p", false));
    }

    #[test]
    fn zero_ops_gives_base_inventory() {
        let a = Alphabet::english();
        let learned = learn_from_utterances(&[utt("hello world")], 0, Mode::Subword, &a).unwrap();
        assert!(learned.inventory.merges().is_empty());
        assert_eq!(learned.inventory.len(), UnitInventory::base(Mode::Subword, a).len());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let a = Alphabet::english();
        assert_eq!(learn_merges(&[], 3, Mode::Subword, &a).unwrap_err(), BpeError::EmptyCorpus);
        assert_eq!(
            learn_merges(&[Vec::new()], 3, Mode::Crossword, &a).unwrap_err(),
            BpeError::EmptyCorpus
        );
    }

    #[test]
    fn stops_early_when_no_pair_repeats() {
        let a = Alphabet::english();
        let learned = learn_from_utterances(&[utt("abc")], 5, Mode::Subword, &a).unwrap();
        assert_eq!(learned.stopped_early, Some(0));
        let learned = learn_from_utterances(&[utt("abab abab")], 10, Mode::Subword, &a).unwrap();
        assert!(learned.stopped_early.is_some());
        assert!(learned.inventory.merges().len() < 10);
    }

    #[test]
    fn pairs_across_noise_are_never_merged() {
        let a = Alphabet::english();
        let corpus: Vec<Utterance> = (0..5).map(|_| utt("a [laughter] a [laughter]")).collect();
        let learned = learn_from_utterances(&corpus, 5, Mode::Crossword, &a).unwrap();
        assert!(learned.inventory.merges().is_empty());
    }

    #[test]
    fn overlapping_runs_merge_left_to_right() {
        let a = Alphabet::english();
        let corpus = [utt("aaaa"), utt("aaaa")];
        let learned = learn_from_utterances(&corpus, 1, Mode::Crossword, &a).unwrap();
        let m = &learned.inventory.merges()[0];
        assert_eq!((m.left.text.as_str(), m.right.text.as_str()), ("a", "a"));
        let w: Vec<&str> = learned.working[0].iter().map(|u| u.text.as_str()).collect();
        assert_eq!(w, ["A", "aa", "a"]);
    }

    #[test]
    fn encode_without_merges_is_characters() {
        let inv = UnitInventory::base(Mode::Subword, Alphabet::english());
        let units = inv.encode(&utt("xyzzy")).unwrap();
        assert_eq!(ser(&inv, &units), ["x@", "y@", "z@", "z@", "y"]);
    }

    #[test]
    fn encode_applies_single_rule() {
        let inv = UnitInventory::from_merges(
            Mode::Subword,
            Alphabet::english(),
            [(Unit::new("a", false), Unit::new("b", true))],
        )
        .unwrap();
        assert_eq!(ser(&inv, &inv.encode(&utt("ab")).unwrap()), ["ab"]);
        assert_eq!(ser(&inv, &inv.encode(&utt("abb")).unwrap()), ["a@", "b@", "b"]);
    }

    #[test]
    fn crossword_merges_can_build_multiword_units() {
        let a = Alphabet::english();
        let pairs = [("Y", "o"), ("Yo", "u"), ("K", "n"), ("Kn", "o"), ("Kno", "w"), ("You", "Know")]
            .map(|(l, r)| (Unit::new(l, true), Unit::new(r, true)));
        let inv = UnitInventory::from_merges(Mode::Crossword, a, pairs).unwrap();
        assert_eq!(ser(&inv, &inv.encode(&utt("you know")).unwrap()), ["YouKnow"]);
        assert_eq!(ser(&inv, &inv.encode(&utt("you")).unwrap()), ["You"]);
    }

    #[test]
    fn inventory_rejects_invalid_rules() {
        let a = Alphabet::english();
        let dup = [
            (Unit::new("a", false), Unit::new("b", true)),
            (Unit::new("a", false), Unit::new("b", true)),
        ];
        assert!(matches!(
            UnitInventory::from_merges(Mode::Subword, a.clone(), dup),
            Err(BpeError::DuplicateUnit { rank: 1, .. })
        ));
        let unknown = [(Unit::new("zz", false), Unit::new("b", true))];
        assert!(matches!(
            UnitInventory::from_merges(Mode::Subword, a.clone(), unknown),
            Err(BpeError::UnknownUnit { rank: 0, .. })
        ));
        let final_left = [(Unit::new("a", true), Unit::new("b", true))];
        assert!(matches!(
            UnitInventory::from_merges(Mode::Subword, a, final_left),
            Err(BpeError::WordFinalLeft { .. })
        ));
    }

    #[test]
    fn subword_detokenization_follows_join_and_delete() {
        let units = ["you", "know", "it's", "no", "not", "even", "co@", "ld", "w@", "ea@", "ther"];
        assert_eq!(
            detokenize_subword(&units, '@').unwrap(),
            "you know it's no not even cold weather"
        );
        assert_eq!(detokenize_subword(&["oh", "ye@", "ah"], '@').unwrap(), "oh yeah");
        assert_eq!(detokenize_subword(&["a"], '@').unwrap(), "a");
        assert_eq!(
            detokenize_subword(&["oh", "ye@"], '@').unwrap_err(),
            BpeError::DanglingContinuation("ye@".into())
        );
    }

    #[test]
    fn crossword_detokenization_splits_at_capitals() {
        let a = Alphabet::english();
        let units = ["YouKnowIt's", "No", "NotEven", "ColdWeather"];
        assert_eq!(detokenize_crossword(&units, &a).unwrap(), "you know it's no not even cold weather");
        assert_eq!(detokenize_crossword(&["OhYeah"], &a).unwrap(), "oh yeah");
        assert_eq!(detokenize_crossword(&["A"], &a).unwrap(), "a");
        assert_eq!(detokenize_crossword(&["^2nd", "[laughter]", "Ok"], &a).unwrap(), "2nd [laughter] ok");
        assert!(matches!(detokenize_crossword(&["ohYeah"], &a), Err(BpeError::NoWordBoundary(_))));
        assert!(matches!(detokenize_crossword(&["[noise]", "es"], &a), Err(BpeError::NoWordBoundary(_))));
    }

    #[test]
    fn lenient_detokenization_never_fails() {
        let a = Alphabet::english();
        let sub = UnitInventory::base(Mode::Subword, a.clone());
        assert_eq!(sub.detokenize_lenient(&["oh", "ye@"]), "oh ye");
        let cross = UnitInventory::base(Mode::Crossword, a);
        assert_eq!(cross.detokenize_lenient(&["oh", "Yeah"]), "oh yeah");
        assert_eq!(cross.detokenize_lenient::<&str>(&[]), "");
    }

    #[test]
    fn round_trip_on_small_corpus() {
        let a = Alphabet::english();
        let corpus: Vec<Utterance> = ["you know it's no not even cold weather", "oh yeah you know", "i don't know"]
            .iter()
            .map(|s| utt(s))
            .collect();
        for mode in [Mode::Subword, Mode::Crossword] {
            let inv = learn_from_utterances(&corpus, 20, mode, &a).unwrap().inventory;
            for u in &corpus {
                let units = inv.encode_serialized(u).unwrap();
                assert_eq!(inv.detokenize(&units).unwrap(), u.text());
            }
        }
    }
}
