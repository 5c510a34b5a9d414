//! Small-scale WFST decoding for subword inventories.
//!
//! Weights live in the tropical semiring over negative natural logs. The
//! search graph is token ∘ lexicon ∘ grammar, composed statically.
//!
//! Label spaces:
//! - frame labels (token input): posteriorgram column + 1, so the blank is 1;
//! - unit labels (token output, lexicon input): posteriorgram column, i.e.
//!   inventory unit id + 1;
//! - word labels (lexicon output, grammar): ids in a [`SymbolTable`].
//!
//! Label 0 is epsilon everywhere. The grammar's back-off arcs carry
//! [`PHI`], a failure label: composition follows them only when the current
//! state has no arc for the requested word.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::bpe::{Mode, Unit, UnitInventory};
use crate::ctc::{squash, Hypothesis, Posteriorgram, BLANK};
use crate::lm::{LanguageModel, NGramModel, BOS, EOS};
use crate::logmath::{ln, LN_10};
use crate::textnorm::Utterance;

pub const EPS: u32 = 0;
pub const PHI: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WfstError {
    #[error("WFST decoding is only built for subword inventories")]
    CrosswordUnsupported,
    #[error("empty lexicon")]
    EmptyLexicon,
    #[error("no accepting path")]
    EmptyComposition,
    #[error("arc references state {0} which does not exist")]
    BadState(u32),
    #[error("cannot encode word {0:?}")]
    BadWord(String),
    #[error("posteriorgram does not match the graph's unit table")]
    UnitTableMismatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub ilabel: u32,
    pub olabel: u32,
    pub weight: f64,
    pub next: u32,
}

/// Weighted transducer with a single start state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fst {
    start: u32,
    arcs: Vec<Vec<Arc>>,
    finals: Vec<Option<f64>>,
}

impl Fst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self) -> u32 {
        self.arcs.push(Vec::new());
        self.finals.push(None);
        (self.arcs.len() - 1) as u32
    }

    pub fn set_start(&mut self, s: u32) {
        self.start = s;
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn add_arc(&mut self, from: u32, arc: Arc) -> Result<(), WfstError> {
        for s in [from, arc.next] {
            if s as usize >= self.arcs.len() {
                return Err(WfstError::BadState(s));
            }
        }
        self.arcs[from as usize].push(arc);
        Ok(())
    }

    pub fn set_final(&mut self, s: u32, weight: f64) {
        self.finals[s as usize] = Some(weight);
    }

    pub fn final_weight(&self, s: u32) -> Option<f64> {
        self.finals[s as usize]
    }

    pub fn arcs(&self, s: u32) -> &[Arc] {
        &self.arcs[s as usize]
    }

    pub fn num_states(&self) -> usize {
        self.arcs.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum()
    }

    pub fn states(&self) -> impl Iterator<Item = u32> {
        0..self.arcs.len() as u32
    }

    /// Weight of accepting `labels` when the input side is deterministic,
    /// following failure arcs where no direct arc exists.
    pub fn accept_weight(&self, labels: &[u32]) -> Option<f64> {
        if self.arcs.is_empty() {
            return None;
        }
        let mut state = self.start;
        let mut total = 0.0;
        for &l in labels {
            let (w, next) = self.follow(state, l)?;
            total += w;
            state = next;
        }
        let (w, fin) = self.final_with_failure(state)?;
        Some(total + w + fin)
    }

    /// First arc labelled `label` from `state`, taking failure arcs as needed;
    /// returns accumulated weight and target.
    fn follow(&self, mut state: u32, label: u32) -> Option<(f64, u32)> {
        let mut acc = 0.0;
        loop {
            let arcs = self.arcs(state);
            if let Some(a) = arcs.iter().find(|a| a.ilabel == label) {
                return Some((acc + a.weight, a.next));
            }
            let phi = arcs.iter().find(|a| a.ilabel == PHI)?;
            acc += phi.weight;
            state = phi.next;
        }
    }

    fn final_with_failure(&self, mut state: u32) -> Option<(f64, f64)> {
        let mut acc = 0.0;
        loop {
            if let Some(f) = self.final_weight(state) {
                return Some((acc, f));
            }
            let phi = self.arcs(state).iter().find(|a| a.ilabel == PHI)?;
            acc += phi.weight;
            state = phi.next;
        }
    }

    /// Removes states that are not on some path from the start to a final
    /// state, renumbering the rest with the start as state 0.
    pub fn connect(&self) -> Fst {
        if self.arcs.is_empty() {
            return self.clone();
        }
        let n = self.num_states();
        let mut reach = alloc::vec![false; n];
        let mut stack = alloc::vec![self.start];
        reach[self.start as usize] = true;
        while let Some(s) = stack.pop() {
            for a in self.arcs(s) {
                if !reach[a.next as usize] {
                    reach[a.next as usize] = true;
                    stack.push(a.next);
                }
            }
        }
        let mut reverse: Vec<Vec<u32>> = alloc::vec![Vec::new(); n];
        for s in self.states() {
            for a in self.arcs(s) {
                reverse[a.next as usize].push(s);
            }
        }
        let mut coreach = alloc::vec![false; n];
        let mut stack: Vec<u32> = self.states().filter(|&s| self.finals[s as usize].is_some()).collect();
        for &s in &stack {
            coreach[s as usize] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &reverse[s as usize] {
                if !coreach[p as usize] {
                    coreach[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        let keep = |s: u32| reach[s as usize] && coreach[s as usize];
        let mut out = Fst::new();
        if !keep(self.start) {
            return out;
        }
        let mut map = alloc::vec![u32::MAX; n];
        // Start first so it becomes state 0.
        let order = core::iter::once(self.start).chain(self.states().filter(|&s| s != self.start));
        for s in order {
            if keep(s) {
                map[s as usize] = out.add_state();
            }
        }
        for s in self.states().filter(|&s| keep(s)) {
            let ns = map[s as usize];
            for a in self.arcs(s).iter().filter(|a| keep(a.next)) {
                out.arcs[ns as usize].push(Arc { next: map[a.next as usize], ..*a });
            }
            out.finals[ns as usize] = self.finals[s as usize];
        }
        out.start = 0;
        out
    }
}

/// Dense string labels; index 0 is epsilon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl SymbolTable {
    pub const EPSILON: &'static str = "<eps>";

    pub fn new<S: AsRef<str>>(symbols: impl IntoIterator<Item = S>) -> Self {
        let mut table = Self { symbols: Vec::new(), index: BTreeMap::new() };
        table.insert(Self::EPSILON);
        for s in symbols {
            table.insert(s.as_ref());
        }
        table
    }

    fn insert(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.push(s.to_string());
        self.index.insert(s.to_string(), id);
        id
    }

    pub fn id(&self, s: &str) -> Option<u32> {
        self.index.get(s).copied()
    }

    pub fn symbol(&self, id: u32) -> Option<&str> {
        self.symbols.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.len() <= 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.symbols.iter().enumerate().map(|(i, s)| (i as u32, s.as_str()))
    }
}

/// Words of an LM's vocabulary as grammar labels (sentence markers
/// excluded).
pub fn grammar_symbols(lm: &NGramModel) -> SymbolTable {
    SymbolTable::new(lm.vocab().symbols().iter().filter(|s| *s != BOS && *s != EOS))
}

/// Word to unit-sequence map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<Unit>>,
}

impl Lexicon {
    /// Encodes every word with the inventory; duplicates collapse.
    pub fn from_words<S: AsRef<str>>(words: &[S], inv: &UnitInventory) -> Result<Self, WfstError> {
        let mut lex = Self::default();
        for w in words {
            let w = w.as_ref();
            let u = Utterance::from_words("", &[w], inv.alphabet()).map_err(|_| WfstError::BadWord(w.to_string()))?;
            let units = inv.encode(&u).map_err(|_| WfstError::BadWord(w.to_string()))?;
            lex.insert(w, units, inv);
        }
        Ok(lex)
    }

    /// Adds a pronunciation; a second, different pronunciation for the same
    /// word is dropped with a warning. Returns whether it was kept.
    pub fn insert(&mut self, word: &str, units: Vec<Unit>, inv: &UnitInventory) -> bool {
        if word.is_empty() || units.is_empty() || units.iter().any(|u| !inv.contains(u)) {
            log::warn!("dropping invalid lexicon entry {word:?}");
            return false;
        }
        match self.entries.get(word) {
            Some(existing) if *existing != units => {
                log::warn!("duplicate pronunciation for {word:?} collapsed to the first one");
                false
            }
            Some(_) => false,
            None => {
                self.entries.insert(word.to_string(), units);
                true
            }
        }
    }

    pub fn get(&self, word: &str) -> Option<&[Unit]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Unit])> {
        self.entries.iter().map(|(w, u)| (w.as_str(), u.as_slice()))
    }
}

fn require_subword(inv: &UnitInventory) -> Result<(), WfstError> {
    if inv.mode() == Mode::Crossword {
        return Err(WfstError::CrosswordUnsupported);
    }
    Ok(())
}

/// Token transducer: framewise labels (blanks and repeats) to collapsed
/// units. State 0 means "last frame was blank (or nothing yet)", state u
/// means "last frame emitted unit u".
pub fn build_token_fst(inv: &UnitInventory) -> Result<Fst, WfstError> {
    require_subword(inv)?;
    let n = inv.len() as u32;
    let mut fst = Fst::new();
    for _ in 0..=n {
        let s = fst.add_state();
        fst.set_final(s, 0.0);
    }
    let blank = BLANK as u32 + 1;
    let arc = |ilabel, olabel, next| Arc { ilabel, olabel, weight: 0.0, next };
    fst.add_arc(0, arc(blank, EPS, 0))?;
    for u in 1..=n {
        fst.add_arc(0, arc(u + 1, u, u))?;
        fst.add_arc(u, arc(u + 1, EPS, u))?;
        fst.add_arc(u, arc(blank, EPS, 0))?;
        for v in 1..=n {
            if v != u {
                fst.add_arc(u, arc(v + 1, v, v))?;
            }
        }
    }
    Ok(fst)
}

/// Lexicon transducer with a word loop through state 0. The first unit of
/// each word emits the word, the remaining units emit epsilon. Words missing
/// from `words` are skipped.
pub fn build_lexicon_fst(lex: &Lexicon, inv: &UnitInventory, words: &SymbolTable) -> Result<Fst, WfstError> {
    require_subword(inv)?;
    if lex.is_empty() {
        return Err(WfstError::EmptyLexicon);
    }
    let mut fst = Fst::new();
    let root = fst.add_state();
    fst.set_final(root, 0.0);
    for (word, units) in lex.iter() {
        let Some(wid) = words.id(word) else {
            log::warn!("lexicon word {word:?} is not in the grammar vocabulary");
            continue;
        };
        let labels: Vec<u32> =
            units.iter().map(|u| inv.unit_id(u).expect("lexicon units are checked") + 1).collect();
        let mut state = root;
        for (i, &label) in labels.iter().enumerate() {
            let next = if i + 1 == labels.len() { root } else { fst.add_state() };
            let olabel = if i == 0 { wid } else { EPS };
            fst.add_arc(state, Arc { ilabel: label, olabel, weight: 0.0, next })?;
            state = next;
        }
    }
    Ok(fst)
}

/// Grammar acceptor for a back-off n-gram model.
///
/// One state per stored history, word arcs for stored n-grams, a failure
/// arc per history carrying the back-off weight and exact end-of-sentence
/// final weights. Accepting a word sequence costs exactly the model's
/// negative natural-log sentence probability.
pub fn build_grammar_fst(lm: &NGramModel, words: &SymbolTable) -> Fst {
    let vocab = lm.vocab();
    let (bos, eos) = (vocab.bos(), vocab.eos());
    let mut fst = Fst::new();
    let mut states: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    states.insert(Vec::new(), fst.add_state());
    for k in 1..lm.order() {
        for g in lm.entries(k).keys() {
            if g[k - 1] != eos && (g[k - 1] != bos || k == 1) {
                states.insert(g.clone(), fst.add_state());
            }
        }
    }
    let word_label = |id: u32| words.id(vocab.symbol(id));
    for k in 1..=lm.order() {
        for (g, e) in lm.entries(k) {
            let w = g[k - 1];
            if w == bos || w == eos || e.logprob == f64::NEG_INFINITY {
                continue;
            }
            let (Some(&from), Some(label)) = (states.get(&g[..k - 1]), word_label(w)) else { continue };
            let to = states[&lm.trim_history(g)];
            let weight = -e.logprob * LN_10;
            fst.add_arc(from, Arc { ilabel: label, olabel: label, weight, next: to }).expect("states exist");
        }
    }
    for (h, &s) in &states {
        if !h.is_empty() {
            let backoff = lm.entry(h).and_then(|e| e.backoff).unwrap_or(0.0);
            let to = states[&lm.trim_history(&h[1..])];
            fst.add_arc(s, Arc { ilabel: PHI, olabel: PHI, weight: -backoff * LN_10, next: to })
                .expect("states exist");
        }
        fst.set_final(s, -lm.score(h, eos) * LN_10);
    }
    fst.set_start(states[&lm.start_state().history().to_vec()]);
    fst
}

/// Composition with an epsilon-sequencing filter. Failure arcs ([`PHI`]) on
/// the input side of `b` are followed only when `b` has no arc for the label
/// `a` emits. The result is trimmed.
pub fn compose(a: &Fst, b: &Fst) -> Fst {
    let mut out = Fst::new();
    if a.num_states() == 0 || b.num_states() == 0 {
        return out;
    }
    // Arcs of `b` sorted by input label for binary search.
    let b_sorted: Vec<Vec<Arc>> = b
        .states()
        .map(|s| {
            let mut v = b.arcs(s).to_vec();
            v.sort_by_key(|x| x.ilabel);
            v
        })
        .collect();
    let matches = |s: u32, label: u32| {
        let arcs = &b_sorted[s as usize];
        let lo = arcs.partition_point(|x| x.ilabel < label);
        let hi = arcs.partition_point(|x| x.ilabel <= label);
        &arcs[lo..hi]
    };

    let mut ids: BTreeMap<(u32, u32, u8), u32> = BTreeMap::new();
    let mut queue: VecDeque<(u32, u32, u8)> = VecDeque::new();
    let start = (a.start(), b.start(), 0u8);
    ids.insert(start, out.add_state());
    queue.push_back(start);
    let mut get = |key: (u32, u32, u8), out: &mut Fst, queue: &mut VecDeque<(u32, u32, u8)>| {
        *ids.entry(key).or_insert_with(|| {
            queue.push_back(key);
            out.add_state()
        })
    };
    let mut index: BTreeMap<(u32, u32, u8), u32> = BTreeMap::new();
    index.insert(start, 0);
    while let Some(key @ (sa, sb, filter)) = queue.pop_front() {
        let from = get(key, &mut out, &mut queue);
        for arc in a.arcs(sa) {
            if arc.olabel == EPS {
                if filter == 0 {
                    let to = get((arc.next, sb, 0), &mut out, &mut queue);
                    out.arcs[from as usize].push(Arc { ilabel: arc.ilabel, olabel: EPS, weight: arc.weight, next: to });
                }
                continue;
            }
            let mut state = sb;
            let mut acc = 0.0;
            loop {
                let found = matches(state, arc.olabel);
                if !found.is_empty() {
                    for barc in found {
                        let to = get((arc.next, barc.next, 0), &mut out, &mut queue);
                        out.arcs[from as usize].push(Arc {
                            ilabel: arc.ilabel,
                            olabel: barc.olabel,
                            weight: arc.weight + acc + barc.weight,
                            next: to,
                        });
                    }
                    break;
                }
                let Some(phi) = matches(state, PHI).first() else { break };
                acc += phi.weight;
                state = phi.next;
            }
        }
        for barc in matches(sb, EPS) {
            let to = get((sa, barc.next, 1), &mut out, &mut queue);
            out.arcs[from as usize].push(Arc { ilabel: EPS, olabel: barc.olabel, weight: barc.weight, next: to });
        }
        if let (Some(fa), Some((acc, fb))) = (a.final_weight(sa), b.final_with_failure(sb)) {
            out.finals[from as usize] = Some(fa + acc + fb);
        }
    }
    out.start = 0;
    out.connect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViterbiConfig {
    /// Maximum active states per frame; `usize::MAX` disables the limit.
    pub max_active: usize,
    /// Tokens costing more than this above the frame's best are dropped.
    pub beam: Option<f64>,
    /// Multiplies grammar weights, final weights included.
    pub lm_scale: f64,
    /// Added to every word-emitting arc.
    pub word_penalty: f64,
}

impl Default for ViterbiConfig {
    fn default() -> Self {
        Self { max_active: 2000, beam: Some(30.0), lm_scale: 1.0, word_penalty: 0.0 }
    }
}

impl ViterbiConfig {
    pub fn unpruned() -> Self {
        Self { max_active: usize::MAX, beam: None, ..Self::default() }
    }
}

/// Best path found by [`viterbi_beam_decode`].
#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiPath {
    /// Non-epsilon output labels in order.
    pub olabels: Vec<u32>,
    /// Posteriorgram column per frame.
    pub frame_labels: Vec<usize>,
    /// Natural-log acoustic score of the path.
    pub am_score: f64,
    /// Unscaled graph cost (negative natural log), final weight included.
    pub graph_cost: f64,
    /// Total cost with scales and penalties applied.
    pub cost: f64,
}

#[derive(Clone, Copy)]
struct Token {
    cost: f64,
    am: f64,
    graph: f64,
    trace: u32,
}

struct Trace {
    prev: u32,
    ilabel: u32,
    olabel: u32,
}

/// Time-synchronous Viterbi over a graph whose input labels are frame
/// labels (column + 1); input-epsilon arcs are followed within a frame.
pub fn viterbi_beam_decode(p: &Posteriorgram, graph: &Fst, cfg: &ViterbiConfig) -> Result<ViterbiPath, WfstError> {
    if cfg.max_active == 0 {
        return Err(WfstError::InvalidConfig("max_active must be at least 1"));
    }
    if graph.num_states() == 0 {
        return Err(WfstError::EmptyComposition);
    }
    let v = p.num_units() as u32;
    let logp = p.log_probs();
    let arc_cost = |a: &Arc| cfg.lm_scale * a.weight + if a.olabel != EPS { cfg.word_penalty } else { 0.0 };
    let mut traces: Vec<Trace> = alloc::vec![Trace { prev: u32::MAX, ilabel: EPS, olabel: EPS }];
    let mut active: BTreeMap<u32, Token> = BTreeMap::new();
    active.insert(graph.start(), Token { cost: 0.0, am: 0.0, graph: 0.0, trace: 0 });
    epsilon_closure(graph, &mut active, &mut traces, &arc_cost);

    for t in 0..p.num_frames() {
        let row = &logp[t * v as usize..(t + 1) * v as usize];
        let mut next: BTreeMap<u32, Token> = BTreeMap::new();
        for (&s, tok) in &active {
            for a in graph.arcs(s) {
                if a.ilabel == EPS {
                    continue;
                }
                if a.ilabel > v {
                    return Err(WfstError::UnitTableMismatch);
                }
                let lp = row[(a.ilabel - 1) as usize];
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                let cost = tok.cost + arc_cost(a) - lp;
                if next.get(&a.next).is_none_or(|old| cost < old.cost) {
                    traces.push(Trace { prev: tok.trace, ilabel: a.ilabel, olabel: a.olabel });
                    let trace = (traces.len() - 1) as u32;
                    next.insert(a.next, Token { cost, am: tok.am + lp, graph: tok.graph + a.weight, trace });
                }
            }
        }
        epsilon_closure(graph, &mut next, &mut traces, &arc_cost);
        active = prune(next, cfg);
        if active.is_empty() {
            return Err(WfstError::EmptyComposition);
        }
    }

    let best = active
        .iter()
        .filter_map(|(&s, tok)| graph.final_weight(s).map(|f| (tok, f, tok.cost + cfg.lm_scale * f)))
        .min_by(|x, y| x.2.partial_cmp(&y.2).unwrap_or(Ordering::Equal));
    let Some((tok, fin, cost)) = best else { return Err(WfstError::EmptyComposition) };

    let mut olabels = Vec::new();
    let mut frame_labels = Vec::new();
    let mut cur = tok.trace;
    while cur != u32::MAX {
        let tr = &traces[cur as usize];
        if tr.olabel != EPS {
            olabels.push(tr.olabel);
        }
        if tr.ilabel != EPS {
            frame_labels.push((tr.ilabel - 1) as usize);
        }
        cur = tr.prev;
    }
    olabels.reverse();
    frame_labels.reverse();
    Ok(ViterbiPath { olabels, frame_labels, am_score: tok.am, graph_cost: tok.graph + fin, cost })
}

fn epsilon_closure(
    graph: &Fst,
    tokens: &mut BTreeMap<u32, Token>,
    traces: &mut Vec<Trace>,
    arc_cost: &impl Fn(&Arc) -> f64,
) {
    let mut queue: VecDeque<u32> = tokens.keys().copied().collect();
    let mut budget = 16 * (graph.num_states() + 1);
    while let Some(s) = queue.pop_front() {
        let tok = tokens[&s];
        for a in graph.arcs(s).iter().filter(|a| a.ilabel == EPS) {
            let cost = tok.cost + arc_cost(a);
            if tokens.get(&a.next).is_none_or(|old| cost < old.cost) {
                if budget == 0 {
                    log::warn!("epsilon closure stopped early; graph may have a negative cycle");
                    return;
                }
                budget -= 1;
                traces.push(Trace { prev: tok.trace, ilabel: EPS, olabel: a.olabel });
                let trace = (traces.len() - 1) as u32;
                tokens.insert(a.next, Token { cost, am: tok.am, graph: tok.graph + a.weight, trace });
                queue.push_back(a.next);
            }
        }
    }
}

fn prune(tokens: BTreeMap<u32, Token>, cfg: &ViterbiConfig) -> BTreeMap<u32, Token> {
    let best = tokens.values().map(|t| t.cost).fold(f64::INFINITY, f64::min);
    let mut kept: Vec<(u32, Token)> = tokens
        .into_iter()
        .filter(|(_, t)| cfg.beam.is_none_or(|b| t.cost <= best + b))
        .collect();
    if kept.len() > cfg.max_active {
        kept.sort_by(|x, y| x.1.cost.partial_cmp(&y.1.cost).unwrap_or(Ordering::Equal).then(x.0.cmp(&y.0)));
        kept.truncate(cfg.max_active);
    }
    kept.into_iter().collect()
}

/// Token ∘ (lexicon ∘ grammar) for an inventory, word list and word LM.
#[derive(Debug, Clone)]
pub struct DecodingGraph {
    pub fst: Fst,
    pub words: SymbolTable,
}

impl DecodingGraph {
    /// Builds the graph; the lexicon covers every LM word the inventory can
    /// encode.
    pub fn build(inv: &UnitInventory, lm: &NGramModel) -> Result<Self, WfstError> {
        let words = grammar_symbols(lm);
        let mut lex = Lexicon::default();
        for (_, w) in words.iter().skip(1) {
            if let Ok(u) = Utterance::from_words("", &[w], inv.alphabet()) {
                if let Ok(units) = inv.encode(&u) {
                    lex.insert(w, units, inv);
                }
            }
        }
        Self::from_parts(inv, &lex, lm, words)
    }

    pub fn from_parts(inv: &UnitInventory, lex: &Lexicon, lm: &NGramModel, words: SymbolTable) -> Result<Self, WfstError> {
        let token = build_token_fst(inv)?;
        let lexicon = build_lexicon_fst(lex, inv, &words)?;
        let grammar = build_grammar_fst(lm, &words);
        let lg = compose(&lexicon, &grammar);
        let fst = compose(&token, &lg);
        if fst.num_states() == 0 {
            return Err(WfstError::EmptyComposition);
        }
        Ok(Self { fst, words })
    }

    pub fn decode(&self, p: &Posteriorgram, inv: &UnitInventory, cfg: &ViterbiConfig) -> Result<Hypothesis, WfstError> {
        if p.num_units() != inv.len() + 1 || p.check_inventory(inv).is_err() {
            return Err(WfstError::UnitTableMismatch);
        }
        let path = viterbi_beam_decode(p, &self.fst, cfg)?;
        let words: Vec<&str> = path.olabels.iter().filter_map(|&l| self.words.symbol(l)).collect();
        let labels = squash(&path.frame_labels);
        let units = labels.iter().map(|&l| p.units()[l].clone()).collect();
        Ok(Hypothesis {
            labels,
            units,
            words: words.join(" "),
            am_score: path.am_score,
            lm_score: -path.graph_cost,
            total_score: -path.cost,
        })
    }
}

/// Negative natural-log sentence cost under `lm`, for comparisons against
/// grammar path weights.
pub fn lm_sentence_cost<S: AsRef<str>>(lm: &NGramModel, words: &[S]) -> f64 {
    -lm.sentence_logprob(words) * LN_10
}

/// Converts a probability to a tropical weight.
pub fn weight_of(prob: f64) -> f64 {
    -ln(prob)
}

/// Distinct output strings of all accepting paths with at most `max_arcs`
/// arcs; exponential, intended for tests on toy machines.
pub fn enumerate_paths(fst: &Fst, max_arcs: usize) -> Vec<(Vec<u32>, Vec<u32>, f64)> {
    let mut out = Vec::new();
    if fst.num_states() == 0 {
        return out;
    }
    let mut stack: Vec<(u32, Vec<u32>, Vec<u32>, f64, usize)> =
        alloc::vec![(fst.start(), Vec::new(), Vec::new(), 0.0, 0)];
    while let Some((s, ins, outs, w, depth)) = stack.pop() {
        if let Some(f) = fst.final_weight(s) {
            out.push((ins.clone(), outs.clone(), w + f));
        }
        if depth == max_arcs {
            continue;
        }
        for a in fst.arcs(s) {
            let mut i2 = ins.clone();
            let mut o2 = outs.clone();
            if a.ilabel != EPS {
                i2.push(a.ilabel);
            }
            if a.olabel != EPS {
                o2.push(a.olabel);
            }
            stack.push((a.next, i2, o2, w + a.weight, depth + 1));
        }
    }
    out
}

/// Set of output label sequences produced for the input sequence `input`.
pub fn transduce(fst: &Fst, input: &[u32]) -> BTreeSet<Vec<u32>> {
    let mut results = BTreeSet::new();
    if fst.num_states() == 0 {
        return results;
    }
    let mut stack = alloc::vec![(fst.start(), 0usize, Vec::new(), 0usize)];
    while let Some((s, pos, outs, eps_run)) = stack.pop() {
        if pos == input.len() && fst.final_weight(s).is_some() {
            results.insert(outs.clone());
        }
        for a in fst.arcs(s) {
            let mut o2 = outs.clone();
            if a.olabel != EPS {
                o2.push(a.olabel);
            }
            if a.ilabel == EPS {
                if eps_run < fst.num_states() {
                    stack.push((a.next, pos, o2, eps_run + 1));
                }
            } else if pos < input.len() && a.ilabel == input[pos] {
                stack.push((a.next, pos + 1, o2, 0));
            }
        }
    }
    results
}
