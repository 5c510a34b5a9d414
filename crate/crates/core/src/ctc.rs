//! CTC posteriorgrams and decoders.
//!
//! Column 0 of every posteriorgram is the blank. All decoder arithmetic is
//! natural log.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bpe::{BpeError, UnitInventory};
use crate::lm::LanguageModel;
use crate::logmath::{exp, ln, log_add, LN_10};
use crate::textnorm::Utterance;

pub const BLANK: usize = 0;

/// Tolerance on per-frame probability sums.
pub const ROW_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CtcError {
    #[error("posteriorgram needs a blank and at least one unit, got {0} columns")]
    TooFewColumns(usize),
    #[error("expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("frame {frame} sums to {sum}")]
    RowNotNormalized { frame: usize, sum: f64 },
    #[error("frame {frame} has an invalid probability {value}")]
    InvalidProbability { frame: usize, value: f64 },
    #[error("unit {0:?} is not part of the inventory")]
    UnitNotInInventory(String),
    #[error("blank column is {found:?}, inventory blank is {expected:?}")]
    BlankMismatch { expected: String, found: String },
    #[error("language model cannot score unit {0:?}")]
    VocabularyMismatch(String),
    #[error("exhaustive decoding limited to V <= {max_v}, T <= {max_t}, max_len <= T")]
    TooLarge { max_v: usize, max_t: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Bpe(#[from] BpeError),
}

/// T x V matrix of per-frame unit probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Posteriorgram {
    units: Vec<String>,
    frames: Vec<f64>,
    frame_shift: f64,
}

impl Posteriorgram {
    /// Validates shape, non-negativity and per-row normalization.
    pub fn new(units: Vec<String>, frames: Vec<f64>, frame_shift: f64) -> Result<Self, CtcError> {
        let v = units.len();
        if v < 2 {
            return Err(CtcError::TooFewColumns(v));
        }
        if frames.len() % v != 0 {
            return Err(CtcError::ShapeMismatch { expected: frames.len().div_ceil(v) * v, actual: frames.len() });
        }
        for (t, row) in frames.chunks(v).enumerate() {
            if let Some(&bad) = row.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                return Err(CtcError::InvalidProbability { frame: t, value: bad });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(CtcError::RowNotNormalized { frame: t, sum });
            }
        }
        Ok(Self { units, frames, frame_shift })
    }

    pub fn from_rows(units: Vec<String>, rows: &[Vec<f64>], frame_shift: f64) -> Result<Self, CtcError> {
        let v = units.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != v) {
            return Err(CtcError::ShapeMismatch { expected: v, actual: bad.len() });
        }
        Self::new(units, rows.concat(), frame_shift)
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len() / self.units.len()
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn frame_shift(&self) -> f64 {
        self.frame_shift
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let v = self.units.len();
        &self.frames[t * v..(t + 1) * v]
    }

    pub fn values(&self) -> &[f64] {
        &self.frames
    }

    /// Natural-log probabilities, row-major.
    pub fn log_probs(&self) -> Vec<f64> {
        self.frames.iter().map(|&p| ln(p)).collect()
    }

    /// Checks that the blank matches and every other column is a unit of
    /// `inv`. The table may be a subset of the inventory.
    pub fn check_inventory(&self, inv: &UnitInventory) -> Result<(), CtcError> {
        if self.units[BLANK] != inv.alphabet().blank() {
            return Err(CtcError::BlankMismatch {
                expected: inv.alphabet().blank().to_string(),
                found: self.units[BLANK].clone(),
            });
        }
        for u in &self.units[1..] {
            if !inv.contains(&inv.parse_unit(u)) {
                return Err(CtcError::UnitNotInInventory(u.clone()));
            }
        }
        Ok(())
    }
}

/// A decoded transcript with its score breakdown (natural log).
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// Unit columns of the posteriorgram, blanks and repeats removed.
    pub labels: Vec<usize>,
    pub units: Vec<String>,
    pub words: String,
    pub am_score: f64,
    /// Unweighted LM log probability, end of sentence included.
    pub lm_score: f64,
    pub total_score: f64,
}

impl Hypothesis {
    fn new(p: &Posteriorgram, inv: &UnitInventory, labels: Vec<usize>, am: f64, lm: f64, total: f64) -> Self {
        let units: Vec<String> = labels.iter().map(|&l| p.units[l].clone()).collect();
        let words = inv.detokenize_lenient(&units);
        Self { labels, units, words, am_score: am, lm_score: lm, total_score: total }
    }

    pub fn num_units(&self) -> usize {
        self.labels.len()
    }
}

/// CTC collapse: merge adjacent repeats, then drop blanks.
pub fn squash(labels: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in labels {
        if Some(l) != prev && l != BLANK {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}

/// Per-frame argmax (lowest index on ties), collapsed and detokenized.
/// `am_score` is the log probability of the argmax path.
pub fn greedy_decode(p: &Posteriorgram, inv: &UnitInventory) -> Result<Hypothesis, CtcError> {
    p.check_inventory(inv)?;
    let mut path = Vec::with_capacity(p.num_frames());
    let mut score = 0.0;
    for t in 0..p.num_frames() {
        let row = p.row(t);
        let mut best = 0;
        for (i, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = i;
            }
        }
        score += ln(row[best]);
        path.push(best);
    }
    Ok(Hypothesis::new(p, inv, squash(&path), score, 0.0, score))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    pub beam_width: usize,
    pub lm_weight: f64,
    /// Added once per emitted unit.
    pub insertion_bonus: f64,
    /// Prefixes scoring more than this below the best are dropped.
    pub prune_gap: Option<f64>,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self { beam_width: 16, lm_weight: 0.0, insertion_bonus: 0.0, prune_gap: None }
    }
}

struct Prefix<S> {
    blank: f64,
    non_blank: f64,
    lm_state: S,
    /// Natural-log LM score of the prefix, unweighted.
    lm: f64,
}

impl<S> Prefix<S> {
    fn am(&self) -> f64 {
        log_add(self.blank, self.non_blank)
    }
}

/// Frame-synchronous CTC prefix beam search with per-unit LM fusion.
///
/// Each prefix keeps the summed probability of all alignments ending in
/// blank and in a non-blank. Extending a prefix by a unit adds
/// `lm_weight * ln P_lm(unit | prefix) + insertion_bonus` to its ranking
/// score; the end-of-sentence LM score is added after the last frame.
/// Returns the final beam, best first.
pub fn prefix_beam_search<L: LanguageModel>(
    p: &Posteriorgram,
    inv: &UnitInventory,
    lm: &L,
    cfg: &BeamConfig,
) -> Result<Vec<Hypothesis>, CtcError> {
    if cfg.beam_width == 0 {
        return Err(CtcError::InvalidConfig("beam width must be at least 1"));
    }
    p.check_inventory(inv)?;
    let v = p.num_units();
    let mut lm_ids = alloc::vec![0u32; v];
    for (c, unit) in p.units().iter().enumerate().skip(1) {
        lm_ids[c] = lm.symbol_id(unit).ok_or_else(|| CtcError::VocabularyMismatch(unit.clone()))?;
    }
    let logp = p.log_probs();
    let rank = |prefix: &[usize], e: &Prefix<L::State>| {
        e.am() + cfg.lm_weight * e.lm + cfg.insertion_bonus * prefix.len() as f64
    };

    let mut beam: Vec<(Vec<usize>, Prefix<L::State>)> = alloc::vec![(
        Vec::new(),
        Prefix { blank: 0.0, non_blank: f64::NEG_INFINITY, lm_state: lm.start_state(), lm: 0.0 },
    )];
    for t in 0..p.num_frames() {
        let row = &logp[t * v..(t + 1) * v];
        let mut next: BTreeMap<Vec<usize>, Prefix<L::State>> = BTreeMap::new();
        for (prefix, e) in &beam {
            let total = e.am();
            let stay = next.entry(prefix.clone()).or_insert_with(|| Prefix {
                blank: f64::NEG_INFINITY,
                non_blank: f64::NEG_INFINITY,
                lm_state: e.lm_state.clone(),
                lm: e.lm,
            });
            stay.blank = log_add(stay.blank, total + row[BLANK]);
            let last = prefix.last().copied();
            if let Some(last) = last {
                stay.non_blank = log_add(stay.non_blank, e.non_blank + row[last]);
            }
            for c in 1..v {
                if row[c] == f64::NEG_INFINITY {
                    continue;
                }
                let mass = if Some(c) == last { e.blank + row[c] } else { total + row[c] };
                if mass == f64::NEG_INFINITY {
                    continue;
                }
                let mut extended = prefix.clone();
                extended.push(c);
                let entry = next.entry(extended).or_insert_with(|| {
                    let (lp, state) = lm.step(&e.lm_state, lm_ids[c]);
                    Prefix { blank: f64::NEG_INFINITY, non_blank: f64::NEG_INFINITY, lm_state: state, lm: e.lm + lp * LN_10 }
                });
                entry.non_blank = log_add(entry.non_blank, mass);
            }
        }
        let mut scored: Vec<(f64, Vec<usize>, Prefix<L::State>)> =
            next.into_iter().map(|(k, e)| (rank(&k, &e), k, e)).collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then_with(|| a.1.cmp(&b.1)));
        scored.truncate(cfg.beam_width);
        if let (Some(gap), Some(best)) = (cfg.prune_gap, scored.first().map(|s| s.0)) {
            scored.retain(|s| s.0 >= best - gap);
        }
        beam = scored.into_iter().map(|(_, k, e)| (k, e)).collect();
    }

    let mut out: Vec<Hypothesis> = beam
        .into_iter()
        .map(|(prefix, e)| {
            let lm_total = e.lm + lm.finish(&e.lm_state) * LN_10;
            let am = e.am();
            let total = am + cfg.lm_weight * lm_total + cfg.insertion_bonus * prefix.len() as f64;
            Hypothesis::new(p, inv, prefix, am, lm_total, total)
        })
        .collect();
    out.sort_by(|a, b| {
        b.total_score.partial_cmp(&a.total_score).unwrap_or(Ordering::Equal).then_with(|| a.labels.cmp(&b.labels))
    });
    Ok(out)
}

/// Exact log probability of `labels` summed over every alignment, by the
/// forward recursion over the blank-interleaved label sequence. Returns
/// `-inf` when the sequence cannot fit in the available frames.
pub fn ctc_forward_prob(p: &Posteriorgram, labels: &[usize]) -> f64 {
    let t_len = p.num_frames();
    let repeats = labels.windows(2).filter(|w| w[0] == w[1]).count();
    if labels.len() + repeats > t_len {
        return f64::NEG_INFINITY;
    }
    if t_len == 0 {
        return 0.0;
    }
    let v = p.num_units();
    let logp = |t: usize, c: usize| ln(p.frames[t * v + c]);
    let s_len = 2 * labels.len() + 1;
    let ext = |s: usize| if s % 2 == 0 { BLANK } else { labels[s / 2] };
    let mut alpha = alloc::vec![f64::NEG_INFINITY; s_len];
    alpha[0] = logp(0, BLANK);
    if s_len > 1 {
        alpha[1] = logp(0, ext(1));
    }
    let mut next = alloc::vec![f64::NEG_INFINITY; s_len];
    for t in 1..t_len {
        for s in 0..s_len {
            let mut a = alpha[s];
            if s >= 1 {
                a = log_add(a, alpha[s - 1]);
            }
            if s >= 2 && ext(s) != BLANK && ext(s) != ext(s - 2) {
                a = log_add(a, alpha[s - 2]);
            }
            next[s] = a + logp(t, ext(s));
        }
        core::mem::swap(&mut alpha, &mut next);
    }
    if s_len > 1 {
        log_add(alpha[s_len - 1], alpha[s_len - 2])
    } else {
        alpha[0]
    }
}

/// Limits for [`exact_scores`].
pub const EXACT_MAX_UNITS: usize = 6;
pub const EXACT_MAX_FRAMES: usize = 10;

/// Every label sequence of length at most `max_len` with its exact log
/// probability, best first; ties ordered lexicographically. Sequences that
/// cannot fit in the frames are omitted.
pub fn exact_scores(p: &Posteriorgram, max_len: usize) -> Result<Vec<(Vec<usize>, f64)>, CtcError> {
    let (v, t) = (p.num_units(), p.num_frames());
    if v > EXACT_MAX_UNITS || t > EXACT_MAX_FRAMES || max_len > t {
        return Err(CtcError::TooLarge { max_v: EXACT_MAX_UNITS, max_t: EXACT_MAX_FRAMES });
    }
    let mut out = Vec::new();
    for len in 0..=max_len {
        let mut seq = alloc::vec![1usize; len];
        loop {
            let score = ctc_forward_prob(p, &seq);
            if score > f64::NEG_INFINITY {
                out.push((seq.clone(), score));
            }
            // Odometer over units 1..v.
            let mut i = len;
            let exhausted = loop {
                if i == 0 {
                    break true;
                }
                i -= 1;
                seq[i] += 1;
                if seq[i] < v {
                    break false;
                }
                seq[i] = 1;
            };
            if exhausted {
                break;
            }
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Most probable label sequence by exhaustive enumeration.
pub fn exact_decode(p: &Posteriorgram, inv: &UnitInventory, max_len: usize) -> Result<Hypothesis, CtcError> {
    p.check_inventory(inv)?;
    let scores = exact_scores(p, max_len)?;
    let (labels, score) = scores.into_iter().next().unwrap_or((Vec::new(), f64::NEG_INFINITY));
    Ok(Hypothesis::new(p, inv, labels, score, 0.0, score))
}

/// Shape of simulated posteriorgrams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Frames per reference unit, exactly one of which is the spike.
    pub frames_per_unit: usize,
    /// Blank mass on non-spike frames at full noise.
    pub blank_prob: f64,
    /// 0 gives one-hot rows; larger values blur rows and add confusions.
    pub noise: f64,
    pub frame_shift: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { frames_per_unit: 3, blank_prob: 0.7, noise: 0.0, frame_shift: 0.03 }
    }
}

/// Spike-train posteriorgram for a reference transcript, standing in for an
/// acoustic model.
///
/// Each reference unit gets `frames_per_unit` frames: one spike frame
/// surrounded by blank frames (an extra blank separates identical adjacent
/// units). Noise shifts mass away from the target: on spike frames a random
/// competitor may outscore the target or the blank may swallow it, and on
/// blank frames a unit may occasionally pop up. Deterministic in `seed`.
pub fn simulate_posteriorgram(
    reference: &Utterance,
    inv: &UnitInventory,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Posteriorgram, CtcError> {
    if cfg.frames_per_unit == 0 {
        return Err(CtcError::InvalidConfig("frames_per_unit must be at least 1"));
    }
    if !(0.0..=1.0).contains(&cfg.noise) || !(0.0..=1.0).contains(&cfg.blank_prob) {
        return Err(CtcError::InvalidConfig("noise and blank_prob must lie in [0, 1]"));
    }
    let ids = inv.encode_ids(reference)?;
    let v = inv.len() + 1;
    let before = (cfg.frames_per_unit - 1) / 2;
    let after = cfg.frames_per_unit - 1 - before;
    let mut targets: Vec<usize> = Vec::new();
    let mut prev: Option<usize> = None;
    for &id in &ids {
        let label = id as usize + 1;
        if prev == Some(label) && before == 0 && after == 0 {
            targets.push(BLANK);
        }
        targets.extend(core::iter::repeat_n(BLANK, before));
        targets.push(label);
        targets.extend(core::iter::repeat_n(BLANK, after));
        prev = Some(label);
    }
    if targets.is_empty() {
        targets.push(BLANK);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = cfg.noise;
    let mut frames = Vec::with_capacity(targets.len() * v);
    for &target in &targets {
        let mut row = alloc::vec![0.0f64; v];
        if nu == 0.0 {
            row[target] = 1.0;
        } else if target == BLANK {
            noisy_blank_frame(&mut row, &mut rng, nu, cfg.blank_prob);
        } else {
            noisy_spike_frame(&mut row, &mut rng, target, nu);
        }
        let sum: f64 = row.iter().sum();
        frames.extend(row.iter().map(|x| x / sum));
    }
    Posteriorgram::new(inv.unit_table(), frames, cfg.frame_shift)
}

fn random_unit(rng: &mut ChaCha8Rng, v: usize, except: usize) -> usize {
    loop {
        let c = rng.gen_range(1..v);
        if c != except || v == 2 {
            return c;
        }
    }
}

/// Spreads `mass` over a few random columns.
fn spread(row: &mut [f64], rng: &mut ChaCha8Rng, mass: f64) {
    let v = row.len();
    let picks = 3.min(v);
    let weights: Vec<(usize, f64)> = (0..picks).map(|_| (rng.gen_range(0..v), rng.gen::<f64>() + 1e-3)).collect();
    let total: f64 = weights.iter().map(|w| w.1).sum();
    for (c, w) in weights {
        row[c] += mass * w / total;
    }
}

fn noisy_spike_frame(row: &mut [f64], rng: &mut ChaCha8Rng, target: usize, nu: f64) {
    let v = row.len();
    if rng.gen::<f64>() < nu {
        if rng.gen::<f64>() < 0.75 {
            let competitor = random_unit(rng, v, target);
            row[target] += rng.gen_range(0.15..0.45);
            row[competitor] += rng.gen_range(0.25..0.6);
            row[BLANK] += rng.gen_range(0.02..0.15);
        } else {
            row[target] += rng.gen_range(0.2..0.45);
            row[BLANK] += rng.gen_range(0.4..0.7);
        }
        spread(row, rng, 0.05);
    } else {
        let residual = nu * rng.gen_range(0.0..0.5);
        row[target] += 1.0 - residual;
        spread(row, rng, residual);
    }
}

fn noisy_blank_frame(row: &mut [f64], rng: &mut ChaCha8Rng, nu: f64, blank_prob: f64) {
    let v = row.len();
    if rng.gen::<f64>() < nu * 0.05 {
        let c = random_unit(rng, v, BLANK);
        row[c] += rng.gen_range(0.3..0.6);
        row[BLANK] += rng.gen_range(0.3..0.6);
    } else {
        let blank = 1.0 - nu * (1.0 - blank_prob) * rng.gen::<f64>();
        row[BLANK] += blank;
        spread(row, rng, 1.0 - blank);
    }
}

/// Probability of the most likely alignment of `labels` (max instead of sum
/// over alignments); natural log.
pub fn best_alignment_logprob(p: &Posteriorgram, labels: &[usize]) -> f64 {
    let t_len = p.num_frames();
    let repeats = labels.windows(2).filter(|w| w[0] == w[1]).count();
    if labels.len() + repeats > t_len || t_len == 0 {
        return if t_len == 0 && labels.is_empty() { 0.0 } else { f64::NEG_INFINITY };
    }
    let v = p.num_units();
    let logp = |t: usize, c: usize| ln(p.frames[t * v + c]);
    let s_len = 2 * labels.len() + 1;
    let ext = |s: usize| if s % 2 == 0 { BLANK } else { labels[s / 2] };
    let mut delta = alloc::vec![f64::NEG_INFINITY; s_len];
    delta[0] = logp(0, BLANK);
    if s_len > 1 {
        delta[1] = logp(0, ext(1));
    }
    for t in 1..t_len {
        let mut next = alloc::vec![f64::NEG_INFINITY; s_len];
        for s in 0..s_len {
            let mut a = delta[s];
            if s >= 1 {
                a = a.max(delta[s - 1]);
            }
            if s >= 2 && ext(s) != BLANK && ext(s) != ext(s - 2) {
                a = a.max(delta[s - 2]);
            }
            next[s] = a + logp(t, ext(s));
        }
        delta = next;
    }
    if s_len > 1 { delta[s_len - 1].max(delta[s_len - 2]) } else { delta[0] }
}

/// Probability mass, not log, of a sequence; convenience for reports.
pub fn forward_prob(p: &Posteriorgram, labels: &[usize]) -> f64 {
    exp(ctc_forward_prob(p, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpe::{Mode, Unit};
    use crate::lm::NoLm;
    use crate::textnorm::Alphabet;
    use alloc::vec;

    fn binary_inventory() -> UnitInventory {
        UnitInventory::base(Mode::Subword, Alphabet::english())
    }

    fn table(units: &[&str]) -> Vec<String> {
        core::iter::once("<blk>").chain(units.iter().copied()).map(String::from).collect()
    }

    fn one_hot(units: &[&str], path: &[usize]) -> Posteriorgram {
        let v = units.len() + 1;
        let rows: Vec<Vec<f64>> = path
            .iter()
            .map(|&l| {
                let mut r = vec![0.0; v];
                r[l] = 1.0;
                r
            })
            .collect();
        Posteriorgram::from_rows(table(units), &rows, 0.01).unwrap()
    }

    fn uniform_binary() -> Posteriorgram {
        Posteriorgram::from_rows(table(&["a"]), &[vec![0.5, 0.5], vec![0.5, 0.5]], 0.01).unwrap()
    }

    #[test]
    fn squash_collapses_then_drops_blanks() {
        assert_eq!(squash(&[0, 1, 1, 0, 2]), [1, 2]);
        assert_eq!(squash(&[1, 0, 1]), [1, 1]);
        assert_eq!(squash(&[0, 0, 0]), Vec::<usize>::new());
    }

    #[test]
    fn rows_must_be_distributions() {
        assert!(matches!(
            Posteriorgram::from_rows(table(&["a"]), &[vec![0.5, 0.4]], 0.01),
            Err(CtcError::RowNotNormalized { frame: 0, .. })
        ));
        assert!(matches!(
            Posteriorgram::from_rows(table(&["a"]), &[vec![1.5, -0.5]], 0.01),
            Err(CtcError::InvalidProbability { .. })
        ));
        assert!(matches!(
            Posteriorgram::from_rows(table(&["a"]), &[vec![1.0]], 0.01),
            Err(CtcError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn greedy_decodes_one_hot_path() {
        let inv = binary_inventory();
        let p = one_hot(&["a", "b"], &[0, 1, 1, 0, 2]);
        let h = greedy_decode(&p, &inv).unwrap();
        assert_eq!(h.units, ["a", "b"]);
        assert_eq!(h.words, "a b");
        let p = one_hot(&["a"], &[0, 0, 0]);
        assert_eq!(greedy_decode(&p, &inv).unwrap().words, "");
    }

    #[test]
    fn greedy_detokenizes_subword_units() {
        let a = Alphabet::english();
        let pairs = [("o", "h", true), ("y", "e", false), ("a", "h", true)]
            .map(|(l, r, fin)| (Unit::new(l, false), Unit::new(r, fin)));
        let inv = UnitInventory::from_merges(Mode::Subword, a, pairs).unwrap();
        let u = Utterance::from_words("", &["oh", "yeah"], inv.alphabet()).unwrap();
        assert_eq!(inv.encode_serialized(&u).unwrap(), ["oh", "ye@", "ah"]);
        let p = simulate_posteriorgram(&u, &inv, &SimConfig::default(), 3).unwrap();
        assert_eq!(greedy_decode(&p, &inv).unwrap().words, "oh yeah");
    }

    #[test]
    fn forward_prob_hand_cases() {
        let p = uniform_binary();
        assert!((ctc_forward_prob(&p, &[1]) - ln(0.75)).abs() < 1e-12);
        assert!((ctc_forward_prob(&p, &[]) - ln(0.25)).abs() < 1e-12);
        assert_eq!(ctc_forward_prob(&p, &[1, 1]), f64::NEG_INFINITY);
        assert_eq!(ctc_forward_prob(&p, &[1, 1, 1]), f64::NEG_INFINITY);
    }

    #[test]
    fn exact_decode_uniform_binary() {
        let inv = binary_inventory();
        let h = exact_decode(&uniform_binary(), &inv, 2).unwrap();
        assert_eq!(h.labels, [1]);
        assert!((h.am_score - ln(0.75)).abs() < 1e-12);
        let h = exact_decode(&one_hot(&["a", "b"], &[1, 0, 2]), &inv, 3).unwrap();
        assert_eq!(h.labels, [1, 2]);
        let h = exact_decode(&one_hot(&["a", "b"], &[0, 0]), &inv, 2).unwrap();
        assert!(h.labels.is_empty());
        assert!(matches!(exact_decode(&uniform_binary(), &inv, 3), Err(CtcError::TooLarge { .. })));
    }

    #[test]
    fn beam_on_uniform_binary_picks_single_unit() {
        let inv = binary_inventory();
        let cfg = BeamConfig { beam_width: 3, ..BeamConfig::default() };
        let hyps = prefix_beam_search(&uniform_binary(), &inv, &NoLm, &cfg).unwrap();
        assert_eq!(hyps[0].labels, [1]);
        assert!((hyps[0].am_score - ln(0.75)).abs() < 1e-12);
        assert_eq!(hyps[1].labels, Vec::<usize>::new());
        assert!((hyps[1].am_score - ln(0.25)).abs() < 1e-12);
    }

    #[test]
    fn beam_matches_greedy_on_one_hot_input() {
        let inv = binary_inventory();
        let p = one_hot(&["a", "b", "c"], &[0, 1, 1, 0, 2, 3, 3, 0, 1]);
        let greedy = greedy_decode(&p, &inv).unwrap();
        for w in 1..5 {
            let cfg = BeamConfig { beam_width: w, ..BeamConfig::default() };
            let best = &prefix_beam_search(&p, &inv, &NoLm, &cfg).unwrap()[0];
            assert_eq!(best.labels, greedy.labels);
        }
    }

    #[test]
    fn beam_rejects_zero_width() {
        let cfg = BeamConfig { beam_width: 0, ..BeamConfig::default() };
        assert!(prefix_beam_search(&uniform_binary(), &binary_inventory(), &NoLm, &cfg).is_err());
    }

    #[test]
    fn inventory_check_catches_foreign_units() {
        let inv = binary_inventory();
        let p = one_hot(&["qq@"], &[1]);
        assert_eq!(greedy_decode(&p, &inv).unwrap_err(), CtcError::UnitNotInInventory("qq@".into()));
        let p = Posteriorgram::from_rows(vec!["<b>".into(), "a".into()], &[vec![1.0, 0.0]], 0.01).unwrap();
        assert!(matches!(greedy_decode(&p, &inv), Err(CtcError::BlankMismatch { .. })));
    }

    #[test]
    fn simulation_is_deterministic_and_clean_at_zero_noise() {
        let inv = binary_inventory();
        let u = Utterance::from_words("", &["hello", "all"], inv.alphabet()).unwrap();
        let cfg = SimConfig { noise: 0.3, ..SimConfig::default() };
        let p1 = simulate_posteriorgram(&u, &inv, &cfg, 11).unwrap();
        let p2 = simulate_posteriorgram(&u, &inv, &cfg, 11).unwrap();
        assert_eq!(p1, p2);
        assert_ne!(p1, simulate_posteriorgram(&u, &inv, &cfg, 12).unwrap());
        let clean = simulate_posteriorgram(&u, &inv, &SimConfig { frames_per_unit: 1, ..SimConfig::default() }, 0).unwrap();
        assert!(clean.values().iter().all(|&x| x == 0.0 || x == 1.0));
        assert_eq!(greedy_decode(&clean, &inv).unwrap().words, "hello all");
    }

    #[test]
    fn best_alignment_is_bounded_by_forward() {
        let p = uniform_binary();
        assert!((best_alignment_logprob(&p, &[1]) - ln(0.25)).abs() < 1e-12);
        assert!(best_alignment_logprob(&p, &[1]) <= ctc_forward_prob(&p, &[1]));
        assert!((forward_prob(&p, &[1]) - 0.75).abs() < 1e-12);
    }
}
