//! Seeded synthetic conversational corpora.
//!
//! Utterances are sequences of phrases drawn with Zipf weights. Phrases mix a
//! fixed set of conversational fillers with pseudo-words built from
//! syllables, some of which carry common prefixes and suffixes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logmath::exp;
use crate::textnorm::{Alphabet, TextError, Utterance};

const FILLER_PHRASES: &[&str] = &[
    "yeah",
    "you know",
    "uh",
    "i don't know",
    "i mean",
    "oh yeah",
    "um",
    "uh-huh",
    "right",
    "i think",
    "that's right",
    "and",
    "so",
    "it's",
    "kind of",
    "a lot of",
    "well",
    "i guess",
    "the",
    "but",
];

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "ch", "sh", "th", "br", "st", "pl", "gr",
    "tr", "",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ee", "oo", "ou", "y"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "t", "l", "m", "ck", "nd", "st", "ng"];
const PREFIXES: &[&str] = &["un", "re", "inter", "dis"];
const SUFFIXES: &[&str] = &["s", "ed", "ing", "er", "ly", "ation", "ions"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusConfig {
    pub utterances: usize,
    /// Pseudo-word roots before affixation.
    pub roots: usize,
    /// Generated phrases in addition to the fillers.
    pub phrases: usize,
    pub max_phrases_per_utterance: usize,
    /// Probability that an utterance carries a noise token.
    pub noise_token_rate: f64,
    pub zipf_exponent: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            utterances: 1000,
            roots: 300,
            phrases: 500,
            max_phrases_per_utterance: 5,
            noise_token_rate: 0.05,
            zipf_exponent: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub utterances: Vec<Utterance>,
    /// Every word the generator could emit.
    pub lexicon: Vec<String>,
}

impl SyntheticCorpus {
    /// Words that actually occur, noise tokens excluded.
    pub fn vocabulary(&self, alphabet: &Alphabet) -> BTreeSet<String> {
        self.utterances
            .iter()
            .flat_map(|u| u.words.iter())
            .filter(|w| !alphabet.is_noise(w))
            .cloned()
            .collect()
    }

    pub fn token_count(&self) -> usize {
        self.utterances.iter().map(|u| u.words.len()).sum()
    }
}

fn zipf(n: usize, s: f64) -> WeightedIndex<f64> {
    let weights: Vec<f64> = (1..=n).map(|r| exp(-s * crate::logmath::ln(r as f64))).collect();
    WeightedIndex::new(weights).expect("non-empty positive weights")
}

fn syllable(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    s.push_str(ONSETS.choose(rng).expect("non-empty"));
    s.push_str(NUCLEI.choose(rng).expect("non-empty"));
    s.push_str(CODAS.choose(rng).expect("non-empty"));
    s
}

fn pseudo_word(rng: &mut ChaCha8Rng, min_syl: usize, max_syl: usize) -> String {
    let n = rng.gen_range(min_syl..=max_syl);
    (0..n).map(|_| syllable(rng)).collect()
}

/// `n` distinct pseudo-words absent from `exclude`.
pub fn pseudo_words(n: usize, seed: u64, exclude: &BTreeSet<String>) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut w = pseudo_word(&mut rng, 2, 4);
        if rng.gen_bool(0.3) {
            w = affix(&mut rng, &w);
        }
        if !exclude.contains(&w) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn affix(rng: &mut ChaCha8Rng, root: &str) -> String {
    if rng.gen_bool(0.5) {
        format!("{}{root}", PREFIXES.choose(rng).expect("non-empty"))
    } else {
        format!("{root}{}", SUFFIXES.choose(rng).expect("non-empty"))
    }
}

pub fn generate_corpus(cfg: &CorpusConfig, alphabet: &Alphabet, seed: u64) -> Result<SyntheticCorpus, TextError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lexicon: Vec<String> = Vec::new();
    let mut known = BTreeSet::new();
    for phrase in FILLER_PHRASES {
        for w in phrase.split(' ') {
            if known.insert(w.to_string()) {
                lexicon.push(w.to_string());
            }
        }
    }
    let mut pseudo = Vec::new();
    while pseudo.len() < cfg.roots {
        let root = pseudo_word(&mut rng, 1, 3);
        if !known.insert(root.clone()) {
            continue;
        }
        pseudo.push(root.clone());
        if rng.gen_bool(0.4) {
            for _ in 0..rng.gen_range(1..=2) {
                let w = affix(&mut rng, &root);
                if known.insert(w.clone()) {
                    pseudo.push(w);
                }
            }
        }
    }
    pseudo.shuffle(&mut rng);
    lexicon.extend(pseudo);

    let word_dist = zipf(lexicon.len(), cfg.zipf_exponent);
    let mut phrases: Vec<Vec<String>> =
        FILLER_PHRASES.iter().map(|p| p.split(' ').map(str::to_string).collect()).collect();
    for _ in 0..cfg.phrases {
        let len = rng.gen_range(1..=3);
        phrases.push((0..len).map(|_| lexicon[word_dist.sample(&mut rng)].clone()).collect());
    }
    let phrase_dist = zipf(phrases.len(), cfg.zipf_exponent);
    let noise = alphabet.noise_tokens();

    let mut utterances = Vec::with_capacity(cfg.utterances);
    for i in 0..cfg.utterances {
        let n = rng.gen_range(1..=cfg.max_phrases_per_utterance.max(1));
        let mut words: Vec<String> = Vec::new();
        for _ in 0..n {
            words.extend(phrases[phrase_dist.sample(&mut rng)].iter().cloned());
        }
        if !noise.is_empty() && rng.gen_bool(cfg.noise_token_rate.clamp(0.0, 1.0)) {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, noise.choose(&mut rng).expect("non-empty").clone());
        }
        utterances.push(Utterance::from_words(format!("utt{i:06}"), &words, alphabet)?);
    }
    Ok(SyntheticCorpus { utterances, lexicon })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = Alphabet::english();
        let cfg = CorpusConfig { utterances: 50, ..CorpusConfig::default() };
        let x = generate_corpus(&cfg, &a, 7).unwrap();
        assert_eq!(x, generate_corpus(&cfg, &a, 7).unwrap());
        assert_ne!(x, generate_corpus(&cfg, &a, 8).unwrap());
        assert_eq!(x.utterances.len(), 50);
        assert!(x.utterances.iter().all(|u| !u.words.is_empty()));
    }

    #[test]
    fn pseudo_words_avoid_exclusions() {
        let exclude: BTreeSet<String> = pseudo_words(20, 1, &BTreeSet::new()).into_iter().collect();
        let fresh = pseudo_words(200, 1, &exclude);
        assert_eq!(fresh.len(), 200);
        assert!(fresh.iter().all(|w| !exclude.contains(w)));
        assert_eq!(fresh.iter().collect::<BTreeSet<_>>().len(), 200);
    }
}
