//! Transcript normalization and the two preprocessing schemes that feed BPE.
//!
//! Subword preprocessing splits every word into characters and flags all but
//! the last one as word-internal. Crossword preprocessing concatenates the
//! words of an utterance and marks each word start by capitalizing its first
//! character, or by a sentinel symbol when the first character has no
//! uppercase form.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Characters that are always part of the alphabet besides alphanumerics.
pub const SPECIAL_CHARACTERS: [char; 4] = ['-', '\'', '/', '&'];

pub const DEFAULT_CONTINUATION: char = '@';
pub const DEFAULT_SENTINEL: char = '^';
pub const DEFAULT_BLANK: &str = "<blk>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("unknown character {character:?} at byte offset {offset}")]
    UnknownCharacter { character: char, offset: usize },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid word {0:?}")]
    InvalidWord(String),
}

/// What to do with characters that are not part of the alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    #[default]
    Strict,
    Remove,
}

/// The base symbol set: single characters, atomic noise markers and the
/// reserved continuation marker, sentinel and blank symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    characters: BTreeSet<char>,
    /// Sorted longest first so matching is greedy.
    noise_tokens: Vec<String>,
    continuation: char,
    sentinel: char,
    blank: String,
}

impl Alphabet {
    pub fn new(
        characters: impl IntoIterator<Item = char>,
        noise_tokens: impl IntoIterator<Item = String>,
        continuation: char,
        sentinel: char,
        blank: impl Into<String>,
    ) -> Result<Self, TextError> {
        let characters: BTreeSet<char> = characters.into_iter().collect();
        let blank = blank.into();
        for &c in &characters {
            if c.is_whitespace() {
                return Err(TextError::InvalidAlphabet("whitespace character".into()));
            }
            if !is_lowercase_form(c) {
                return Err(TextError::InvalidAlphabet(alloc::format!(
                    "character {c:?} is not in lowercase form"
                )));
            }
            if SPECIAL_CHARACTERS.contains(&c) {
                return Err(TextError::InvalidAlphabet(alloc::format!(
                    "{c:?} is a special character and always present"
                )));
            }
        }
        let all: BTreeSet<char> = characters.iter().copied().chain(SPECIAL_CHARACTERS).collect();
        for reserved in [continuation, sentinel] {
            if all.contains(&reserved) {
                return Err(TextError::InvalidAlphabet(alloc::format!(
                    "reserved symbol {reserved:?} collides with the character set"
                )));
            }
        }
        if continuation == sentinel {
            return Err(TextError::InvalidAlphabet("continuation marker equals sentinel".into()));
        }
        if blank.is_empty() || blank.chars().any(char::is_whitespace) {
            return Err(TextError::InvalidAlphabet("blank symbol must be a non-empty token".into()));
        }
        if blank.chars().count() == 1 && all.contains(&blank.chars().next().unwrap_or(' ')) {
            return Err(TextError::InvalidAlphabet("blank symbol collides with a character".into()));
        }
        let mut noise: Vec<String> = Vec::new();
        for token in noise_tokens {
            let token = token.to_lowercase();
            if token.chars().count() < 2 || token.chars().any(char::is_whitespace) {
                return Err(TextError::InvalidAlphabet(alloc::format!(
                    "noise token {token:?} must be a multi-character token"
                )));
            }
            if token.contains(continuation) || token.contains(sentinel) {
                return Err(TextError::InvalidAlphabet(alloc::format!(
                    "noise token {token:?} contains a reserved symbol"
                )));
            }
            if token == blank {
                return Err(TextError::InvalidAlphabet("noise token equals blank symbol".into()));
            }
            if !noise.contains(&token) {
                noise.push(token);
            }
        }
        noise.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then_with(|| a.cmp(b)));
        Ok(Self { characters: all, noise_tokens: noise, continuation, sentinel, blank })
    }

    /// Lowercase ASCII letters, digits, the special characters and the usual
    /// conversational noise markers.
    pub fn english() -> Self {
        let chars = ('a'..='z').chain('0'..='9');
        let noise = ["[laughter]", "[noise]", "[vocalized-noise]"].map(String::from);
        Self::new(chars, noise, DEFAULT_CONTINUATION, DEFAULT_SENTINEL, DEFAULT_BLANK)
            .expect("built-in alphabet is valid")
    }

    /// Every single character, special characters included.
    pub fn characters(&self) -> impl Iterator<Item = char> + '_ {
        self.characters.iter().copied()
    }

    /// Characters that are not special characters.
    pub fn alphanumerics(&self) -> impl Iterator<Item = char> + '_ {
        self.characters.iter().copied().filter(|c| !SPECIAL_CHARACTERS.contains(c))
    }

    pub fn noise_tokens(&self) -> &[String] {
        &self.noise_tokens
    }

    pub fn contains(&self, c: char) -> bool {
        self.characters.contains(&c)
    }

    pub fn is_noise(&self, token: &str) -> bool {
        self.noise_tokens.iter().any(|n| n == token)
    }

    pub fn continuation(&self) -> char {
        self.continuation
    }

    pub fn sentinel(&self) -> char {
        self.sentinel
    }

    pub fn blank(&self) -> &str {
        &self.blank
    }

    /// Checks that `word` is either a noise token or a non-empty string of
    /// alphabet characters.
    pub fn validate_word(&self, word: &str) -> Result<(), TextError> {
        if word.is_empty() || !(self.is_noise(word) || word.chars().all(|c| self.contains(c))) {
            return Err(TextError::InvalidWord(word.to_owned()));
        }
        Ok(())
    }

    fn match_noise(&self, chars: &[(usize, char)]) -> Option<&str> {
        self.noise_tokens
            .iter()
            .find(|token| {
                let mut it = chars.iter();
                token.chars().all(|t| it.next().is_some_and(|&(_, c)| c == t))
            })
            .map(String::as_str)
    }
}

fn is_lowercase_form(c: char) -> bool {
    let mut lower = c.to_lowercase();
    lower.next() == Some(c) && lower.next().is_none()
}

/// Single-character uppercase form, if the character has one distinct from
/// itself.
pub(crate) fn uppercase_form(c: char) -> Option<char> {
    let mut upper = c.to_uppercase();
    match (upper.next(), upper.next()) {
        (Some(u), None) if u != c && is_lowercase_pair(u, c) => Some(u),
        _ => None,
    }
}

fn is_lowercase_pair(upper: char, lower: char) -> bool {
    let mut it = upper.to_lowercase();
    it.next() == Some(lower) && it.next().is_none()
}

/// A normalized transcript.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Utterance {
    pub id: String,
    pub words: Vec<String>,
}

impl Utterance {
    /// Builds an utterance from already normalized words, checking them
    /// against the alphabet.
    pub fn from_words<S: AsRef<str>>(
        id: impl Into<String>,
        words: &[S],
        alphabet: &Alphabet,
    ) -> Result<Self, TextError> {
        let words: Vec<String> = words.iter().map(|w| w.as_ref().to_string()).collect();
        for w in &words {
            alphabet.validate_word(w)?;
        }
        Ok(Self { id: id.into(), words })
    }

    /// Words joined by single spaces.
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

impl fmt::Display for Utterance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// Lowercases, collapses whitespace, splits out noise tokens and checks
/// characters against the alphabet.
///
/// Noise tokens are matched greedily, longest first, and always become words
/// of their own. Offsets in errors refer to the raw input.
pub fn normalize_text(
    raw: &str,
    alphabet: &Alphabet,
    policy: UnknownPolicy,
) -> Result<Utterance, TextError> {
    let lowered: Vec<(usize, char)> =
        raw.char_indices().flat_map(|(i, c)| c.to_lowercase().map(move |l| (i, l))).collect();
    let mut words = Vec::new();
    let mut current = String::new();
    let mut i = 0;
    while i < lowered.len() {
        let (offset, c) = lowered[i];
        if c.is_whitespace() {
            flush(&mut current, &mut words);
            i += 1;
            continue;
        }
        if let Some(noise) = alphabet.match_noise(&lowered[i..]) {
            flush(&mut current, &mut words);
            words.push(noise.to_owned());
            i += noise.chars().count();
            continue;
        }
        if alphabet.contains(c) {
            current.push(c);
        } else if policy == UnknownPolicy::Strict {
            return Err(TextError::UnknownCharacter { character: c, offset });
        }
        i += 1;
    }
    flush(&mut current, &mut words);
    Ok(Utterance { id: String::new(), words })
}

fn flush(current: &mut String, words: &mut Vec<String>) {
    if !current.is_empty() {
        words.push(core::mem::take(current));
    }
}

/// An output unit: its text plus, in subword mode, whether it ends a word.
///
/// Crossword units always carry `word_final = true`; their word boundaries
/// live inside the text as uppercase characters or sentinels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unit {
    pub text: String,
    pub word_final: bool,
}

impl Unit {
    pub fn new(text: impl Into<String>, word_final: bool) -> Self {
        Self { text: text.into(), word_final }
    }

    /// Serialized form: the text, followed by the continuation marker when
    /// the unit is word-internal.
    pub fn serialized(&self, continuation: char) -> String {
        let mut s = self.text.clone();
        if !self.word_final {
            s.push(continuation);
        }
        s
    }

    /// Inverse of [`Unit::serialized`].
    pub fn parse(serialized: &str, continuation: char) -> Self {
        match serialized.strip_suffix(continuation) {
            Some(text) if !text.is_empty() => Self::new(text, false),
            _ => Self::new(serialized, true),
        }
    }
}

/// Per-word character sequences; every character but the last is marked as
/// word-internal. Noise tokens stay whole.
pub fn preprocess_subword(u: &Utterance, alphabet: &Alphabet) -> Vec<Vec<Unit>> {
    u.words
        .iter()
        .map(|word| {
            if alphabet.is_noise(word) {
                return alloc::vec![Unit::new(word.clone(), true)];
            }
            let n = word.chars().count();
            word.chars().enumerate().map(|(i, c)| Unit::new(c.to_string(), i + 1 == n)).collect()
        })
        .collect()
}

/// One character stream per utterance with capitalized word starts.
///
/// Words whose first character has no uppercase form get a sentinel unit in
/// front instead. Noise tokens are standalone word-like atoms.
pub fn preprocess_crossword(u: &Utterance, alphabet: &Alphabet) -> Vec<Unit> {
    let mut out = Vec::new();
    for word in &u.words {
        if alphabet.is_noise(word) {
            out.push(Unit::new(word.clone(), true));
            continue;
        }
        let mut chars = word.chars();
        let Some(first) = chars.next() else { continue };
        match uppercase_form(first) {
            Some(upper) => out.push(Unit::new(upper.to_string(), true)),
            None => {
                out.push(Unit::new(alphabet.sentinel().to_string(), true));
                out.push(Unit::new(first.to_string(), true));
            }
        }
        out.extend(chars.map(|c| Unit::new(c.to_string(), true)));
    }
    out
}
