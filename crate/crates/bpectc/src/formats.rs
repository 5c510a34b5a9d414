//! Text and binary file formats.
//!
//! Parsers take file contents and report errors with 1-based line numbers;
//! callers attach the path.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use bpectc_core::bpe::{BpeError, Mode, UnitInventory};
use bpectc_core::ctc::{CtcError, Posteriorgram};
use bpectc_core::lm::{LmError, NGramEntry, NGramModel, BOS};
use bpectc_core::metrics::{Counts, ScoreReport, Transcripts, UnseenReport};
use bpectc_core::textnorm::{
    normalize_text, Alphabet, TextError, UnknownPolicy, Utterance, DEFAULT_BLANK, DEFAULT_CONTINUATION,
    DEFAULT_SENTINEL, SPECIAL_CHARACTERS,
};
use bpectc_core::wfst::{Arc, Fst, SymbolTable};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {error}")]
    Text { line: usize, error: TextError },
    #[error("ARPA header declares {declared} {order}-grams but {found} are listed")]
    CountMismatch { order: usize, declared: usize, found: usize },
    #[error("truncated binary data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error(transparent)]
    Bpe(#[from] BpeError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Ctc(#[from] CtcError),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    })
}

fn single_char(line: usize, value: &str) -> Result<char, FormatError> {
    let mut it = value.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(syntax(line, format!("expected a single character, found {value:?}"))),
    }
}

// Corpus ------------------------------------------------------------------

/// One utterance per line with an optional `id<TAB>` prefix; lines without
/// an id are named after their line number.
pub fn parse_corpus(text: &str, alphabet: &Alphabet, policy: UnknownPolicy) -> Result<Vec<Utterance>, FormatError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let (id, body) = match raw.split_once('\t') {
            Some((id, body)) => (id.trim().to_string(), body),
            None => (format!("line{line:06}"), raw),
        };
        let mut u = normalize_text(body, alphabet, policy).map_err(|error| FormatError::Text { line, error })?;
        u.id = id;
        out.push(u);
    }
    Ok(out)
}

pub fn format_corpus(utterances: &[Utterance]) -> String {
    utterances.iter().map(|u| format!("{}\t{}\n", u.id, u.text())).collect()
}

// Transcripts -------------------------------------------------------------

/// `id<TAB>words` per line; the word list may be empty.
pub fn parse_transcripts(text: &str) -> Result<Transcripts, FormatError> {
    let mut out = Transcripts::new();
    for (line, raw) in content_lines(text) {
        let (id, words) = raw.split_once('\t').unwrap_or((raw, ""));
        let id = id.trim();
        if id.is_empty() {
            return Err(syntax(line, "missing utterance id"));
        }
        let words = words.split_whitespace().map(str::to_string).collect();
        if out.insert(id.to_string(), words).is_some() {
            return Err(syntax(line, format!("duplicate utterance id {id:?}")));
        }
    }
    Ok(out)
}

pub fn format_transcripts(t: &Transcripts) -> String {
    t.iter().map(|(id, w)| format!("{id}\t{}\n", w.join(" "))).collect()
}

// Alphabet ----------------------------------------------------------------

/// `kind token` lines. Kinds: `character`, `noise`, `continuation`,
/// `sentinel`, `blank`. The special characters are always part of the
/// alphabet and may be listed or omitted.
pub fn parse_alphabet(text: &str) -> Result<Alphabet, FormatError> {
    let mut chars = Vec::new();
    let mut noise = Vec::new();
    let (mut cont, mut sentinel, mut blank) = (DEFAULT_CONTINUATION, DEFAULT_SENTINEL, DEFAULT_BLANK.to_string());
    let mut last = 0;
    for (line, raw) in content_lines(text) {
        last = line;
        let mut parts = raw.split_whitespace();
        let (Some(kind), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(syntax(line, "expected `kind token`"));
        };
        match kind {
            "character" => {
                let c = single_char(line, value)?;
                if !SPECIAL_CHARACTERS.contains(&c) {
                    chars.push(c);
                }
            }
            "noise" => noise.push(value.to_string()),
            "continuation" => cont = single_char(line, value)?,
            "sentinel" => sentinel = single_char(line, value)?,
            "blank" => blank = value.to_string(),
            other => return Err(syntax(line, format!("unknown kind {other:?}"))),
        }
    }
    Alphabet::new(chars, noise, cont, sentinel, blank).map_err(|error| FormatError::Text { line: last, error })
}

pub fn format_alphabet(a: &Alphabet) -> String {
    let mut s = String::new();
    for c in a.characters().filter(|c| !SPECIAL_CHARACTERS.contains(c)) {
        let _ = writeln!(s, "character {c}");
    }
    for n in a.noise_tokens() {
        let _ = writeln!(s, "noise {n}");
    }
    let _ = writeln!(s, "continuation {}", a.continuation());
    let _ = writeln!(s, "sentinel {}", a.sentinel());
    let _ = writeln!(s, "blank {}", a.blank());
    s
}

// Inventory ---------------------------------------------------------------

const INVENTORY_MAGIC: &str = "bpectc-inventory 1";

/// Header (magic, mode, alphabet lines), then `merges` and one
/// `left right` pair of serialized units per line in rank order.
pub fn format_inventory(inv: &UnitInventory) -> String {
    let mut s = format!("{INVENTORY_MAGIC}\nmode {}\n", inv.mode());
    s.push_str(&format_alphabet(inv.alphabet()));
    s.push_str("merges\n");
    for m in inv.merges() {
        let _ = writeln!(s, "{} {}", inv.serialize_unit(&m.left), inv.serialize_unit(&m.right));
    }
    s
}

pub fn parse_inventory(text: &str) -> Result<UnitInventory, FormatError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, l)) if l.trim() == INVENTORY_MAGIC => {}
        Some((line, _)) => return Err(syntax(line, format!("expected `{INVENTORY_MAGIC}`"))),
        None => return Err(syntax(1, "empty inventory file")),
    }
    let mode = match lines.next() {
        Some((line, l)) => match l.split_once(' ') {
            Some(("mode", m)) => m.trim().parse::<Mode>().map_err(|e| syntax(line, e.to_string()))?,
            _ => return Err(syntax(line, "expected `mode subword|crossword`")),
        },
        None => return Err(syntax(2, "missing mode line")),
    };
    let mut header = String::new();
    let mut header_end = None;
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    for (line, l) in lines {
        if header_end.is_none() {
            if l.trim() == "merges" {
                header_end = Some(line);
            } else {
                // Keep line numbers aligned for alphabet diagnostics.
                while header.lines().count() + 1 < line {
                    header.push('\n');
                }
                header.push_str(l);
                header.push('\n');
            }
            continue;
        }
        let mut parts = l.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => pairs.push((line, a, b)),
            _ => return Err(syntax(line, "expected `left right`")),
        }
    }
    if header_end.is_none() {
        return Err(syntax(text.lines().count().max(1), "missing `merges` line"));
    }
    let alphabet = parse_alphabet(&header)?;
    let probe = UnitInventory::base(mode, alphabet.clone());
    let mut units = Vec::with_capacity(pairs.len());
    for &(_, a, b) in &pairs {
        units.push((probe.parse_unit(a), probe.parse_unit(b)));
    }
    UnitInventory::from_merges(mode, alphabet, units).map_err(|e| match &e {
        BpeError::UnknownUnit { rank, .. } | BpeError::DuplicateUnit { rank, .. } => {
            syntax(pairs[*rank].0, e.to_string())
        }
        _ => e.into(),
    })
}

/// Units per utterance: `id<TAB>unit unit ...`.
pub fn format_unit_lines(rows: &[(String, Vec<String>)]) -> String {
    rows.iter().map(|(id, u)| format!("{id}\t{}\n", u.join(" "))).collect()
}

// ARPA --------------------------------------------------------------------

const ARPA_FLOOR: f64 = -99.0;

fn arpa_number(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        format!("{ARPA_FLOOR:.7}")
    } else {
        format!("{x:.7}")
    }
}

pub fn format_arpa(lm: &NGramModel) -> String {
    let vocab = lm.vocab();
    let mut s = String::from("\\data\\\n");
    for k in 1..=lm.order() {
        let _ = writeln!(s, "ngram {k}={}", lm.entries(k).len());
    }
    for k in 1..=lm.order() {
        let _ = write!(s, "\n\\{k}-grams:\n");
        // Sort by the word strings so output does not depend on ids.
        let mut rows: Vec<(Vec<&str>, &NGramEntry)> =
            lm.entries(k).iter().map(|(g, e)| (g.iter().map(|&w| vocab.symbol(w)).collect(), e)).collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        for (words, e) in rows {
            let _ = write!(s, "{}\t{}", arpa_number(e.logprob), words.join(" "));
            if let Some(b) = e.backoff {
                let _ = write!(s, "\t{}", arpa_number(b));
            }
            s.push('\n');
        }
    }
    s.push_str("\n\\end\\\n");
    s
}

fn parse_float(line: usize, s: &str) -> Result<f64, FormatError> {
    s.parse::<f64>().map_err(|_| syntax(line, format!("invalid number {s:?}")))
}

pub fn parse_arpa(text: &str) -> Result<NGramModel, FormatError> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Data,
        Grams(usize),
        End,
    }
    let mut section = Section::Preamble;
    let mut declared: BTreeMap<usize, usize> = BTreeMap::new();
    let mut levels: Vec<Vec<(Vec<String>, NGramEntry)>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if l == "\\data\\" {
            section = Section::Data;
            continue;
        }
        if l == "\\end\\" {
            section = Section::End;
            continue;
        }
        if let Some(k) = l.strip_prefix('\\').and_then(|r| r.strip_suffix("-grams:")) {
            let k: usize = k.parse().map_err(|_| syntax(line, format!("bad section header {l:?}")))?;
            if k == 0 || k != levels.len() + 1 {
                return Err(syntax(line, format!("unexpected section {l:?}")));
            }
            levels.push(Vec::new());
            section = Section::Grams(k);
            continue;
        }
        match section {
            Section::Preamble | Section::End => {}
            Section::Data => {
                let rest = l.strip_prefix("ngram ").ok_or_else(|| syntax(line, "expected `ngram k=count`"))?;
                let (k, n) = rest.split_once('=').ok_or_else(|| syntax(line, "expected `ngram k=count`"))?;
                let k: usize = k.trim().parse().map_err(|_| syntax(line, "bad order"))?;
                let n: usize = n.trim().parse().map_err(|_| syntax(line, "bad count"))?;
                declared.insert(k, n);
            }
            Section::Grams(k) => {
                let fields: Vec<&str> = l.split_whitespace().collect();
                if fields.len() != k + 1 && fields.len() != k + 2 {
                    return Err(syntax(line, format!("expected {} or {} fields", k + 1, k + 2)));
                }
                let mut logprob = parse_float(line, fields[0])?;
                let words: Vec<String> = fields[1..=k].iter().map(|w| w.to_string()).collect();
                if k == 1 && words[0] == BOS && logprob <= ARPA_FLOOR {
                    logprob = f64::NEG_INFINITY;
                }
                let backoff = fields.get(k + 1).map(|b| parse_float(line, b)).transpose()?;
                levels[k - 1].push((words, NGramEntry { logprob, backoff }));
            }
        }
    }
    if section != Section::End {
        return Err(syntax(text.lines().count(), "missing \\end\\"));
    }
    for (k, level) in levels.iter().enumerate() {
        let declared_n = declared.get(&(k + 1)).copied().unwrap_or(0);
        if declared_n != level.len() {
            return Err(FormatError::CountMismatch { order: k + 1, declared: declared_n, found: level.len() });
        }
    }
    if let Some((&k, &n)) = declared.iter().find(|(k, _)| **k > levels.len()) {
        return Err(FormatError::CountMismatch { order: k, declared: n, found: 0 });
    }
    Ok(NGramModel::from_levels(levels)?)
}

// Posteriorgrams ----------------------------------------------------------

const POST_TEXT_MAGIC: &str = "bpectc-posteriorgram text 1";
const POST_BIN_MAGIC: &str = "bpectc-posteriorgram f32le 1";

fn post_header(magic: &str, p: &Posteriorgram) -> String {
    let mut s = format!(
        "{magic}\nframes {}\nunits {}\nframe_shift {:.6}\n",
        p.num_frames(),
        p.num_units(),
        p.frame_shift()
    );
    for u in p.units() {
        s.push_str(u);
        s.push('\n');
    }
    s
}

/// Header then one row of space-separated probabilities per frame.
pub fn format_posteriorgram_text(p: &Posteriorgram) -> String {
    let mut s = post_header(POST_TEXT_MAGIC, p);
    for t in 0..p.num_frames() {
        let row: Vec<String> = p.row(t).iter().map(|x| format!("{x:.9e}")).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Same header, a `data` line, then frames as little-endian f32.
pub fn format_posteriorgram_binary(p: &Posteriorgram) -> Vec<u8> {
    let mut out = post_header(POST_BIN_MAGIC, p).into_bytes();
    out.extend_from_slice(b"data\n");
    for &x in p.values() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    out
}

struct Header {
    frames: usize,
    units: Vec<String>,
    frame_shift: f64,
}

/// Reads a header line by line from `bytes`, returning it and the offset of
/// the first byte after it.
fn read_header(bytes: &[u8], magic_line: &str) -> Result<(Header, usize, usize), FormatError> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut next_line = |pos: &mut usize| -> Result<(usize, String), FormatError> {
        line_no += 1;
        let rest = &bytes[*pos..];
        let end = rest.iter().position(|&b| b == b'\n').ok_or_else(|| syntax(line_no, "unexpected end of header"))?;
        let s = std::str::from_utf8(&rest[..end]).map_err(|_| syntax(line_no, "header is not UTF-8"))?;
        *pos += end + 1;
        Ok((line_no, s.trim_end_matches('\r').to_string()))
    };
    let (_, magic) = next_line(&mut pos)?;
    debug_assert_eq!(magic, magic_line);
    let mut field = |name: &str, pos: &mut usize| -> Result<(usize, String), FormatError> {
        let (line, l) = next_line(pos)?;
        match l.split_once(' ') {
            Some((k, v)) if k == name => Ok((line, v.trim().to_string())),
            _ => Err(syntax(line, format!("expected `{name} ...`"))),
        }
    };
    let (line, frames) = field("frames", &mut pos)?;
    let frames: usize = frames.parse().map_err(|_| syntax(line, "bad frame count"))?;
    let (line, v) = field("units", &mut pos)?;
    let v: usize = v.parse().map_err(|_| syntax(line, "bad unit count"))?;
    let (line, shift) = field("frame_shift", &mut pos)?;
    let frame_shift = parse_float(line, &shift)?;
    let mut units = Vec::with_capacity(v);
    for _ in 0..v {
        let (line, u) = next_line(&mut pos)?;
        if u.is_empty() || u.contains(char::is_whitespace) {
            return Err(syntax(line, "unit names must be non-empty without whitespace"));
        }
        units.push(u);
    }
    Ok((Header { frames, units, frame_shift }, pos, line_no))
}

/// Accepts both the text and the binary form.
pub fn parse_posteriorgram(bytes: &[u8]) -> Result<Posteriorgram, FormatError> {
    let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    let first = std::str::from_utf8(first).unwrap_or("").trim_end_matches('\r');
    if first == POST_BIN_MAGIC {
        let (h, mut pos, line) = read_header(bytes, POST_BIN_MAGIC)?;
        if !bytes[pos..].starts_with(b"data\n") {
            return Err(syntax(line + 1, "expected `data`"));
        }
        pos += 5;
        let n = h.frames * h.units.len();
        let data = &bytes[pos..];
        if data.len() != 4 * n {
            return Err(FormatError::Truncated { expected: 4 * n, found: data.len() });
        }
        let frames = data.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect();
        return Ok(Posteriorgram::new(h.units, frames, h.frame_shift)?);
    }
    if first != POST_TEXT_MAGIC {
        return Err(syntax(1, "not a posteriorgram file"));
    }
    let (h, pos, mut line) = read_header(bytes, POST_TEXT_MAGIC)?;
    let body = std::str::from_utf8(&bytes[pos..]).map_err(|_| syntax(line + 1, "not UTF-8"))?;
    let v = h.units.len();
    let mut frames = Vec::with_capacity(h.frames * v);
    let mut rows = 0;
    for raw in body.lines() {
        line += 1;
        if raw.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = raw.split_whitespace().map(|x| parse_float(line, x)).collect::<Result<_, _>>()?;
        if row.len() != v {
            return Err(syntax(line, format!("expected {v} values, found {}", row.len())));
        }
        frames.extend(row);
        rows += 1;
    }
    if rows != h.frames {
        return Err(syntax(line, format!("header declares {} frames, found {rows}", h.frames)));
    }
    Ok(Posteriorgram::new(h.units, frames, h.frame_shift)?)
}

// FSTs --------------------------------------------------------------------

/// `src dst ilabel olabel weight` arcs and `state weight` finals, the start
/// state's lines first.
pub fn format_fst(fst: &Fst) -> String {
    let mut s = String::new();
    if fst.num_states() == 0 {
        return s;
    }
    let order = std::iter::once(fst.start()).chain(fst.states().filter(|&q| q != fst.start()));
    for q in order {
        for a in fst.arcs(q) {
            let _ = writeln!(s, "{q} {} {} {} {:.6}", a.next, a.ilabel, a.olabel, a.weight);
        }
        if let Some(w) = fst.final_weight(q) {
            let _ = writeln!(s, "{q} {w:.6}");
        }
    }
    s
}

pub fn parse_fst(text: &str) -> Result<Fst, FormatError> {
    let mut fst = Fst::new();
    let mut start = None;
    let ensure = |fst: &mut Fst, q: u32| {
        while fst.num_states() <= q as usize {
            fst.add_state();
        }
    };
    for (line, raw) in content_lines(text) {
        let f: Vec<&str> = raw.split_whitespace().collect();
        let num = |s: &str| s.parse::<u32>().map_err(|_| syntax(line, format!("invalid integer {s:?}")));
        match f.len() {
            2 | 4 | 5 => {}
            _ => return Err(syntax(line, "expected an arc or a final state")),
        }
        let q = num(f[0])?;
        start.get_or_insert(q);
        ensure(&mut fst, q);
        if f.len() == 2 {
            fst.set_final(q, parse_float(line, f[1])?);
        } else {
            let next = num(f[1])?;
            ensure(&mut fst, next);
            let weight = if f.len() == 5 { parse_float(line, f[4])? } else { 0.0 };
            let arc = Arc { ilabel: num(f[2])?, olabel: num(f[3])?, weight, next };
            fst.add_arc(q, arc).map_err(|e| syntax(line, e.to_string()))?;
        }
    }
    if let Some(s) = start {
        fst.set_start(s);
    }
    Ok(fst)
}

/// `symbol id` per line.
pub fn format_symbols(table: &SymbolTable) -> String {
    table.iter().map(|(id, s)| format!("{s} {id}\n")).collect()
}

// Reports -----------------------------------------------------------------

fn rate(r: Option<f64>) -> String {
    r.map_or_else(|| "nan".to_string(), |x| format!("{x:.1}"))
}

fn counts_kv(prefix: &str, c: &Counts) -> String {
    format!(
        "{prefix}n_ref {}\n{prefix}n_hyp {}\n{prefix}correct {}\n{prefix}substitutions {}\n{prefix}deletions {}\n\
         {prefix}insertions {}\n{prefix}sub_rate {}\n{prefix}del_rate {}\n{prefix}ins_rate {}\n{prefix}wer {}\n",
        c.n_ref,
        c.n_hyp(),
        c.correct,
        c.substitutions,
        c.deletions,
        c.insertions,
        rate(c.sub_rate()),
        rate(c.del_rate()),
        rate(c.ins_rate()),
        rate(c.wer()),
    )
}

/// Machine-readable `key value` lines: corpus totals, then one block per
/// utterance.
pub fn format_report_kv(r: &ScoreReport) -> String {
    let mut s = counts_kv("", &r.total);
    let _ = writeln!(s, "utterances {}", r.utterances.len());
    let _ = writeln!(s, "empty_references {}", r.empty_references.len());
    for (id, c) in &r.utterances {
        s.push_str(&counts_kv(&format!("utt.{id}."), c));
    }
    s
}

pub fn format_unseen_kv(r: &UnseenReport) -> String {
    let mut s = format!(
        "unseen_correct_tokens {}\nunseen_correct_types {}\nunseen_reference_tokens {}\n",
        r.tokens,
        r.types(),
        r.reference_tokens
    );
    for w in &r.words {
        let _ = writeln!(s, "word {w}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_ids_and_errors() {
        let a = Alphabet::english();
        let utts = parse_corpus("u1\tHello  World\n\nyeah [laughter]\n", &a, UnknownPolicy::Strict).unwrap();
        assert_eq!(utts[0].id, "u1");
        assert_eq!(utts[0].text(), "hello world");
        assert_eq!(utts[1].id, "line000003");
        assert_eq!(utts[1].words, ["yeah", "[laughter]"]);
        let err = parse_corpus("ok\nbad é\n", &a, UnknownPolicy::Strict).unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
    }

    #[test]
    fn transcripts_round_trip() {
        let t = parse_transcripts("b\tx y\na\t\n").unwrap();
        assert_eq!(t["a"], Vec::<String>::new());
        assert_eq!(parse_transcripts(&format_transcripts(&t)).unwrap(), t);
        assert!(parse_transcripts("a\tx\na\ty\n").unwrap_err().to_string().contains("line 2"));
    }

    #[test]
    fn alphabet_round_trip() {
        let a = Alphabet::english();
        assert_eq!(parse_alphabet(&format_alphabet(&a)).unwrap(), a);
        assert!(parse_alphabet("character ab\n").unwrap_err().to_string().starts_with("line 1"));
        assert!(parse_alphabet("colour a\n").is_err());
    }

    #[test]
    fn inventory_errors_carry_line_numbers() {
        let inv = UnitInventory::base(Mode::Subword, Alphabet::english());
        let text = format_inventory(&inv);
        assert_eq!(parse_inventory(&text).unwrap(), inv);
        let dup = format!("{text}a@ b\na@ b\n");
        let err = parse_inventory(&dup).unwrap_err();
        let last = dup.lines().count();
        assert!(err.to_string().starts_with(&format!("line {last}:")), "{err}");
        assert!(parse_inventory("nonsense\n").is_err());
    }

    #[test]
    fn fst_text_round_trip() {
        let mut f = Fst::new();
        let (a, b) = (f.add_state(), f.add_state());
        f.add_arc(b, Arc { ilabel: 1, olabel: 2, weight: 0.5, next: a }).unwrap();
        f.set_start(b);
        f.set_final(a, 1.25);
        let text = format_fst(&f);
        assert!(text.starts_with("1 0 1 2 0.500000\n"));
        let g = parse_fst(&text).unwrap();
        assert_eq!(g.start(), 1);
        assert_eq!(g.arcs(1), f.arcs(1));
        assert_eq!(g.final_weight(0), Some(1.25));
    }
}
