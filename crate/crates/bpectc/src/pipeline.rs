//! Corpus-level operations shared by the command line and the tests:
//! simulation, decoding and scoring across utterances, and unit-count
//! sweeps.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use bpectc_core::bpe::{learn_from_utterances, Mode, UnitInventory};
use bpectc_core::ctc::{greedy_decode, prefix_beam_search, simulate_posteriorgram, BeamConfig, Hypothesis, Posteriorgram, SimConfig};
use bpectc_core::lm::{train_ngram_kn, KnOptions, NGramModel, NoLm};
use bpectc_core::metrics::{Counts, ScoreReport, Transcripts};
use bpectc_core::textnorm::{Alphabet, Utterance};
use bpectc_core::wfst::{DecodingGraph, ViterbiConfig};
use rayon::prelude::*;

use crate::formats::FormatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Greedy,
    Beam,
    Wfst,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Greedy => "greedy",
            Method::Beam => "beam",
            Method::Wfst => "wfst",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, false)
    }
}

pub enum Decoder<'a> {
    Greedy,
    Beam { cfg: BeamConfig, lm: Option<&'a NGramModel> },
    Wfst { graph: &'a DecodingGraph, cfg: ViterbiConfig },
}

pub fn decode_one(p: &Posteriorgram, inv: &UnitInventory, decoder: &Decoder<'_>) -> Result<Hypothesis> {
    Ok(match decoder {
        Decoder::Greedy => greedy_decode(p, inv)?,
        Decoder::Beam { cfg, lm } => {
            let beam = match lm {
                Some(lm) => prefix_beam_search(p, inv, *lm, cfg)?,
                None => prefix_beam_search(p, inv, &NoLm, cfg)?,
            };
            beam.into_iter().next().context("empty beam")?
        }
        Decoder::Wfst { graph, cfg } => graph.decode(p, inv, cfg)?,
    })
}

/// Decodes in parallel; output order follows the input.
pub fn decode_all(
    items: &[(String, Posteriorgram)],
    inv: &UnitInventory,
    decoder: &Decoder<'_>,
) -> Result<Vec<(String, Hypothesis)>> {
    items
        .par_iter()
        .map(|(id, p)| decode_one(p, inv, decoder).map(|h| (id.clone(), h)).with_context(|| format!("utterance {id}")))
        .collect()
}

/// Per-utterance seed derived from a run seed.
pub fn utterance_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn simulate_all(
    utts: &[Utterance],
    inv: &UnitInventory,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Vec<(String, Posteriorgram)>> {
    utts.par_iter()
        .enumerate()
        .map(|(i, u)| {
            let p = simulate_posteriorgram(u, inv, cfg, utterance_seed(seed, i))
                .with_context(|| format!("utterance {}", u.id))?;
            Ok((u.id.clone(), p))
        })
        .collect()
}

/// Unit-level n-gram model over the inventory's segmentation of `utts`.
pub fn train_unit_lm(inv: &UnitInventory, utts: &[Utterance], order: usize, options: KnOptions) -> Result<NGramModel> {
    let seqs: Vec<Vec<String>> = utts.par_iter().map(|u| inv.encode_serialized(u)).collect::<Result<_, _>>()?;
    Ok(train_ngram_kn(&seqs, order, &inv.unit_table()[1..], options)?)
}

pub fn train_word_lm(utts: &[Utterance], order: usize, options: KnOptions) -> Result<NGramModel> {
    let seqs: Vec<&[String]> = utts.iter().map(|u| u.words.as_slice()).collect();
    let seqs: Vec<Vec<&str>> = seqs.iter().map(|s| s.iter().map(String::as_str).collect()).collect();
    Ok(train_ngram_kn(&seqs, order, &[], options)?)
}

pub fn reference_transcripts(utts: &[Utterance]) -> Transcripts {
    utts.iter().map(|u| (u.id.clone(), u.words.clone())).collect()
}

pub fn hypothesis_transcripts(hyps: &[(String, Hypothesis)]) -> Transcripts {
    hyps.iter().map(|(id, h)| (id.clone(), h.words.split_whitespace().map(str::to_string).collect())).collect()
}

/// Scores in parallel with deterministic aggregation.
pub fn score(refs: &Transcripts, hyps: &Transcripts) -> Result<ScoreReport> {
    let missing: Vec<String> = refs
        .keys()
        .filter(|k| !hyps.contains_key(*k))
        .chain(hyps.keys().filter(|k| !refs.contains_key(*k)))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(bpectc_core::metrics::MetricsError::MissingUtterance(missing).into());
    }
    let refs: Vec<(&String, &Vec<String>)> = refs.iter().collect();
    let counts = refs.par_iter().map(|(id, r)| ((*id).clone(), Counts::of(r, &hyps[*id]))).collect();
    Ok(ScoreReport::from_counts(counts))
}

/// Declarative sweep description, `key value` per line.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub ops: Vec<usize>,
    pub mode: Mode,
    /// Training corpus file; a synthetic corpus is generated when absent.
    pub corpus: Option<PathBuf>,
    pub train_utterances: usize,
    pub test_utterances: usize,
    pub seed: u64,
    pub noise: f64,
    pub frames_per_unit: usize,
    pub method: Method,
    pub beam: usize,
    pub lm_order: usize,
    pub lm_weight: f64,
    pub insertion_bonus: f64,
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            ops: vec![0, 50, 200],
            mode: Mode::Subword,
            corpus: None,
            train_utterances: 5000,
            test_utterances: 200,
            seed: 1,
            noise: 0.3,
            frames_per_unit: 3,
            method: Method::Greedy,
            beam: 8,
            lm_order: 3,
            lm_weight: 0.5,
            insertion_bonus: 0.5,
        }
    }
}

impl SweepPlan {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut plan = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (key, value) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            let value = value.trim();
            let bad = |what: &str| FormatError::Syntax { line, message: format!("invalid {what} {value:?}") };
            macro_rules! num {
                ($t:ty) => {
                    value.parse::<$t>().map_err(|_| bad(key))?
                };
            }
            match key {
                "ops" => {
                    plan.ops = value.split_whitespace().map(|x| x.parse()).collect::<Result<_, _>>().map_err(|_| bad(key))?;
                    if plan.ops.is_empty() {
                        return Err(bad(key));
                    }
                }
                "mode" => plan.mode = value.parse().map_err(|_| bad(key))?,
                "corpus" => plan.corpus = Some(PathBuf::from(value)),
                "train_utterances" => plan.train_utterances = num!(usize),
                "test_utterances" => plan.test_utterances = num!(usize),
                "seed" => plan.seed = num!(u64),
                "noise" => plan.noise = num!(f64),
                "frames_per_unit" => plan.frames_per_unit = num!(usize),
                "method" => plan.method = value.parse().map_err(|_| bad(key))?,
                "beam" => plan.beam = num!(usize),
                "lm_order" => plan.lm_order = num!(usize),
                "lm_weight" => plan.lm_weight = num!(f64),
                "insertion_bonus" => plan.insertion_bonus = num!(f64),
                _ => return Err(FormatError::Syntax { line, message: format!("unknown key {key:?}") }),
            }
        }
        Ok(plan)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let ops: Vec<String> = self.ops.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "ops {}", ops.join(" "));
        let _ = writeln!(s, "mode {}", self.mode);
        if let Some(c) = &self.corpus {
            let _ = writeln!(s, "corpus {}", c.display());
        }
        let _ = writeln!(s, "train_utterances {}", self.train_utterances);
        let _ = writeln!(s, "test_utterances {}", self.test_utterances);
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "noise {}", self.noise);
        let _ = writeln!(s, "frames_per_unit {}", self.frames_per_unit);
        let _ = writeln!(s, "method {}", self.method);
        let _ = writeln!(s, "beam {}", self.beam);
        let _ = writeln!(s, "lm_order {}", self.lm_order);
        let _ = writeln!(s, "lm_weight {}", self.lm_weight);
        let _ = writeln!(s, "insertion_bonus {}", self.insertion_bonus);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_ops: usize,
    pub merges: usize,
    pub units: usize,
    pub counts: Counts,
}

/// Learn, simulate, decode and score once per entry of `plan.ops`.
pub fn run_sweep(plan: &SweepPlan, alphabet: &Alphabet, train: &[Utterance], test: &[Utterance]) -> Result<Vec<SweepRow>> {
    if plan.method == Method::Wfst && plan.mode == Mode::Crossword {
        bail!("WFST decoding needs a subword inventory");
    }
    let sim = SimConfig { noise: plan.noise, frames_per_unit: plan.frames_per_unit, ..SimConfig::default() };
    let refs = reference_transcripts(test);
    let word_lm = if plan.method == Method::Wfst {
        Some(train_word_lm(train, plan.lm_order, KnOptions::default())?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(plan.ops.len());
    for &n_ops in &plan.ops {
        let learned = learn_from_utterances(train, n_ops, plan.mode, alphabet)?;
        let inv = learned.inventory;
        let posts = simulate_all(test, &inv, &sim, plan.seed)?;
        let unit_lm;
        let graph;
        let decoder = match plan.method {
            Method::Greedy => Decoder::Greedy,
            Method::Beam => {
                unit_lm = train_unit_lm(&inv, train, plan.lm_order, KnOptions::default())?;
                let cfg = BeamConfig {
                    beam_width: plan.beam,
                    lm_weight: plan.lm_weight,
                    insertion_bonus: plan.insertion_bonus,
                    prune_gap: None,
                };
                Decoder::Beam { cfg, lm: Some(&unit_lm) }
            }
            Method::Wfst => {
                graph = DecodingGraph::build(&inv, word_lm.as_ref().expect("built above"))?;
                let cfg = ViterbiConfig {
                    max_active: plan.beam.max(1) * 100,
                    lm_scale: plan.lm_weight,
                    word_penalty: -plan.insertion_bonus,
                    ..ViterbiConfig::default()
                };
                Decoder::Wfst { graph: &graph, cfg }
            }
        };
        let hyps = decode_all(&posts, &inv, &decoder)?;
        let report = score(&refs, &hypothesis_transcripts(&hyps))?;
        rows.push(SweepRow { n_ops, merges: inv.merges().len(), units: inv.len(), counts: report.total });
    }
    Ok(rows)
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), |v| format!("{v:.1}"))
}

pub fn format_sweep_table(rows: &[SweepRow]) -> String {
    let mut s = format!("{:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "n_ops", "merges", "units", "Sub%", "Del%", "Ins%", "WER%");
    for r in rows {
        let c = &r.counts;
        let _ = writeln!(
            s,
            "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            r.n_ops,
            r.merges,
            r.units,
            pct(c.sub_rate()),
            pct(c.del_rate()),
            pct(c.ins_rate()),
            pct(c.wer())
        );
    }
    s
}

/// Tab-separated data with a header row, for plotting.
pub fn format_sweep_tsv(rows: &[SweepRow]) -> String {
    let mut s = String::from("n_ops\tmerges\tunits\tn_ref\tsub\tdel\tins\twer\n");
    for r in rows {
        let c = &r.counts;
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.n_ops,
            r.merges,
            r.units,
            c.n_ref,
            c.substitutions,
            c.deletions,
            c.insertions,
            c.wer().map_or_else(|| "nan".into(), |w| format!("{w:.4}"))
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_round_trip_and_errors() {
        let plan = SweepPlan { ops: vec![0, 10], method: Method::Beam, ..SweepPlan::default() };
        assert_eq!(SweepPlan::parse(&plan.to_text()).unwrap(), plan);
        assert!(SweepPlan::parse("ops\n").is_err());
        let err = SweepPlan::parse("seed 1\nbogus 3\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2"));
    }
}
