use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bpectc::formats::{self, format_report_kv};
use bpectc::io::{read_bytes, read_text, Outputs};
use bpectc::manifest::{repeated, RunManifest};
use bpectc::pipeline::{self, Decoder, Method, SweepPlan};
use bpectc_core::bpe::{learn_from_utterances, Mode, UnitInventory};
use bpectc_core::ctc::{BeamConfig, Posteriorgram, SimConfig};
use bpectc_core::lm::{KnOptions, NGramModel};
use bpectc_core::metrics::{unseen_word_report, Transcripts};
use bpectc_core::rover::rover_combine;
use bpectc_core::synth::{generate_corpus, CorpusConfig};
use bpectc_core::textnorm::{Alphabet, UnknownPolicy, Utterance};
use bpectc_core::wfst::{DecodingGraph, ViterbiConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Invalid flag combinations detected after parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "bpectc", version, about = "BPE acoustic units, CTC decoding and scoring")]
struct Cli {
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn merge rules from a corpus.
    LearnBpe(LearnBpe),
    /// Segment a corpus into units.
    ApplyBpe(ApplyBpe),
    /// Turn unit sequences back into words.
    Detok(Detok),
    /// Train a Kneser-Ney n-gram model (word or unit level).
    TrainLm(TrainLm),
    /// Simulate spike-train posteriorgrams for a corpus.
    GenPosteriors(GenPosteriors),
    /// Decode posteriorgrams.
    Decode(Decode),
    /// Word error rate of hypotheses against references.
    Score(Score),
    /// Correctly recognized words missing from a training corpus.
    UnseenWords(UnseenWords),
    /// Combine hypotheses of several systems by voting.
    Rover(Rover),
    /// Learn, simulate, decode and score over several merge counts.
    Sweep(Sweep),
    /// Write a synthetic conversational corpus.
    GenCorpus(GenCorpus),
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Strict,
    Remove,
}

impl From<Policy> for UnknownPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Strict => UnknownPolicy::Strict,
            Policy::Remove => UnknownPolicy::Remove,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Subword,
    Crossword,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Subword => Mode::Subword,
            ModeArg::Crossword => Mode::Crossword,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PostFormat {
    Text,
    Binary,
}

#[derive(Args)]
struct TextOptions {
    /// Alphabet config (`kind token` lines); English letters and digits by default.
    #[arg(long)]
    alphabet: Option<PathBuf>,
    /// What to do with characters outside the alphabet.
    #[arg(long, value_enum, default_value = "strict")]
    unknown: Policy,
}

impl TextOptions {
    fn load(&self, m: &mut RunManifest) -> Result<Alphabet> {
        m.flag("unknown", policy_name(self.unknown));
        match &self.alphabet {
            Some(p) => {
                m.flag("alphabet", p.display());
                m.inputs.push(p.clone());
                formats::parse_alphabet(&read_text(p)?).with_context(|| p.display().to_string())
            }
            None => Ok(Alphabet::english()),
        }
    }
}

fn policy_name(p: Policy) -> &'static str {
    match p {
        Policy::Strict => "strict",
        Policy::Remove => "remove",
    }
}

#[derive(Args)]
struct LearnBpe {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Number of merge operations.
    #[arg(long)]
    ops: usize,
    #[command(flatten)]
    text: TextOptions,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ApplyBpe {
    #[arg(long)]
    inventory: PathBuf,
    /// Corpus to segment.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "strict")]
    unknown: Policy,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Detok {
    #[arg(long)]
    inventory: PathBuf,
    /// `id<TAB>units` lines.
    #[arg(long)]
    input: PathBuf,
    /// Accept unit sequences that are not well formed (decoder output).
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainLm {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Train over this inventory's units instead of words.
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// Probability mass reserved for unknown symbols.
    #[arg(long, default_value_t = 1e-6)]
    unk_floor: f64,
    #[command(flatten)]
    text: TextOptions,
    /// ARPA output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenPosteriors {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    inventory: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 0 gives one-hot frames.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 3)]
    frames_per_unit: usize,
    #[arg(long, default_value_t = 0.7)]
    blank_prob: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: PostFormat,
    #[arg(long, value_enum, default_value = "strict")]
    unknown: Policy,
    /// Receives one `<id>.post` per utterance and `refs.txt`.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct Decode {
    /// Directory of `.post` files.
    #[arg(long)]
    posteriors: PathBuf,
    #[arg(long)]
    inventory: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    method: Method,
    /// ARPA model: unit level for beam, word level for wfst.
    #[arg(long)]
    lm: Option<PathBuf>,
    /// Beam width (prefix beam search).
    #[arg(long, default_value_t = 16)]
    beam: usize,
    #[arg(long, default_value_t = 0.0)]
    lm_weight: f64,
    #[arg(long, default_value_t = 0.0)]
    insertion_bonus: f64,
    /// Drop prefixes this far below the best (natural log).
    #[arg(long)]
    prune_gap: Option<f64>,
    /// Grammar weight scale (wfst).
    #[arg(long, default_value_t = 1.0)]
    lm_scale: f64,
    /// Cost added per emitted word (wfst).
    #[arg(long, default_value_t = 0.0)]
    word_penalty: f64,
    /// Active state limit per frame (wfst).
    #[arg(long, default_value_t = 2000)]
    max_active: usize,
    /// Cost beam (wfst).
    #[arg(long, default_value_t = 30.0)]
    cost_beam: f64,
    /// Hypothesis file (`id<TAB>words`).
    #[arg(long)]
    out: PathBuf,
    /// Optional per-utterance scores.
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Args)]
struct Score {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    /// Key-value report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct UnseenWords {
    /// Corpus whose words count as seen.
    #[arg(long)]
    train_corpus: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    #[command(flatten)]
    text: TextOptions,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Rover {
    /// Hypothesis files, at least two, aligned in the order given.
    #[arg(long = "hyp", required = true)]
    hyps: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Sweep {
    /// Plan file (`key value` lines).
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GenCorpus {
    #[arg(long, default_value_t = 1000)]
    utterances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    noise_token_rate: f64,
    #[arg(long)]
    out: PathBuf,
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest");
    out.with_file_name(name)
}

/// Writes the single output of a command plus its manifest.
fn finish_single(mut m: RunManifest, out: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    let mut outputs = Outputs::new();
    outputs.write(out, contents)?;
    m.flag("out", out.display());
    m.outputs.push(out.to_path_buf());
    outputs.write(&manifest_path(out), m.to_text())?;
    outputs.commit();
    Ok(())
}

fn load_inventory(path: &Path, m: &mut RunManifest) -> Result<UnitInventory> {
    m.flag("inventory", path.display());
    m.inputs.push(path.to_path_buf());
    formats::parse_inventory(&read_text(path)?).with_context(|| path.display().to_string())
}

fn load_corpus(path: &Path, alphabet: &Alphabet, policy: Policy, m: &mut RunManifest) -> Result<Vec<Utterance>> {
    m.inputs.push(path.to_path_buf());
    formats::parse_corpus(&read_text(path)?, alphabet, policy.into()).with_context(|| path.display().to_string())
}

fn load_transcripts(path: &Path, m: &mut RunManifest) -> Result<Transcripts> {
    m.inputs.push(path.to_path_buf());
    formats::parse_transcripts(&read_text(path)?).with_context(|| path.display().to_string())
}

fn load_arpa(path: &Path, m: &mut RunManifest) -> Result<NGramModel> {
    m.flag("lm", path.display());
    m.inputs.push(path.to_path_buf());
    formats::parse_arpa(&read_text(path)?).with_context(|| path.display().to_string())
}

fn learn_bpe(a: LearnBpe) -> Result<()> {
    let mut m = RunManifest::new("learn-bpe");
    m.flag("corpus", a.corpus.display()).flag("mode", Mode::from(a.mode)).flag("ops", a.ops);
    let alphabet = a.text.load(&mut m)?;
    let utts = load_corpus(&a.corpus, &alphabet, a.text.unknown, &mut m)?;
    let learned = learn_from_utterances(&utts, a.ops, a.mode.into(), &alphabet)?;
    log::info!("{} merges, {} units", learned.inventory.merges().len(), learned.inventory.len());
    finish_single(m, &a.out, formats::format_inventory(&learned.inventory))
}

fn apply_bpe(a: ApplyBpe) -> Result<()> {
    let mut m = RunManifest::new("apply-bpe");
    let inv = load_inventory(&a.inventory, &mut m)?;
    m.flag("input", a.input.display()).flag("unknown", policy_name(a.unknown));
    let utts = load_corpus(&a.input, inv.alphabet(), a.unknown, &mut m)?;
    let rows: Vec<(String, Vec<String>)> = utts
        .iter()
        .map(|u| inv.encode_serialized(u).map(|s| (u.id.clone(), s)).with_context(|| format!("utterance {}", u.id)))
        .collect::<Result<_>>()?;
    finish_single(m, &a.out, formats::format_unit_lines(&rows))
}

fn detok(a: Detok) -> Result<()> {
    let mut m = RunManifest::new("detok");
    let inv = load_inventory(&a.inventory, &mut m)?;
    m.flag("input", a.input.display()).flag("lenient", a.lenient);
    let units = load_transcripts(&a.input, &mut m)?;
    let mut out = Transcripts::new();
    for (id, u) in &units {
        let text =
            if a.lenient { inv.detokenize_lenient(u) } else { inv.detokenize(u).with_context(|| format!("utterance {id}"))? };
        out.insert(id.clone(), text.split_whitespace().map(str::to_string).collect());
    }
    finish_single(m, &a.out, formats::format_transcripts(&out))
}

fn train_lm(a: TrainLm) -> Result<()> {
    let mut m = RunManifest::new("train-lm");
    m.flag("corpus", a.corpus.display()).flag("order", a.order).flag("unk-floor", a.unk_floor);
    if !(0.0..1.0).contains(&a.unk_floor) {
        return Err(usage("--unk-floor must lie in [0, 1)"));
    }
    let options = KnOptions { unk_floor: a.unk_floor };
    let lm = match &a.inventory {
        Some(p) => {
            let inv = load_inventory(p, &mut m)?;
            m.flag("unknown", policy_name(a.text.unknown));
            let utts = load_corpus(&a.corpus, inv.alphabet(), a.text.unknown, &mut m)?;
            pipeline::train_unit_lm(&inv, &utts, a.order, options)?
        }
        None => {
            let alphabet = a.text.load(&mut m)?;
            let utts = load_corpus(&a.corpus, &alphabet, a.text.unknown, &mut m)?;
            pipeline::train_word_lm(&utts, a.order, options)?
        }
    };
    finish_single(m, &a.out, formats::format_arpa(&lm))
}

fn safe_id(id: &str) -> bool {
    !id.is_empty() && !id.starts_with('.') && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
}

fn gen_posteriors(a: GenPosteriors) -> Result<()> {
    let mut m = RunManifest::new("gen-posteriors");
    let inv = load_inventory(&a.inventory, &mut m)?;
    m.flag("corpus", a.corpus.display())
        .flag("seed", a.seed)
        .flag("noise", a.noise)
        .flag("frames-per-unit", a.frames_per_unit)
        .flag("blank-prob", a.blank_prob)
        .flag("format", match a.format {
            PostFormat::Text => "text",
            PostFormat::Binary => "binary",
        })
        .flag("unknown", policy_name(a.unknown))
        .flag("out-dir", a.out_dir.display());
    m.seeds.push(a.seed);
    let utts = load_corpus(&a.corpus, inv.alphabet(), a.unknown, &mut m)?;
    if let Some(u) = utts.iter().find(|u| !safe_id(&u.id)) {
        anyhow::bail!("utterance id {:?} cannot be used as a file name", u.id);
    }
    let cfg = SimConfig { frames_per_unit: a.frames_per_unit, blank_prob: a.blank_prob, noise: a.noise, ..SimConfig::default() };
    let posts = pipeline::simulate_all(&utts, &inv, &cfg, a.seed)?;
    let mut outputs = Outputs::new();
    outputs.create_dir(&a.out_dir)?;
    for (id, p) in &posts {
        let path = a.out_dir.join(format!("{id}.post"));
        match a.format {
            PostFormat::Text => outputs.write(&path, formats::format_posteriorgram_text(p))?,
            PostFormat::Binary => outputs.write(&path, formats::format_posteriorgram_binary(p))?,
        }
    }
    outputs.write(&a.out_dir.join("refs.txt"), formats::format_transcripts(&pipeline::reference_transcripts(&utts)))?;
    m.outputs = outputs.paths().to_vec();
    outputs.write(&a.out_dir.join("manifest.txt"), m.to_text())?;
    outputs.commit();
    Ok(())
}

fn load_posteriors(dir: &Path, m: &mut RunManifest) -> Result<Vec<(String, Posteriorgram)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "post"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        anyhow::bail!("no .post files in {}", dir.display());
    }
    m.inputs.push(dir.to_path_buf());
    paths
        .iter()
        .map(|p| {
            let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let post = formats::parse_posteriorgram(&read_bytes(p)?).with_context(|| p.display().to_string())?;
            Ok((id, post))
        })
        .collect()
}

fn decode(a: Decode) -> Result<()> {
    let mut m = RunManifest::new("decode");
    let inv = load_inventory(&a.inventory, &mut m)?;
    m.flag("posteriors", a.posteriors.display()).flag("method", a.method);
    if a.beam == 0 || a.max_active == 0 {
        return Err(usage("--beam and --max-active must be at least 1"));
    }
    let lm = a.lm.as_ref().map(|p| load_arpa(p, &mut m)).transpose()?;
    let posts = load_posteriors(&a.posteriors, &mut m)?;
    let graph;
    let decoder = match a.method {
        Method::Greedy => Decoder::Greedy,
        Method::Beam => {
            m.flag("beam", a.beam).flag("lm-weight", a.lm_weight).flag("insertion-bonus", a.insertion_bonus);
            if let Some(g) = a.prune_gap {
                m.flag("prune-gap", g);
            }
            let cfg = BeamConfig {
                beam_width: a.beam,
                lm_weight: a.lm_weight,
                insertion_bonus: a.insertion_bonus,
                prune_gap: a.prune_gap,
            };
            Decoder::Beam { cfg, lm: lm.as_ref() }
        }
        Method::Wfst => {
            let lm = lm.as_ref().ok_or_else(|| usage("--method wfst needs --lm with a word-level model"))?;
            m.flag("lm-scale", a.lm_scale)
                .flag("word-penalty", a.word_penalty)
                .flag("max-active", a.max_active)
                .flag("cost-beam", a.cost_beam);
            graph = DecodingGraph::build(&inv, lm)?;
            log::info!("decoding graph: {} states, {} arcs", graph.fst.num_states(), graph.fst.num_arcs());
            let cfg = ViterbiConfig {
                max_active: a.max_active,
                beam: Some(a.cost_beam),
                lm_scale: a.lm_scale,
                word_penalty: a.word_penalty,
            };
            Decoder::Wfst { graph: &graph, cfg }
        }
    };
    let hyps = pipeline::decode_all(&posts, &inv, &decoder)?;
    let mut outputs = Outputs::new();
    outputs.write(&a.out, formats::format_transcripts(&pipeline::hypothesis_transcripts(&hyps)))?;
    m.flag("out", a.out.display());
    m.outputs.push(a.out.clone());
    if let Some(path) = &a.scores {
        let mut s = String::from("id\tam_score\tlm_score\ttotal_score\tunits\n");
        for (id, h) in &hyps {
            let _ = writeln!(s, "{id}\t{:.6}\t{:.6}\t{:.6}\t{}", h.am_score, h.lm_score, h.total_score, h.units.join(" "));
        }
        outputs.write(path, s)?;
        m.flag("scores", path.display());
        m.outputs.push(path.clone());
    }
    outputs.write(&manifest_path(&a.out), m.to_text())?;
    outputs.commit();
    Ok(())
}

fn score(a: Score) -> Result<()> {
    let mut m = RunManifest::new("score");
    m.flag("ref", a.reference.display()).flag("hyp", a.hyp.display());
    let refs = load_transcripts(&a.reference, &mut m)?;
    let hyps = load_transcripts(&a.hyp, &mut m)?;
    let report = pipeline::score(&refs, &hyps)?;
    print!("{report}");
    finish_single(m, &a.out, format_report_kv(&report))
}

fn unseen_words(a: UnseenWords) -> Result<()> {
    let mut m = RunManifest::new("unseen-words");
    m.flag("train-corpus", a.train_corpus.display()).flag("ref", a.reference.display()).flag("hyp", a.hyp.display());
    let alphabet = a.text.load(&mut m)?;
    let train = load_corpus(&a.train_corpus, &alphabet, a.text.unknown, &mut m)?;
    let vocab: BTreeSet<String> = train.into_iter().flat_map(|u| u.words).collect();
    let refs = load_transcripts(&a.reference, &mut m)?;
    let hyps = load_transcripts(&a.hyp, &mut m)?;
    let report = unseen_word_report(&vocab, &refs, &hyps)?;
    println!("unseen words recognized: {} tokens, {} types", report.tokens, report.types());
    finish_single(m, &a.out, formats::format_unseen_kv(&report))
}

fn rover(a: Rover) -> Result<()> {
    if a.hyps.len() < 2 {
        return Err(usage("rover needs at least two --hyp files"));
    }
    let mut m = RunManifest::new("rover");
    m.flag("hyp", repeated(&a.hyps.iter().map(|p| p.display().to_string()).collect::<Vec<_>>()));
    let systems: Vec<Transcripts> = a.hyps.iter().map(|p| load_transcripts(p, &mut m)).collect::<Result<_>>()?;
    let ids: BTreeSet<&String> = systems.iter().flat_map(|s| s.keys()).collect();
    let missing: Vec<String> =
        ids.iter().filter(|id| systems.iter().any(|s| !s.contains_key(**id))).map(|s| s.to_string()).collect();
    if !missing.is_empty() {
        return Err(bpectc_core::metrics::MetricsError::MissingUtterance(missing).into());
    }
    let combined: Transcripts = ids
        .into_iter()
        .map(|id| {
            let hyps: Vec<Vec<String>> = systems.iter().map(|s| s[id].clone()).collect();
            (id.clone(), rover_combine(&hyps))
        })
        .collect();
    finish_single(m, &a.out, formats::format_transcripts(&combined))
}

fn sweep(a: Sweep) -> Result<()> {
    let mut m = RunManifest::new("sweep");
    m.flag("plan", a.plan.display()).flag("out-dir", a.out_dir.display());
    m.inputs.push(a.plan.clone());
    let plan = SweepPlan::parse(&read_text(&a.plan)?).with_context(|| a.plan.display().to_string())?;
    m.seeds.push(plan.seed);
    let alphabet = Alphabet::english();
    let all = match &plan.corpus {
        Some(path) => {
            let path = if path.is_relative() { a.plan.parent().unwrap_or(Path::new("")).join(path) } else { path.clone() };
            load_corpus(&path, &alphabet, Policy::Strict, &mut m)?
        }
        None => {
            let cfg = CorpusConfig { utterances: plan.train_utterances + plan.test_utterances, ..CorpusConfig::default() };
            generate_corpus(&cfg, &alphabet, plan.seed)?.utterances
        }
    };
    if all.len() <= plan.test_utterances {
        anyhow::bail!("corpus has {} utterances, need more than {} for testing", all.len(), plan.test_utterances);
    }
    let (train, test) = all.split_at(all.len() - plan.test_utterances);
    let rows = pipeline::run_sweep(&plan, &alphabet, train, test)?;
    let table = pipeline::format_sweep_table(&rows);
    print!("{table}");
    let mut outputs = Outputs::new();
    outputs.create_dir(&a.out_dir)?;
    outputs.write(&a.out_dir.join("sweep.txt"), &table)?;
    outputs.write(&a.out_dir.join("sweep.tsv"), pipeline::format_sweep_tsv(&rows))?;
    outputs.write(&a.out_dir.join("plan.txt"), plan.to_text())?;
    m.outputs = outputs.paths().to_vec();
    outputs.write(&a.out_dir.join("manifest.txt"), m.to_text())?;
    outputs.commit();
    Ok(())
}

fn gen_corpus(a: GenCorpus) -> Result<()> {
    let mut m = RunManifest::new("gen-corpus");
    m.flag("utterances", a.utterances).flag("seed", a.seed).flag("noise-token-rate", a.noise_token_rate);
    m.seeds.push(a.seed);
    if !(0.0..=1.0).contains(&a.noise_token_rate) {
        return Err(usage("--noise-token-rate must lie in [0, 1]"));
    }
    let cfg = CorpusConfig { utterances: a.utterances, noise_token_rate: a.noise_token_rate, ..CorpusConfig::default() };
    let corpus = generate_corpus(&cfg, &Alphabet::english(), a.seed)?;
    finish_single(m, &a.out, formats::format_corpus(&corpus.utterances))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::LearnBpe(a) => learn_bpe(a),
        Command::ApplyBpe(a) => apply_bpe(a),
        Command::Detok(a) => detok(a),
        Command::TrainLm(a) => train_lm(a),
        Command::GenPosteriors(a) => gen_posteriors(a),
        Command::Decode(a) => decode(a),
        Command::Score(a) => score(a),
        Command::UnseenWords(a) => unseen_words(a),
        Command::Rover(a) => rover(a),
        Command::Sweep(a) => sweep(a),
        Command::GenCorpus(a) => gen_corpus(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("error: invalid usage"));
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).parse_default_env().init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(if e.downcast_ref::<UsageError>().is_some() { 1 } else { 2 })
        }
    }
}
