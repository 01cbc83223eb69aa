//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input or config error, 3 generation error,
//! 4 recovery events under `--strict`, 5 ids of ground truth and
//! predictions do not line up.

use std::collections::{HashMap, HashSet};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::value::RawValue;

use crate::codec::{decode, encode, parse_surface, DocTree, Vocab};
use crate::corpus::{parse_doctree, parse_raw_doctree, validate_manifest};
use crate::metrics::{anls, classification_hits, nted, MetricReport, SampleScore, DEFAULT_TAU};
use crate::synthdog::{generate, DirectorySink, GenConfig, Synthesizer};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_GENERATION: u8 = 3;
pub const EXIT_STRICT: u8 = 4;
pub const EXIT_ALIGNMENT: u8 = 5;

/// Worker thread cap for `generate`; 0 or unset means one per core.
pub const THREADS_ENV: &str = "DOCFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "docforge", version, about = "Synthetic documents, token codec and metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic dataset: images/*.png plus metadata.jsonl.
    Generate(GenerateArgs),
    /// Print the token sequence of a JSON document.
    Encode(EncodeArgs),
    /// Parse token sequences (one per line) back into JSON.
    Decode(DecodeArgs),
    /// Score predictions against ground truth.
    Score(ScoreArgs),
    /// Check a metadata.jsonl manifest.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// TOML generator config.
    pub config: PathBuf,
    #[arg(long)]
    pub count: u64,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Config override, e.g. `--set layout.columns=[1,2]`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// JSON document, or `-` for standard input.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// JSON vocabulary with `fields`, `classes` and `prompts` arrays.
    #[arg(long)]
    pub vocab: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Token sequences, one per line, or `-` for standard input.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Exit with status 4 if any recovery event occurred.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Nted,
    Anls,
    Accuracy,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// JSONL ground truth: `{"id", "parse"}` lines, or `{"id", "answers"}`
    /// for anls.
    #[arg(long)]
    pub gt: PathBuf,
    /// JSONL predictions: `{"id", "parse"}` lines, or `{"id", "answer"}`
    /// for anls.
    #[arg(long)]
    pub pred: PathBuf,
    /// Report destination; standard output by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// ANLS threshold.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Field compared by the accuracy metric.
    #[arg(long, default_value = "class")]
    pub key: String,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub manifest: PathBuf,
    /// Also open images and check text and codec consistency.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

/// Runs a parsed command. Results go to `out`, diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a, out, err),
        Command::Encode(a) => cmd_encode(a, out),
        Command::Decode(a) => cmd_decode(a, out, err),
        Command::Score(a) => cmd_score(a, out),
        Command::Validate(a) => cmd_validate(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::input(format!("standard input: {e}")))?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_vocab(path: &Path) -> Result<Vocab, Failure> {
    let text = read_input(path)?;
    Vocab::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure::input(format!("cannot write output: {e}")))
}

pub fn threads_from_env() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("{THREADS_ENV}={v:?} is not a non-negative integer"))),
    }
}

fn cmd_generate(args: GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let mut overrides = args.overrides;
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    let config = GenConfig::load(&args.config, &overrides).map_err(|e| Failure::input(e.to_string()))?;
    let threads = threads_from_env()?;
    let synth = Synthesizer::new(config).map_err(|e| Failure::input(e.to_string()))?;
    let sink = DirectorySink::create(&args.out)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", args.out.display())))?;

    let started = Instant::now();
    let step = (args.count / 10).max(1);
    let progress = |done: u64, total: u64| {
        if total >= 100 && done.is_multiple_of(step) {
            eprintln!("generated {done}/{total}");
        }
    };
    let summary = generate(&synth, args.count, threads, &sink, Some(&progress)).map_err(|e| Failure {
        code: EXIT_GENERATION,
        message: e.to_string(),
    })?;
    let manifest = sink.finish().map_err(|e| Failure {
        code: EXIT_GENERATION,
        message: format!("cannot finish manifest: {e}"),
    })?;
    let seconds = started.elapsed().as_secs_f64();
    let _ = writeln!(err, "wrote {}", manifest.display());
    let line = serde_json::json!({
        "images": summary.images,
        "words": summary.words,
        "seconds": (seconds * 1000.0).round() / 1000.0,
        "manifest": manifest,
    });
    write_out(out, &line.to_string())?;
    Ok(EXIT_OK)
}

fn cmd_encode(args: EncodeArgs, out: &mut dyn Write) -> Outcome {
    let vocab = load_vocab(&args.vocab)?;
    let text = read_input(&args.input)?;
    let tree = parse_doctree(&text).map_err(|e| Failure::input(format!("{}: {e}", args.input.display())))?;
    let seq = encode(&tree, &vocab).map_err(|e| Failure::input(e.to_string()))?;
    write_out(out, &seq.render())?;
    Ok(EXIT_OK)
}

fn cmd_decode(args: DecodeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let vocab = load_vocab(&args.vocab)?;
    let text = read_input(&args.input)?;
    let mut recovered = false;
    let mut lines: Vec<&str> = text.lines().collect();
    // An empty file is one empty sequence.
    if lines.iter().all(|l| l.trim().is_empty()) {
        lines = vec![""];
    }
    for (n, line) in lines.iter().enumerate() {
        if line.trim().is_empty() && lines.len() > 1 {
            continue;
        }
        let (tree, events) = decode(&parse_surface(line, &vocab));
        write_out(out, &tree.to_json_string())?;
        if !events.is_empty() {
            recovered = true;
            let sidecar = serde_json::json!({ "line": n + 1, "events": events });
            let _ = writeln!(err, "{sidecar}");
        }
    }
    Ok(if recovered && args.strict { EXIT_STRICT } else { EXIT_OK })
}

/// Ids may be strings or numbers; both compare as text.
#[derive(Deserialize)]
#[serde(untagged)]
enum Id {
    Text(String),
    Number(serde_json::Number),
}

impl Id {
    fn into_string(self) -> String {
        match self {
            Id::Text(s) => s,
            Id::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
struct ParseLine {
    id: Id,
    parse: Box<RawValue>,
}

#[derive(Deserialize)]
struct GoldAnswers {
    id: Id,
    answers: Vec<String>,
}

#[derive(Deserialize)]
struct PredAnswer {
    id: Id,
    answer: String,
}

/// Reads a JSONL file into `(id, record)` pairs, rejecting duplicate ids.
fn read_keyed<T: for<'de> Deserialize<'de>>(
    path: &Path,
    id_of: impl Fn(&mut T) -> String,
) -> Result<Vec<(String, T)>, Failure> {
    let text = read_input(path)?;
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut record: T = serde_json::from_str(line)
            .map_err(|e| Failure::input(format!("{}:{}: {e}", path.display(), n + 1)))?;
        let id = id_of(&mut record);
        if !seen.insert(id.clone()) {
            return Err(Failure::input(format!("{}:{}: duplicate id {id:?}", path.display(), n + 1)));
        }
        rows.push((id, record));
    }
    Ok(rows)
}

/// Pairs every ground-truth record with its prediction, in ground-truth order.
fn align<G, P>(gts: Vec<(String, G)>, preds: Vec<(String, P)>) -> Result<Vec<(String, G, P)>, Failure> {
    let mut by_id: HashMap<String, P> = preds.into_iter().collect();
    let mut missing = Vec::new();
    let mut pairs = Vec::with_capacity(gts.len());
    for (id, g) in gts {
        match by_id.remove(&id) {
            Some(p) => pairs.push((id, g, p)),
            None => missing.push(id),
        }
    }
    let mut extra: Vec<String> = by_id.into_keys().collect();
    extra.sort();
    if missing.is_empty() && extra.is_empty() {
        return Ok(pairs);
    }
    let mut message = String::from("ground truth and predictions are not aligned");
    if !missing.is_empty() {
        message += &format!("; no prediction for ids: {}", missing.join(", "));
    }
    if !extra.is_empty() {
        message += &format!("; no ground truth for ids: {}", extra.join(", "));
    }
    Err(Failure {
        code: EXIT_ALIGNMENT,
        message,
    })
}

fn take_id(slot: &mut Id) -> String {
    std::mem::replace(slot, Id::Text(String::new())).into_string()
}

fn parse_tree(raw: &RawValue, path: &Path, id: &str) -> Result<DocTree, Failure> {
    parse_raw_doctree(raw).map_err(|e| Failure::input(format!("{}: id {id:?}: {e}", path.display())))
}

fn cmd_score(args: ScoreArgs, out: &mut dyn Write) -> Outcome {
    let samples = match args.metric {
        Metric::Nted | Metric::Accuracy => {
            let gts = read_keyed(&args.gt, |r: &mut ParseLine| take_id(&mut r.id))?;
            let preds = read_keyed(&args.pred, |r: &mut ParseLine| take_id(&mut r.id))?;
            let mut ids = Vec::new();
            let (mut gt_trees, mut pred_trees) = (Vec::new(), Vec::new());
            for (id, g, p) in align(gts, preds)? {
                gt_trees.push(parse_tree(&g.parse, &args.gt, &id)?);
                pred_trees.push(parse_tree(&p.parse, &args.pred, &id)?);
                ids.push(id);
            }
            if args.metric == Metric::Nted {
                ids.into_iter()
                    .zip(pred_trees.iter().zip(&gt_trees))
                    .map(|(id, (p, g))| {
                        let score = nted(p, g).map_err(|e| Failure::input(format!("id {id:?}: {e}")))?;
                        Ok(SampleScore::new(id, score))
                    })
                    .collect::<Result<Vec<_>, Failure>>()?
            } else {
                let hits = classification_hits(&pred_trees, &gt_trees, &args.key).map_err(|e| match e {
                    crate::metrics::MetricError::MalformedGroundTruth(i) => Failure::input(format!(
                        "ground truth {:?} has no text at key {:?}",
                        ids[i], args.key
                    )),
                    other => Failure::input(other.to_string()),
                })?;
                ids.into_iter()
                    .zip(hits)
                    .map(|(id, hit)| SampleScore::new(id, if hit { 1.0 } else { 0.0 }))
                    .collect()
            }
        }
        Metric::Anls => {
            if !(0.0..=1.0).contains(&args.tau) {
                return Err(Failure::input(format!("--tau {} is outside [0, 1]", args.tau)));
            }
            let gts = read_keyed(&args.gt, |r: &mut GoldAnswers| take_id(&mut r.id))?;
            let preds = read_keyed(&args.pred, |r: &mut PredAnswer| take_id(&mut r.id))?;
            align(gts, preds)?
                .into_iter()
                .map(|(id, g, p)| {
                    let score =
                        anls(&p.answer, &g.answers, args.tau).map_err(|e| Failure::input(format!("id {id:?}: {e}")))?;
                    Ok(SampleScore::new(id, score))
                })
                .collect::<Result<Vec<_>, Failure>>()?
        }
    };
    let name = match args.metric {
        Metric::Nted => "nted",
        Metric::Anls => "anls",
        Metric::Accuracy => "accuracy",
    };
    let report = MetricReport::new(name, samples).to_json();
    match &args.out {
        Some(path) => std::fs::write(path, report + "\n")
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?,
        None => write_out(out, &report)?,
    }
    Ok(EXIT_OK)
}

fn cmd_validate(args: ValidateArgs, out: &mut dyn Write) -> Outcome {
    let report = validate_manifest(&args.manifest, args.strict)
        .map_err(|e| Failure::input(format!("{}: {e}", args.manifest.display())))?;
    let json = serde_json::to_string_pretty(&report).expect("report serialization");
    write_out(out, &json)?;
    Ok(if report.is_clean() { EXIT_OK } else { EXIT_INPUT })
}
