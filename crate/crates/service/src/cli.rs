//! `fakescope` command line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use fakescope::annotation::BucketScheme;
use fakescope::classifier::LabeledDocument;
use fakescope::experiment::{
    build_fake_sources, load_corpus, run_table1, score_corpus, source_name, Corpus,
    ExperimentConfig,
};
use fakescope::model::{
    load_model, save_model, train_ngram, DetectionModel, RemoteModel, SamplingConfig,
    ScoringMode, TrainConfig, DEFAULT_TIMEOUT,
};
use fakescope::stats::{entropy_rank_points, kde2d, scott_bandwidths, GridSpec};
use fakescope::tokenize::words;

use crate::api::{analyze, DEFAULT_MAX_TEXT_BYTES};
use crate::registry::ModelRegistry;
use crate::server::{serve, AppState};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_MODEL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fakescope", version, about = "Token-rank forensics for generated text")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an n-gram detection model on plain text.
    Train(TrainArgs),
    /// Score a document (or a JSONL corpus) under a model.
    Score(ScoreArgs),
    /// Sample synthetic documents from a model as a JSONL corpus.
    Generate(GenerateArgs),
    /// Source-level detection experiment over labeled corpora.
    Experiment(ExperimentArgs),
    /// Entropy / log-rank density grid from scored documents.
    Kde(KdeArgs),
    /// Run the HTTP analysis service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// A text file, or a directory searched recursively for *.txt.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 0.75)]
    pub discount: f64,
    #[arg(long, default_value_t = 2)]
    pub min_count: u64,
    /// Keep the original casing instead of lowercasing.
    #[arg(long)]
    pub keep_case: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ModeArgs {
    /// Score with context on both sides of each token.
    #[arg(long)]
    pub masked: bool,
    /// Tokens of context per side in masked mode.
    #[arg(long, default_value_t = fakescope::model::DEFAULT_WINDOW)]
    pub window: usize,
}

impl ModeArgs {
    fn mode(&self) -> fakescope::Result<ScoringMode> {
        if self.masked {
            ScoringMode::masked(self.window)
        } else {
            Ok(ScoringMode::Causal)
        }
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Plain-text document to analyze.
    #[arg(long = "in", conflicts_with = "corpus", required_unless_present = "corpus")]
    pub input: Option<PathBuf>,
    /// Write the analysis (API response schema) here; `-` for stdout.
    #[arg(long, requires = "input")]
    pub json: Option<PathBuf>,
    /// Labeled JSONL corpus; every document is scored.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Scored-document JSONL output for `--corpus`.
    #[arg(long, requires = "corpus")]
    pub out: Option<PathBuf>,
    /// Rank thresholds, e.g. `10,100,1000`.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<usize>>,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub len: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    /// 0 disables truncation.
    #[arg(long, default_value_t = 0)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Source name for the documents; derived from the settings by default.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSONL file or labeled directory; repeat to combine corpora.
    #[arg(long, required = true)]
    pub corpus: Vec<PathBuf>,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// L2 penalty for every logistic regression.
    #[arg(long, default_value_t = 1.0)]
    pub l2: f64,
    /// Minimum document frequency for bag-of-words vocabulary entries.
    #[arg(long, default_value_t = 1)]
    pub bow_min_df: usize,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct KdeArgs {
    /// Scored-document JSONL written by `score --corpus ... --out`.
    #[arg(long)]
    pub scored: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub nx: usize,
    #[arg(long, default_value_t = 50)]
    pub ny: usize,
    /// Grid padding beyond the data range, in bandwidths.
    #[arg(long, default_value_t = 3.0)]
    pub pad: f64,
    /// Only tokens from documents with this label.
    #[arg(long)]
    pub label: Option<fakescope::classifier::Label>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "FAKESCOPE_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Model file, optionally `name=path`; the name defaults to the file stem.
    #[arg(long)]
    pub model: Vec<String>,
    /// External adapter as `name=url`.
    #[arg(long)]
    pub adapter: Vec<String>,
    /// Adapter request timeout in seconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs_f64())]
    pub adapter_timeout: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_TEXT_BYTES)]
    pub max_text_bytes: usize,
}

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

trait Classify<T> {
    fn data(self) -> Result<T, Failure>;
    fn model(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXIT_DATA,
            error: e.into(),
        })
    }

    fn model(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXIT_MODEL,
            error: e.into(),
        })
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: anyhow!(msg.into()),
    }
}

/// Parameter errors are the caller's fault; everything else keeps the
/// category of the step that failed.
fn by_kind(err: fakescope::Error, default: i32) -> Failure {
    let code = match err {
        fakescope::Error::Parameter(_) => EXIT_USAGE,
        fakescope::Error::NoTokens
        | fakescope::Error::Schema { .. }
        | fakescope::Error::DuplicateId(_)
        | fakescope::Error::Corpus(_)
        | fakescope::Error::SingleClass
        | fakescope::Error::EmptyCorpus => EXIT_DATA,
        fakescope::Error::Format { .. }
        | fakescope::Error::Version { .. }
        | fakescope::Error::Capability(_)
        | fakescope::Error::Timeout(_)
        | fakescope::Error::Protocol(_)
        | fakescope::Error::VocabularyMismatch(_) => EXIT_MODEL,
        _ => default,
    };
    Failure {
        code,
        error: err.into(),
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Score(a) => score(a),
        Command::Generate(a) => generate(a),
        Command::Experiment(a) => experiment(a),
        Command::Kde(a) => kde(a),
        Command::Serve(a) => serve_cmd(a),
    }
}

fn collect_txt(path: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    if path.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(path)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_txt(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "txt") {
            out.push(p);
        }
    }
    Ok(())
}

/// Blank-line separated paragraphs from every text file under `path`, each
/// tokenized into one training sequence.
pub fn load_training_sequences(path: &Path, case_fold: bool) -> anyhow::Result<Vec<Vec<String>>> {
    let mut files = Vec::new();
    collect_txt(path, &mut files).with_context(|| format!("reading {}", path.display()))?;
    let mut sequences = Vec::new();
    for file in files {
        let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
        let mut paragraph = String::new();
        for line in text.lines().chain(std::iter::once("")) {
            if line.trim().is_empty() {
                let seq = words(&paragraph, case_fold);
                if !seq.is_empty() {
                    sequences.push(seq);
                }
                paragraph.clear();
            } else {
                paragraph.push_str(line);
                paragraph.push('\n');
            }
        }
    }
    Ok(sequences)
}

fn train(a: TrainArgs) -> Result<(), Failure> {
    let sequences = load_training_sequences(&a.corpus, !a.keep_case).data()?;
    let config = TrainConfig {
        order: a.order,
        discount: a.discount,
        min_count: a.min_count,
        case_folded: !a.keep_case,
    };
    let model = train_ngram(&sequences, config).map_err(|e| by_kind(e, EXIT_DATA))?;
    save_model(&model, &a.out).map_err(|e| by_kind(e, EXIT_DATA))?;
    eprintln!(
        "trained order-{} model on {} sequences; vocabulary {}",
        model.order(),
        sequences.len(),
        model.vocab().len()
    );
    Ok(())
}

fn open_model(path: &Path) -> Result<Arc<dyn DetectionModel>, Failure> {
    let model = load_model(path).map_err(|e| by_kind(e, EXIT_MODEL))?;
    Ok(Arc::new(model))
}

fn create(path: &Path) -> Result<Box<dyn Write>, Failure> {
    if path == Path::new("-") {
        return Ok(Box::new(std::io::stdout().lock()));
    }
    let file = fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .data()?;
    Ok(Box::new(BufWriter::new(file)))
}

fn finish(mut w: Box<dyn Write>) -> Result<(), Failure> {
    w.flush().context("writing output").data()
}

fn score(a: ScoreArgs) -> Result<(), Failure> {
    let model = open_model(&a.model)?;
    let mode = a.mode.mode().map_err(|e| by_kind(e, EXIT_USAGE))?;
    let scheme = match a.thresholds {
        Some(t) => BucketScheme::new(t).map_err(|e| by_kind(e, EXIT_USAGE))?,
        None => BucketScheme::default(),
    };
    if let Some(corpus) = a.corpus {
        let corpus = load_corpus(&corpus, None).map_err(|e| by_kind(e, EXIT_DATA))?;
        let docs = score_corpus(&corpus, model.as_ref(), mode).map_err(|e| by_kind(e, EXIT_DATA))?;
        let out = a.out.unwrap_or_else(|| PathBuf::from("-"));
        let mut w = create(&out)?;
        for d in &docs {
            serde_json::to_writer(&mut w, d).data()?;
            w.write_all(b"\n").data()?;
        }
        return finish(w);
    }
    let input = a.input.expect("clap enforces --in or --corpus");
    let text = fs::read_to_string(&input)
        .with_context(|| format!("reading {}", input.display()))
        .data()?;
    let response = analyze(model.as_ref(), &text, mode, &scheme).map_err(|e| by_kind(e, EXIT_DATA))?;
    match a.json {
        Some(path) => {
            let mut w = create(&path)?;
            serde_json::to_writer(&mut w, &response).data()?;
            w.write_all(b"\n").data()?;
            finish(w)
        }
        None => {
            let mut w = create(Path::new("-"))?;
            let _ = writeln!(w, "{:<16} {:>8} {:>12} {:>8} {:>8}  bucket", "token", "rank", "prob", "frac", "entropy");
            for i in 0..response.len() {
                let _ = writeln!(
                    w,
                    "{:<16} {:>8} {:>12.4e} {:>8.4} {:>8.4}  {}",
                    response.tokens[i].text,
                    response.rank[i],
                    response.prob[i],
                    response.frac_prob[i],
                    response.entropy[i],
                    response.scheme.colors[response.bucket[i]]
                );
            }
            finish(w)
        }
    }
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let model = open_model(&a.model)?;
    let config = SamplingConfig {
        temperature: a.temperature,
        top_k: a.top_k,
    };
    config.validate().map_err(|e| by_kind(e, EXIT_USAGE))?;
    let mut corpus = build_fake_sources(model.as_ref(), &[], a.n, a.len, &[config], a.seed)
        .map_err(|e| by_kind(e, EXIT_MODEL))?;
    if let Some(source) = a.source {
        let default = source_name(&config);
        for d in &mut corpus.documents {
            d.id = d.id.replacen(&default, &source, 1);
            d.source = source.clone();
        }
    }
    let w = create(&a.out)?;
    let mut w = w;
    corpus.write_jsonl(&mut w).map_err(|e| by_kind(e, EXIT_DATA))?;
    finish(w)
}

fn experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let model = open_model(&a.model)?;
    let mut corpus = Corpus::default();
    for path in &a.corpus {
        let part = load_corpus(path, None).map_err(|e| by_kind(e, EXIT_DATA))?;
        corpus = corpus.merge(part).map_err(|e| by_kind(e, EXIT_DATA))?;
    }
    let mut config = ExperimentConfig {
        mode: a.mode.mode().map_err(|e| by_kind(e, EXIT_USAGE))?,
        ..ExperimentConfig::default()
    };
    config.cv.logreg.l2 = a.l2;
    config.cv.bow_min_df = a.bow_min_df;
    let report = run_table1(&corpus, model.as_ref(), &config).map_err(|e| by_kind(e, EXIT_DATA))?;
    let mut w = create(&a.report)?;
    serde_json::to_writer_pretty(&mut w, &report).data()?;
    w.write_all(b"\n").data()?;
    finish(w)?;
    print!("{}", report.to_table());
    Ok(())
}

fn kde(a: KdeArgs) -> Result<(), Failure> {
    let file = fs::File::open(&a.scored)
        .with_context(|| format!("opening {}", a.scored.display()))
        .data()?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.data()?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: LabeledDocument = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", a.scored.display(), i + 1))
            .data()?;
        if a.label.is_none_or(|l| l == doc.label) {
            docs.push(doc);
        }
    }
    let points = entropy_rank_points(docs.iter().map(|d| &d.scored));
    let bw = scott_bandwidths(&points).map_err(|e| by_kind(e, EXIT_DATA))?;
    let grid = GridSpec::covering(&points, bw, a.nx, a.ny, a.pad);
    let density = kde2d(&points, bw, &grid).map_err(|e| by_kind(e, EXIT_USAGE))?;
    let mut w = create(&a.out)?;
    w.write_all(density.to_csv().as_bytes()).data()?;
    finish(w)
}

fn split_named(spec: &str) -> Option<(&str, &str)> {
    spec.split_once('=').filter(|(n, v)| !n.is_empty() && !v.is_empty())
}

fn serve_cmd(a: ServeArgs) -> Result<(), Failure> {
    if !a.adapter_timeout.is_finite() || a.adapter_timeout <= 0.0 {
        return Err(usage("--adapter-timeout must be positive"));
    }
    let mut registry = ModelRegistry::new();
    for spec in &a.model {
        let (name, path) = match split_named(spec) {
            Some((n, p)) => (n.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(spec);
                let stem = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .ok_or_else(|| usage(format!("bad --model {spec:?}")))?;
                (stem, p)
            }
        };
        registry.register(name, open_model(&path)?);
    }
    let timeout = Duration::from_secs_f64(a.adapter_timeout);
    for spec in &a.adapter {
        let (name, url) =
            split_named(spec).ok_or_else(|| usage(format!("--adapter expects name=url, got {spec:?}")))?;
        let adapter = RemoteModel::connect(name, url, timeout).map_err(|e| by_kind(e, EXIT_MODEL))?;
        registry.register(name, Arc::new(adapter));
    }
    let mut state = AppState::new(registry);
    state.max_text_bytes = a.max_text_bytes;
    let runtime = tokio::runtime::Runtime::new().context("starting runtime").model()?;
    runtime
        .block_on(serve(a.addr, state))
        .with_context(|| format!("serving on {}", a.addr))
        .data()
}
