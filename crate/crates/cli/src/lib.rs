//! The `dodeuri` command line: each subcommand reads and writes JSON artifacts
//! so stages can be run, cached and inspected one at a time.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use dodeuri_core::composer::{compose, verify_pattern, CompositionContext, Fallback, PatternReport, Policy};
use dodeuri_core::network::build_network;
use dodeuri_core::neural::{augment, train, Activation, Decoding, InputEncoding, Model, ModelDocument, TrainConfig};
use dodeuri_core::nodepool::{NodePool, PoolDocument};
use dodeuri_core::overlap::{integer_overlap, MatrixKind, OverlapDocument, OverlapMatrix, DEFAULT_SCALE};
use dodeuri_core::persistence::{cycle_node_sets, extract_cycles, rips_persistence, BarcodeDocument, CyclesDocument};
use dodeuri_core::rng::stage;
use dodeuri_core::score::{parse_score, serialize_score, Format, Score};
use dodeuri_core::seedgen::SeedAlgorithm;
use dodeuri_core::{network::NodeTable, Error, FORMAT_VERSION};

pub mod manifest;

pub use manifest::{run_pipeline, Manifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Core {
        path: PathBuf,
        #[source]
        source: Error,
    },
    #[error("{0}")]
    Algorithm(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for bad input, 3 when the algorithm cannot satisfy its constraints,
    /// 4 for a broken internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } | CliError::Algorithm(source) => core_exit_code(source),
            CliError::Io { .. } | CliError::Json { .. } | CliError::Usage(_) => 2,
            CliError::Stage { source, .. } => source.exit_code(),
            CliError::Internal(_) => 4,
        }
    }
}

fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::EmptySamplingSupport
        | Error::EmptyIntersection { .. }
        | Error::SeedPlacementFailed(_)
        | Error::NonFiniteLoss { .. } => 3,
        _ => 2,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn at(path: &Path) -> impl FnOnce(Error) -> CliError + '_ {
    move |source| CliError::Core { path: path.to_owned(), source }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_owned(), source })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_owned(), source })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

/// Single-line JSON, for artifacts too large to read by eye.
pub fn write_json_compact<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string(value).map_err(|source| CliError::Json { path: path.to_owned(), source })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json { path: path.to_owned(), source })?;
    text.push('\n');
    write_text(path, &text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreFormat {
    Jsonl,
    Csv,
}

impl From<ScoreFormat> for Format {
    fn from(f: ScoreFormat) -> Format {
        match f {
            ScoreFormat::Jsonl => Format::JsonLines,
            ScoreFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "dodeuri", version, about = "Topology-guided analysis and generation of note sequences")]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Globals {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Minimum run length marked in overlap matrices.
    #[arg(long, global = true, default_value_t = DEFAULT_SCALE)]
    pub scale: usize,
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Score format; inferred from the file extension when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<ScoreFormat>,
}

impl Globals {
    fn input_format(&self, path: &Path) -> Format {
        self.format.map_or_else(|| Format::from_path(path), Format::from)
    }

    fn output_format(&self, path: &Path) -> Format {
        self.input_format(path)
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Network, distances, barcode, cycles, overlap matrix and node pool of a score.
    Analyze(AnalyzeArgs),
    /// Compose a new score that follows an overlap pattern.
    Compose(ComposeArgs),
    /// Synthesize a seed overlap matrix from an existing one.
    SeedMatrix(SeedMatrixArgs),
    /// Train a network mapping overlap matrices to scores.
    Train(TrainArgs),
    /// Generate a score from a trained network and a seed matrix.
    Generate(GenerateArgs),
    /// Run the stages listed in a manifest.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub score: PathBuf,
    /// Also write overlap.csv and overlap.pgm.
    #[arg(long)]
    pub figures: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ComposeArgs {
    #[arg(long)]
    pub overlap: PathBuf,
    /// Defaults to cycles.json next to the overlap matrix.
    #[arg(long)]
    pub cycles: Option<PathBuf>,
    /// Defaults to pool.json next to the overlap matrix.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long, default_value = "strict")]
    pub policy: Policy,
    /// Defaults to composed.jsonl in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SeedMatrixArgs {
    #[arg(long)]
    pub overlap: PathBuf,
    #[arg(long)]
    pub cycles: Option<PathBuf>,
    /// 1 row-wise, 2 element-wise, 3 column-wise.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub algorithm: u8,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub score: PathBuf,
    #[arg(long)]
    pub overlap: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.7)]
    pub split: f64,
    /// Mini-batch size; the whole training set when omitted.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Comma-separated hidden widths; two layers of width d when omitted.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "relu")]
    pub activation: HiddenActivation,
    #[arg(long, default_value = "binary")]
    pub encoding: InputEncoding,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiddenActivation {
    Relu,
    Tanh,
    Sigmoid,
}

impl From<HiddenActivation> for Activation {
    fn from(a: HiddenActivation) -> Activation {
        match a {
            HiddenActivation::Relu => Activation::Relu,
            HiddenActivation::Tanh => Activation::Tanh,
            HiddenActivation::Sigmoid => Activation::Sigmoid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    Argmax,
    Sample,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub seed_matrix: PathBuf,
    #[arg(long, value_enum, default_value = "argmax")]
    pub mode: DecodeMode,
    #[arg(long = "temp", default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.globals;
    match &cli.command {
        Command::Analyze(a) => {
            let summary = analyze(g, a)?;
            println!("d={} q={} k={} s={}", summary.d, summary.q, summary.k, summary.s);
        }
        Command::Compose(a) => {
            let out = compose_cmd(g, a)?;
            println!("wrote {} ({} notes, {} fallbacks)", out.path.display(), out.notes, out.fallbacks);
        }
        Command::SeedMatrix(a) => {
            let path = seed_matrix(g, a)?;
            println!("wrote {}", path.display());
        }
        Command::Train(a) => {
            let out = train_cmd(g, a)?;
            println!(
                "wrote {} (train loss {:.4} -> {:.4})",
                out.path.display(),
                out.initial_loss,
                out.final_loss
            );
        }
        Command::Generate(a) => {
            let path = generate(g, a)?;
            println!("wrote {}", path.display());
        }
        Command::Pipeline(a) => {
            let log = run_pipeline(&a.manifest, g)?;
            println!("pipeline finished: {} stages", log.stages.len());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeSummary {
    pub d: usize,
    pub q: usize,
    pub k: usize,
    pub s: usize,
}

pub const ANALYZE_OUTPUTS: [&str; 6] =
    ["network.json", "distances.json", "barcode.json", "cycles.json", "overlap.json", "pool.json"];

pub fn load_score(g: &Globals, path: &Path) -> CliResult<Score> {
    parse_score(&read_text(path)?, g.input_format(path)).map_err(at(path))
}

pub fn analyze(g: &Globals, a: &AnalyzeArgs) -> CliResult<AnalyzeSummary> {
    let score = load_score(g, &a.score)?;
    let network = build_network(&score).map_err(at(&a.score))?;
    let dist = network.distance_matrix().map_err(at(&a.score))?;
    let persistence = rips_persistence(&dist);
    let cycles = extract_cycles(&persistence);
    let sets = cycle_node_sets(&cycles);
    let overlap = integer_overlap(&network.flow, &sets, g.scale)?;

    write_json(&g.out("network.json"), &network.to_document())?;
    write_json(&g.out("distances.json"), &dist.to_document())?;
    write_json(&g.out("barcode.json"), &BarcodeDocument::new(&persistence))?;
    write_json(&g.out("cycles.json"), &CyclesDocument::new(&cycles))?;
    write_json(&g.out("overlap.json"), &overlap.to_document())?;
    write_json(&g.out("pool.json"), &PoolDocument::new(&network.nodes))?;
    if a.figures {
        write_text(&g.out("overlap.csv"), &overlap.to_csv())?;
        write_text(&g.out("overlap.pgm"), &overlap.to_pgm())?;
    }
    Ok(AnalyzeSummary { d: score.len(), q: network.nodes.len(), k: cycles.len(), s: g.scale })
}

fn sibling(of: &Path, name: &str) -> PathBuf {
    of.parent().unwrap_or(Path::new(".")).join(name)
}

pub fn load_overlap(path: &Path) -> CliResult<OverlapMatrix> {
    let doc: OverlapDocument = read_json(path)?;
    OverlapMatrix::from_document(doc).map_err(at(path))
}

pub fn load_cycles(path: &Path) -> CliResult<Vec<std::collections::BTreeSet<usize>>> {
    let doc: CyclesDocument = read_json(path)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(CliError::Core {
            path: path.to_owned(),
            source: Error::FormatVersion { found: doc.format_version, expected: FORMAT_VERSION },
        });
    }
    Ok(doc.node_sets())
}

/// Result of `compose`: the score path and the composition report.
#[derive(Debug, Clone)]
pub struct ComposeOutput {
    pub path: PathBuf,
    pub notes: usize,
    pub fallbacks: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositionReport {
    pub format_version: u32,
    pub policy: Policy,
    pub notes: Vec<usize>,
    pub fallbacks: Vec<(usize, Fallback)>,
    pub pattern: PatternReport,
}

pub fn compose_cmd(g: &Globals, a: &ComposeArgs) -> CliResult<ComposeOutput> {
    let overlap = load_overlap(&a.overlap)?;
    let cycles_path = a.cycles.clone().unwrap_or_else(|| sibling(&a.overlap, "cycles.json"));
    let pool_path = a.pool.clone().unwrap_or_else(|| sibling(&a.overlap, "pool.json"));
    let cycles = load_cycles(&cycles_path)?;
    let pool_doc: PoolDocument = read_json(&pool_path)?;
    let pool: NodePool = pool_doc.pool().map_err(at(&pool_path))?;
    let table = pool_doc
        .table()
        .map_err(at(&pool_path))?
        .ok_or_else(|| CliError::Usage(format!("{}: pool has no node notes, cannot write a score", pool_path.display())))?;

    let ctx = CompositionContext::new(&overlap, &cycles, &pool, a.policy).map_err(at(&a.overlap))?;
    let composition = compose(&ctx, &mut stage(g.seed, "compose"))?;
    let pattern = verify_pattern(&composition.notes, &ctx);
    if a.policy == Policy::Strict && !pattern.passed {
        return Err(CliError::Internal(format!("composition violates the pattern at {:?}", pattern.violations)));
    }
    let out = a.out.clone().unwrap_or_else(|| g.out("composed.jsonl"));
    write_score(g, &out, &table, &composition.notes)?;
    let report = CompositionReport {
        format_version: FORMAT_VERSION,
        policy: a.policy,
        notes: composition.notes.clone(),
        fallbacks: composition.fallbacks.clone(),
        pattern,
    };
    write_json(&sibling(&out, "composition.json"), &report)?;
    Ok(ComposeOutput { path: out, notes: composition.notes.len(), fallbacks: composition.fallbacks.len() })
}

fn write_score(g: &Globals, path: &Path, table: &NodeTable, notes: &[usize]) -> CliResult<()> {
    let score = table.to_score(notes)?;
    write_text(path, &serialize_score(&score, g.output_format(path)))
}

pub fn seed_matrix(g: &Globals, a: &SeedMatrixArgs) -> CliResult<PathBuf> {
    let overlap = load_overlap(&a.overlap)?;
    let cycles_path = a.cycles.clone().unwrap_or_else(|| sibling(&a.overlap, "cycles.json"));
    let cycles = load_cycles(&cycles_path)?;
    let algorithm = SeedAlgorithm::from_number(a.algorithm).ok_or_else(|| CliError::Usage(format!("unknown algorithm {}", a.algorithm)))?;
    let seed = algorithm.generate(&overlap, &cycles, g.scale, &mut stage(g.seed, "seed-matrix"))?;
    let out = a.out.clone().unwrap_or_else(|| g.out("seed_overlap.json"));
    write_json(&out, &seed.to_document())?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingLog {
    pub format_version: u32,
    pub config: TrainConfig,
    pub encoding: InputEncoding,
    pub train_indices: Vec<usize>,
    pub eval_indices: Vec<usize>,
    pub train_loss: Vec<f64>,
    pub eval_loss: Vec<f64>,
    pub final_train_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub path: PathBuf,
    pub initial_loss: f64,
    pub final_loss: f64,
}

pub fn train_cmd(g: &Globals, a: &TrainArgs) -> CliResult<TrainOutput> {
    let score = load_score(g, &a.score)?;
    let table = NodeTable::from_flow(score.flow());
    let flow = table.indices(score.flow()).expect("table built from this flow");
    let overlap = load_overlap(&a.overlap)?;
    if overlap.d() != flow.len() {
        return Err(CliError::Core {
            path: a.overlap.clone(),
            source: Error::DimensionMismatch(format!("matrix has {} columns but the score has {} notes", overlap.d(), flow.len())),
        });
    }
    let pairs = augment(&flow, &overlap, a.encoding, table.len()).map_err(at(&a.overlap))?;
    let config = TrainConfig {
        hidden: a.hidden.clone(),
        activation: a.activation.into(),
        learning_rate: a.lr,
        epochs: a.epochs,
        split: a.split,
        batch_size: a.batch_size,
        ..TrainConfig::default()
    };
    let report = train(&pairs, table.len(), &config, &mut stage(g.seed, "train"))?;
    let model = Model { mlp: report.model.clone(), k: overlap.k(), encoding: a.encoding, nodes: Some(table) };
    let out = a.out.clone().unwrap_or_else(|| g.out("model.json"));
    write_json_compact(&out, &model.to_document())?;
    let log = TrainingLog {
        format_version: FORMAT_VERSION,
        config,
        encoding: a.encoding,
        train_indices: report.train_indices,
        eval_indices: report.eval_indices,
        train_loss: report.train_loss.clone(),
        eval_loss: report.eval_loss,
        final_train_loss: report.final_train_loss,
    };
    write_json(&sibling(&out, "training.json"), &log)?;
    Ok(TrainOutput { path: out, initial_loss: log.train_loss.first().copied().unwrap_or(f64::NAN), final_loss: log.final_train_loss })
}

pub fn load_model(path: &Path) -> CliResult<Model> {
    let doc: ModelDocument = read_json(path)?;
    Model::from_document(doc).map_err(at(path))
}

pub fn generate(g: &Globals, a: &GenerateArgs) -> CliResult<PathBuf> {
    let model = load_model(&a.model)?;
    let seed = load_overlap(&a.seed_matrix)?;
    if model.encoding == InputEncoding::Integer {
        seed.require(MatrixKind::Integer).map_err(at(&a.seed_matrix))?;
    }
    let decoding = match a.mode {
        DecodeMode::Argmax => Decoding::Argmax,
        DecodeMode::Sample => Decoding::Sample { temperature: a.temperature },
    };
    let notes = model.generate(&seed, decoding, &mut stage(g.seed, "generate")).map_err(at(&a.seed_matrix))?;
    let table = model
        .nodes
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("{}: model carries no node table", a.model.display())))?;
    let out = a.out.clone().unwrap_or_else(|| g.out("generated.jsonl"));
    write_score(g, &out, table, &notes)?;
    Ok(out)
}
