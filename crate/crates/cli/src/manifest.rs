//! Pipeline manifests and the replay log written next to their outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dodeuri_core::composer::Policy;
use dodeuri_core::neural::InputEncoding;
use dodeuri_core::{Error, FORMAT_VERSION};

use crate::{
    analyze, compose_cmd, generate, read_json, seed_matrix, train_cmd, write_json, AnalyzeArgs, CliError, CliResult,
    ComposeArgs, DecodeMode, GenerateArgs, Globals, HiddenActivation, ScoreFormat, SeedMatrixArgs, TrainArgs,
    ANALYZE_OUTPUTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Algorithm {
    /// Rule-based composition following the overlap pattern.
    #[default]
    A,
    /// Train a network, then generate from a seed matrix.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub lr: f64,
    pub split: f64,
    pub batch_size: Option<usize>,
    pub hidden: Option<Vec<usize>>,
    pub activation: HiddenActivation,
    pub encoding: InputEncoding,
}

impl Default for TrainSection {
    fn default() -> TrainSection {
        TrainSection {
            epochs: 500,
            lr: 1e-3,
            split: 0.7,
            batch_size: None,
            hidden: None,
            activation: HiddenActivation::Relu,
            encoding: InputEncoding::Binary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub mode: DecodeMode,
    pub temperature: f64,
}

impl Default for GenerateSection {
    fn default() -> GenerateSection {
        GenerateSection { mode: DecodeMode::Argmax, temperature: 1.0 }
    }
}

/// Everything a pipeline run depends on. Relative paths are resolved against
/// the manifest's directory; unset fields fall back to the command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub score: PathBuf,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub scale: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<ScoreFormat>,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub policy: Policy,
    /// Seed-matrix generator (1, 2 or 3) for algorithm B; the source matrix itself when absent.
    #[serde(default)]
    pub seed_algorithm: Option<u8>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub generate: GenerateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    /// Equivalent command line, without global flags.
    pub command: Vec<String>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

/// `replay.json`: the resolved settings and the stages that ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayLog {
    pub format_version: u32,
    pub manifest: Manifest,
    pub seed: u64,
    pub scale: usize,
    pub stages: Vec<StageRecord>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

fn staged<T>(stage: &'static str, r: CliResult<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Stage { stage, source: Box::new(e) })
}

fn text(p: &Path) -> String {
    p.display().to_string()
}

fn record(stage: &str, command: &[&str], outputs: &[&str]) -> StageRecord {
    StageRecord {
        stage: stage.to_owned(),
        command: command.iter().map(|s| (*s).to_owned()).collect(),
        outputs: outputs.iter().map(|s| (*s).to_owned()).collect(),
    }
}

pub fn run_pipeline(manifest_path: &Path, cli: &Globals) -> CliResult<ReplayLog> {
    let manifest: Manifest = read_json(manifest_path)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(CliError::Core {
            path: manifest_path.to_owned(),
            source: Error::FormatVersion { found: manifest.format_version, expected: FORMAT_VERSION },
        });
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let g = Globals {
        seed: manifest.seed.unwrap_or(cli.seed),
        scale: manifest.scale.unwrap_or(cli.scale),
        out_dir: manifest.out_dir.as_deref().map_or_else(|| cli.out_dir.clone(), |p| resolve(base, p)),
        format: manifest.format.or(cli.format),
    };
    let score = resolve(base, &manifest.score);
    let ext = match g.format {
        Some(ScoreFormat::Csv) => "csv",
        _ => "jsonl",
    };
    let mut stages = Vec::new();

    staged("analyze", analyze(&g, &AnalyzeArgs { score: score.clone(), figures: false }))?;
    stages.push(record("analyze", &["analyze", "--score", &text(&manifest.score)], &ANALYZE_OUTPUTS));
    let overlap = g.out_dir.join("overlap.json");

    match manifest.algorithm {
        Algorithm::A => {
            let name = format!("composed.{ext}");
            let args = ComposeArgs { overlap, cycles: None, pool: None, policy: manifest.policy, out: Some(g.out_dir.join(&name)) };
            staged("compose", compose_cmd(&g, &args))?;
            let policy = match manifest.policy {
                Policy::Strict => "strict",
                Policy::Lenient => "lenient",
            };
            stages.push(record(
                "compose",
                &["compose", "--overlap", "overlap.json", "--policy", policy, "--out", &name],
                &[&name, "composition.json"],
            ));
        }
        Algorithm::B => {
            let seed_path = match manifest.seed_algorithm {
                Some(n) => {
                    let args = SeedMatrixArgs {
                        overlap: overlap.clone(),
                        cycles: None,
                        algorithm: n,
                        out: Some(g.out_dir.join("seed_overlap.json")),
                    };
                    let path = staged("seed-matrix", seed_matrix(&g, &args))?;
                    let algo = n.to_string();
                    stages.push(record(
                        "seed-matrix",
                        &["seed-matrix", "--overlap", "overlap.json", "--algorithm", &algo, "--out", "seed_overlap.json"],
                        &["seed_overlap.json"],
                    ));
                    path
                }
                None => overlap.clone(),
            };

            let t = &manifest.train;
            let args = TrainArgs {
                score: score.clone(),
                overlap: overlap.clone(),
                epochs: t.epochs,
                lr: t.lr,
                split: t.split,
                batch_size: t.batch_size,
                hidden: t.hidden.clone(),
                activation: t.activation,
                encoding: t.encoding,
                out: Some(g.out_dir.join("model.json")),
            };
            staged("train", train_cmd(&g, &args))?;
            let epochs = t.epochs.to_string();
            let lr = t.lr.to_string();
            let split = t.split.to_string();
            stages.push(record(
                "train",
                &[
                    "train",
                    "--score",
                    &text(&manifest.score),
                    "--overlap",
                    "overlap.json",
                    "--epochs",
                    &epochs,
                    "--lr",
                    &lr,
                    "--split",
                    &split,
                    "--out",
                    "model.json",
                ],
                &["model.json", "training.json"],
            ));

            let name = format!("generated.{ext}");
            let gen = &manifest.generate;
            let args = GenerateArgs {
                model: g.out_dir.join("model.json"),
                seed_matrix: seed_path.clone(),
                mode: gen.mode,
                temperature: gen.temperature,
                out: Some(g.out_dir.join(&name)),
            };
            staged("generate", generate(&g, &args))?;
            let seed_name = if manifest.seed_algorithm.is_some() { "seed_overlap.json" } else { "overlap.json" };
            let mode = match gen.mode {
                DecodeMode::Argmax => "argmax",
                DecodeMode::Sample => "sample",
            };
            let temp = gen.temperature.to_string();
            stages.push(record(
                "generate",
                &["generate", "--model", "model.json", "--seed-matrix", seed_name, "--mode", mode, "--temp", &temp, "--out", &name],
                &[&name],
            ));
        }
    }

    let log = ReplayLog { format_version: FORMAT_VERSION, manifest, seed: g.seed, scale: g.scale, stages };
    write_json(&g.out_dir.join("replay.json"), &log)?;
    Ok(log)
}
