//! Learning an overlap-matrix → score mapping with a small MLP.

mod mlp;
mod train;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{table_from_entries, NodeEntry, NodeTable};
use crate::overlap::{MatrixKind, OverlapMatrix};
use crate::FORMAT_VERSION;

pub use mlp::{cross_entropy, one_hot, softmax_rows, Activation, Gradients, Layer, Mlp, LOG_CLAMP};
pub use train::{train, Adam, TrainConfig, TrainReport};

/// How overlap-matrix entries are turned into network inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputEncoding {
    /// 1 where a cycle survives, 0 elsewhere.
    #[default]
    Binary,
    /// Payload `node + 1` divided by `q`.
    Integer,
}

impl std::str::FromStr for InputEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<InputEncoding> {
        match s {
            "binary" => Ok(InputEncoding::Binary),
            "integer" => Ok(InputEncoding::Integer),
            other => Err(Error::InvalidConfig(format!("unknown input encoding {other:?}"))),
        }
    }
}

/// Flattens a `k × d` matrix row-major into network inputs.
pub fn encode(m: &OverlapMatrix, encoding: InputEncoding, q: usize) -> Result<Vec<f64>> {
    if encoding == InputEncoding::Integer {
        m.require(MatrixKind::Integer)?;
    }
    let scale = 1.0 / q as f64;
    Ok(m
        .rows()
        .iter()
        .flatten()
        .map(|&v| match encoding {
            InputEncoding::Binary => f64::from(u8::from(v != 0)),
            InputEncoding::Integer => f64::from(v) * scale,
        })
        .collect())
}

/// `m` with every row shifted left by `shift` positions, cyclically.
pub fn rotate(m: &OverlapMatrix, shift: usize) -> OverlapMatrix {
    let d = m.d();
    let rows = m
        .rows()
        .iter()
        .map(|row| (0..d).map(|j| row[(j + shift) % d]).collect())
        .collect();
    OverlapMatrix::new(m.kind(), m.scale(), d, rows).expect("rotation keeps the shape")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub input: Vec<f64>,
    /// Node index per position.
    pub target: Vec<usize>,
}

/// The `d` cyclic windows of a flow and its overlap matrix.
pub fn augment(flow: &[usize], m: &OverlapMatrix, encoding: InputEncoding, q: usize) -> Result<Vec<TrainingPair>> {
    let d = flow.len();
    if m.d() != d {
        return Err(Error::DimensionMismatch(format!("flow has {d} notes but the matrix has {} columns", m.d())));
    }
    if let Some(&bad) = flow.iter().find(|&&n| n >= q) {
        return Err(Error::DimensionMismatch(format!("node {bad} outside 0..{q}")));
    }
    (0..d)
        .map(|i| {
            Ok(TrainingPair {
                input: encode(&rotate(m, i), encoding, q)?,
                target: (0..d).map(|j| flow[(i + j) % d]).collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decoding {
    Argmax,
    Sample { temperature: f64 },
}

/// A trained network plus what is needed to feed and read it.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub mlp: Mlp,
    pub k: usize,
    pub encoding: InputEncoding,
    pub nodes: Option<NodeTable>,
}

impl Model {
    pub fn d(&self) -> usize {
        self.mlp.d
    }

    pub fn q(&self) -> usize {
        self.mlp.q
    }

    pub fn predict(&self, seed: &OverlapMatrix) -> Result<Vec<f64>> {
        self.mlp.forward(&self.input_for(seed)?)
    }

    fn input_for(&self, seed: &OverlapMatrix) -> Result<Vec<f64>> {
        if seed.k() != self.k || seed.d() != self.d() {
            return Err(Error::DimensionMismatch(format!(
                "model expects a {}×{} matrix, got {}×{}",
                self.k,
                self.d(),
                seed.k(),
                seed.d()
            )));
        }
        encode(seed, self.encoding, self.q())
    }

    /// Reads one node per output row.
    pub fn generate<R: Rng + ?Sized>(&self, seed: &OverlapMatrix, decoding: Decoding, rng: &mut R) -> Result<Vec<usize>> {
        let input = self.input_for(seed)?;
        let q = self.q();
        let mut logits = self.mlp.logits(&input, 1)?;
        match decoding {
            Decoding::Argmax => Ok(logits
                .chunks(q)
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                        .0
                })
                .collect()),
            Decoding::Sample { temperature } => {
                if !(temperature.is_finite() && temperature > 0.0) {
                    return Err(Error::InvalidConfig(format!("temperature must be positive, got {temperature}")));
                }
                softmax_rows(&mut logits, q, temperature);
                logits
                    .chunks(q)
                    .map(|row| {
                        let dist = WeightedIndex::new(row).map_err(|e| Error::InvalidConfig(format!("degenerate output row: {e}")))?;
                        Ok(dist.sample(rng))
                    })
                    .collect()
            }
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            format_version: FORMAT_VERSION,
            k: self.k,
            d: self.d(),
            q: self.q(),
            encoding: self.encoding,
            layers: self.mlp.layers.clone(),
            nodes: self.nodes.as_ref().map(crate::network::node_entries),
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Model> {
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion { found: doc.format_version, expected: FORMAT_VERSION });
        }
        let mlp = Mlp { layers: doc.layers, d: doc.d, q: doc.q };
        mlp.validate()?;
        if mlp.input_dim() != doc.k * doc.d {
            return Err(Error::DimensionMismatch(format!("first layer takes {} inputs, expected k·d = {}", mlp.input_dim(), doc.k * doc.d)));
        }
        let nodes = doc.nodes.as_deref().map(table_from_entries).transpose()?;
        if let Some(t) = &nodes {
            if t.len() != doc.q {
                return Err(Error::DimensionMismatch(format!("model has q = {} but {} nodes", doc.q, t.len())));
            }
        }
        Ok(Model { mlp, k: doc.k, encoding: doc.encoding, nodes })
    }
}

/// `model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub k: usize,
    pub d: usize,
    pub q: usize,
    pub encoding: InputEncoding,
    pub layers: Vec<Layer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<NodeEntry>>,
}
