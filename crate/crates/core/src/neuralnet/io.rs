//! Binary model container.
//!
//! ```text
//! magic      8 bytes   "EVTMODEL"
//! version    u32 LE
//! header_len u64 LE
//! header     JSON      {"config", "vocabulary", "tensors": [{"name", "rows", "cols"}]}
//! tensors    f64 LE    in header order, row-major
//! checksum   32 bytes  SHA-256 of everything above
//! ```
//!
//! Tensor order: word embeddings, position embeddings, then the model
//! parameters in [`ModelParameters::tensors`](super::ModelParameters::tensors) order.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{EmbeddingTable, Matrix, Model, ModelConfig, ModelParameters, Vocabulary};

pub const MAGIC: &[u8; 8] = b"EVTMODEL";
pub const MODEL_FORMAT_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;
const PREAMBLE_LEN: usize = 8 + 4 + 8;

#[derive(Debug, Error, PartialEq)]
pub enum ModelFileError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("model file version {found} is not supported (expected {MODEL_FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("model file is truncated")]
    Truncated,
    #[error("model file checksum mismatch")]
    Checksum,
    #[error("model header is invalid: {0}")]
    Header(String),
    #[error("tensor {name} has shape {found:?}, expected {expected:?}")]
    Shape {
        name: String,
        found: (usize, usize),
        expected: (usize, usize),
    },
    #[error("model contains non-finite values")]
    NonFinite,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: ModelConfig,
    vocabulary: Vec<String>,
    max_offset: usize,
    tensors: Vec<TensorInfo>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorInfo {
    name: String,
    rows: usize,
    cols: usize,
}

fn all_tensors(model: &Model) -> Vec<(String, &Matrix)> {
    let mut list = vec![
        ("embeddings.words".to_string(), &model.embeddings.words),
        ("embeddings.positions".to_string(), &model.embeddings.positions),
    ];
    list.extend(model.params.tensors());
    list
}

pub fn encode(model: &Model) -> Vec<u8> {
    let tensors = all_tensors(model);
    let header = Header {
        config: model.config.clone(),
        vocabulary: model.embeddings.vocabulary.tokens().to_vec(),
        max_offset: model.embeddings.max_offset,
        tensors: tensors
            .iter()
            .map(|(name, m)| TensorInfo {
                name: name.clone(),
                rows: m.rows(),
                cols: m.cols(),
            })
            .collect(),
    };
    let header = serde_json::to_vec(&header).expect("header serialization is infallible");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for (_, m) in &tensors {
        for v in m.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

pub fn decode(bytes: &[u8]) -> Result<Model, ModelFileError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    if bytes.len() < PREAMBLE_LEN + CHECKSUM_LEN {
        return Err(ModelFileError::Truncated);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != MODEL_FORMAT_VERSION {
        return Err(ModelFileError::VersionMismatch { found: version });
    }
    let (body, checksum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != checksum {
        return Err(ModelFileError::Checksum);
    }
    let header_len = u64::from_le_bytes(body[12..20].try_into().expect("8 bytes"));
    let header_end = usize::try_from(header_len)
        .ok()
        .and_then(|n| n.checked_add(PREAMBLE_LEN))
        .filter(|&end| end <= body.len())
        .ok_or(ModelFileError::Truncated)?;
    let header: Header = serde_json::from_slice(&body[PREAMBLE_LEN..header_end])
        .map_err(|e| ModelFileError::Header(e.to_string()))?;
    header
        .config
        .validate()
        .map_err(|e| ModelFileError::Header(e.to_string()))?;
    if header.max_offset != header.config.max_offset {
        return Err(ModelFileError::Header("max_offset disagrees with config".into()));
    }
    let vocabulary = Vocabulary::from_tokens(header.vocabulary)
        .ok_or_else(|| ModelFileError::Header("malformed vocabulary".into()))?;

    let mut data = &body[header_end..];
    let mut tensors = Vec::with_capacity(header.tensors.len());
    for info in &header.tensors {
        let count = info
            .rows
            .checked_mul(info.cols)
            .filter(|c| c.checked_mul(8).is_some_and(|b| b <= data.len()))
            .ok_or(ModelFileError::Truncated)?;
        let (chunk, rest) = data.split_at(count * 8);
        let values: Vec<f64> = chunk
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelFileError::NonFinite);
        }
        tensors.push((info.name.clone(), Matrix::from_vec(info.rows, info.cols, values).expect("sized")));
        data = rest;
    }
    if !data.is_empty() {
        return Err(ModelFileError::Header("trailing tensor data".into()));
    }

    let config = header.config;
    let mut expected: Vec<(String, (usize, usize))> = vec![
        ("embeddings.words".into(), (vocabulary.len(), config.word_dim)),
        ("embeddings.positions".into(), (2 * config.max_offset + 1, config.position_dim)),
    ];
    expected.extend(ModelParameters::shapes(&config));
    if expected.len() != tensors.len() {
        return Err(ModelFileError::Header(format!(
            "expected {} tensors, found {}",
            expected.len(),
            tensors.len()
        )));
    }
    for ((name, shape), (found_name, m)) in expected.iter().zip(&tensors) {
        if name != found_name || *shape != m.shape() {
            return Err(ModelFileError::Shape {
                name: found_name.clone(),
                found: m.shape(),
                expected: *shape,
            });
        }
    }

    let mut iter = tensors.into_iter().map(|(_, m)| m);
    let mut next = || iter.next().expect("tensor count checked");
    let words = next();
    let positions = next();
    let mut lstm = || super::LstmParams {
        w: next(),
        u: next(),
        b: next(),
    };
    let forward = lstm();
    let backward = lstm();
    let attention = (0..config.mentions()).map(|_| next()).collect();
    let params = ModelParameters {
        forward,
        backward,
        attention,
        output: next(),
        output_bias: next(),
    };
    Ok(Model {
        embeddings: EmbeddingTable {
            vocabulary,
            words,
            positions,
            max_offset: config.max_offset,
        },
        config,
        params,
    })
}

impl ModelParameters {
    /// Names and shapes of the tensors a model with `config` carries, in
    /// [`ModelParameters::tensors`] order.
    pub fn shapes(config: &ModelConfig) -> Vec<(String, (usize, usize))> {
        let h = config.hidden_dim;
        let mut out = Vec::new();
        for dir in ["lstm_fwd", "lstm_bwd"] {
            out.push((format!("{dir}.w"), (4 * h, config.input_dim())));
            out.push((format!("{dir}.u"), (4 * h, h)));
            out.push((format!("{dir}.b"), (4 * h, 1)));
        }
        for m in 0..config.mentions() {
            out.push((format!("attention.{m}"), (2 * h, 2 * h)));
        }
        out.push(("output.w".into(), (super::OUTPUT_DIM, config.representation_dim())));
        out.push(("output.b".into(), (super::OUTPUT_DIM, 1)));
        out
    }
}
