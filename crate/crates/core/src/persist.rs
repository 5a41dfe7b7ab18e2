//! Binary model container.
//!
//! Layout: 8-byte magic, little-endian `u32` format version, little-endian
//! `u64` manifest length, the JSON manifest, then every tensor as row-major
//! little-endian `f32` values in manifest order.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::char_text::Alphabet;
use crate::election::{ElectionNet, ElectionNetConfig};
use crate::error::{Error, Result};
use crate::nn::{Matrix, Trainable};
use crate::topic_sentiment::{TsNet, TsNetConfig, WordVocab};

pub const MAGIC: [u8; 8] = *b"TWSIFT\x00\x01";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Election,
    Topic,
    Sentiment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Byte offset into the payload.
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: ModelKind,
    pub config: serde_json::Value,
    /// Character alphabet or word vocabulary, in index order.
    pub vocabulary: Vec<String>,
    /// Name and version of the writing library.
    pub created_by: String,
    pub tensors: Vec<TensorEntry>,
    pub payload_bytes: u64,
}

/// Any model the container can hold.
#[derive(Debug, Clone)]
pub enum SavedModel {
    Election(ElectionNet),
    Topic(TsNet),
    Sentiment(TsNet),
}

/// Config, vocabulary, tensor names and tensors of a model.
type Parts<'a> = (serde_json::Value, Vec<String>, Vec<String>, Vec<&'a Matrix>);

impl SavedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            SavedModel::Election(_) => ModelKind::Election,
            SavedModel::Topic(_) => ModelKind::Topic,
            SavedModel::Sentiment(_) => ModelKind::Sentiment,
        }
    }

    pub fn into_election(self) -> Result<ElectionNet> {
        match self {
            SavedModel::Election(net) => Ok(net),
            other => Err(Error::Config(format!("expected an election model, found {:?}", other.kind()))),
        }
    }

    pub fn into_word_net(self, kind: ModelKind) -> Result<TsNet> {
        match self {
            SavedModel::Topic(net) if kind == ModelKind::Topic => Ok(net),
            SavedModel::Sentiment(net) if kind == ModelKind::Sentiment => Ok(net),
            other => Err(Error::Config(format!("expected a {kind:?} model, found {:?}", other.kind()))),
        }
    }

    fn parts(&self) -> Result<Parts<'_>> {
        Ok(match self {
            SavedModel::Election(net) => (
                serde_json::to_value(net.config())?,
                Alphabet::new().symbols().iter().map(char::to_string).collect(),
                net.tensor_names(),
                net.parameters(),
            ),
            SavedModel::Topic(net) | SavedModel::Sentiment(net) => (
                serde_json::to_value(net.config())?,
                net.vocab().terms().to_vec(),
                net.tensor_names(),
                net.parameters(),
            ),
        })
    }
}

/// Serializes `model` into container bytes.
pub fn encode_model(model: &SavedModel) -> Result<Vec<u8>> {
    let (config, vocabulary, names, tensors) = model.parts()?;
    let mut entries = Vec::with_capacity(tensors.len());
    let mut offset = 0u64;
    for (name, t) in names.into_iter().zip(&tensors) {
        entries.push(TensorEntry {
            name,
            rows: t.rows(),
            cols: t.cols(),
            offset,
        });
        offset += 4 * t.len() as u64;
    }
    let manifest = Manifest {
        kind: model.kind(),
        config,
        vocabulary,
        created_by: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        tensors: entries,
        payload_bytes: offset,
    };
    let manifest_bytes = serde_json::to_vec(&manifest)?;
    let mut out = Vec::with_capacity(HEADER_LEN + manifest_bytes.len() + offset as usize);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(manifest_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&manifest_bytes);
    for t in tensors {
        for &v in t.as_slice() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

fn take(bytes: &[u8], at: usize, len: usize) -> Result<&[u8]> {
    bytes.get(at..at + len).ok_or(Error::Truncated {
        expected: (at + len) as u64,
        found: bytes.len() as u64,
    })
}

/// Reads the manifest without decoding tensors.
pub fn decode_manifest(bytes: &[u8]) -> Result<(Manifest, usize)> {
    if take(bytes, 0, MAGIC.len())? != MAGIC {
        return Err(Error::Corrupt("not a model container (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(bytes, 8, 4)?.try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let manifest_len = u64::from_le_bytes(take(bytes, 12, 8)?.try_into().expect("8 bytes"));
    let manifest_len = usize::try_from(manifest_len)
        .map_err(|_| Error::Corrupt("manifest length overflows".into()))?;
    let manifest: Manifest = serde_json::from_slice(take(bytes, HEADER_LEN, manifest_len)?)
        .map_err(|e| Error::Corrupt(format!("unreadable manifest: {e}")))?;
    Ok((manifest, HEADER_LEN + manifest_len))
}

/// Parses container bytes back into a model.
pub fn decode_model(bytes: &[u8]) -> Result<SavedModel> {
    let (manifest, payload_start) = decode_manifest(bytes)?;
    let mut expected_offset = 0u64;
    for t in &manifest.tensors {
        if t.offset != expected_offset {
            return Err(Error::Shape(format!(
                "tensor {} starts at byte {}, expected {expected_offset}",
                t.name, t.offset
            )));
        }
        expected_offset += 4 * (t.rows * t.cols) as u64;
    }
    if expected_offset != manifest.payload_bytes {
        return Err(Error::Shape(format!(
            "manifest shapes cover {expected_offset} payload bytes but declare {}",
            manifest.payload_bytes
        )));
    }
    let payload = &bytes[payload_start..];
    if (payload.len() as u64) < manifest.payload_bytes {
        return Err(Error::Truncated {
            expected: payload_start as u64 + manifest.payload_bytes,
            found: bytes.len() as u64,
        });
    }
    if payload.len() as u64 > manifest.payload_bytes {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes after the payload",
            payload.len() as u64 - manifest.payload_bytes
        )));
    }
    let tensors = manifest
        .tensors
        .iter()
        .map(|t| {
            let start = t.offset as usize;
            let raw = &payload[start..start + 4 * t.rows * t.cols];
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
                .collect();
            Matrix::new(t.rows, t.cols, data)
        })
        .collect::<Result<Vec<_>>>()?;
    let corrupt_config = |e: serde_json::Error| Error::Corrupt(format!("unreadable model config: {e}"));
    let model = match manifest.kind {
        ModelKind::Election => {
            let alphabet: Vec<String> = Alphabet::new().symbols().iter().map(char::to_string).collect();
            if manifest.vocabulary != alphabet {
                return Err(Error::Corrupt("character alphabet differs from this build".into()));
            }
            let config: ElectionNetConfig =
                serde_json::from_value(manifest.config).map_err(corrupt_config)?;
            SavedModel::Election(ElectionNet::from_tensors(config, tensors)?)
        }
        kind @ (ModelKind::Topic | ModelKind::Sentiment) => {
            let config: TsNetConfig = serde_json::from_value(manifest.config).map_err(corrupt_config)?;
            let vocab = WordVocab::from_terms(manifest.vocabulary)?;
            let net = TsNet::from_tensors(config, vocab, tensors)?;
            if kind == ModelKind::Topic {
                SavedModel::Topic(net)
            } else {
                SavedModel::Sentiment(net)
            }
        }
    };
    Ok(model)
}

pub fn save_model(model: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_model(model)?;
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
