//! Binary model file.
//!
//! Little-endian layout:
//!
//! ```text
//! "RFRG" | u32 version | u32 header length | header (UTF-8 JSON)
//! | 4 × vocabulary (arg_lemmas, features, predicates, deprels)
//! | f64 encoder weights (roles × features, row-major)
//! | f64 u (lemmas × d) | f64 shared C (roles × d × k)
//! | u64 P | P × u64 predicate ids | f64 predicate C (P × roles × d × k)
//! | u32 CRC32 of every preceding byte
//! ```
//!
//! A vocabulary is `kind` (u32-length-prefixed UTF-8), a u8 unknown-entry
//! flag, a u64 entry count, then per entry a u32-length-prefixed UTF-8
//! string and a u64 count.

use std::fs;
use std::io;
use std::path::Path;

use ndarray::{Array2, Array3, Array4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ExtractOptions, Lexicon, Vocabulary};
use crate::decoder::DecoderParams;
use crate::encoder::EncoderParams;
use crate::features::Template;

use super::{ModelParams, TrainConfig};

pub const MAGIC: &[u8; 4] = b"RFRG";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("model format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("model file is truncated")]
    Truncated,
    #[error("model checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("corrupt model: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Everything needed to relabel new text.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: TrainConfig,
    pub vocab: Vocabulary,
    pub params: ModelParams,
    pub templates: Vec<Template>,
    pub lexical_heads: bool,
    /// Argmax assignments per role on the training corpus.
    pub role_usage: Vec<u64>,
}

impl Model {
    pub fn extract_options(&self) -> ExtractOptions {
        ExtractOptions {
            templates: self.templates.clone(),
            lexical_heads: self.lexical_heads,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub config: TrainConfig,
    pub num_roles: usize,
    pub num_features: usize,
    pub num_lemmas: usize,
    pub num_predicates: usize,
    pub num_deprels: usize,
    pub dim_d: usize,
    pub dim_k: usize,
    pub specific_predicates: usize,
    pub templates: Vec<String>,
    pub lexical_heads: bool,
    pub role_usage: Vec<u64>,
}

impl Header {
    pub fn of(model: &Model) -> Header {
        let d = &model.params.decoder;
        Header {
            config: model.config.clone(),
            num_roles: model.params.encoder.num_roles(),
            num_features: model.params.encoder.num_features(),
            num_lemmas: d.num_lemmas(),
            num_predicates: model.vocab.predicates.len(),
            num_deprels: model.vocab.deprels.len(),
            dim_d: d.dim_d(),
            dim_k: d.dim_k(),
            specific_predicates: d.specific_predicates().len(),
            templates: model.templates.iter().map(|t| t.name().to_string()).collect(),
            lexical_heads: model.lexical_heads,
            role_usage: model.role_usage.clone(),
        }
    }
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.buf.extend_from_slice(b);
    }
    fn floats<'a>(&mut self, values: impl IntoIterator<Item = &'a f64>) {
        for v in values {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fn lexicon(&mut self, lex: &Lexicon) {
        self.bytes(lex.kind().as_bytes());
        self.u8(lex.has_unk() as u8);
        self.u64(lex.len() as u64);
        for (_, item, count) in lex.iter() {
            self.bytes(item.as_bytes());
            self.u64(count);
        }
    }
}

/// Serializes a model to bytes.
pub fn write_model(model: &Model) -> Vec<u8> {
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    let header = serde_json::to_vec(&Header::of(model)).expect("header serializes");
    w.bytes(&header);
    for lex in [
        &model.vocab.arg_lemmas,
        &model.vocab.features,
        &model.vocab.predicates,
        &model.vocab.deprels,
    ] {
        w.lexicon(lex);
    }
    let p = &model.params;
    // iter() walks standard-layout arrays in row-major order
    w.floats(p.encoder.weights().iter());
    w.floats(p.decoder.embeddings().iter());
    w.floats(p.decoder.shared().iter());
    w.u64(p.decoder.specific_predicates().len() as u64);
    for &v in p.decoder.specific_predicates() {
        w.u64(v as u64);
    }
    w.floats(p.decoder.specific().iter());
    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    w.buf
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<(), ModelError> {
    fs::write(path, write_model(model))?;
    Ok(())
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).ok_or(ModelError::Truncated)?;
        if end > self.data.len() {
            return Err(ModelError::Truncated);
        }
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize, ModelError> {
        usize::try_from(self.u64()?).map_err(|_| ModelError::Corrupt("length overflow".into()))
    }
    fn string(&mut self) -> Result<String, ModelError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| ModelError::Corrupt("invalid UTF-8".into()))
    }
    fn floats(&mut self, n: usize) -> Result<Vec<f64>, ModelError> {
        let bytes = self.take(n.checked_mul(8).ok_or(ModelError::Truncated)?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn lexicon(&mut self) -> Result<Lexicon, ModelError> {
        let kind = self.string()?;
        let has_unk = self.u8()? != 0;
        let n = self.len()?;
        let mut items = Vec::new();
        let mut counts = Vec::new();
        for _ in 0..n {
            items.push(self.string()?);
            counts.push(self.u64()?);
        }
        Ok(Lexicon::from_parts(kind, items, counts, has_unk))
    }
}

fn shape_err(e: ndarray::ShapeError) -> ModelError {
    ModelError::Corrupt(format!("parameter block shape: {}", e))
}

/// Parses a model from bytes, checking magic, version and checksum.
pub fn read_model(data: &[u8]) -> Result<Model, ModelError> {
    if data.len() < 4 {
        return Err(ModelError::Truncated);
    }
    if &data[..4] != MAGIC {
        return Err(ModelError::BadMagic);
    }
    if data.len() < 12 {
        return Err(ModelError::Truncated);
    }
    let version = u32::from_le_bytes(data[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(ModelError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let (body, tail) = data.split_at(data.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(ModelError::Checksum { stored, computed });
    }

    let mut r = Reader { data: body, pos: 8 };
    let header_len = r.u32()? as usize;
    let header: Header = serde_json::from_slice(r.take(header_len)?)
        .map_err(|e| ModelError::Corrupt(format!("header: {}", e)))?;
    let vocab = Vocabulary {
        arg_lemmas: r.lexicon()?,
        features: r.lexicon()?,
        predicates: r.lexicon()?,
        deprels: r.lexicon()?,
    };
    let (roles, d, k) = (header.num_roles, header.dim_d, header.dim_k);
    if vocab.features.len() != header.num_features
        || vocab.arg_lemmas.len() != header.num_lemmas
        || vocab.predicates.len() != header.num_predicates
        || vocab.deprels.len() != header.num_deprels
    {
        return Err(ModelError::Corrupt("vocabulary sizes disagree with header".into()));
    }

    let weights = Array2::from_shape_vec(
        (roles, header.num_features),
        r.floats(roles * header.num_features)?,
    )
    .map_err(shape_err)?;
    let embeddings =
        Array2::from_shape_vec((header.num_lemmas, d), r.floats(header.num_lemmas * d)?)
            .map_err(shape_err)?;
    let shared = Array3::from_shape_vec((roles, d, k), r.floats(roles * d * k)?).map_err(shape_err)?;
    let num_specific = r.len()?;
    if num_specific != header.specific_predicates {
        return Err(ModelError::Corrupt("predicate block count disagrees with header".into()));
    }
    let mut predicate_ids = Vec::with_capacity(num_specific);
    for _ in 0..num_specific {
        predicate_ids.push(r.len()?);
    }
    if predicate_ids.windows(2).any(|w| w[0] >= w[1])
        || predicate_ids.iter().any(|&v| v >= header.num_predicates)
    {
        return Err(ModelError::Corrupt("predicate index is not sorted or out of range".into()));
    }
    let specific = Array4::from_shape_vec(
        (num_specific, roles, d, k),
        r.floats(num_specific * roles * d * k)?,
    )
    .map_err(shape_err)?;
    if r.pos != body.len() {
        return Err(ModelError::Corrupt("trailing bytes after parameters".into()));
    }

    let mut decoder = DecoderParams::zeros(header.num_lemmas, roles, d, k, predicate_ids)
        .map_err(|e| ModelError::Corrupt(e.to_string()))?;
    decoder.embeddings_mut().assign(&embeddings);
    decoder.shared_mut().assign(&shared);
    decoder.specific_mut().assign(&specific);

    let templates = header
        .templates
        .iter()
        .map(|name| {
            Template::ALL
                .iter()
                .copied()
                .find(|t| t.name() == name)
                .ok_or_else(|| ModelError::Corrupt(format!("unknown feature template {}", name)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Model {
        config: header.config,
        vocab,
        params: ModelParams {
            encoder: EncoderParams::from_weights(weights),
            decoder,
        },
        templates,
        lexical_heads: header.lexical_heads,
        role_usage: header.role_usage,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, ModelError> {
    read_model(&fs::read(path)?)
}

/// Reads only the JSON header, after the same integrity checks as
/// [`read_model`].
pub fn read_header(data: &[u8]) -> Result<Header, ModelError> {
    read_model(data).map(|m| Header::of(&m))
}
