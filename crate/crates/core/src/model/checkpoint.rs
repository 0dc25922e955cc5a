//! Binary checkpoint: `PSV1`, a little-endian `u32` length, a JSON header
//! with the model config, vocabulary and L1 weights, then one section per
//! tensor in layout order: `u32` name length, name, `u32` element count and
//! the elements as little-endian `f32`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::params::{layout, ModelParams};
use crate::error::{Error, Result};
use crate::featurize::Vocabulary;
use crate::l1error::L1Weights;

const MAGIC: &[u8; 4] = b"PSV1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams<f32>,
    pub vocab: Vocabulary,
    pub l1_weights: L1Weights,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    vocab: Vocabulary,
    l1_weights: L1Weights,
}

pub fn write_checkpoint(ckpt: &Checkpoint) -> Vec<u8> {
    let header = serde_json::to_vec(&Header {
        config: ckpt.params.config.clone(),
        vocab: ckpt.vocab.clone(),
        l1_weights: ckpt.l1_weights,
    })
    .expect("header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for (spec, data) in layout(&ckpt.params.config).iter().zip(&ckpt.params.tensors) {
        out.extend_from_slice(&(spec.name.len() as u32).to_le_bytes());
        out.extend_from_slice(spec.name.as_bytes());
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        for x in data {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::format("checkpoint", "truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::format("checkpoint", "bad magic"));
    }
    let len = r.u32()?;
    let header: Header = serde_json::from_slice(r.take(len)?)?;
    header.config.validate()?;
    let mut tensors = Vec::new();
    for spec in layout(&header.config) {
        let name_len = r.u32()?;
        let name = r.take(name_len)?;
        if name != spec.name.as_bytes() {
            return Err(Error::format(
                "checkpoint",
                format!("expected tensor `{}`, found `{}`", spec.name, String::from_utf8_lossy(name)),
            ));
        }
        let count = r.u32()?;
        if count != spec.numel() {
            return Err(Error::format(
                "checkpoint",
                format!("tensor `{}` has {count} values, expected {}", spec.name, spec.numel()),
            ));
        }
        let raw = r.take(count * 4)?;
        tensors.push(
            raw.chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect(),
        );
    }
    if r.pos != bytes.len() {
        return Err(Error::format("checkpoint", "trailing bytes"));
    }
    Ok(Checkpoint {
        params: ModelParams {
            config: header.config,
            tensors,
        },
        vocab: header.vocab,
        l1_weights: header.l1_weights,
    })
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    Ok(std::fs::write(path, write_checkpoint(ckpt))?)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(&std::fs::read(path)?)
}
