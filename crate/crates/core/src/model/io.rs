//! Binary model files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "KIRU"  u16 version  u32 header_len  header (JSON, header_len bytes)
//! repeated per tensor: u64 element count, count × f32
//! u32 CRC32 of every preceding byte
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Layout, ModelConfig, Network, SegmenterModel};
use crate::corpus::{Label, SegDictionary, Stream, Vocabulary};
use crate::error::{Error, LoadError, Result};
use crate::features::DICT_COMPONENTS;
use crate::nn::Parameters;

pub const MAGIC: &[u8; 4] = b"KIRU";
pub const FORMAT_VERSION: u16 = 1;

const PREAMBLE: usize = 4 + 2 + 4;

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    labels: Vec<Label>,
    dict_vector_order: Vec<String>,
    /// `[stream][order-1]` table sizes including reserved ids.
    vocab_sizes: Vec<Vec<usize>>,
    vocabulary: Vocabulary,
    dictionary: Option<SegDictionary>,
    tensors: Vec<TensorEntry>,
}

impl SegmenterModel {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let tensors = self.network.tensors();
        let header = Header {
            config: self.config.clone(),
            labels: self.config.scheme.labels().to_vec(),
            dict_vector_order: if self.config.use_dict {
                DICT_COMPONENTS.iter().map(|s| s.to_string()).collect()
            } else {
                Vec::new()
            },
            vocab_sizes: Stream::ALL
                .iter()
                .map(|&s| (1..=3).map(|n| self.vocab.table(s, n).size()).collect())
                .collect(),
            vocabulary: self.vocab.clone(),
            dictionary: self.dictionary.clone(),
            tensors: tensors
                .iter()
                .map(|(name, t)| TensorEntry {
                    name: name.clone(),
                    rows: t.rows(),
                    cols: t.cols(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| LoadError::Header(e.to_string()))?;
        let header_len = u32::try_from(json.len())
            .map_err(|_| Error::Precondition("model header exceeds 4 GiB".into()))?;

        let body: usize = tensors.iter().map(|(_, t)| 8 + 4 * t.len()).sum();
        let mut out = Vec::with_capacity(PREAMBLE + json.len() + body + 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&header_len.to_le_bytes());
        out.extend_from_slice(&json);
        for (_, t) in &tensors {
            out.extend_from_slice(&(t.len() as u64).to_le_bytes());
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(&self.to_bytes()?)?;
        writer.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
            return Err(LoadError::BadMagic.into());
        }
        if bytes.len() < PREAMBLE {
            return Err(LoadError::Truncated.into());
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(LoadError::Version {
                found: version,
                supported: FORMAT_VERSION,
            }
            .into());
        }
        let header_len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let header_end = PREAMBLE
            .checked_add(header_len)
            .filter(|&e| e <= bytes.len())
            .ok_or(LoadError::Truncated)?;

        // A file cut short at a block boundary still walks cleanly; the
        // header's tensor list tells how long it should have been.
        let header = serde_json::from_slice::<Header>(&bytes[PREAMBLE..header_end]).ok();
        if let Some(h) = &header {
            let expected = h.tensors.iter().fold(header_end + 4, |acc, e| {
                acc.saturating_add(
                    e.rows
                        .saturating_mul(e.cols)
                        .saturating_mul(4)
                        .saturating_add(8),
                )
            });
            if bytes.len() < expected {
                return Err(LoadError::Truncated.into());
            }
        }

        // Walk the tensor blocks up to the checksum before trusting any of them.
        let mut blocks = Vec::new();
        let mut pos = header_end;
        while bytes.len() - pos > 4 {
            if bytes.len() - pos < 8 + 4 {
                return Err(LoadError::Truncated.into());
            }
            let count = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
            let len = usize::try_from(count)
                .ok()
                .and_then(|c| c.checked_mul(4))
                .filter(|&l| l <= bytes.len() - pos - 8 - 4)
                .ok_or(LoadError::Truncated)?;
            blocks.push((pos + 8, count as usize));
            pos += 8 + len;
        }
        if bytes.len() - pos != 4 {
            return Err(LoadError::Truncated.into());
        }
        let stored = u32::from_le_bytes(bytes[pos..].try_into().unwrap());
        let computed = crc32fast::hash(&bytes[..pos]);
        if stored != computed {
            return Err(LoadError::Checksum { stored, computed }.into());
        }

        let header = match header {
            Some(h) => h,
            None => serde_json::from_slice(&bytes[PREAMBLE..header_end])
                .map_err(|e| LoadError::Header(e.to_string()))?,
        };
        if header.labels != header.config.scheme.labels() {
            return Err(
                LoadError::Header("label inventory does not match the scheme".into()).into(),
            );
        }
        let mut network = Network::zeros(Layout::from_config(&header.config), &header.vocabulary);
        let mut slots = network.tensors_mut();
        if slots.len() != header.tensors.len() || slots.len() != blocks.len() {
            return Err(LoadError::Header(format!(
                "expected {} tensors, file lists {} and holds {}",
                slots.len(),
                header.tensors.len(),
                blocks.len()
            ))
            .into());
        }
        for (((name, slot), entry), &(start, count)) in
            slots.iter_mut().zip(&header.tensors).zip(&blocks)
        {
            if *name != entry.name
                || slot.shape() != (entry.rows, entry.cols)
                || slot.len() != count
            {
                return Err(Error::ShapeMismatch {
                    op: "load",
                    expected: format!("{name} of shape {:?}", slot.shape()),
                    actual: format!(
                        "{} of shape ({}, {}) with {count} values",
                        entry.name, entry.rows, entry.cols
                    ),
                });
            }
            for (dst, chunk) in slot
                .data_mut()
                .iter_mut()
                .zip(bytes[start..start + 4 * count].chunks_exact(4))
            {
                *dst = f32::from_le_bytes(chunk.try_into().unwrap());
            }
        }
        drop(slots);
        SegmenterModel::from_parts(header.config, header.vocabulary, header.dictionary, network)
    }
}
