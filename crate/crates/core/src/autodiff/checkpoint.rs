//! Versioned binary container for named parameter tensors.
//!
//! Layout (little endian): magic `CLNYCKPT`, `u32` version, `u64` metadata
//! length + UTF-8 JSON metadata, `u64` tensor count, then per tensor a
//! `u32` name length + name, `u32` rank, `u64` dims and raw `f64` values.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::params::ParamStore;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"CLNYCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    metadata: String,
    pub tensors: Vec<NamedTensor>,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Checkpoint("unexpected end of data".into()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("length overflow".into()))
    }

    fn string(&mut self, n: usize) -> Result<String> {
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("invalid UTF-8".into()))
    }
}

impl Checkpoint {
    pub fn new<M: Serialize>(metadata: &M, tensors: Vec<NamedTensor>) -> Result<Self> {
        Ok(Self {
            metadata: serde_json::to_string(metadata)?,
            tensors,
        })
    }

    /// Snapshot of every parameter in `store`.
    pub fn from_store<S: Scalar, M: Serialize>(store: &ParamStore<S>, metadata: &M) -> Result<Self> {
        let tensors = store
            .iter()
            .map(|(_, p)| NamedTensor {
                name: p.name.clone(),
                shape: p.value.shape().to_vec(),
                values: p.value.to_f64(),
            })
            .collect();
        Self::new(metadata, tensors)
    }

    pub fn metadata_json(&self) -> &str {
        &self.metadata
    }

    pub fn metadata<M: DeserializeOwned>(&self) -> Result<M> {
        Ok(serde_json::from_str(&self.metadata)?)
    }

    /// Copies tensors into same-named parameters; every parameter in
    /// `store` must be present with the same shape.
    pub fn load_into<S: Scalar>(&self, store: &mut ParamStore<S>) -> Result<()> {
        if self.tensors.len() != store.len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint has {} tensors, model expects {}",
                self.tensors.len(),
                store.len()
            )));
        }
        for t in &self.tensors {
            let id = store
                .id(&t.name)
                .map_err(|_| Error::Checkpoint(format!("unexpected tensor `{}`", t.name)))?;
            let target = store.value_mut(id);
            if t.shape != target.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor `{}` has shape {:?}, model expects {:?}",
                    t.name,
                    t.shape,
                    target.shape()
                )));
            }
            for (dst, &src) in target.data_mut().iter_mut().zip(&t.values) {
                *dst = S::of(src);
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.metadata.len() as u64).to_le_bytes());
        out.extend_from_slice(self.metadata.as_bytes());
        out.extend_from_slice(&(self.tensors.len() as u64).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &v in &t.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let meta_len = r.len()?;
        let metadata = r.string(meta_len)?;
        let count = r.len()?;
        let mut tensors = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = r.string(name_len)?;
            let rank = r.u32()? as usize;
            let shape = (0..rank).map(|_| r.len()).collect::<Result<Vec<_>>>()?;
            let n: usize = shape.iter().product();
            let values = (0..n)
                .map(|_| r.u64().map(f64::from_bits))
                .collect::<Result<Vec<_>>>()?;
            tensors.push(NamedTensor {
                name,
                shape,
                values,
            });
        }
        if r.pos != buf.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(Self { metadata, tensors })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

impl NamedTensor {
    pub fn to_tensor<S: Scalar>(&self) -> Result<Tensor<S>> {
        let (rows, cols) = match self.shape.as_slice() {
            [r, c] => (*r, *c),
            [n] => (1, *n),
            _ => return Err(Error::Checkpoint(format!("rank {} tensor", self.shape.len()))),
        };
        Tensor::new(rows, cols, self.values.iter().map(|&v| S::of(v)).collect())
    }
}
