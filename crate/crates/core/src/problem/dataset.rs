use std::path::Path;

use serde::{Deserialize, Serialize};

use super::instance::{GeneratorOptions, Instance};
use super::ProblemKind;
use crate::error::{Error, Result};

pub const DATASET_FORMAT: &str = "colony-dataset";
pub const DATASET_VERSION: u32 = 1;

/// A set of generated instances of one kind and size, stored as JSON with
/// exact (round-trip) floating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub format: String,
    pub version: u32,
    pub kind: ProblemKind,
    pub n: usize,
    pub options: GeneratorOptions,
    pub seeds: Vec<u64>,
    pub instances: Vec<Instance>,
}

impl Dataset {
    /// Instances generated from `seeds`, one each.
    pub fn generate(kind: ProblemKind, n: usize, seeds: &[u64], options: GeneratorOptions) -> Result<Self> {
        let instances = seeds
            .iter()
            .map(|&s| Instance::generate_with(kind, n, s, options))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            format: DATASET_FORMAT.to_string(),
            version: DATASET_VERSION,
            kind,
            n,
            options,
            seeds: seeds.to_vec(),
            instances,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ds: Dataset = serde_json::from_str(text)?;
        if ds.format != DATASET_FORMAT {
            return Err(Error::Dataset(format!("unknown format `{}`", ds.format)));
        }
        if ds.version != DATASET_VERSION {
            return Err(Error::Dataset(format!("unsupported version {}", ds.version)));
        }
        if ds.seeds.len() != ds.instances.len() {
            return Err(Error::Dataset("seed list and instance list differ in length".into()));
        }
        for inst in &ds.instances {
            if inst.kind() != ds.kind || inst.size() != ds.n {
                return Err(Error::Dataset(format!(
                    "instance {} {} does not match dataset {} {}",
                    inst.kind(),
                    inst.size(),
                    ds.kind,
                    ds.n
                )));
            }
        }
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
