//! Checkpoint container.
//!
//! ```text
//! magic            b"TGCKPT\0\0"
//! format_version   u32
//! config           length-prefixed JSON {"train": ..., "model": ...}
//! rng              length-prefixed algorithm name, then seed u64
//! epoch            u64
//! tensors          u64 count, then per tensor:
//!                  name (length-prefixed), rows u64, cols u64,
//!                  rows·cols × f64 row-major
//! ```
//!
//! Little-endian throughout. Tensors appear in the model's declared order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::layers::{ModelConfig, ModelParams};
use crate::numcore::Rng;

const MAGIC: &[u8; 8] = b"TGCKPT\0\0";
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;
const KIND: &str = "checkpoint";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub train: TrainConfig,
    pub model: ModelConfig,
    pub rng_algorithm: String,
    pub seed: u64,
    /// Epoch whose parameters are stored (best validation loss).
    pub epoch: usize,
    pub params: ModelParams,
}

#[derive(Serialize, Deserialize)]
struct ConfigBlock {
    train: TrainConfig,
    model: ModelConfig,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u32(CHECKPOINT_FORMAT_VERSION);
        let block = ConfigBlock {
            train: self.train.clone(),
            model: self.model.clone(),
        };
        w.str(&serde_json::to_string(&block).expect("config serializes"));
        w.str(&self.rng_algorithm);
        w.u64(self.seed);
        w.usize(self.epoch);
        let tensors = self.params.named_tensors();
        w.usize(tensors.len());
        for (name, t) in tensors {
            w.str(&name);
            w.usize(t.rows());
            w.usize(t.cols());
            for &v in t.as_slice() {
                w.f64(v);
            }
        }
        w.finish()
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader::new(KIND, buf);
        r.expect(MAGIC)?;
        let version = r.u32()?;
        if version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::format(
                KIND,
                format!("unsupported version {version}"),
            ));
        }
        let block: ConfigBlock = serde_json::from_str(&r.str()?)
            .map_err(|e| Error::format(KIND, format!("config block: {e}")))?;
        block.model.validate()?;
        let rng_algorithm = r.str()?;
        if rng_algorithm != Rng::ALGORITHM {
            return Err(Error::format(
                KIND,
                format!("unknown rng `{rng_algorithm}`"),
            ));
        }
        let seed = r.u64()?;
        let epoch = r.usize()?;
        // Shapes come from the config; stored tensors must match them.
        let mut params = ModelParams::init(&block.model, &mut Rng::new(0));
        let expected: Vec<(String, usize, usize)> = params
            .named_tensors()
            .into_iter()
            .map(|(n, t)| (n, t.rows(), t.cols()))
            .collect();
        let count = r.usize()?;
        if count != expected.len() {
            return Err(Error::format(
                KIND,
                format!("{count} tensors, expected {}", expected.len()),
            ));
        }
        for ((name, rows, cols), t) in expected.into_iter().zip(params.tensors_mut()) {
            let got = (r.str()?, r.usize()?, r.usize()?);
            if got != (name.clone(), rows, cols) {
                return Err(Error::format(
                    KIND,
                    format!("tensor {got:?} where {name} {rows}x{cols} was expected"),
                ));
            }
            for v in t.as_mut_slice() {
                *v = r.f64()?;
            }
        }
        r.finish()?;
        Ok(Self {
            train: block.train,
            model: block.model,
            rng_algorithm,
            seed,
            epoch,
            params,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&buf)
    }
}
