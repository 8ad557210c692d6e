//! Binary graph container.
//!
//! ```text
//! magic            b"TGGRAPH\0"
//! format_version   u32
//! n_docs, n_terms, window_size, window_count        u64 each
//! nnz              u64, then nnz × (row u64, col u64, weight f64)
//!                  upper triangle plus diagonal, row-major, ties by column
//! classes          u64 count, then length-prefixed UTF-8 names
//! labels           n_docs × u32
//! train/val/test   n_docs × u8 each (0 or 1)
//! doc ids, terms   length-prefixed UTF-8 strings
//! ```
//!
//! All integers and floats are little-endian.

use std::fs;
use std::path::Path;

use super::TextGraph;
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::numcore::SparseMatrix;

const MAGIC: &[u8; 8] = b"TGGRAPH\0";
pub const GRAPH_FORMAT_VERSION: u32 = 1;
const KIND: &str = "graph";

impl TextGraph {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u32(GRAPH_FORMAT_VERSION);
        w.usize(self.n_docs);
        w.usize(self.n_terms);
        w.usize(self.window_size);
        w.u64(self.window_count);
        let upper: Vec<(usize, usize, f64)> =
            self.adjacency.iter().filter(|&(r, c, _)| c >= r).collect();
        w.usize(upper.len());
        for (r, c, v) in upper {
            w.usize(r);
            w.usize(c);
            w.f64(v);
        }
        w.usize(self.class_names.len());
        for name in &self.class_names {
            w.str(name);
        }
        for &l in &self.labels {
            w.u32(l as u32);
        }
        for mask in [&self.train_mask, &self.val_mask, &self.test_mask] {
            for &m in mask {
                w.u8(m as u8);
            }
        }
        for id in &self.doc_ids {
            w.str(id);
        }
        for t in &self.terms {
            w.str(t);
        }
        w.finish()
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader::new(KIND, buf);
        r.expect(MAGIC)?;
        let version = r.u32()?;
        if version != GRAPH_FORMAT_VERSION {
            return Err(Error::format(
                KIND,
                format!("unsupported version {version}"),
            ));
        }
        let n_docs = r.usize()?;
        let n_terms = r.usize()?;
        let window_size = r.usize()?;
        let window_count = r.u64()?;
        let n = n_docs
            .checked_add(n_terms)
            .ok_or_else(|| Error::format(KIND, "node count overflow"))?;
        let nnz = r.len(24)?;
        let mut triplets = Vec::with_capacity(nnz * 2);
        let mut prev: Option<(usize, usize)> = None;
        for _ in 0..nnz {
            let (row, col, v) = (r.usize()?, r.usize()?, r.f64()?);
            if row >= n || col >= n || col < row {
                return Err(Error::format(KIND, "edge outside the upper triangle"));
            }
            if prev.is_some_and(|p| p >= (row, col)) {
                return Err(Error::format(KIND, "edges not in canonical order"));
            }
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::format(
                    KIND,
                    "edge weights must be positive and finite",
                ));
            }
            prev = Some((row, col));
            triplets.push((row, col, v));
            if row != col {
                triplets.push((col, row, v));
            }
        }
        let adjacency = SparseMatrix::from_triplets(n, n, &triplets)?;
        let n_classes = r.len(8)?;
        let class_names = (0..n_classes)
            .map(|_| r.str())
            .collect::<Result<Vec<_>>>()?;
        let labels = (0..n_docs)
            .map(|_| {
                let l = r.u32()? as usize;
                if l >= n_classes {
                    return Err(Error::LabelOutOfRange {
                        label: l,
                        classes: n_classes,
                    });
                }
                Ok(l)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut masks = Vec::with_capacity(3);
        for _ in 0..3 {
            masks.push(
                (0..n_docs)
                    .map(|_| Ok(r.u8()? != 0))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let doc_ids = (0..n_docs).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        let terms = (0..n_terms).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        let test_mask = masks.pop().unwrap();
        let val_mask = masks.pop().unwrap();
        let train_mask = masks.pop().unwrap();
        Ok(TextGraph {
            n_docs,
            n_terms,
            window_size,
            window_count,
            adjacency,
            labels,
            class_names,
            doc_ids,
            terms,
            train_mask,
            val_mask,
            test_mask,
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
