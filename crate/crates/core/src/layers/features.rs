use crate::error::{Error, Result};
use crate::numcore::DenseMatrix;

/// Node feature matrix as seen by a layer.
///
/// One-hot identity features never materialize: the first layer's
/// projection `X·W` is `W` itself, and input dropout on an identity turns
/// it into a diagonal of keep/scale factors.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Identity(usize),
    Diagonal(Vec<f64>),
    Dense(DenseMatrix),
}

impl Features {
    pub fn rows(&self) -> usize {
        match self {
            Features::Identity(n) => *n,
            Features::Diagonal(d) => d.len(),
            Features::Dense(m) => m.rows(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Features::Identity(n) => *n,
            Features::Diagonal(d) => d.len(),
            Features::Dense(m) => m.cols(),
        }
    }

    /// `X · W`.
    pub fn project(&self, w: &DenseMatrix) -> Result<DenseMatrix> {
        if self.width() != w.rows() {
            return Err(Error::DimensionMismatch(format!(
                "features of width {} against weights {:?}",
                self.width(),
                w.shape()
            )));
        }
        match self {
            Features::Identity(_) => Ok(w.clone()),
            Features::Diagonal(d) => {
                let mut out = w.clone();
                for (r, &s) in d.iter().enumerate() {
                    out.row_mut(r).iter_mut().for_each(|v| *v *= s);
                }
                Ok(out)
            }
            Features::Dense(x) => x.matmul(w),
        }
    }

    /// `Xᵀ · G`, the weight gradient of [`Features::project`].
    pub fn project_transpose(&self, g: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows() != g.rows() {
            return Err(Error::DimensionMismatch(format!(
                "features with {} rows against gradient {:?}",
                self.rows(),
                g.shape()
            )));
        }
        match self {
            Features::Identity(_) => Ok(g.clone()),
            Features::Diagonal(d) => {
                let mut out = g.clone();
                for (r, &s) in d.iter().enumerate() {
                    out.row_mut(r).iter_mut().for_each(|v| *v *= s);
                }
                Ok(out)
            }
            Features::Dense(x) => x.transpose_matmul(g),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Features::Identity(n) => DenseMatrix::identity(*n),
            Features::Diagonal(d) => {
                let mut m = DenseMatrix::zeros(d.len(), d.len());
                for (i, &v) in d.iter().enumerate() {
                    m.set(i, i, v);
                }
                m
            }
            Features::Dense(m) => m.clone(),
        }
    }
}
