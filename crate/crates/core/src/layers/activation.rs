use serde::{Deserialize, Serialize};

use crate::numcore::{elu, elu_grad, relu, softmax_rows, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Elu,
    Relu,
    /// Row-wise softmax.
    Softmax,
}

impl Activation {
    pub fn apply(self, pre: &DenseMatrix) -> DenseMatrix {
        match self {
            Activation::Identity => pre.clone(),
            Activation::Elu => pre.map(elu),
            Activation::Relu => pre.map(relu),
            Activation::Softmax => softmax_rows(pre),
        }
    }

    /// Gradient with respect to the pre-activation, given the upstream
    /// gradient `d_out` and the forward values `pre` and `out`.
    pub fn backward(
        self,
        pre: &DenseMatrix,
        out: &DenseMatrix,
        d_out: &DenseMatrix,
    ) -> DenseMatrix {
        match self {
            Activation::Identity => d_out.clone(),
            Activation::Elu => DenseMatrix::from_fn(pre.rows(), pre.cols(), |r, c| {
                d_out.get(r, c) * elu_grad(pre.get(r, c))
            }),
            Activation::Relu => DenseMatrix::from_fn(pre.rows(), pre.cols(), |r, c| {
                if pre.get(r, c) > 0.0 {
                    d_out.get(r, c)
                } else {
                    0.0
                }
            }),
            Activation::Softmax => {
                let mut d = DenseMatrix::zeros(pre.rows(), pre.cols());
                for r in 0..pre.rows() {
                    let p = out.row(r);
                    let g = d_out.row(r);
                    let dot: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
                    for ((o, &pi), &gi) in d.row_mut(r).iter_mut().zip(p).zip(g) {
                        *o = pi * (gi - dot);
                    }
                }
                d
            }
        }
    }
}
