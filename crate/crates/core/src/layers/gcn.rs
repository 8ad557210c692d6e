//! Graph convolution baseline: `H' = σ(Â H W)` with `Â` the symmetrically
//! normalized adjacency.

use super::activation::Activation;
use super::dropout::{dropout_features, Mode};
use super::features::Features;
use super::init::glorot_uniform;
use crate::error::{Error, Result};
use crate::numcore::{DenseMatrix, Rng, SparseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct GcnLayerParams {
    pub weight: DenseMatrix,
    pub activation: Activation,
}

impl GcnLayerParams {
    pub fn init(rng: &mut Rng, in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weight: glorot_uniform(rng, in_dim, out_dim),
            activation,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GcnCache {
    input: Features,
    input_mask: Option<Vec<f64>>,
    pre: DenseMatrix,
    output: DenseMatrix,
}

impl GcnCache {
    pub fn output(&self) -> &DenseMatrix {
        &self.output
    }

    pub fn pre_activation(&self) -> &DenseMatrix {
        &self.pre
    }
}

pub struct GcnForward {
    pub output: DenseMatrix,
    pub cache: GcnCache,
}

pub fn gcn_layer_forward(
    input: &Features,
    a_hat: &SparseMatrix,
    params: &GcnLayerParams,
    dropout: f64,
    rng: &mut Rng,
    mode: Mode,
) -> Result<GcnForward> {
    if a_hat.cols() != input.rows() {
        return Err(Error::DimensionMismatch(format!(
            "normalized adjacency {}x{} for {} nodes",
            a_hat.rows(),
            a_hat.cols(),
            input.rows()
        )));
    }
    let (dropped, input_mask) = dropout_features(input, dropout, mode, rng);
    let pre = a_hat.spmm(&dropped.project(&params.weight)?)?;
    let output = params.activation.apply(&pre);
    Ok(GcnForward {
        output: output.clone(),
        cache: GcnCache {
            input: dropped,
            input_mask,
            pre,
            output,
        },
    })
}

#[derive(Debug, Clone)]
pub struct GcnGrads {
    pub weight: DenseMatrix,
    pub input: Option<DenseMatrix>,
}

pub fn gcn_layer_backward(
    params: &GcnLayerParams,
    a_hat: &SparseMatrix,
    cache: Option<&GcnCache>,
    d_output: &DenseMatrix,
) -> Result<GcnGrads> {
    let cache = cache.ok_or(Error::MissingCache)?;
    let d_pre = params
        .activation
        .backward(&cache.pre, &cache.output, d_output);
    gcn_layer_backward_pre(params, a_hat, Some(cache), &d_pre)
}

pub fn gcn_layer_backward_pre(
    params: &GcnLayerParams,
    a_hat: &SparseMatrix,
    cache: Option<&GcnCache>,
    d_pre: &DenseMatrix,
) -> Result<GcnGrads> {
    let cache = cache.ok_or(Error::MissingCache)?;
    if d_pre.shape() != cache.pre.shape() {
        return Err(Error::DimensionMismatch(format!(
            "upstream gradient {:?} for output {:?}",
            d_pre.shape(),
            cache.pre.shape()
        )));
    }
    let d_xw = a_hat.spmm_transpose(d_pre)?;
    let weight = cache.input.project_transpose(&d_xw)?;
    let input = match cache.input {
        Features::Dense(_) => {
            let mut d = d_xw.matmul_transpose(&params.weight)?;
            if let Some(mask) = &cache.input_mask {
                for (v, m) in d.as_mut_slice().iter_mut().zip(mask) {
                    *v *= m;
                }
            }
            Some(d)
        }
        _ => None,
    };
    Ok(GcnGrads { weight, input })
}

/// Two-layer forward `softmax(Â ReLU(Â X W0) W1)` without dropout.
pub fn gcn_forward(
    x: &Features,
    a_hat: &SparseMatrix,
    w0: &DenseMatrix,
    w1: &DenseMatrix,
) -> Result<DenseMatrix> {
    let mut rng = Rng::new(0);
    let first = GcnLayerParams {
        weight: w0.clone(),
        activation: Activation::Relu,
    };
    let second = GcnLayerParams {
        weight: w1.clone(),
        activation: Activation::Softmax,
    };
    let h = gcn_layer_forward(x, a_hat, &first, 0.0, &mut rng, Mode::Eval)?.output;
    Ok(gcn_layer_forward(
        &Features::Dense(h),
        a_hat,
        &second,
        0.0,
        &mut rng,
        Mode::Eval,
    )?
    .output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::softmax_row;

    #[test]
    fn identity_propagation() {
        let x = DenseMatrix::from_rows(&[vec![1.0, -1.0, 0.5], vec![-2.0, 3.0, 0.0]]).unwrap();
        let out = gcn_forward(
            &Features::Dense(x.clone()),
            &SparseMatrix::identity(2),
            &DenseMatrix::identity(3),
            &DenseMatrix::identity(3),
        )
        .unwrap();
        for r in 0..2 {
            let relu: Vec<f64> = x.row(r).iter().map(|v| v.max(0.0)).collect();
            assert_eq!(out.row(r), softmax_row(&relu).as_slice());
        }
    }

    #[test]
    fn zero_features_are_uniform() {
        let out = gcn_forward(
            &Features::Dense(DenseMatrix::zeros(3, 4)),
            &SparseMatrix::identity(3),
            &DenseMatrix::from_fn(4, 2, |r, c| (r + c) as f64),
            &DenseMatrix::from_fn(2, 5, |r, c| (r * c) as f64),
        )
        .unwrap();
        assert!(out.as_slice().iter().all(|&v| (v - 0.2).abs() < 1e-15));
    }
}
