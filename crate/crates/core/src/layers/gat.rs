//! Masked multi-head graph attention.
//!
//! For head `k` with projection `W` and kernel `a = [a_src ‖ a_dst]`:
//!
//! ```text
//! z_i   = W h_i
//! e_ij  = LeakyReLU(a_src·z_i + a_dst·z_j)         for j in N(i)
//! α_ij  = exp(e_ij) / Σ_{l in N(i)} exp(e_il)
//! out_i = Σ_{j in N(i)} α_ij z_j
//! ```
//!
//! `N(i)` is the stored pattern of row `i` of the adjacency, which always
//! includes `i` itself. Heads are concatenated (hidden layers) or averaged
//! (output layer) and then passed through the layer activation.

use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::dropout::{draw_mask, dropout_features, Mode};
use super::features::Features;
use super::init::glorot_uniform;
use crate::error::{Error, Result};
use crate::numcore::{leaky_relu, leaky_relu_grad, softmax_row, DenseMatrix, Rng, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Concat,
    Average,
}

/// How edge weights of the adjacency enter the attention logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeWeighting {
    /// The adjacency only defines neighborhoods.
    #[default]
    MaskOnly,
    /// The edge weight is added to the logit after the LeakyReLU.
    Additive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatLayerParams {
    /// One `F × F'` projection per head.
    pub weights: Vec<DenseMatrix>,
    /// One `1 × 2F'` attention kernel per head.
    pub kernels: Vec<DenseMatrix>,
    pub alpha: f64,
    pub aggregation: Aggregation,
    pub activation: Activation,
}

impl GatLayerParams {
    pub fn zeros(
        heads: usize,
        in_dim: usize,
        out_dim: usize,
        alpha: f64,
        aggregation: Aggregation,
        activation: Activation,
    ) -> Self {
        assert!(heads >= 1, "at least one attention head");
        Self {
            weights: vec![DenseMatrix::zeros(in_dim, out_dim); heads],
            kernels: vec![DenseMatrix::zeros(1, 2 * out_dim); heads],
            alpha,
            aggregation,
            activation,
        }
    }

    /// Glorot-uniform weights and kernels, heads drawn in order.
    pub fn init(
        rng: &mut Rng,
        heads: usize,
        in_dim: usize,
        out_dim: usize,
        alpha: f64,
        aggregation: Aggregation,
        activation: Activation,
    ) -> Self {
        let mut p = Self::zeros(heads, in_dim, out_dim, alpha, aggregation, activation);
        for w in &mut p.weights {
            *w = glorot_uniform(rng, in_dim, out_dim);
        }
        for a in &mut p.kernels {
            *a = glorot_uniform(rng, 2 * out_dim, 1).transpose();
        }
        p
    }

    pub fn heads(&self) -> usize {
        self.weights.len()
    }

    pub fn in_dim(&self) -> usize {
        self.weights[0].rows()
    }

    /// Per-head output width `F'`.
    pub fn head_dim(&self) -> usize {
        self.weights[0].cols()
    }

    pub fn output_width(&self) -> usize {
        match self.aggregation {
            Aggregation::Concat => self.heads() * self.head_dim(),
            Aggregation::Average => self.head_dim(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (f, fp) = self.weights[0].shape();
        if self.weights.iter().any(|w| w.shape() != (f, fp))
            || self.kernels.len() != self.weights.len()
            || self.kernels.iter().any(|a| a.shape() != (1, 2 * fp))
        {
            return Err(Error::DimensionMismatch(
                "inconsistent GAT head shapes".into(),
            ));
        }
        Ok(())
    }
}

/// Runtime switches shared by every attention layer of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatOptions {
    pub dropout: f64,
    pub edge_weighting: EdgeWeighting,
}

impl Default for GatOptions {
    fn default() -> Self {
        Self {
            dropout: 0.0,
            edge_weighting: EdgeWeighting::MaskOnly,
        }
    }
}

/// Unnormalized attention logit of node `j` for node `i` under one head.
pub fn attention_logit(h_i: &[f64], h_j: &[f64], params: &GatLayerParams, head: usize) -> f64 {
    let w = &params.weights[head];
    let a = params.kernels[head].row(0);
    let fp = w.cols();
    let project = |h: &[f64]| -> Vec<f64> {
        (0..fp)
            .map(|c| h.iter().enumerate().map(|(r, &x)| x * w.get(r, c)).sum())
            .collect()
    };
    let (zi, zj) = (project(h_i), project(h_j));
    let u: f64 = a[..fp].iter().zip(&zi).map(|(x, y)| x * y).sum::<f64>()
        + a[fp..].iter().zip(&zj).map(|(x, y)| x * y).sum::<f64>();
    leaky_relu(u, params.alpha)
}

/// Normalizes the logits of one neighborhood.
pub fn attention_coefficients(logits: &[f64]) -> Vec<f64> {
    softmax_row(logits)
}

#[derive(Debug, Clone)]
pub(crate) struct HeadCache {
    z: DenseMatrix,
    /// Logit argument before the LeakyReLU, per stored edge.
    pre_leaky: Vec<f64>,
    /// Attention coefficients before dropout, per stored edge.
    alpha: Vec<f64>,
    attn_mask: Option<Vec<f64>>,
}

/// Forward intermediates needed by [`gat_layer_backward`].
#[derive(Debug, Clone)]
pub struct GatCache {
    input: Features,
    input_mask: Option<Vec<f64>>,
    heads: Vec<HeadCache>,
    pre: DenseMatrix,
    output: DenseMatrix,
}

impl GatCache {
    pub fn output(&self) -> &DenseMatrix {
        &self.output
    }

    pub fn pre_activation(&self) -> &DenseMatrix {
        &self.pre
    }

    /// Attention coefficients per head, aligned with the pattern's storage.
    pub fn attention(&self, pattern: &SparseMatrix) -> AttentionRecord {
        AttentionRecord {
            offsets: pattern.offsets().to_vec(),
            neighbors: pattern.indices().to_vec(),
            coefficients: self.heads.iter().map(|h| h.alpha.clone()).collect(),
        }
    }
}

/// Per-node neighbor lists and the coefficients each head assigned to them.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionRecord {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    coefficients: Vec<Vec<f64>>,
}

impl AttentionRecord {
    pub fn nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn heads(&self) -> usize {
        self.coefficients.len()
    }

    /// `(neighbors, α)` of node `i` under `head`.
    pub fn row(&self, head: usize, i: usize) -> (&[usize], &[f64]) {
        let range = self.offsets[i]..self.offsets[i + 1];
        (
            &self.neighbors[range.clone()],
            &self.coefficients[head][range],
        )
    }
}

#[derive(Debug, Clone)]
pub struct GatForward {
    pub output: DenseMatrix,
    pub cache: GatCache,
}

pub fn gat_layer_forward(
    input: &Features,
    pattern: &SparseMatrix,
    params: &GatLayerParams,
    opts: &GatOptions,
    rng: &mut Rng,
    mode: Mode,
) -> Result<GatForward> {
    params.validate()?;
    let n = input.rows();
    if pattern.rows() != n || pattern.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "adjacency {}x{} for {n} nodes",
            pattern.rows(),
            pattern.cols()
        )));
    }
    let (dropped, input_mask) = dropout_features(input, opts.dropout, mode, rng);
    let mut heads = Vec::with_capacity(params.heads());
    let mut outs = Vec::with_capacity(params.heads());
    for k in 0..params.heads() {
        let z = dropped.project(&params.weights[k])?;
        let (out, cache) = head_forward(
            z,
            pattern,
            &params.kernels[k],
            params.alpha,
            opts,
            rng,
            mode,
        );
        outs.push(out);
        heads.push(cache);
    }
    let pre = match params.aggregation {
        Aggregation::Concat => DenseMatrix::hconcat(&outs)?,
        Aggregation::Average => {
            let mut sum = DenseMatrix::zeros(n, params.head_dim());
            for o in &outs {
                sum.add_assign(o)?;
            }
            sum.scale(1.0 / params.heads() as f64);
            sum
        }
    };
    let output = params.activation.apply(&pre);
    Ok(GatForward {
        output: output.clone(),
        cache: GatCache {
            input: dropped,
            input_mask,
            heads,
            pre,
            output,
        },
    })
}

fn head_forward(
    z: DenseMatrix,
    pattern: &SparseMatrix,
    kernel: &DenseMatrix,
    alpha: f64,
    opts: &GatOptions,
    rng: &mut Rng,
    mode: Mode,
) -> (DenseMatrix, HeadCache) {
    let n = z.rows();
    let fp = z.cols();
    let a = kernel.row(0);
    let src: Vec<f64> = (0..n).map(|i| dot(&a[..fp], z.row(i))).collect();
    let dst: Vec<f64> = (0..n).map(|j| dot(&a[fp..], z.row(j))).collect();

    let nnz = pattern.nnz();
    let mut pre_leaky = vec![0.0; nnz];
    let mut coeff = vec![0.0; nnz];
    for (i, &src_i) in src.iter().enumerate() {
        let range = pattern.row_range(i);
        for p in range.clone() {
            let j = pattern.indices()[p];
            let u = src_i + dst[j];
            pre_leaky[p] = u;
            let mut e = leaky_relu(u, alpha);
            if opts.edge_weighting == EdgeWeighting::Additive {
                e += pattern.values()[p];
            }
            coeff[p] = e;
        }
        let row = &mut coeff[range];
        let normalized = attention_coefficients(row);
        row.copy_from_slice(&normalized);
    }

    let attn_mask = draw_mask(nnz, opts.dropout, mode, rng);
    let mut out = DenseMatrix::zeros(n, fp);
    for i in 0..n {
        let out_row = out.row_mut(i);
        for p in pattern.row_range(i) {
            let beta = match &attn_mask {
                Some(m) => coeff[p] * m[p],
                None => coeff[p],
            };
            for (o, &v) in out_row.iter_mut().zip(z.row(pattern.indices()[p])) {
                *o += beta * v;
            }
        }
    }
    (
        out,
        HeadCache {
            z,
            pre_leaky,
            alpha: coeff,
            attn_mask,
        },
    )
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct GatGrads {
    pub weights: Vec<DenseMatrix>,
    pub kernels: Vec<DenseMatrix>,
    /// Gradient with respect to the (undropped) layer input; `None` for
    /// identity-style inputs, which carry no parameters.
    pub input: Option<DenseMatrix>,
}

/// Backward pass from the gradient of the layer output.
pub fn gat_layer_backward(
    params: &GatLayerParams,
    pattern: &SparseMatrix,
    cache: Option<&GatCache>,
    d_output: &DenseMatrix,
) -> Result<GatGrads> {
    let cache = cache.ok_or(Error::MissingCache)?;
    let d_pre = params
        .activation
        .backward(&cache.pre, &cache.output, d_output);
    gat_layer_backward_pre(params, pattern, Some(cache), &d_pre)
}

/// Backward pass from the gradient of the aggregated pre-activation.
pub fn gat_layer_backward_pre(
    params: &GatLayerParams,
    pattern: &SparseMatrix,
    cache: Option<&GatCache>,
    d_pre: &DenseMatrix,
) -> Result<GatGrads> {
    let cache = cache.ok_or(Error::MissingCache)?;
    if d_pre.shape() != cache.pre.shape() {
        return Err(Error::DimensionMismatch(format!(
            "upstream gradient {:?} for output {:?}",
            d_pre.shape(),
            cache.pre.shape()
        )));
    }
    let k_heads = params.heads();
    let fp = params.head_dim();
    let mut grads = GatGrads {
        weights: Vec::with_capacity(k_heads),
        kernels: Vec::with_capacity(k_heads),
        input: None,
    };
    let want_input = matches!(cache.input, Features::Dense(_));
    let mut d_input = want_input.then(|| DenseMatrix::zeros(cache.input.rows(), params.in_dim()));

    for (k, head) in cache.heads.iter().enumerate() {
        let d_out = match params.aggregation {
            Aggregation::Concat => d_pre.column_block(k * fp, fp),
            Aggregation::Average => {
                let mut g = d_pre.clone();
                g.scale(1.0 / k_heads as f64);
                g
            }
        };
        let (d_z, d_kernel) =
            head_backward(head, pattern, &params.kernels[k], params.alpha, &d_out);
        grads.weights.push(cache.input.project_transpose(&d_z)?);
        grads.kernels.push(d_kernel);
        if let Some(acc) = d_input.as_mut() {
            acc.add_assign(&d_z.matmul_transpose(&params.weights[k])?)?;
        }
    }
    if let Some(mut d) = d_input {
        if let Some(mask) = &cache.input_mask {
            for (v, m) in d.as_mut_slice().iter_mut().zip(mask) {
                *v *= m;
            }
        }
        grads.input = Some(d);
    }
    Ok(grads)
}

fn head_backward(
    head: &HeadCache,
    pattern: &SparseMatrix,
    kernel: &DenseMatrix,
    alpha: f64,
    d_out: &DenseMatrix,
) -> (DenseMatrix, DenseMatrix) {
    let z = &head.z;
    let (n, fp) = z.shape();
    let a = kernel.row(0);
    let mut d_z = DenseMatrix::zeros(n, fp);
    let mut d_src = vec![0.0; n];
    let mut d_dst = vec![0.0; n];
    let mut d_alpha = Vec::new();

    for (i, d_src_i) in d_src.iter_mut().enumerate() {
        let range = pattern.row_range(i);
        let g_i = d_out.row(i);
        d_alpha.clear();
        for p in range.clone() {
            let j = pattern.indices()[p];
            let scale = head.attn_mask.as_ref().map_or(1.0, |m| m[p]);
            let beta = head.alpha[p] * scale;
            // out_i = Σ β_ij z_j
            d_alpha.push(dot(g_i, z.row(j)) * scale);
            for (dz, &g) in d_z.row_mut(j).iter_mut().zip(g_i) {
                *dz += beta * g;
            }
        }
        let alphas = &head.alpha[range.clone()];
        let inner: f64 = alphas.iter().zip(&d_alpha).map(|(a, d)| a * d).sum();
        for (q, p) in range.enumerate() {
            let d_logit = alphas[q] * (d_alpha[q] - inner);
            let d_u = d_logit * leaky_relu_grad(head.pre_leaky[p], alpha);
            *d_src_i += d_u;
            d_dst[pattern.indices()[p]] += d_u;
        }
    }

    let mut d_kernel = DenseMatrix::zeros(1, 2 * fp);
    for i in 0..n {
        let zi = z.row(i);
        let dk = d_kernel.row_mut(0);
        for c in 0..fp {
            dk[c] += d_src[i] * zi[c];
            dk[fp + c] += d_dst[i] * zi[c];
        }
        for (c, dz) in d_z.row_mut(i).iter_mut().enumerate() {
            *dz += d_src[i] * a[c] + d_dst[i] * a[fp + c];
        }
    }
    (d_z, d_kernel)
}
