//! Two-layer models assembled from the attention and convolution layers.

use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::dropout::Mode;
use super::features::Features;
use super::gat::{
    gat_layer_backward, gat_layer_backward_pre, gat_layer_forward, Aggregation, AttentionRecord,
    EdgeWeighting, GatCache, GatLayerParams, GatOptions,
};
use super::gcn::{
    gcn_layer_backward, gcn_layer_backward_pre, gcn_layer_forward, GcnCache, GcnLayerParams,
};
use super::loss::{data_term, l2_penalty, loss_backward};
use crate::error::{Error, Result};
use crate::graph::{normalize, TextGraph};
use crate::numcore::{DenseMatrix, Rng, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Gat,
    Gcn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// One-hot per node; input width equals the node count.
    #[default]
    Identity,
    /// Externally supplied vectors of any width.
    Dense,
}

/// Which parameters the L2 penalty covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum L2Scope {
    /// First-layer weights and attention kernels.
    #[default]
    FirstLayer,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub input_dim: usize,
    /// Per-head hidden width (GAT) or hidden width (GCN).
    pub hidden_units: usize,
    /// Attention heads in the hidden layer.
    pub heads: usize,
    /// Attention heads in the output layer, averaged.
    pub output_heads: usize,
    pub classes: usize,
    pub dropout: f64,
    pub leaky_alpha: f64,
    pub l2: f64,
    pub l2_scope: L2Scope,
    pub edge_weighting: EdgeWeighting,
    pub feature_mode: FeatureMode,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.classes < 2 {
            return bad("at least two classes are required");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if self.heads == 0
            || self.output_heads == 0
            || self.hidden_units == 0
            || self.input_dim == 0
        {
            return bad("heads, output heads, hidden units and input width must be positive");
        }
        if !(self.l2 >= 0.0 && self.leaky_alpha.is_finite()) {
            return bad("l2 must be non-negative and the leaky slope finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Gat {
        hidden: GatLayerParams,
        output: GatLayerParams,
    },
    Gcn {
        first: GcnLayerParams,
        second: GcnLayerParams,
    },
}

impl ModelParams {
    /// Seeded initialization, tensors drawn in declared order.
    pub fn init(config: &ModelConfig, rng: &mut Rng) -> Self {
        match config.architecture {
            Architecture::Gat => {
                let hidden = GatLayerParams::init(
                    rng,
                    config.heads,
                    config.input_dim,
                    config.hidden_units,
                    config.leaky_alpha,
                    Aggregation::Concat,
                    Activation::Elu,
                );
                let output = GatLayerParams::init(
                    rng,
                    config.output_heads,
                    config.heads * config.hidden_units,
                    config.classes,
                    config.leaky_alpha,
                    Aggregation::Average,
                    Activation::Softmax,
                );
                ModelParams::Gat { hidden, output }
            }
            Architecture::Gcn => ModelParams::Gcn {
                first: GcnLayerParams::init(
                    rng,
                    config.input_dim,
                    config.hidden_units,
                    Activation::Relu,
                ),
                second: GcnLayerParams::init(
                    rng,
                    config.hidden_units,
                    config.classes,
                    Activation::Softmax,
                ),
            },
        }
    }

    /// Tensors in declared order with stable names.
    pub fn named_tensors(&self) -> Vec<(String, &DenseMatrix)> {
        match self {
            ModelParams::Gat { hidden, output } => {
                let mut out = Vec::new();
                for (layer, p) in [("hidden", hidden), ("output", output)] {
                    for (k, w) in p.weights.iter().enumerate() {
                        out.push((format!("{layer}.weight.{k}"), w));
                    }
                    for (k, a) in p.kernels.iter().enumerate() {
                        out.push((format!("{layer}.kernel.{k}"), a));
                    }
                }
                out
            }
            ModelParams::Gcn { first, second } => vec![
                ("first.weight".to_string(), &first.weight),
                ("second.weight".to_string(), &second.weight),
            ],
        }
    }

    pub fn tensors(&self) -> Vec<&DenseMatrix> {
        self.named_tensors().into_iter().map(|(_, t)| t).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut DenseMatrix> {
        match self {
            ModelParams::Gat { hidden, output } => hidden
                .weights
                .iter_mut()
                .chain(hidden.kernels.iter_mut())
                .chain(output.weights.iter_mut())
                .chain(output.kernels.iter_mut())
                .collect(),
            ModelParams::Gcn { first, second } => vec![&mut first.weight, &mut second.weight],
        }
    }

    /// Whether each tensor (declared order) falls under the L2 penalty.
    pub fn regularized_flags(&self, scope: L2Scope) -> Vec<bool> {
        let first_layer = match self {
            ModelParams::Gat { hidden, .. } => 2 * hidden.heads(),
            ModelParams::Gcn { .. } => 1,
        };
        (0..self.tensors().len())
            .map(|i| scope == L2Scope::All || i < first_layer)
            .collect()
    }

    pub fn regularized(&self, scope: L2Scope) -> Vec<&DenseMatrix> {
        self.tensors()
            .into_iter()
            .zip(self.regularized_flags(scope))
            .filter_map(|(t, r)| r.then_some(t))
            .collect()
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.as_mut_slice().iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors()
            .iter()
            .flat_map(|t| t.as_slice().iter().copied())
            .collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.parameter_count(), "flat parameter length");
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.as_mut_slice().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }
}

/// Graph-derived model inputs: neighborhood pattern, normalized adjacency
/// and node features.
#[derive(Debug, Clone)]
pub struct GraphInputs {
    pub adjacency: SparseMatrix,
    pub normalized: SparseMatrix,
    pub features: Features,
}

impl GraphInputs {
    pub fn new(adjacency: SparseMatrix, features: Features) -> Result<Self> {
        if adjacency.rows() != features.rows() || adjacency.cols() != features.rows() {
            return Err(Error::DimensionMismatch(format!(
                "adjacency {}x{} with {} feature rows",
                adjacency.rows(),
                adjacency.cols(),
                features.rows()
            )));
        }
        let normalized = normalize(&adjacency).0;
        Ok(Self {
            adjacency,
            normalized,
            features,
        })
    }

    /// One-hot identity features over all graph nodes.
    pub fn identity(graph: &TextGraph) -> Self {
        Self::new(graph.adjacency.clone(), Features::Identity(graph.n_nodes()))
            .expect("identity features match the graph")
    }

    pub fn with_features(graph: &TextGraph, features: DenseMatrix) -> Result<Self> {
        Self::new(graph.adjacency.clone(), Features::Dense(features))
    }

    pub fn nodes(&self) -> usize {
        self.features.rows()
    }
}

#[derive(Debug, Clone)]
enum ModelCache {
    Gat { hidden: GatCache, output: GatCache },
    Gcn { first: GcnCache, second: GcnCache },
}

#[derive(Debug, Clone)]
pub struct ModelForward {
    /// `N × C` class probabilities for every node.
    pub probs: DenseMatrix,
    cache: Option<ModelCache>,
}

impl ModelForward {
    pub fn without_cache(self) -> Self {
        Self {
            probs: self.probs,
            cache: None,
        }
    }

    /// Attention records of the hidden and output layers (GAT only).
    pub fn attention(&self, pattern: &SparseMatrix) -> Vec<AttentionRecord> {
        match &self.cache {
            Some(ModelCache::Gat { hidden, output }) => {
                vec![hidden.attention(pattern), output.attention(pattern)]
            }
            _ => Vec::new(),
        }
    }
}

pub fn forward(
    config: &ModelConfig,
    params: &ModelParams,
    inputs: &GraphInputs,
    rng: &mut Rng,
    mode: Mode,
) -> Result<ModelForward> {
    let opts = GatOptions {
        dropout: config.dropout,
        edge_weighting: config.edge_weighting,
    };
    match params {
        ModelParams::Gat { hidden, output } => {
            let h = gat_layer_forward(
                &inputs.features,
                &inputs.adjacency,
                hidden,
                &opts,
                rng,
                mode,
            )?;
            let o = gat_layer_forward(
                &Features::Dense(h.output),
                &inputs.adjacency,
                output,
                &opts,
                rng,
                mode,
            )?;
            Ok(ModelForward {
                probs: o.output,
                cache: Some(ModelCache::Gat {
                    hidden: h.cache,
                    output: o.cache,
                }),
            })
        }
        ModelParams::Gcn { first, second } => {
            let h = gcn_layer_forward(
                &inputs.features,
                &inputs.normalized,
                first,
                config.dropout,
                rng,
                mode,
            )?;
            let o = gcn_layer_forward(
                &Features::Dense(h.output),
                &inputs.normalized,
                second,
                config.dropout,
                rng,
                mode,
            )?;
            Ok(ModelForward {
                probs: o.output,
                cache: Some(ModelCache::Gcn {
                    first: h.cache,
                    second: o.cache,
                }),
            })
        }
    }
}

/// Masked cross-entropy plus the configured L2 penalty.
pub fn loss(
    config: &ModelConfig,
    params: &ModelParams,
    probs: &DenseMatrix,
    labels: &[usize],
    mask: &[bool],
) -> Result<f64> {
    Ok(data_term(probs, labels, mask)?
        + l2_penalty(config.l2, &params.regularized(config.l2_scope)))
}

/// Gradient of [`loss`] with respect to every parameter.
pub fn backward(
    config: &ModelConfig,
    params: &ModelParams,
    inputs: &GraphInputs,
    fwd: &ModelForward,
    labels: &[usize],
    mask: &[bool],
) -> Result<ModelParams> {
    let d_logits = loss_backward(&fwd.probs, labels, mask)?;
    let mut grads = params.zeros_like();
    match (params, fwd.cache.as_ref(), &mut grads) {
        (
            ModelParams::Gat { hidden, output },
            Some(ModelCache::Gat {
                hidden: hc,
                output: oc,
            }),
            ModelParams::Gat {
                hidden: gh,
                output: go,
            },
        ) => {
            let out_g = gat_layer_backward_pre(output, &inputs.adjacency, Some(oc), &d_logits)?;
            let d_hidden = out_g.input.ok_or(Error::MissingCache)?;
            let hid_g = gat_layer_backward(hidden, &inputs.adjacency, Some(hc), &d_hidden)?;
            go.weights = out_g.weights;
            go.kernels = out_g.kernels;
            gh.weights = hid_g.weights;
            gh.kernels = hid_g.kernels;
        }
        (
            ModelParams::Gcn { first, second },
            Some(ModelCache::Gcn {
                first: fc,
                second: sc,
            }),
            ModelParams::Gcn {
                first: gf,
                second: gs,
            },
        ) => {
            let s = gcn_layer_backward_pre(second, &inputs.normalized, Some(sc), &d_logits)?;
            let d_hidden = s.input.ok_or(Error::MissingCache)?;
            let f = gcn_layer_backward(first, &inputs.normalized, Some(fc), &d_hidden)?;
            gs.weight = s.weight;
            gf.weight = f.weight;
        }
        _ => return Err(Error::MissingCache),
    }
    if config.l2 != 0.0 {
        let flags = params.regularized_flags(config.l2_scope);
        for ((g, p), reg) in grads
            .tensors_mut()
            .into_iter()
            .zip(params.tensors())
            .zip(flags)
        {
            if reg {
                g.add_scaled(p, 2.0 * config.l2)?;
            }
        }
    }
    Ok(grads)
}

/// One forward/backward pass: `(loss, gradient, forward)`.
pub fn loss_and_gradient(
    config: &ModelConfig,
    params: &ModelParams,
    inputs: &GraphInputs,
    labels: &[usize],
    mask: &[bool],
    rng: &mut Rng,
    mode: Mode,
) -> Result<(f64, ModelParams, ModelForward)> {
    let fwd = forward(config, params, inputs, rng, mode)?;
    let value = loss(config, params, &fwd.probs, labels, mask)?;
    let grads = backward(config, params, inputs, &fwd, labels, mask)?;
    Ok((value, grads, fwd))
}
