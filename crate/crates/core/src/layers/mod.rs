//! Model math with explicit forward and backward passes: masked
//! multi-head graph attention, graph convolution, dropout and the masked
//! cross-entropy objective.

mod activation;
mod dropout;
mod features;
mod gat;
mod gcn;
mod init;
mod loss;
mod model;

pub use activation::Activation;
pub use dropout::{dropout, Mode};
pub use features::Features;
pub use gat::{
    attention_coefficients, attention_logit, gat_layer_backward, gat_layer_backward_pre,
    gat_layer_forward, Aggregation, AttentionRecord, EdgeWeighting, GatCache, GatForward, GatGrads,
    GatLayerParams, GatOptions,
};
pub use gcn::{
    gcn_forward, gcn_layer_backward, gcn_layer_backward_pre, gcn_layer_forward, GcnCache,
    GcnForward, GcnGrads, GcnLayerParams,
};
pub use init::glorot_uniform;
pub use loss::{data_term, l2_penalty, loss_backward, masked_cross_entropy};
pub use model::{
    backward, forward, loss, loss_and_gradient, Architecture, FeatureMode, GraphInputs, L2Scope,
    ModelConfig, ModelForward, ModelParams,
};
