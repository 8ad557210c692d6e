use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{Architecture, EdgeWeighting, FeatureMode, L2Scope, ModelConfig};

/// Training hyperparameters. Defaults are the reference settings: 1000
/// epochs, learning rate 0.005, 8 hidden units per head, 8 heads, dropout
/// 0.5, LeakyReLU slope 0.2, L2 5e-4 and a 25-token window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden_units: usize,
    pub heads: usize,
    pub output_heads: usize,
    pub dropout: f64,
    pub leaky_alpha: f64,
    pub l2: f64,
    pub l2_scope: L2Scope,
    pub window_size: usize,
    pub seed: u64,
    /// Epochs without validation-loss improvement before stopping; 0
    /// disables early stopping.
    pub patience: usize,
    pub edge_weighting: EdgeWeighting,
    pub feature_mode: FeatureMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::Gat,
            epochs: 1000,
            learning_rate: 0.005,
            hidden_units: 8,
            heads: 8,
            output_heads: 1,
            dropout: 0.5,
            leaky_alpha: 0.2,
            l2: 5e-4,
            l2_scope: L2Scope::FirstLayer,
            window_size: 25,
            seed: 42,
            patience: 100,
            edge_weighting: EdgeWeighting::MaskOnly,
            feature_mode: FeatureMode::Identity,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.window_size == 0 {
            return bad("window_size must be positive");
        }
        Ok(())
    }

    pub fn model_config(&self, input_dim: usize, classes: usize) -> ModelConfig {
        ModelConfig {
            architecture: self.architecture,
            input_dim,
            hidden_units: self.hidden_units,
            heads: self.heads,
            output_heads: self.output_heads,
            classes,
            dropout: self.dropout,
            leaky_alpha: self.leaky_alpha,
            l2: self.l2,
            l2_scope: self.l2_scope,
            edge_weighting: self.edge_weighting,
            feature_mode: self.feature_mode,
        }
    }

    /// Applies `key = value` overrides using the field names of this struct.
    /// Values are parsed as JSON scalars, falling back to bare strings, so
    /// `architecture = gcn` and `architecture = "gcn"` are both accepted.
    pub fn apply_overrides<'a>(
        &mut self,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<()> {
        let mut map = match serde_json::to_value(&*self).expect("config serializes") {
            serde_json::Value::Object(m) => m,
            _ => unreachable!(),
        };
        for (key, raw) in pairs {
            if !map.contains_key(key) {
                return Err(Error::InvalidConfig(format!("unknown config key `{key}`")));
            }
            let raw = raw.trim();
            let value = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            map.insert(key.to_string(), value);
        }
        *self = serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}
