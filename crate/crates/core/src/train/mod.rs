//! Full-batch training with Adam, validation tracking and early stopping.

mod adam;
mod checkpoint;
mod config;

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use adam::Adam;
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use config::TrainConfig;

use crate::error::{Error, Result};
use crate::graph::TextGraph;
use crate::layers::{self, FeatureMode, GraphInputs, Mode, ModelParams};
use crate::numcore::{DenseMatrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<EpochRecord>,
}

impl RunLog {
    pub const CSV_HEADER: &'static str = "epoch,train_loss,val_loss,val_acc,wall_ms";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3}",
                r.epoch, r.train_loss, r.val_loss, r.val_accuracy, r.wall_ms
            );
        }
        out
    }

    pub fn mean_epoch_ms(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.wall_ms).sum::<f64>() / self.records.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub checkpoint: Checkpoint,
    pub log: RunLog,
    pub best_val_loss: f64,
    pub stopped_early: bool,
}

/// Train and validation masks over document nodes. When the graph has no
/// validation documents, a seeded 10% of the training documents is held
/// out instead.
pub fn resolve_masks(graph: &TextGraph, seed: u64) -> Result<(Vec<bool>, Vec<bool>)> {
    let mut train = graph.train_mask.clone();
    let mut val = graph.val_mask.clone();
    let n_train = train.iter().filter(|&&m| m).count();
    if n_train == 0 {
        return Err(Error::EmptyMask("train"));
    }
    if !val.iter().any(|&m| m) {
        let mut idx: Vec<usize> = (0..train.len()).filter(|&i| train[i]).collect();
        Rng::new(seed ^ 0x5641_4c5f_5350_4c54).shuffle(&mut idx);
        let take = ((n_train as f64) * 0.1).round().max(1.0) as usize;
        if take >= n_train {
            return Err(Error::EmptyMask("train"));
        }
        for &i in &idx[..take] {
            train[i] = false;
            val[i] = true;
        }
    }
    Ok((train, val))
}

pub fn accuracy(probs: &DenseMatrix, labels: &[usize], mask: &[bool]) -> f64 {
    let preds = argmax_rows(probs);
    let (mut hit, mut total) = (0usize, 0usize);
    for (i, (&l, &m)) in labels.iter().zip(mask).enumerate() {
        if m {
            total += 1;
            hit += (preds[i] == l) as usize;
        }
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

/// Row argmax; ties resolve to the lowest column.
pub fn argmax_rows(m: &DenseMatrix) -> Vec<usize> {
    (0..m.rows())
        .map(|r| {
            let row = m.row(r);
            let mut best = 0;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Trains on one-hot identity features.
pub fn train(graph: &TextGraph, config: &TrainConfig) -> Result<TrainOutput> {
    if config.feature_mode != FeatureMode::Identity {
        return Err(Error::InvalidConfig(
            "dense feature mode needs explicit features; use train_with_inputs".into(),
        ));
    }
    train_with_inputs(graph, &GraphInputs::identity(graph), config)
}

pub fn train_with_inputs(
    graph: &TextGraph,
    inputs: &GraphInputs,
    config: &TrainConfig,
) -> Result<TrainOutput> {
    let (train_mask, val_mask) = resolve_masks(graph, config.seed)?;
    fit(graph, inputs, config, &train_mask, &val_mask)
}

/// The optimization loop over explicit masks.
pub fn fit(
    graph: &TextGraph,
    inputs: &GraphInputs,
    config: &TrainConfig,
    train_mask: &[bool],
    val_mask: &[bool],
) -> Result<TrainOutput> {
    config.validate()?;
    if !train_mask.iter().any(|&m| m) {
        return Err(Error::EmptyMask("train"));
    }
    if !val_mask.iter().any(|&m| m) {
        return Err(Error::EmptyMask("validation"));
    }
    if inputs.nodes() != graph.n_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows for {} graph nodes",
            inputs.nodes(),
            graph.n_nodes()
        )));
    }
    let model = config.model_config(inputs.features.width(), graph.n_classes());
    model.validate()?;

    let mut rng = Rng::new(config.seed);
    let mut params = ModelParams::init(&model, &mut rng);
    let mut adam = Adam::new(config.learning_rate, params.parameter_count());
    let labels = &graph.labels;

    let mut log = RunLog::default();
    let mut best = (f64::INFINITY, params.clone(), 0usize);
    let mut since_best = 0usize;
    let mut stopped_early = false;
    for epoch in 1..=config.epochs {
        let start = Instant::now();
        let (train_loss, grads, _) = layers::loss_and_gradient(
            &model,
            &params,
            inputs,
            labels,
            train_mask,
            &mut rng,
            Mode::Train,
        )?;
        if !train_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        adam.step(&mut params, &grads);

        let eval = layers::forward(&model, &params, inputs, &mut rng, Mode::Eval)?;
        let val_loss = layers::loss(&model, &params, &eval.probs, labels, val_mask)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        let val_accuracy = accuracy(&eval.probs, labels, val_mask);
        log.records.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });

        if val_loss < best.0 {
            best = (val_loss, params.clone(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if config.patience > 0 && since_best >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let (best_val_loss, best_params, best_epoch) = best;
    Ok(TrainOutput {
        checkpoint: Checkpoint {
            train: config.clone(),
            model,
            rng_algorithm: Rng::ALGORITHM.to_string(),
            seed: config.seed,
            epoch: best_epoch,
            params: best_params,
        },
        log,
        best_val_loss,
        stopped_early,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc: usize,
    pub class: usize,
    pub probs: Vec<f64>,
}

/// Class probabilities of every node under a checkpoint, in eval mode.
pub fn predict_probs(checkpoint: &Checkpoint, inputs: &GraphInputs) -> Result<DenseMatrix> {
    if checkpoint.model.input_dim != inputs.features.width() {
        return Err(Error::DimensionMismatch(format!(
            "checkpoint expects input width {}, graph provides {}",
            checkpoint.model.input_dim,
            inputs.features.width()
        )));
    }
    let fwd = layers::forward(
        &checkpoint.model,
        &checkpoint.params,
        inputs,
        &mut Rng::new(checkpoint.seed),
        Mode::Eval,
    )?;
    Ok(fwd.probs)
}

/// Argmax class and probability vector per document node.
pub fn predict(checkpoint: &Checkpoint, graph: &TextGraph) -> Result<Vec<Prediction>> {
    if checkpoint.model.feature_mode != FeatureMode::Identity {
        return Err(Error::InvalidConfig(
            "dense feature checkpoint needs explicit features; use predict_with_inputs".into(),
        ));
    }
    predict_with_inputs(checkpoint, graph, &GraphInputs::identity(graph))
}

pub fn predict_with_inputs(
    checkpoint: &Checkpoint,
    graph: &TextGraph,
    inputs: &GraphInputs,
) -> Result<Vec<Prediction>> {
    if checkpoint.model.classes != graph.n_classes() {
        return Err(Error::DimensionMismatch(format!(
            "checkpoint has {} classes, graph has {}",
            checkpoint.model.classes,
            graph.n_classes()
        )));
    }
    let probs = predict_probs(checkpoint, inputs)?;
    let classes = argmax_rows(&probs);
    Ok((0..graph.n_docs)
        .map(|d| Prediction {
            doc: d,
            class: classes[d],
            probs: probs.row(d).to_vec(),
        })
        .collect())
}
