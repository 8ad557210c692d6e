use super::features::Features;
use crate::numcore::{DenseMatrix, Rng};

/// Whether stochastic regularization is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Inverted dropout: in train mode each entry is zeroed with probability
/// `rate` and survivors are scaled by `1 / (1 - rate)`. Eval mode and
/// `rate == 0` are the identity.
pub fn dropout(h: &DenseMatrix, rate: f64, rng: &mut Rng, mode: Mode) -> DenseMatrix {
    match draw_mask(h.len(), rate, mode, rng) {
        Some(mask) => apply_mask(h, &mask),
        None => h.clone(),
    }
}

/// Keep/scale factors for `len` entries, or `None` when dropout is a no-op.
pub(crate) fn draw_mask(len: usize, rate: f64, mode: Mode, rng: &mut Rng) -> Option<Vec<f64>> {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
    if mode == Mode::Eval || rate == 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    Some(
        (0..len)
            .map(|_| if rng.uniform() < rate { 0.0 } else { keep })
            .collect(),
    )
}

pub(crate) fn apply_mask(h: &DenseMatrix, mask: &[f64]) -> DenseMatrix {
    let mut out = h.clone();
    for (v, m) in out.as_mut_slice().iter_mut().zip(mask) {
        *v *= m;
    }
    out
}

/// Dropout over a layer input; returns the dropped input and the mask
/// needed to route gradients back through it.
pub(crate) fn dropout_features(
    x: &Features,
    rate: f64,
    mode: Mode,
    rng: &mut Rng,
) -> (Features, Option<Vec<f64>>) {
    match x {
        Features::Identity(n) => match draw_mask(*n, rate, mode, rng) {
            Some(mask) => (Features::Diagonal(mask.clone()), Some(mask)),
            None => (x.clone(), None),
        },
        Features::Diagonal(d) => match draw_mask(d.len(), rate, mode, rng) {
            Some(mask) => (
                Features::Diagonal(d.iter().zip(&mask).map(|(a, b)| a * b).collect()),
                Some(mask),
            ),
            None => (x.clone(), None),
        },
        Features::Dense(m) => match draw_mask(m.len(), rate, mode, rng) {
            Some(mask) => (Features::Dense(apply_mask(m, &mask)), Some(mask)),
            None => (x.clone(), None),
        },
    }
}
