use crate::numcore::{DenseMatrix, Rng};

/// Uniform in `±sqrt(6 / (fan_in + fan_out))`, drawn row-major.
pub fn glorot_uniform(rng: &mut Rng, fan_in: usize, fan_out: usize) -> DenseMatrix {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    DenseMatrix::from_fn(fan_in, fan_out, |_, _| rng.uniform_range(-limit, limit))
}
