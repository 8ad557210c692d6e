//! Dense and sparse matrices, elementwise math, a seeded RNG and a
//! finite-difference gradient checker.
//!
//! Everything is `f64`. Reductions run in a fixed order (row-major, left
//! to right), so repeated runs are bit-identical.

mod dense;
mod gradcheck;
mod ops;
mod rng;
mod sparse;

pub use dense::DenseMatrix;
pub use gradcheck::{finite_diff_check, GradCheckOptions, GradCheckReport};
pub use ops::{elu, elu_grad, leaky_relu, leaky_relu_grad, relu, softmax_row, softmax_rows};
pub use rng::Rng;
pub use sparse::SparseMatrix;
