use crate::layers::ModelParams;

/// Adaptive-moment optimizer with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(learning_rate: f64, parameter_count: usize) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; parameter_count],
            v: vec![0.0; parameter_count],
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let mut offset = 0;
        for (p, g) in params.tensors_mut().into_iter().zip(grads.tensors()) {
            for (x, &d) in p.as_mut_slice().iter_mut().zip(g.as_slice()) {
                let m = &mut self.m[offset];
                let v = &mut self.v[offset];
                *m = self.beta1 * *m + (1.0 - self.beta1) * d;
                *v = self.beta2 * *v + (1.0 - self.beta2) * d * d;
                *x -= self.learning_rate * (*m / c1) / ((*v / c2).sqrt() + self.epsilon);
                offset += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{Activation, GcnLayerParams};
    use crate::numcore::DenseMatrix;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let layer = |v: f64| GcnLayerParams {
            weight: DenseMatrix::from_vec(1, 2, vec![v, v]).unwrap(),
            activation: Activation::Identity,
        };
        let mut p = ModelParams::Gcn {
            first: layer(1.0),
            second: layer(1.0),
        };
        let mut g = p.clone();
        for t in g.tensors_mut() {
            t.as_mut_slice().copy_from_slice(&[3.0, -0.5]);
        }
        let mut adam = Adam::new(0.01, 4);
        adam.step(&mut p, &g);
        // Bias-corrected first step is lr · sign(g) up to epsilon.
        let flat = p.to_flat();
        assert!((flat[0] - 0.99).abs() < 1e-9);
        assert!((flat[1] - 1.01).abs() < 1e-9);
    }
}
