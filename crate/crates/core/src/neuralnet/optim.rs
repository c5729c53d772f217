//! Adam with global-norm gradient clipping. Word-embedding rows are updated
//! lazily: only rows present in the gradient move.

use super::tensor::Matrix;
use super::{Gradients, Model};

#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Gradients with a larger global norm are rescaled to this norm.
    pub clip_norm: f64,
    step: u64,
    moments: Vec<(Matrix, Matrix)>,
    words: (Matrix, Matrix),
    positions: (Matrix, Matrix),
}

fn zeros_pair(m: &Matrix) -> (Matrix, Matrix) {
    (m.zeros_like(), m.zeros_like())
}

impl Adam {
    pub fn new(model: &Model, learning_rate: f64, clip_norm: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm,
            step: 0,
            moments: model.params.tensors().iter().map(|(_, t)| zeros_pair(t)).collect(),
            words: zeros_pair(&model.embeddings.words),
            positions: zeros_pair(&model.embeddings.positions),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one update. Returns the gradient norm before clipping.
    pub fn step(&mut self, model: &mut Model, grads: &Gradients) -> f64 {
        let norm = grads.norm();
        let clip = if norm > self.clip_norm && norm > 0.0 {
            self.clip_norm / norm
        } else {
            1.0
        };
        self.step += 1;
        let t = self.step as i32;
        let hyper = Hyper {
            lr: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            clip,
            correction1: 1.0 - self.beta1.powi(t),
            correction2: 1.0 - self.beta2.powi(t),
        };
        let params = model.params.tensors_mut();
        for ((param, (m, v)), (_, g)) in params
            .into_iter()
            .zip(self.moments.iter_mut())
            .zip(grads.params.tensors())
        {
            hyper.update(param.data_mut(), m.data_mut(), v.data_mut(), g.data());
        }
        for (&row, g) in &grads.words {
            hyper.update(
                model.embeddings.words.row_mut(row),
                self.words.0.row_mut(row),
                self.words.1.row_mut(row),
                g,
            );
        }
        hyper.update(
            model.embeddings.positions.data_mut(),
            self.positions.0.data_mut(),
            self.positions.1.data_mut(),
            grads.positions.data(),
        );
        norm
    }
}

struct Hyper {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    clip: f64,
    correction1: f64,
    correction2: f64,
}

impl Hyper {
    fn update(&self, param: &mut [f64], m: &mut [f64], v: &mut [f64], grad: &[f64]) {
        for i in 0..param.len() {
            let g = grad[i] * self.clip;
            m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
            v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = m[i] / self.correction1;
            let v_hat = v[i] / self.correction2;
            param[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}
