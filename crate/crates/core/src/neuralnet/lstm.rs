//! Single-layer LSTM with explicit backpropagation through time.
//!
//! Gate layout in the stacked pre-activation `z = W x + U h + b` is
//! input, forget, candidate, output (`H` rows each).

use rand::Rng;

use super::tensor::{sigmoid, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `4H × D`
    pub w: Matrix,
    /// `4H × H`
    pub u: Matrix,
    /// `4H × 1`
    pub b: Matrix,
}

impl LstmParams {
    pub fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut b = Matrix::zeros(4 * hidden, 1);
        // Forget-gate bias starts at 1.
        b.data_mut()[hidden..2 * hidden].iter_mut().for_each(|v| *v = 1.0);
        LstmParams {
            w: Matrix::uniform(4 * hidden, input, bound, rng),
            u: Matrix::uniform(4 * hidden, hidden, bound, rng),
            b,
        }
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams {
            w: self.w.zeros_like(),
            u: self.u.zeros_like(),
            b: self.b.zeros_like(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.cols()
    }

    pub fn input(&self) -> usize {
        self.w.cols()
    }
}

struct Step {
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Post-activation gates `[i, f, g, o]`, length `4H`.
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Forward pass record for one direction.
pub struct LstmTrace {
    reverse: bool,
    /// Steps in processing order.
    steps: Vec<Step>,
    /// Hidden state per input position (original order).
    pub hidden: Vec<Vec<f64>>,
}

fn order(len: usize, reverse: bool) -> Box<dyn Iterator<Item = usize>> {
    if reverse {
        Box::new((0..len).rev())
    } else {
        Box::new(0..len)
    }
}

pub fn forward(p: &LstmParams, inputs: &[Vec<f64>], reverse: bool) -> LstmTrace {
    let h_dim = p.hidden();
    let mut h = vec![0.0; h_dim];
    let mut c = vec![0.0; h_dim];
    let mut steps = Vec::with_capacity(inputs.len());
    let mut hidden = vec![Vec::new(); inputs.len()];
    for t in order(inputs.len(), reverse) {
        let mut z = p.b.data().to_vec();
        p.w.matvec_acc(&inputs[t], &mut z);
        p.u.matvec_acc(&h, &mut z);
        let mut gates = z;
        for (k, v) in gates.iter_mut().enumerate() {
            *v = if (2 * h_dim..3 * h_dim).contains(&k) { v.tanh() } else { sigmoid(*v) };
        }
        let (i, rest) = gates.split_at(h_dim);
        let (f, rest) = rest.split_at(h_dim);
        let (g, o) = rest.split_at(h_dim);
        let c_new: Vec<f64> = (0..h_dim).map(|k| f[k] * c[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c_new.iter().map(|v| v.tanh()).collect();
        let h_new: Vec<f64> = (0..h_dim).map(|k| o[k] * tanh_c[k]).collect();
        steps.push(Step {
            h_prev: std::mem::replace(&mut h, h_new.clone()),
            c_prev: std::mem::replace(&mut c, c_new),
            gates,
            tanh_c,
        });
        hidden[t] = h_new;
    }
    LstmTrace { reverse, steps, hidden }
}

/// Backpropagates `d_hidden` (gradient w.r.t. each position's hidden state)
/// through the trace. Parameter gradients accumulate into `grad`; input
/// gradients accumulate into `d_inputs`.
pub fn backward(
    p: &LstmParams,
    trace: &LstmTrace,
    inputs: &[Vec<f64>],
    d_hidden: &[Vec<f64>],
    grad: &mut LstmParams,
    d_inputs: &mut [Vec<f64>],
) {
    let h_dim = p.hidden();
    let len = inputs.len();
    let positions: Vec<usize> = order(len, trace.reverse).collect();
    let mut dh_next = vec![0.0; h_dim];
    let mut dc_next = vec![0.0; h_dim];
    let mut dz = vec![0.0; 4 * h_dim];
    for (k, step) in trace.steps.iter().enumerate().rev() {
        let t = positions[k];
        let gates = &step.gates;
        for j in 0..h_dim {
            let (i, f, g, o) = (gates[j], gates[h_dim + j], gates[2 * h_dim + j], gates[3 * h_dim + j]);
            let dh = d_hidden[t][j] + dh_next[j];
            let tc = step.tanh_c[j];
            let dc = dh * o * (1.0 - tc * tc) + dc_next[j];
            dz[j] = dc * g * i * (1.0 - i);
            dz[h_dim + j] = dc * step.c_prev[j] * f * (1.0 - f);
            dz[2 * h_dim + j] = dc * i * (1.0 - g * g);
            dz[3 * h_dim + j] = dh * tc * o * (1.0 - o);
            dc_next[j] = dc * f;
        }
        grad.w.add_outer(&dz, &inputs[t]);
        grad.u.add_outer(&dz, &step.h_prev);
        for (b, d) in grad.b.data_mut().iter_mut().zip(&dz) {
            *b += d;
        }
        p.w.t_matvec_acc(&dz, &mut d_inputs[t]);
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        p.u.t_matvec_acc(&dz, &mut dh_next);
    }
}
