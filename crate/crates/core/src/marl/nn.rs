//! Fully connected tanh networks with hand-written reverse mode.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

/// Layer widths `sizes[0] -> ... -> sizes[n]`; tanh on hidden layers and,
/// when `tanh_output`, on the output. Parameters are stored per layer as a
/// row-major weight matrix followed by the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub tanh_output: bool,
    pub params: Vec<f64>,
}

/// Post-activation values of every layer, input first.
pub struct Trace {
    layers: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.layers.last().expect("at least the input")
    }
}

impl Mlp {
    pub fn new(sizes: &[usize], tanh_output: bool, rng: &mut Rng) -> Mlp {
        let mut params = Vec::new();
        let n = sizes.len() - 1;
        for l in 0..n {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = if l + 1 == n { 3e-3 } else { 1.0 / libm::sqrt(fan_in as f64) };
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-bound..=bound)));
            params.extend(core::iter::repeat_n(0.0, fan_out));
        }
        Mlp { sizes: sizes.to_vec(), tanh_output, params }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("nonempty")
    }

    fn offsets(&self, l: usize) -> (usize, usize) {
        let mut off = 0;
        for k in 0..l {
            off += self.sizes[k] * self.sizes[k + 1] + self.sizes[k + 1];
        }
        (off, off + self.sizes[l] * self.sizes[l + 1])
    }

    pub fn trace(&self, x: &[f64]) -> Trace {
        debug_assert_eq!(x.len(), self.input_dim());
        let n = self.sizes.len() - 1;
        let mut layers = Vec::with_capacity(n + 1);
        layers.push(x.to_vec());
        for l in 0..n {
            let (w, b) = self.offsets(l);
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let input = &layers[l];
            let mut out = self.params[b..b + fan_out].to_vec();
            for (o, slot) in out.iter_mut().enumerate() {
                let row = &self.params[w + o * fan_in..w + (o + 1) * fan_in];
                *slot += dot(row, input);
            }
            if l + 1 < n || self.tanh_output {
                for v in &mut out {
                    *v = libm::tanh(*v);
                }
            }
            layers.push(out);
        }
        Trace { layers }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).layers.pop().expect("output layer")
    }

    /// Accumulates `d(out · g_out)/dθ` into `grads` when given and returns the
    /// gradient with respect to the input (zeros unless `need_input`).
    pub fn backward(
        &self,
        trace: &Trace,
        g_out: &[f64],
        mut grads: Option<&mut [f64]>,
        need_input: bool,
    ) -> Vec<f64> {
        let n = self.sizes.len() - 1;
        let mut g = g_out.to_vec();
        for l in (0..n).rev() {
            let (w, b) = self.offsets(l);
            let fan_in = self.sizes[l];
            if l + 1 < n || self.tanh_output {
                for (gv, y) in g.iter_mut().zip(&trace.layers[l + 1]) {
                    *gv *= 1.0 - y * y;
                }
            }
            let input = &trace.layers[l];
            let mut g_in = vec![0.0; fan_in];
            for (o, &go) in g.iter().enumerate() {
                if go == 0.0 {
                    continue;
                }
                let row = w + o * fan_in;
                if let Some(grads) = grads.as_deref_mut() {
                    grads[b + o] += go;
                    for (gp, &x) in grads[row..row + fan_in].iter_mut().zip(input) {
                        *gp += go * x;
                    }
                }
                if l > 0 || need_input {
                    for (gi, &p) in g_in.iter_mut().zip(&self.params[row..row + fan_in]) {
                        *gi += go * p;
                    }
                }
            }
            g = g_in;
        }
        g
    }

    /// `θ ← (1 - τ)·θ + τ·θ_online`.
    pub fn soft_update(&mut self, online: &Mlp, tau: f64) {
        for (t, o) in self.params.iter_mut().zip(&online.params) {
            *t = (1.0 - tau) * *t + tau * o;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// Adam-style adaptive step; `beta1 = 0` drops the momentum term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(n: usize, lr: f64, beta1: f64) -> Adam {
        Adam { lr, beta1, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; n], v: vec![0.0; n] }
    }

    /// Descends along `grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let c1 = if self.beta1 > 0.0 { 1.0 - libm::pow(self.beta1, self.t as f64) } else { 1.0 };
        let c2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (libm::sqrt(vh) + self.eps);
        }
    }
}
