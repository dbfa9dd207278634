//! Shallow neural network: one rectified hidden layer, softmax output,
//! mean cross-entropy loss, full-batch gradient descent.

use rand_distr::{Distribution, Normal};

use super::{argmax, SparseRows};
use crate::dataset::FeatureMatrix;
use crate::seed::RandomSeed;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub hidden: usize,
    pub step: f64,
    pub epochs: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: 32,
            step: 0.5,
            epochs: 30,
        }
    }
}

/// Network weights. `w1` is stored input-major (`w1[d * hidden + h]`) so a
/// sparse input row touches contiguous hidden-unit blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl MlpModel {
    /// He-normal weights, zero biases.
    pub fn init(inputs: usize, hidden: usize, classes: usize, seed: RandomSeed) -> Self {
        let mut rng = seed.rng();
        let n1 = Normal::new(0.0, (2.0 / inputs as f64).sqrt()).expect("finite std");
        let n2 = Normal::new(0.0, (2.0 / hidden as f64).sqrt()).expect("finite std");
        MlpModel {
            inputs,
            hidden,
            classes,
            w1: (0..inputs * hidden).map(|_| n1.sample(&mut rng)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden * classes).map(|_| n2.sample(&mut rng)).collect(),
            b2: vec![0.0; classes],
        }
    }

    fn zeros_like(&self) -> Self {
        MlpModel {
            inputs: self.inputs,
            hidden: self.hidden,
            classes: self.classes,
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.b2.len()],
        }
    }

    /// Flattened views, in the order `w1, b1, w2, b2`.
    pub fn parameters_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn parameters(&self) -> [&Vec<f64>; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    fn hidden_pre(&self, idx: &[u32], vals: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b1);
        let h = self.hidden;
        for (&d, &x) in idx.iter().zip(vals) {
            let w = &self.w1[d as usize * h..(d as usize + 1) * h];
            for (o, &wi) in out.iter_mut().zip(w) {
                *o += x * wi;
            }
        }
    }

    fn logits(&self, act: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b2);
        let c = self.classes;
        for (j, &a) in act.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(&self.w2[j * c..(j + 1) * c]) {
                *o += a * w;
            }
        }
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Vec<usize> {
        let sparse = SparseRows::from_dense(features);
        let mut z = vec![0.0; self.hidden];
        let mut s = vec![0.0; self.classes];
        (0..sparse.rows())
            .map(|i| {
                let (idx, vals) = sparse.row(i);
                self.hidden_pre(idx, vals, &mut z);
                z.iter_mut().for_each(|v| *v = v.max(0.0));
                self.logits(&z, &mut s);
                argmax(&s)
            })
            .collect()
    }
}

/// Mean cross-entropy over `rows` and its gradient with respect to every
/// parameter.
pub fn loss_and_gradient(model: &MlpModel, rows: &SparseRows, labels: &[usize]) -> (f64, MlpModel) {
    let n = rows.rows();
    let (h, c) = (model.hidden, model.classes);
    let mut grad = model.zeros_like();
    let mut z = vec![0.0; h];
    let mut a = vec![0.0; h];
    let mut p = vec![0.0; c];
    let mut dz = vec![0.0; h];
    let mut loss = 0.0;
    let inv_n = 1.0 / n as f64;

    for (i, &y) in labels.iter().enumerate().take(n) {
        let (idx, vals) = rows.row(i);
        model.hidden_pre(idx, vals, &mut z);
        for (ai, &zi) in a.iter_mut().zip(&z) {
            *ai = zi.max(0.0);
        }
        model.logits(&a, &mut p);
        let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in p.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        loss -= ((p[y] / total).ln()) * inv_n;
        // p becomes dL/dlogits for this row
        for (k, v) in p.iter_mut().enumerate() {
            *v = (*v / total - if k == y { 1.0 } else { 0.0 }) * inv_n;
        }
        for (gb, &g) in grad.b2.iter_mut().zip(&p) {
            *gb += g;
        }
        for j in 0..h {
            let w2_row = &model.w2[j * c..(j + 1) * c];
            if a[j] != 0.0 {
                let g2 = &mut grad.w2[j * c..(j + 1) * c];
                for (gw, &g) in g2.iter_mut().zip(&p) {
                    *gw += a[j] * g;
                }
            }
            dz[j] = if z[j] > 0.0 {
                w2_row.iter().zip(&p).map(|(w, g)| w * g).sum()
            } else {
                0.0
            };
        }
        for (gb, &d) in grad.b1.iter_mut().zip(&dz) {
            *gb += d;
        }
        for (&d, &x) in idx.iter().zip(vals) {
            let g1 = &mut grad.w1[d as usize * h..(d as usize + 1) * h];
            for (gw, &dzj) in g1.iter_mut().zip(&dz) {
                *gw += x * dzj;
            }
        }
    }
    (loss, grad)
}

pub fn train(
    config: &MlpConfig,
    train: &FeatureMatrix,
    labels: &[usize],
    num_classes: usize,
    seed: RandomSeed,
) -> MlpModel {
    let rows = SparseRows::from_dense(train);
    let mut model = MlpModel::init(train.cols(), config.hidden, num_classes, seed);
    for _ in 0..config.epochs {
        let (_, grad) = loss_and_gradient(&model, &rows, labels);
        for (param, g) in model.parameters_mut().into_iter().zip(grad.parameters()) {
            for (w, &dw) in param.iter_mut().zip(g.iter()) {
                *w -= config.step * dw;
            }
        }
    }
    model
}
