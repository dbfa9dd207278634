//! Linear one-vs-rest SVM trained by stochastic subgradient descent on the
//! L2-regularized hinge loss.
//!
//! Identical rows (same features and label) are merged into one weighted
//! sample before training, so the update sequence depends on the empirical
//! distribution of the data rather than on how many copies of a row it holds.

use std::collections::HashMap;

use rand::seq::SliceRandom;

use super::{argmax, SparseRows};
use crate::dataset::FeatureMatrix;
use crate::seed::RandomSeed;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub epochs: usize,
    /// Initial step; step `t` is `step / (1 + step * l2 * t)`.
    pub step: f64,
    pub l2: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            epochs: 20,
            step: 0.1,
            l2: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub inputs: usize,
    pub classes: usize,
    /// Class-major weights, `weights[c * inputs + d]`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl SvmModel {
    pub fn decision_scores(&self, row: &[f64]) -> Vec<f64> {
        (0..self.classes)
            .map(|c| {
                let w = &self.weights[c * self.inputs..(c + 1) * self.inputs];
                self.bias[c] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Vec<usize> {
        features
            .iter_rows()
            .map(|row| argmax(&self.decision_scores(row)))
            .collect()
    }
}

/// Unique (row, label) pairs in first-seen order, with multiplicities.
fn merge_duplicates(train: &FeatureMatrix, labels: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let mut seen: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
    let mut representatives = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for (i, row) in train.iter_rows().enumerate() {
        let key = (labels[i], row.iter().map(|v| v.to_bits()).collect());
        match seen.get(&key) {
            Some(&slot) => counts[slot] += 1.0,
            None => {
                seen.insert(key, representatives.len());
                representatives.push(i);
                counts.push(1.0);
            }
        }
    }
    let mean = train.rows() as f64 / representatives.len() as f64;
    let weights = counts.into_iter().map(|c| c / mean).collect();
    (representatives, weights)
}

pub fn train(
    config: &SvmConfig,
    train: &FeatureMatrix,
    labels: &[usize],
    num_classes: usize,
    seed: RandomSeed,
) -> SvmModel {
    let dims = train.cols();
    let (reps, sample_weight) = merge_duplicates(train, labels);
    let rows = SparseRows::from_dense(&train.select_rows(&reps));
    let rep_labels: Vec<usize> = reps.iter().map(|&i| labels[i]).collect();

    // w_c = scale * v_c, so the shared L2 shrink is O(1) per step.
    let mut v = vec![0.0; num_classes * dims];
    let mut bias = vec![0.0; num_classes];
    let mut scale = 1.0f64;
    let mut order: Vec<usize> = (0..rows.rows()).collect();
    let mut rng = seed.rng();
    let mut t = 0usize;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = config.step / (1.0 + config.step * config.l2 * t as f64);
            t += 1;
            let (idx, vals) = rows.row(i);
            let margins: Vec<f64> = (0..num_classes)
                .map(|c| {
                    let vc = &v[c * dims..(c + 1) * dims];
                    let dot: f64 = idx.iter().zip(vals).map(|(&d, &x)| vc[d as usize] * x).sum();
                    scale * dot + bias[c]
                })
                .collect();
            scale *= 1.0 - eta * config.l2;
            let push = eta * sample_weight[i];
            for (c, &margin) in margins.iter().enumerate() {
                let y = if rep_labels[i] == c { 1.0 } else { -1.0 };
                if y * margin < 1.0 {
                    let vc = &mut v[c * dims..(c + 1) * dims];
                    let step = push * y / scale;
                    for (&d, &x) in idx.iter().zip(vals) {
                        vc[d as usize] += step * x;
                    }
                    bias[c] += push * y;
                }
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    SvmModel {
        inputs: dims,
        classes: num_classes,
        weights: v.into_iter().map(|w| w * scale).collect(),
        bias,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic_split;

    #[test]
    fn duplicates_merge_with_unit_mean_weight() {
        let m = FeatureMatrix::new(4, 2, vec![0.1, 0.2, 0.1, 0.2, 0.3, 0.4, 0.1, 0.2]).unwrap();
        let (reps, w) = merge_duplicates(&m, &[0, 0, 1, 1]);
        assert_eq!(reps, vec![0, 2, 3]);
        let mean = 4.0 / 3.0;
        assert_eq!(w, vec![2.0 / mean, 1.0 / mean, 1.0 / mean]);
    }

    #[test]
    fn duplicating_every_row_leaves_scores_unchanged() {
        let split = synthetic_split(30, 20, 3, 9, 0.3, RandomSeed(7)).unwrap();
        let n = split.train.len();
        let doubled: Vec<usize> = (0..n).chain(0..n).collect();
        let dup = split.train.subset(&doubled);
        let config = SvmConfig::default();
        let a = train(&config, &split.train.features, split.train.labels.labels(), 3, RandomSeed(1));
        let b = train(&config, &dup.features, dup.labels.labels(), 3, RandomSeed(1));
        for row in split.validation.features.iter_rows() {
            assert_eq!(a.decision_scores(row), b.decision_scores(row));
        }
        assert_eq!(a.predict(&split.validation.features), b.predict(&split.validation.features));
    }
}
