#![allow(dead_code)]

use std::path::PathBuf;

use labelmine::classifiers::mlp::{loss_and_gradient, MlpModel};
use labelmine::classifiers::SparseRows;
use labelmine::dataset::FeatureMatrix;
use labelmine::sa::metropolis_accept;
use labelmine::{Energy, RandomSeed};
use rand::Rng;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// MNIST directory from `LABELMINE_MNIST_DIR`, else `data/mnist` in the
/// workspace, if it holds the four IDX files.
pub fn mnist_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("LABELMINE_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/mnist"));
    labelmine::dataset::MnistFiles::locate(&dir).ok().map(|_| dir)
}

/// Largest relative error between analytic and central-difference
/// gradients over every parameter of a small random network.
pub fn mlp_gradient_error(samples: usize, features: usize, hidden: usize, classes: usize, seed: u64) -> f64 {
    let mut rng = RandomSeed(seed).rng();
    let values: Vec<f64> = (0..samples * features).map(|_| rng.random_range(0.05..1.0)).collect();
    let x = FeatureMatrix::new(samples, features, values).unwrap();
    let labels: Vec<usize> = (0..samples).map(|i| i % classes).collect();
    let rows = SparseRows::from_dense(&x);
    let mut model = MlpModel::init(features, hidden, classes, RandomSeed(seed + 1));
    for b in model.b1.iter_mut() {
        *b = rng.random_range(-0.1..0.1);
    }
    let (_, grad) = loss_and_gradient(&model, &rows, &labels);
    let analytic: Vec<f64> = grad.parameters().iter().flat_map(|p| p.iter().copied()).collect();

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for block in 0..4 {
        let len = model.parameters()[block].len();
        for j in 0..len {
            let orig = model.parameters()[block][j];
            model.parameters_mut()[block][j] = orig + h;
            let (up, _) = loss_and_gradient(&model, &rows, &labels);
            model.parameters_mut()[block][j] = orig - h;
            let (down, _) = loss_and_gradient(&model, &rows, &labels);
            model.parameters_mut()[block][j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[k];
            let denom = (a.abs() + numeric.abs()).max(1e-8);
            worst = worst.max((a - numeric).abs() / denom);
            k += 1;
        }
    }
    worst
}

/// Fraction of `trials` Metropolis decisions accepting a worse move whose
/// exponent `(E_i - E_j) / (k_b T)` equals `ratio`.
pub fn empirical_acceptance(ratio: f64, trials: usize, seed: u64) -> f64 {
    let temperature = 0.1;
    let current = Energy(-0.5);
    let candidate = Energy(-0.5 - ratio * temperature);
    let mut rng = RandomSeed(seed).rng();
    let accepted = (0..trials)
        .filter(|_| metropolis_accept(current, candidate, temperature, 1.0, &mut rng).unwrap())
        .count();
    accepted as f64 / trials as f64
}
