//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use labelmine::dataset::{sample_split, synthetic_split, ExperimentSplit, MnistFiles};
use labelmine::RandomSeed;

/// The 200/45 MNIST split when the IDX files are available (via
/// `LABELMINE_MNIST_DIR` or `data/mnist` in the workspace), otherwise a
/// synthetic problem of the same shape.
pub fn bench_split() -> ExperimentSplit {
    let dir = std::env::var_os("LABELMINE_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"));
    if let Ok(files) = MnistFiles::locate(&dir) {
        if let Ok(source) = files.load_train() {
            return sample_split(&source, 200, 45, RandomSeed(1)).expect("MNIST has enough rows per class");
        }
    }
    eprintln!("MNIST not found, benchmarking on synthetic data");
    synthetic_split(200, 45, 10, 784, 0.5, RandomSeed(1)).expect("valid synthetic shape")
}
