//! Nearest-centroid classifier. Fully deterministic; used as the fitness
//! model in exhaustive oracle comparisons.

use crate::dataset::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    /// One mean vector per class; `None` for classes absent from training.
    pub centroids: Vec<Option<Vec<f64>>>,
}

impl CentroidModel {
    /// Index of the nearest present centroid, ties to the lower class.
    pub fn classify(&self, row: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (class, centroid) in self.centroids.iter().enumerate() {
            let Some(c) = centroid else { continue };
            let d: f64 = c.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.1 {
                best = (class, d);
            }
        }
        best.0
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Vec<usize> {
        features.iter_rows().map(|row| self.classify(row)).collect()
    }
}

pub fn train(features: &FeatureMatrix, labels: &[usize], num_classes: usize) -> CentroidModel {
    let dims = features.cols();
    let mut sums = vec![vec![0.0; dims]; num_classes];
    let mut counts = vec![0usize; num_classes];
    for (row, &label) in features.iter_rows().zip(labels) {
        counts[label] += 1;
        for (s, &v) in sums[label].iter_mut().zip(row) {
            *s += v;
        }
    }
    let centroids = sums
        .into_iter()
        .zip(counts)
        .map(|(sum, n)| (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect()))
        .collect();
    CentroidModel { centroids }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_at_centroid_gets_that_class() {
        let m = FeatureMatrix::new(4, 2, vec![0.0, 0.0, 0.2, 0.0, 0.8, 1.0, 1.0, 1.0]).unwrap();
        let model = train(&m, &[0, 0, 2, 2], 3);
        assert!(model.centroids[1].is_none());
        assert_eq!(model.classify(&[0.1, 0.0]), 0);
        assert_eq!(model.classify(&[0.9, 1.0]), 2);
    }

    #[test]
    fn equidistant_point_goes_to_lower_class() {
        let m = FeatureMatrix::new(2, 1, vec![0.0, 1.0]).unwrap();
        let model = train(&m, &[1, 0], 2);
        assert_eq!(model.classify(&[0.5]), 0);
    }
}
