//! Classifier-in-the-loop fitness: train on a candidate labeling of the
//! training rows, score on the ground-truth validation rows.

use crate::classifiers::{fit_with, validation_accuracy, ClassifierError, ClassifierKind, ClassifierSettings};
use crate::dataset::ExperimentSplit;
use crate::labelcodes::LabelingCode;
use crate::seed::RandomSeed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitnessError {
    #[error("fitness must lie in [0, 1], got {0}")]
    OutOfRange(f64),
    #[error("code has {code} labels but the training set has {rows} rows")]
    CodeLength { code: usize, rows: usize },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Validation accuracy of a model trained on a candidate code.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct FitnessValue(f64);

impl FitnessValue {
    pub fn new(accuracy: f64) -> Result<Self, FitnessError> {
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(FitnessError::OutOfRange(accuracy));
        }
        Ok(FitnessValue(accuracy))
    }

    pub fn accuracy(self) -> f64 {
        self.0
    }
}

/// Annealing energy; lower is better.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Energy(pub f64);

pub fn to_energy(f: FitnessValue) -> Energy {
    Energy(-f.0)
}

/// Anything that can score a labeling code. The seed must fully determine
/// the result.
pub trait Fitness: Sync {
    fn evaluate(&self, code: &LabelingCode, seed: RandomSeed) -> Result<FitnessValue, FitnessError>;
}

/// The standard fitness: a fresh classifier of `kind` per evaluation.
#[derive(Debug, Clone)]
pub struct ClassifierFitness<'a> {
    pub split: &'a ExperimentSplit,
    pub kind: ClassifierKind,
    pub settings: ClassifierSettings,
}

impl<'a> ClassifierFitness<'a> {
    pub fn new(split: &'a ExperimentSplit, kind: ClassifierKind) -> Self {
        ClassifierFitness {
            split,
            kind,
            settings: ClassifierSettings::default(),
        }
    }

    pub fn with_settings(mut self, settings: ClassifierSettings) -> Self {
        self.settings = settings;
        self
    }
}

impl Fitness for ClassifierFitness<'_> {
    fn evaluate(&self, code: &LabelingCode, seed: RandomSeed) -> Result<FitnessValue, FitnessError> {
        let rows = self.split.train.len();
        if code.len() != rows {
            return Err(FitnessError::CodeLength {
                code: code.len(),
                rows,
            });
        }
        let model = fit_with(
            &self.settings,
            self.kind,
            &self.split.train.features,
            code,
            self.split.num_classes(),
            seed,
        )?;
        FitnessValue::new(validation_accuracy(&model, &self.split.validation)?)
    }
}

/// Train `kind` on `code` and score it on the split's validation set.
pub fn evaluate(
    code: &LabelingCode,
    split: &ExperimentSplit,
    kind: ClassifierKind,
    seed: RandomSeed,
) -> Result<FitnessValue, FitnessError> {
    ClassifierFitness::new(split, kind).evaluate(code, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthetic_split, ExperimentSplit};
    use crate::labelcodes::ProblemSpec;
    use rand::seq::SliceRandom;

    #[test]
    fn energy_negates_and_reverses_order() {
        assert_eq!(to_energy(FitnessValue::new(0.0).unwrap()).0, 0.0);
        assert_eq!(to_energy(FitnessValue::new(1.0).unwrap()).0, -1.0);
        let (hi, lo) = (FitnessValue::new(0.7).unwrap(), FitnessValue::new(0.2).unwrap());
        assert!(to_energy(hi) < to_energy(lo));
        assert!(FitnessValue::new(1.01).is_err());
        assert!(FitnessValue::new(f64::NAN).is_err());
    }

    #[test]
    fn evaluate_is_deterministic_and_checks_length() {
        let split = synthetic_split(30, 20, 3, 10, 0.2, RandomSeed(1)).unwrap();
        let code = LabelingCode::random(&ProblemSpec::new(30, 3).unwrap(), RandomSeed(2));
        for kind in [ClassifierKind::Mlp, ClassifierKind::Svm, ClassifierKind::Rf] {
            let a = evaluate(&code, &split, kind, RandomSeed(3)).unwrap();
            assert_eq!(a, evaluate(&code, &split, kind, RandomSeed(3)).unwrap());
        }
        let short = LabelingCode::new(vec![0; 29], 3).unwrap();
        assert_eq!(
            evaluate(&short, &split, ClassifierKind::Centroid, RandomSeed(0)),
            Err(FitnessError::CodeLength { code: 29, rows: 30 })
        );
    }

    #[test]
    fn true_labels_score_perfectly_on_separable_data() {
        let split = synthetic_split(20, 20, 2, 6, 0.5, RandomSeed(4)).unwrap();
        let f = evaluate(&split.train.labels, &split, ClassifierKind::Centroid, RandomSeed(0)).unwrap();
        assert_eq!(f.accuracy(), 1.0);
    }

    #[test]
    fn centroid_fitness_is_row_order_invariant() {
        let split = synthetic_split(24, 20, 3, 8, 0.2, RandomSeed(5)).unwrap();
        let spec = ProblemSpec::new(24, 3).unwrap();
        for s in 0..20 {
            let code = LabelingCode::random(&spec, RandomSeed(s));
            let mut order: Vec<usize> = (0..24).collect();
            order.shuffle(&mut RandomSeed(s + 99).rng());
            let permuted = ExperimentSplit::from_sets(split.train.subset(&order), split.validation.clone())
                .unwrap();
            let a = evaluate(&code, &split, ClassifierKind::Centroid, RandomSeed(0)).unwrap();
            let b = evaluate(&code.permuted(&order), &permuted, ClassifierKind::Centroid, RandomSeed(0))
                .unwrap();
            assert_eq!(a, b);
        }
    }
}
