//! Interchangeable classifiers trained on candidate labels.
//!
//! Every model is fitted from scratch per call, with all randomness drawn
//! from the supplied seed, so concurrent fits are reproducible.

pub mod centroid;
pub mod forest;
pub mod mlp;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use crate::dataset::{FeatureMatrix, LabeledSet};
use crate::labelcodes::{label_accuracy, LabelingCode};
use crate::seed::RandomSeed;

pub use centroid::CentroidModel;
pub use forest::{ForestConfig, ForestModel, MaxFeatures};
pub use mlp::{MlpConfig, MlpModel};
pub use svm::{SvmConfig, SvmModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("cannot fit on an empty training set")]
    EmptyTrainingSet,
    #[error("{rows} training rows but {labels} labels")]
    LabelCountMismatch { rows: usize, labels: usize },
    #[error("feature width mismatch: model expects {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("label {label} is outside [0, {num_classes})")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("unknown classifier {0:?} (expected nn, svm, rf or centroid)")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    Mlp,
    Svm,
    Rf,
    /// Deterministic nearest-centroid model used by oracle tests.
    Centroid,
}

impl ClassifierKind {
    /// The three classifiers that take part in experiment grids.
    pub const EXPERIMENT: [ClassifierKind; 3] =
        [ClassifierKind::Mlp, ClassifierKind::Svm, ClassifierKind::Rf];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Mlp => "nn",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Centroid => "centroid",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Mlp => "NN",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Rf => "RF",
            ClassifierKind::Centroid => "CENTROID",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nn" | "mlp" => Ok(ClassifierKind::Mlp),
            "svm" => Ok(ClassifierKind::Svm),
            "rf" => Ok(ClassifierKind::Rf),
            "centroid" => Ok(ClassifierKind::Centroid),
            _ => Err(ClassifierError::UnknownKind(s.to_string())),
        }
    }
}

/// Hyperparameters for every classifier kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassifierSettings {
    pub mlp: MlpConfig,
    pub svm: SvmConfig,
    pub forest: ForestConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Mlp(MlpModel),
    Svm(SvmModel),
    Forest(ForestModel),
    Centroid(CentroidModel),
}

/// An immutable fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    kind: ClassifierKind,
    num_classes: usize,
    width: usize,
    params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// Nonzero entries of each row. MNIST digits are mostly background, so the
/// linear models work on this view instead of the dense rows.
#[derive(Debug, Clone)]
pub struct SparseRows {
    offsets: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRows {
    pub fn from_dense(features: &FeatureMatrix) -> Self {
        let mut offsets = Vec::with_capacity(features.rows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for row in features.iter_rows() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    indices.push(j as u32);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        SparseRows {
            offsets,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let range = self.offsets[i]..self.offsets[i + 1];
        (&self.indices[range.clone()], &self.values[range])
    }
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn check_training(
    train: &FeatureMatrix,
    labels: &LabelingCode,
    num_classes: usize,
) -> Result<(), ClassifierError> {
    if num_classes < 2 {
        return Err(ClassifierError::TooFewClasses(num_classes));
    }
    if train.rows() == 0 {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if train.rows() != labels.len() {
        return Err(ClassifierError::LabelCountMismatch {
            rows: train.rows(),
            labels: labels.len(),
        });
    }
    if let Some(&label) = labels.labels().iter().find(|&&l| l >= num_classes) {
        return Err(ClassifierError::LabelOutOfRange { label, num_classes });
    }
    Ok(())
}

/// Fit `kind` with default hyperparameters.
pub fn fit(
    kind: ClassifierKind,
    train: &FeatureMatrix,
    labels: &LabelingCode,
    num_classes: usize,
    seed: RandomSeed,
) -> Result<TrainedModel, ClassifierError> {
    fit_with(&ClassifierSettings::default(), kind, train, labels, num_classes, seed)
}

pub fn fit_with(
    settings: &ClassifierSettings,
    kind: ClassifierKind,
    train: &FeatureMatrix,
    labels: &LabelingCode,
    num_classes: usize,
    seed: RandomSeed,
) -> Result<TrainedModel, ClassifierError> {
    check_training(train, labels, num_classes)?;
    let y = labels.labels();
    let params = match kind {
        ClassifierKind::Mlp => ModelParams::Mlp(mlp::train(&settings.mlp, train, y, num_classes, seed)),
        ClassifierKind::Svm => ModelParams::Svm(svm::train(&settings.svm, train, y, num_classes, seed)),
        ClassifierKind::Rf => {
            ModelParams::Forest(forest::train(&settings.forest, train, y, num_classes, seed))
        }
        ClassifierKind::Centroid => ModelParams::Centroid(centroid::train(train, y, num_classes)),
    };
    Ok(TrainedModel {
        kind,
        num_classes,
        width: train.cols(),
        params,
    })
}

/// One class index per row.
pub fn predict(model: &TrainedModel, features: &FeatureMatrix) -> Result<LabelingCode, ClassifierError> {
    if features.cols() != model.width {
        return Err(ClassifierError::WidthMismatch {
            expected: model.width,
            got: features.cols(),
        });
    }
    let labels = match &model.params {
        ModelParams::Mlp(m) => m.predict(features),
        ModelParams::Svm(m) => m.predict(features),
        ModelParams::Forest(m) => m.predict(features),
        ModelParams::Centroid(m) => m.predict(features),
    };
    Ok(LabelingCode::new(labels, model.num_classes).expect("predictions stay in [0, C)"))
}

pub fn validation_accuracy(model: &TrainedModel, val: &LabeledSet) -> Result<f64, ClassifierError> {
    let predicted = predict(model, &val.features)?;
    Ok(label_accuracy(&predicted, &val.labels).expect("predict returns one label per row"))
}
