//! Label mining by search: genetic and annealing optimizers over labeling
//! codes of an unlabeled training set, scored by how well a classifier
//! trained on those labels does on a small labeled validation set.

pub mod classifiers;
pub mod dataset;
pub mod fitness;
pub mod ga;
pub mod harness;
pub mod labelcodes;
pub mod sa;
pub mod seed;

pub use classifiers::{fit, predict, validation_accuracy, ClassifierError, ClassifierKind, TrainedModel};
pub use dataset::{DatasetError, ExperimentSplit, FeatureMatrix, LabeledSet};
pub use fitness::{evaluate, Energy, Fitness, FitnessError, FitnessValue};
pub use ga::{run_ga, GaConfig, GaError, GaResult};
pub use harness::{GridConfig, HarnessError, Method, RunRecord};
pub use labelcodes::{LabelError, LabelingCode, ProblemSpec};
pub use sa::{run_sa, SaConfig, SaError, SaResult};
pub use seed::RandomSeed;
