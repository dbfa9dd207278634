//! Exhaustive search over every labeling of a tiny problem, and the trials
//! that check both engines against it.

use super::HarnessError;
use crate::classifiers::ClassifierKind;
use crate::dataset::{synthetic_split, ExperimentSplit};
use crate::fitness::{ClassifierFitness, Fitness, FitnessValue};
use crate::ga::{run_ga_with, GaConfig};
use crate::labelcodes::{LabelingCode, ProblemSpec};
use crate::sa::{run_sa_with, SaConfig};
use crate::seed::RandomSeed;

/// Largest search space the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_code: LabelingCode,
    pub best_fitness: FitnessValue,
    pub evaluated: usize,
}

/// Evaluate every code in lexicographic order and keep the first maximum.
pub fn brute_force_oracle(split: &ExperimentSplit, kind: ClassifierKind) -> Result<OracleResult, HarnessError> {
    let spec = ProblemSpec::new(split.train.len(), split.num_classes())?;
    let count = match spec.search_space_size() {
        Some(n) if n <= ORACLE_LIMIT => n as usize,
        Some(n) => return Err(HarnessError::OracleGuard { count: n.to_string() }),
        None => {
            return Err(HarnessError::OracleGuard {
                count: format!("10^{:.1}", spec.search_space_log10()),
            })
        }
    };
    let fitness = ClassifierFitness::new(split, kind);
    let (len, classes) = (spec.num_instances(), spec.num_classes());
    let mut digits = vec![0usize; len];
    let mut best: Option<(LabelingCode, FitnessValue)> = None;
    for i in 0..count {
        let code = LabelingCode::new(digits.clone(), classes)?;
        let f = fitness
            .evaluate(&code, RandomSeed(0))
            .map_err(|e| HarnessError::InvalidGrid(format!("oracle evaluation failed: {e}")))?;
        if best.as_ref().is_none_or(|(_, b)| f > *b) {
            best = Some((code, f));
        }
        if i + 1 < count {
            // odometer increment, last position fastest
            let mut p = len;
            loop {
                p -= 1;
                digits[p] += 1;
                if digits[p] < classes {
                    break;
                }
                digits[p] = 0;
            }
        }
    }
    let (best_code, best_fitness) = best.expect("search space is non-empty");
    Ok(OracleResult {
        best_code,
        best_fitness,
        evaluated: count,
    })
}

/// The separable L=6, C=2 synthetic problem used for oracle trials.
pub fn oracle_problem(seed: RandomSeed) -> Result<ExperimentSplit, HarnessError> {
    Ok(synthetic_split(6, 20, 2, 4, 0.5, seed)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrials {
    pub oracle: OracleResult,
    pub true_label_fitness: FitnessValue,
    pub trials: usize,
    pub ga_hits: usize,
    pub sa_hits: usize,
}

impl OracleTrials {
    /// At least 95% of trials reached the optimum.
    pub fn ga_passes(&self) -> bool {
        self.ga_hits * 100 >= self.trials * 95
    }

    pub fn sa_passes(&self) -> bool {
        self.sa_hits * 100 >= self.trials * 95
    }
}

pub fn oracle_ga_config(seed: RandomSeed) -> GaConfig {
    GaConfig::new(20, 30, true, seed)
}

pub fn oracle_sa_config(seed: RandomSeed) -> SaConfig {
    SaConfig {
        neighbor_radius: 2,
        ..SaConfig::new(40, 8, seed)
    }
}

/// Run seeded GA and SA trials with CENTROID fitness and count how many
/// reach the exhaustive optimum's fitness.
pub fn run_oracle_trials(master_seed: RandomSeed, trials: usize) -> Result<OracleTrials, HarnessError> {
    let split = oracle_problem(master_seed)?;
    let kind = ClassifierKind::Centroid;
    let oracle = brute_force_oracle(&split, kind)?;
    let fitness = ClassifierFitness::new(&split, kind);
    let true_label_fitness = fitness
        .evaluate(&split.train.labels, RandomSeed(0))
        .map_err(|e| HarnessError::InvalidGrid(e.to_string()))?;
    let spec = ProblemSpec::new(split.train.len(), split.num_classes())?;
    let (mut ga_hits, mut sa_hits) = (0, 0);
    for t in 0..trials {
        let seed = master_seed.derive(&[crate::seed::tag::RUN, t as u64]);
        let ga = run_ga_with(&oracle_ga_config(seed), &fitness, spec)?;
        ga_hits += usize::from(ga.best_fitness == oracle.best_fitness);
        let sa = run_sa_with(&oracle_sa_config(seed), &fitness, spec)?;
        sa_hits += usize::from(sa.best_fitness == oracle.best_fitness);
    }
    Ok(OracleTrials {
        oracle,
        true_label_fitness,
        trials,
        ga_hits,
        sa_hits,
    })
}
