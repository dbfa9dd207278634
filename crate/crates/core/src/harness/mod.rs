//! Experiment harness: grid runs over methods, classifiers, population or
//! neighborhood sizes and iteration budgets, with CSV persistence, summary
//! tables and an exhaustive oracle for small synthetic problems.
//!
//! Each (method, classifier, size, run) group is executed once, up to the
//! largest requested budget, and a record is taken at every budget along the
//! way. Seeds never depend on the budget, so the 50-iteration record equals
//! what a standalone 50-iteration run would produce.

pub mod oracle;
pub mod records;
pub mod reference;
pub mod summary;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::classifiers::{validation_accuracy, fit, ClassifierKind};
use crate::dataset::{sample_split, DatasetError, ExperimentSplit, MnistFiles};
use crate::fitness::{ClassifierFitness, FitnessValue};
use crate::ga::{GaConfig, GaError, GaSearch};
use crate::labelcodes::{label_accuracy, LabelError, LabelingCode, ProblemSpec};
use crate::sa::{Annealer, SaConfig, SaError};
use crate::seed::{tag, RandomSeed};

pub use oracle::{brute_force_oracle, OracleResult, ORACLE_LIMIT};
pub use records::{emit_csv, emit_timings_csv, read_csv, RecordWriter};
pub use summary::{summarize, BandReport, CellKey, CellSummary, Summary};

/// Master seed used when none is given.
pub const DEFAULT_MASTER_SEED: u64 = 20_240_601;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Sa(#[from] SaError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cannot summarize an empty record set")]
    EmptyRecords,
    #[error("search space C^L = {count} exceeds the exhaustive limit of 2^20")]
    OracleGuard { count: String },
    #[error("unknown method {0:?} (expected ga, ga-elitism or sa)")]
    UnknownMethod(String),
    #[error(transparent)]
    Classifier(#[from] crate::classifiers::ClassifierError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ga,
    GaElitism,
    Sa,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ga, Method::GaElitism, Method::Sa];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ga => "ga",
            Method::GaElitism => "ga-elitism",
            Method::Sa => "sa",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Method::Ga => "GA w/o Elitism",
            Method::GaElitism => "GA w/ Elitism",
            Method::Sa => "SA",
        }
    }

    fn code(self) -> u64 {
        match self {
            Method::Ga => 0,
            Method::GaElitism => 1,
            Method::Sa => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(Method::Ga),
            "ga-elitism" | "ga_elitism" => Ok(Method::GaElitism),
            "sa" => Ok(Method::Sa),
            _ => Err(HarnessError::UnknownMethod(s.to_string())),
        }
    }
}

fn kind_code(kind: ClassifierKind) -> u64 {
    match kind {
        ClassifierKind::Mlp => 0,
        ClassifierKind::Svm => 1,
        ClassifierKind::Rf => 2,
        ClassifierKind::Centroid => 3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub methods: Vec<Method>,
    pub kinds: Vec<ClassifierKind>,
    /// GA population sizes; SA neighborhood sizes.
    pub sizes: Vec<usize>,
    pub iterations: Vec<usize>,
    pub runs_per_cell: usize,
    pub master_seed: RandomSeed,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub train_size: usize,
    pub val_size: usize,
    /// Operator settings; size, budget and seed are overwritten per run.
    pub ga: GaConfig,
    pub sa: SaConfig,
    pub progress: bool,
}

impl GridConfig {
    /// The full reference grid: 3 classifiers x 3 methods x 2 sizes x
    /// 3 budgets x 5 runs.
    pub fn full(data_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>, master_seed: RandomSeed) -> Self {
        GridConfig {
            methods: Method::ALL.to_vec(),
            kinds: ClassifierKind::EXPERIMENT.to_vec(),
            sizes: vec![50, 100],
            iterations: vec![50, 100, 150],
            runs_per_cell: 5,
            master_seed,
            data_dir: data_dir.into(),
            out_dir: out_dir.into(),
            train_size: 200,
            val_size: 45,
            ga: GaConfig::new(50, 50, false, master_seed),
            sa: SaConfig::new(50, 50, master_seed),
            progress: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidGrid(m.to_string()));
        if self.methods.is_empty() || self.kinds.is_empty() || self.sizes.is_empty() || self.iterations.is_empty() {
            return bad("methods, classifiers, sizes and iteration budgets must all be non-empty");
        }
        if self.runs_per_cell == 0 {
            return bad("runs per cell must be at least 1");
        }
        Ok(())
    }

    /// Seed of one run group; independent of the iteration budget.
    pub fn run_seed(&self, method: Method, kind: ClassifierKind, size: usize, run: usize) -> RandomSeed {
        self.master_seed
            .derive(&[tag::RUN, method.code(), kind_code(kind), size as u64, run as u64])
    }

    pub fn split_seed(&self) -> RandomSeed {
        self.master_seed.derive(&[tag::SPLIT])
    }

    fn budgets(&self) -> Vec<usize> {
        let mut b = self.iterations.clone();
        b.sort_unstable();
        b.dedup();
        b
    }

    /// Run groups in execution order.
    pub fn groups(&self) -> Vec<RunGroup> {
        let mut out = Vec::new();
        for &kind in &self.kinds {
            for &method in &self.methods {
                for &size in &self.sizes {
                    for run in 0..self.runs_per_cell {
                        out.push(RunGroup { method, kind, size, run });
                    }
                }
            }
        }
        out
    }

    /// Number of records a complete grid produces.
    pub fn expected_records(&self) -> usize {
        self.groups().len() * self.budgets().len()
    }
}

/// One engine execution, reported at every iteration budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunGroup {
    pub method: Method,
    pub kind: ClassifierKind,
    pub size: usize,
    pub run: usize,
}

/// One optimization run at one iteration budget. Fitness is measured on the
/// validation rows, label accuracy against the training rows' ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub kind: ClassifierKind,
    pub size: usize,
    pub iterations: usize,
    pub run: usize,
    pub initial_fitness: f64,
    pub final_fitness: f64,
    pub initial_label_accuracy: f64,
    pub final_label_accuracy: f64,
    pub seed: u64,
}

impl RunRecord {
    /// Values are rounded to the 4 decimals the CSV carries, so a record
    /// read back from disk compares equal.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        group: RunGroup,
        iterations: usize,
        initial_fitness: f64,
        final_fitness: f64,
        initial_label_accuracy: f64,
        final_label_accuracy: f64,
        seed: RandomSeed,
    ) -> Self {
        RunRecord {
            method: group.method,
            kind: group.kind,
            size: group.size,
            iterations,
            run: group.run,
            initial_fitness: records::quantize(initial_fitness),
            final_fitness: records::quantize(final_fitness),
            initial_label_accuracy: records::quantize(initial_label_accuracy),
            final_label_accuracy: records::quantize(final_label_accuracy),
            seed: seed.value(),
        }
    }

    pub fn group(&self) -> RunGroup {
        RunGroup {
            method: self.method,
            kind: self.kind,
            size: self.size,
            run: self.run,
        }
    }
}

/// Wall-clock time of a record, kept apart from the deterministic records.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTiming {
    pub group: RunGroup,
    pub iterations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunFailure {
    pub group: RunGroup,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct GridOutcome {
    pub records: Vec<RunRecord>,
    pub timings: Vec<RunTiming>,
    pub failures: Vec<RunFailure>,
    /// Groups taken from an earlier, interrupted invocation.
    pub resumed_groups: usize,
    /// Elitism runs whose per-generation best fitness ever decreased.
    pub elitism_violations: Vec<RunGroup>,
}

/// Output of one run group.
#[derive(Debug, Clone)]
pub struct GroupOutput {
    /// One record per budget, ascending.
    pub records: Vec<RunRecord>,
    pub timings: Vec<RunTiming>,
    /// For elitism runs, whether the best-fitness history never decreased.
    pub monotone: Option<bool>,
}

fn accuracy_of(code: &LabelingCode, truth: &LabelingCode) -> Result<f64, HarnessError> {
    Ok(label_accuracy(code, truth)?)
}

/// Execute one run group up to the largest budget, recording every budget.
pub fn run_group(config: &GridConfig, split: &ExperimentSplit, group: RunGroup) -> Result<GroupOutput, HarnessError> {
    let budgets = config.budgets();
    let seed = config.run_seed(group.method, group.kind, group.size, group.run);
    let fitness = ClassifierFitness::new(split, group.kind);
    let spec = ProblemSpec::new(split.train.len(), split.num_classes())?;
    let truth = &split.train.labels;
    let mut out = Vec::with_capacity(budgets.len());
    let mut monotone = None;
    let max_budget = *budgets.last().expect("validated non-empty");

    match group.method {
        Method::Ga | Method::GaElitism => {
            let ga = GaConfig {
                population_size: group.size,
                iterations: max_budget,
                elitism: group.method == Method::GaElitism,
                master_seed: seed,
                ..config.ga.clone()
            };
            let mut search = GaSearch::new(ga, &fitness, spec)?;
            let start = search.snapshot();
            let initial_fitness = start.best_fitness.accuracy();
            let initial_label = accuracy_of(&start.best_code, truth)?;
            for &budget in &budgets {
                while search.generation() < budget {
                    search.step()?;
                }
                let snap = search.snapshot();
                out.push((
                    RunRecord::new(
                        group,
                        budget,
                        initial_fitness,
                        snap.best_fitness.accuracy(),
                        initial_label,
                        accuracy_of(&snap.best_code, truth)?,
                        seed,
                    ),
                    RunTiming {
                        group,
                        iterations: budget,
                        wall_time_s: snap.elapsed.as_secs_f64(),
                    },
                ));
            }
            if group.method == Method::GaElitism {
                let history = search.snapshot().history;
                monotone = Some(history.windows(2).all(|w| w[1].best >= w[0].best));
            }
        }
        Method::Sa => {
            let sa = SaConfig {
                neighborhood_size: group.size,
                iterations: max_budget,
                master_seed: seed,
                ..config.sa.clone()
            };
            let mut chain = Annealer::new(sa, &fitness, spec)?;
            let start = chain.snapshot();
            let initial_label = accuracy_of(&start.initial_code, truth)?;
            for &budget in &budgets {
                while chain.iteration() < budget {
                    chain.step()?;
                }
                let snap = chain.snapshot();
                out.push((
                    RunRecord::new(
                        group,
                        budget,
                        snap.initial_fitness.accuracy(),
                        snap.best_fitness.accuracy(),
                        initial_label,
                        accuracy_of(&snap.best_code, truth)?,
                        seed,
                    ),
                    RunTiming {
                        group,
                        iterations: budget,
                        wall_time_s: snap.elapsed.as_secs_f64(),
                    },
                ));
            }
        }
    }
    let (records, timings) = out.into_iter().unzip();
    Ok(GroupOutput {
        records,
        timings,
        monotone,
    })
}

/// Sample the grid's training/validation split from the MNIST training
/// partition in `data_dir`.
pub fn load_split(config: &GridConfig) -> Result<ExperimentSplit, HarnessError> {
    let files = MnistFiles::locate(&config.data_dir)?;
    let source = files.load_train()?;
    Ok(sample_split(&source, config.train_size, config.val_size, config.split_seed())?)
}

/// Run the grid on MNIST, persisting `records.csv`, `timings.csv` and
/// `summary.txt` under `out_dir`.
pub fn run_grid(config: &GridConfig) -> Result<GridOutcome, HarnessError> {
    config.validate()?;
    let split = load_split(config)?;
    let outcome = run_grid_on_split(config, &split, Some(&config.out_dir))?;
    if !outcome.records.is_empty() {
        let text = summarize(&outcome.records)?.render();
        let path = config.out_dir.join("summary.txt");
        std::fs::write(&path, text).map_err(|source| HarnessError::Io { path, source })?;
    }
    Ok(outcome)
}

/// Run every group on a given split. With `out_dir`, records are appended
/// to `records.csv` as each group completes; complete groups already in that
/// file (from an interrupted invocation of the same grid) are reused.
pub fn run_grid_on_split(
    config: &GridConfig,
    split: &ExperimentSplit,
    out_dir: Option<&Path>,
) -> Result<GridOutcome, HarnessError> {
    config.validate()?;
    let groups = config.groups();
    let per_group = config.budgets().len();
    let mut outcome = GridOutcome::default();

    let mut writer = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            let path = dir.join("records.csv");
            let existing = if path.exists() { read_csv(&path)? } else { Vec::new() };
            let kept = reusable_prefix(config, &groups, per_group, &existing);
            outcome.resumed_groups = kept.len() / per_group;
            outcome.records.extend(kept);
            Some(RecordWriter::create(dir, &outcome.records)?)
        }
        None => None,
    };

    for (i, &group) in groups.iter().enumerate().skip(outcome.resumed_groups) {
        match run_group(config, split, group) {
            Ok(GroupOutput {
                records,
                timings,
                monotone,
            }) => {
                if monotone == Some(false) {
                    outcome.elitism_violations.push(group);
                }
                if let Some(w) = writer.as_mut() {
                    w.append(&records, &timings)?;
                }
                if config.progress {
                    let last = records.last().expect("at least one budget");
                    eprintln!(
                        "[{}/{}] {} {} size {} run {}: fitness {:.3} -> {:.3}, label acc {:.3} -> {:.3} ({:.1}s)",
                        i + 1,
                        groups.len(),
                        group.kind.name(),
                        group.method,
                        group.size,
                        group.run,
                        last.initial_fitness,
                        last.final_fitness,
                        last.initial_label_accuracy,
                        last.final_label_accuracy,
                        timings.last().map_or(0.0, |t| t.wall_time_s),
                    );
                }
                outcome.records.extend(records);
                outcome.timings.extend(timings);
            }
            Err(e) => {
                if config.progress {
                    eprintln!("[{}/{}] {group:?} failed: {e}", i + 1, groups.len());
                }
                outcome.failures.push(RunFailure {
                    group,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(outcome)
}

/// Longest prefix of `existing` made of complete groups in execution order
/// whose seeds match this grid.
fn reusable_prefix(config: &GridConfig, groups: &[RunGroup], per_group: usize, existing: &[RunRecord]) -> Vec<RunRecord> {
    let budgets = config.budgets();
    let mut kept = Vec::new();
    for (group, chunk) in groups.iter().zip(existing.chunks(per_group)) {
        let seed = config.run_seed(group.method, group.kind, group.size, group.run).value();
        let complete = chunk.len() == per_group
            && chunk
                .iter()
                .zip(&budgets)
                .all(|(r, &b)| r.group() == *group && r.iterations == b && r.seed == seed);
        if !complete {
            break;
        }
        kept.extend_from_slice(chunk);
    }
    kept
}

/// Validation accuracy of each classifier trained on the true labels.
pub fn sanity_check(
    split: &ExperimentSplit,
    kinds: &[ClassifierKind],
    seed: RandomSeed,
) -> Result<Vec<(ClassifierKind, f64)>, HarnessError> {
    kinds
        .iter()
        .map(|&kind| {
            let model = fit(kind, &split.train.features, &split.train.labels, split.num_classes(), seed)?;
            Ok((kind, validation_accuracy(&model, &split.validation)?))
        })
        .collect()
}

/// Reported initial fitness for a fresh single-state check: fitness of a
/// random code, as a chance-level reference.
pub fn chance_fitness(split: &ExperimentSplit, kind: ClassifierKind, seed: RandomSeed) -> Result<FitnessValue, HarnessError> {
    let spec = ProblemSpec::new(split.train.len(), split.num_classes())?;
    let code = LabelingCode::random(&spec, seed);
    crate::fitness::evaluate(&code, split, kind, seed.derive(&[tag::EVALUATE]))
        .map_err(|e| HarnessError::InvalidGrid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic_split;

    fn small_grid() -> GridConfig {
        GridConfig {
            kinds: vec![ClassifierKind::Centroid, ClassifierKind::Svm],
            sizes: vec![6],
            iterations: vec![3, 1],
            runs_per_cell: 2,
            ..GridConfig::full("unused", "unused", RandomSeed(11))
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("tabu".parse::<Method>().is_err());
    }

    #[test]
    fn full_grid_counts() {
        let grid = GridConfig::full("d", "o", RandomSeed(0));
        assert_eq!(grid.groups().len(), 90);
        assert_eq!(grid.expected_records(), 270);
    }

    #[test]
    fn grid_validation() {
        let mut g = small_grid();
        g.runs_per_cell = 0;
        assert!(g.validate().is_err());
        let mut g = small_grid();
        g.methods.clear();
        assert!(g.validate().is_err());
    }

    #[test]
    fn nested_budgets_match_standalone_runs() {
        let split = synthetic_split(20, 12, 3, 6, 0.2, RandomSeed(1)).unwrap();
        let grid = small_grid();
        let out = run_grid_on_split(&grid, &split, None).unwrap();
        assert_eq!(out.records.len(), grid.expected_records());
        assert!(out.failures.is_empty());
        for group in grid.groups() {
            for budget in [1, 3] {
                let standalone = GridConfig {
                    iterations: vec![budget],
                    ..grid.clone()
                };
                let alone = run_group(&standalone, &split, group).unwrap();
                let nested = out
                    .records
                    .iter()
                    .find(|r| r.group() == group && r.iterations == budget)
                    .unwrap();
                assert_eq!(&alone.records[0], nested);
            }
        }
    }

    #[test]
    fn elitism_records_never_regress() {
        let split = synthetic_split(20, 12, 3, 6, 0.1, RandomSeed(2)).unwrap();
        let grid = GridConfig {
            methods: vec![Method::GaElitism],
            ..small_grid()
        };
        let out = run_grid_on_split(&grid, &split, None).unwrap();
        assert!(out.elitism_violations.is_empty());
        for r in out.records {
            assert!(r.final_fitness >= r.initial_fitness);
        }
    }

    #[test]
    fn interrupted_grid_resumes_to_identical_csv() {
        let split = synthetic_split(20, 12, 3, 6, 0.2, RandomSeed(3)).unwrap();
        let grid = small_grid();
        let base = std::env::temp_dir().join(format!("labelmine-resume-{}", std::process::id()));
        let (full_dir, part_dir) = (base.join("full"), base.join("part"));
        run_grid_on_split(&grid, &split, Some(&full_dir)).unwrap();
        let full = std::fs::read_to_string(full_dir.join("records.csv")).unwrap();

        // simulate an interruption mid-group: keep the header, 1.5 groups
        let partial: Vec<&str> = full.lines().take(1 + 3).collect();
        std::fs::create_dir_all(&part_dir).unwrap();
        std::fs::write(part_dir.join("records.csv"), partial.join("\n") + "\n").unwrap();
        let resumed = run_grid_on_split(&grid, &split, Some(&part_dir)).unwrap();
        assert_eq!(resumed.resumed_groups, 1);
        assert_eq!(std::fs::read_to_string(part_dir.join("records.csv")).unwrap(), full);
        std::fs::remove_dir_all(&base).unwrap();
    }

    #[test]
    fn failing_groups_are_recorded_not_fatal() {
        let split = synthetic_split(20, 12, 3, 6, 0.2, RandomSeed(4)).unwrap();
        let mut grid = small_grid();
        grid.sizes = vec![1, 6]; // population of one is invalid
        let out = run_grid_on_split(&grid, &split, None).unwrap();
        assert!(!out.failures.is_empty());
        assert!(out.records.iter().all(|r| r.size == 6 || r.method == Method::Sa));
    }
}
