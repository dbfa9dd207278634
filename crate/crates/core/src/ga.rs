//! Genetic search over labeling codes.
//!
//! Each generation: rank by fitness, keep the top fraction as parents,
//! recombine consecutive parent pairs with the half-way merge until the
//! population is refilled, then apply gene-order inversion. With elitism the
//! best codes pass to the next generation untouched, fitness included.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::classifiers::ClassifierKind;
use crate::dataset::ExperimentSplit;
use crate::fitness::{ClassifierFitness, Fitness, FitnessError, FitnessValue};
use crate::labelcodes::{crossover_half, mutate_inversion, LabelError, LabelingCode, ProblemSpec};
use crate::seed::{tag, RandomSeed};

#[derive(Debug, thiserror::Error)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("population is empty")]
    EmptyPopulation,
    #[error("{codes} codes but {fitnesses} fitness values")]
    LengthMismatch { codes: usize, fitnesses: usize },
    #[error("evaluating individual {individual} of generation {generation}: {source}")]
    Evaluation {
        generation: usize,
        individual: usize,
        source: FitnessError,
    },
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub iterations: usize,
    pub elitism: bool,
    pub elite_count: usize,
    pub parent_fraction: f64,
    pub mutation_fraction: f64,
    pub mutation_probability: f64,
    pub master_seed: RandomSeed,
}

impl GaConfig {
    pub fn new(population_size: usize, iterations: usize, elitism: bool, master_seed: RandomSeed) -> Self {
        GaConfig {
            population_size,
            iterations,
            elitism,
            elite_count: 2,
            parent_fraction: 0.5,
            mutation_fraction: 0.10,
            mutation_probability: 1.0,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |msg: String| Err(GaError::InvalidConfig(msg));
        let n = self.population_size;
        if n < 2 {
            return bad(format!("population size must be at least 2, got {n}"));
        }
        if self.elitism && self.elite_count >= n {
            return bad(format!("elite count {} must be below population size {n}", self.elite_count));
        }
        if !(self.parent_fraction > 0.0 && self.parent_fraction <= 1.0) || self.parent_fraction * (n as f64) < 2.0 {
            return bad(format!(
                "parent fraction {} must select at least two of {n} individuals",
                self.parent_fraction
            ));
        }
        if !(self.mutation_fraction > 0.0 && self.mutation_fraction <= 1.0) {
            return bad(format!("mutation fraction {} outside (0, 1]", self.mutation_fraction));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return bad(format!("mutation probability {} outside [0, 1]", self.mutation_probability));
        }
        Ok(())
    }

    fn elites(&self) -> usize {
        if self.elitism {
            self.elite_count
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub best_code: LabelingCode,
    pub best_fitness: FitnessValue,
    /// Generation 0 (the random population) through the last one.
    pub history: Vec<GenerationStats>,
    pub final_population_fitnesses: Vec<FitnessValue>,
    pub evaluations: usize,
    pub elapsed: Duration,
    pub master_seed: RandomSeed,
}

/// Population indices sorted by descending fitness, ties to lower index.
pub fn rank(fitnesses: &[FitnessValue]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].accuracy().total_cmp(&fitnesses[a].accuracy()).then(a.cmp(&b)));
    order
}

/// Truncation selection: indices of the `ceil(fraction * N)` fittest
/// individuals, fittest first.
pub fn select_parents(
    population: &[LabelingCode],
    fitnesses: &[FitnessValue],
    fraction: f64,
) -> Result<Vec<usize>, GaError> {
    if population.is_empty() {
        return Err(GaError::EmptyPopulation);
    }
    if population.len() != fitnesses.len() {
        return Err(GaError::LengthMismatch {
            codes: population.len(),
            fitnesses: fitnesses.len(),
        });
    }
    let count = ((fraction * population.len() as f64).ceil() as usize).clamp(1, population.len());
    let mut order = rank(fitnesses);
    order.truncate(count);
    Ok(order)
}

/// Breed the next population. When elitism is on, the first
/// `elite_count` entries of the result are the current elites, unchanged.
pub fn step_generation(
    population: &[LabelingCode],
    fitnesses: &[FitnessValue],
    config: &GaConfig,
    generation_index: usize,
) -> Result<Vec<LabelingCode>, GaError> {
    config.validate()?;
    let n = population.len();
    let parents = select_parents(population, fitnesses, config.parent_fraction)?;
    let elites = config.elites().min(n);
    let mut next: Vec<LabelingCode> = rank(fitnesses)[..elites]
        .iter()
        .map(|&i| population[i].clone())
        .collect();

    let mut pair = 0;
    while next.len() < n {
        let a = &population[parents[(2 * pair) % parents.len()]];
        let b = &population[parents[(2 * pair + 1) % parents.len()]];
        let (c1, c2) = crossover_half(a, b)?;
        next.push(c1);
        if next.len() < n {
            next.push(c2);
        }
        pair += 1;
    }

    let g = generation_index as u64;
    for (i, child) in next.iter_mut().enumerate().skip(elites) {
        let seed = config.master_seed.derive(&[tag::MUTATE, g, i as u64]);
        let mut rng = seed.rng();
        if rng.random_bool(config.mutation_probability) {
            *child = mutate_inversion(child, config.mutation_fraction, seed.derive(&[0]))?;
        }
    }
    Ok(next)
}

/// A genetic search that advances one generation per [`GaSearch::step`].
pub struct GaSearch<'f, F: Fitness> {
    config: GaConfig,
    fitness: &'f F,
    population: Vec<LabelingCode>,
    fitnesses: Vec<FitnessValue>,
    generation: usize,
    history: Vec<GenerationStats>,
    evaluations: usize,
    started: Instant,
}

impl<'f, F: Fitness> GaSearch<'f, F> {
    /// Draw and evaluate the random initial population.
    pub fn new(config: GaConfig, fitness: &'f F, spec: ProblemSpec) -> Result<Self, GaError> {
        config.validate()?;
        let started = Instant::now();
        let population: Vec<LabelingCode> = (0..config.population_size)
            .map(|i| LabelingCode::random(&spec, config.master_seed.derive(&[tag::INIT, i as u64])))
            .collect();
        let mut search = GaSearch {
            config,
            fitness,
            population,
            fitnesses: Vec::new(),
            generation: 0,
            history: Vec::new(),
            evaluations: 0,
            started,
        };
        search.fitnesses = search.evaluate_from(0, &[])?;
        search.record();
        Ok(search)
    }

    /// Evaluate individuals `skip..N` of the current population; the first
    /// `skip` take their fitness from `carried`.
    fn evaluate_from(&mut self, skip: usize, carried: &[FitnessValue]) -> Result<Vec<FitnessValue>, GaError> {
        let g = self.generation as u64;
        let seed = self.config.master_seed;
        let fitness = self.fitness;
        let fresh: Vec<Result<FitnessValue, FitnessError>> = self.population[skip..]
            .par_iter()
            .enumerate()
            .map(|(k, code)| {
                let i = (skip + k) as u64;
                fitness.evaluate(code, seed.derive(&[tag::EVALUATE, g, i]))
            })
            .collect();
        self.evaluations += fresh.len();
        let mut out = carried[..skip].to_vec();
        for (k, result) in fresh.into_iter().enumerate() {
            out.push(result.map_err(|source| GaError::Evaluation {
                generation: self.generation,
                individual: skip + k,
                source,
            })?);
        }
        Ok(out)
    }

    fn record(&mut self) {
        let accs = self.fitnesses.iter().map(|f| f.accuracy());
        let best = accs.clone().fold(0.0, f64::max);
        let mean = accs.sum::<f64>() / self.fitnesses.len() as f64;
        self.history.push(GenerationStats { best, mean });
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population(&self) -> &[LabelingCode] {
        &self.population
    }

    pub fn fitnesses(&self) -> &[FitnessValue] {
        &self.fitnesses
    }

    pub fn step(&mut self) -> Result<(), GaError> {
        let next = step_generation(&self.population, &self.fitnesses, &self.config, self.generation + 1)?;
        let elites = self.config.elites().min(next.len());
        let carried: Vec<FitnessValue> = rank(&self.fitnesses)[..elites]
            .iter()
            .map(|&i| self.fitnesses[i])
            .collect();
        self.population = next;
        self.generation += 1;
        self.fitnesses = self.evaluate_from(elites, &carried)?;
        self.record();
        Ok(())
    }

    /// Result as if the run stopped at the current generation.
    pub fn snapshot(&self) -> GaResult {
        let best = rank(&self.fitnesses)[0];
        GaResult {
            best_code: self.population[best].clone(),
            best_fitness: self.fitnesses[best],
            history: self.history.clone(),
            final_population_fitnesses: self.fitnesses.clone(),
            evaluations: self.evaluations,
            elapsed: self.started.elapsed(),
            master_seed: self.config.master_seed,
        }
    }

    pub fn run(mut self) -> Result<GaResult, GaError> {
        while self.generation < self.config.iterations {
            self.step()?;
        }
        Ok(self.snapshot())
    }
}

pub fn run_ga_with<F: Fitness>(config: &GaConfig, fitness: &F, spec: ProblemSpec) -> Result<GaResult, GaError> {
    GaSearch::new(config.clone(), fitness, spec)?.run()
}

/// Genetic search over the training labels of `split`, scored by `kind`.
pub fn run_ga(config: &GaConfig, split: &ExperimentSplit, kind: ClassifierKind) -> Result<GaResult, GaError> {
    let spec = ProblemSpec::new(split.train.len(), split.num_classes())?;
    run_ga_with(config, &ClassifierFitness::new(split, kind), spec)
}
