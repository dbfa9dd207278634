//! Simulated annealing over labeling codes with Metropolis acceptance.
//!
//! Outer iteration `k` runs at temperature `T0 * alpha^k` and makes a fixed
//! number of transition attempts. Each attempt builds a fresh neighborhood
//! of the current code, picks one member uniformly, evaluates it, and moves
//! there if it is no worse or if the Metropolis draw allows it.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::classifiers::ClassifierKind;
use crate::dataset::ExperimentSplit;
use crate::fitness::{to_energy, ClassifierFitness, Energy, Fitness, FitnessError, FitnessValue};
use crate::labelcodes::{HammingBall, LabelError, LabelingCode, Neighborhood, ProblemSpec};
use crate::seed::{tag, RandomSeed};

#[derive(Debug, thiserror::Error)]
pub enum SaError {
    #[error("invalid SA configuration: {0}")]
    InvalidConfig(String),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("Boltzmann constant must be positive, got {0}")]
    NonPositiveBoltzmann(f64),
    #[error("evaluating the initial state: {0}")]
    InitialEvaluation(FitnessError),
    #[error("evaluating transition {transition} of iteration {iteration}: {source}")]
    Evaluation {
        iteration: usize,
        transition: usize,
        source: FitnessError,
    },
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaConfig {
    pub iterations: usize,
    pub transitions_per_iteration: usize,
    pub neighborhood_size: usize,
    pub neighbor_radius: usize,
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    pub boltzmann_k: f64,
    pub master_seed: RandomSeed,
}

impl SaConfig {
    pub fn new(iterations: usize, neighborhood_size: usize, master_seed: RandomSeed) -> Self {
        SaConfig {
            iterations,
            transitions_per_iteration: 10,
            neighborhood_size,
            neighbor_radius: 5,
            initial_temperature: 0.1,
            cooling_factor: 0.95,
            boltzmann_k: 1.0,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), SaError> {
        let bad = |msg: &str| Err(SaError::InvalidConfig(msg.to_string()));
        if self.transitions_per_iteration == 0 || self.neighborhood_size == 0 || self.neighbor_radius == 0 {
            return bad("transition, neighborhood and radius counts must be at least 1");
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad("cooling factor must lie in (0, 1)");
        }
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(SaError::NonPositiveTemperature(self.initial_temperature));
        }
        if self.boltzmann_k.is_nan() || self.boltzmann_k <= 0.0 {
            return Err(SaError::NonPositiveBoltzmann(self.boltzmann_k));
        }
        Ok(())
    }

    /// `T0 * alpha^k`.
    pub fn temperature(&self, iteration: usize) -> f64 {
        self.initial_temperature * self.cooling_factor.powi(iteration as i32)
    }
}

/// `min(1, exp((E_i - E_j) / (k_b * T)))` for a move from energy `E_i` to `E_j`.
pub fn accept_probability(current: Energy, candidate: Energy, temperature: f64, k_b: f64) -> Result<f64, SaError> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(SaError::NonPositiveTemperature(temperature));
    }
    if k_b.is_nan() || k_b <= 0.0 {
        return Err(SaError::NonPositiveBoltzmann(k_b));
    }
    if candidate.0 <= current.0 {
        return Ok(1.0);
    }
    Ok(((current.0 - candidate.0) / (k_b * temperature)).exp().min(1.0))
}

/// One Metropolis decision using a uniform draw from `rng`.
pub fn metropolis_accept<R: Rng>(
    current: Energy,
    candidate: Energy,
    temperature: f64,
    k_b: f64,
    rng: &mut R,
) -> Result<bool, SaError> {
    let p = accept_probability(current, candidate, temperature, k_b)?;
    Ok(p >= 1.0 || rng.random::<f64>() < p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTrace {
    pub temperature: f64,
    /// Fitness of the current state at the end of the iteration.
    pub current: f64,
    pub best: f64,
    pub accepted: usize,
    /// Accepted moves that lowered fitness.
    pub accepted_worse: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone)]
pub struct SaResult {
    pub initial_code: LabelingCode,
    pub initial_fitness: FitnessValue,
    pub best_code: LabelingCode,
    pub best_fitness: FitnessValue,
    pub final_code: LabelingCode,
    pub final_fitness: FitnessValue,
    pub trace: Vec<IterationTrace>,
    pub evaluations: usize,
    pub elapsed: Duration,
    pub master_seed: RandomSeed,
}

/// An annealing chain that advances one outer iteration per
/// [`Annealer::step`].
pub struct Annealer<'f, F: Fitness, N: Neighborhood = HammingBall> {
    config: SaConfig,
    fitness: &'f F,
    neighborhood: N,
    initial: (LabelingCode, FitnessValue),
    current: (LabelingCode, FitnessValue),
    best: (LabelingCode, FitnessValue),
    iteration: usize,
    trace: Vec<IterationTrace>,
    evaluations: usize,
    started: Instant,
}

impl<'f, F: Fitness> Annealer<'f, F, HammingBall> {
    pub fn new(config: SaConfig, fitness: &'f F, spec: ProblemSpec) -> Result<Self, SaError> {
        let ball = HammingBall {
            radius: config.neighbor_radius,
        };
        Annealer::with_neighborhood(config, fitness, spec, ball)
    }
}

impl<'f, F: Fitness, N: Neighborhood> Annealer<'f, F, N> {
    pub fn with_neighborhood(config: SaConfig, fitness: &'f F, spec: ProblemSpec, neighborhood: N) -> Result<Self, SaError> {
        config.validate()?;
        let started = Instant::now();
        let seed = config.master_seed;
        let code = LabelingCode::random(&spec, seed.derive(&[tag::INIT]));
        let value = fitness
            .evaluate(&code, seed.derive(&[tag::EVALUATE]))
            .map_err(SaError::InitialEvaluation)?;
        let state = (code, value);
        Ok(Annealer {
            config,
            fitness,
            neighborhood,
            initial: state.clone(),
            current: state.clone(),
            best: state,
            iteration: 0,
            trace: Vec::new(),
            evaluations: 1,
            started,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn step(&mut self) -> Result<(), SaError> {
        let k = self.iteration;
        let temperature = self.config.temperature(k);
        let seed = self.config.master_seed;
        let mut record = IterationTrace {
            temperature,
            current: 0.0,
            best: 0.0,
            accepted: 0,
            accepted_worse: 0,
            rejected: 0,
        };
        for t in 0..self.config.transitions_per_iteration {
            let path = [k as u64, t as u64];
            let base = &self.current.0;
            let neighborhood = &self.neighborhood;
            let candidates: Vec<LabelingCode> = (0..self.config.neighborhood_size)
                .into_par_iter()
                .map(|j| neighborhood.propose(base, seed.derive(&[tag::NEIGHBOR, path[0], path[1], j as u64])))
                .collect::<Result<_, _>>()?;
            let pick = seed.derive(&[tag::PICK, path[0], path[1]]).rng().random_range(0..candidates.len());
            let candidate = candidates.into_iter().nth(pick).expect("pick within neighborhood");
            let value = self
                .fitness
                .evaluate(&candidate, seed.derive(&[tag::EVALUATE, path[0], path[1]]))
                .map_err(|source| SaError::Evaluation {
                    iteration: k,
                    transition: t,
                    source,
                })?;
            self.evaluations += 1;
            let mut rng = seed.derive(&[tag::ACCEPT, path[0], path[1]]).rng();
            let (e_i, e_j) = (to_energy(self.current.1), to_energy(value));
            if metropolis_accept(e_i, e_j, temperature, self.config.boltzmann_k, &mut rng)? {
                record.accepted += 1;
                if e_j > e_i {
                    record.accepted_worse += 1;
                }
                if value.accuracy() > self.best.1.accuracy() {
                    self.best = (candidate.clone(), value);
                }
                self.current = (candidate, value);
            } else {
                record.rejected += 1;
            }
        }
        record.current = self.current.1.accuracy();
        record.best = self.best.1.accuracy();
        self.trace.push(record);
        self.iteration += 1;
        Ok(())
    }

    pub fn snapshot(&self) -> SaResult {
        SaResult {
            initial_code: self.initial.0.clone(),
            initial_fitness: self.initial.1,
            best_code: self.best.0.clone(),
            best_fitness: self.best.1,
            final_code: self.current.0.clone(),
            final_fitness: self.current.1,
            trace: self.trace.clone(),
            evaluations: self.evaluations,
            elapsed: self.started.elapsed(),
            master_seed: self.config.master_seed,
        }
    }

    pub fn run(mut self) -> Result<SaResult, SaError> {
        while self.iteration < self.config.iterations {
            self.step()?;
        }
        Ok(self.snapshot())
    }
}

pub fn run_sa_with<F: Fitness>(config: &SaConfig, fitness: &F, spec: ProblemSpec) -> Result<SaResult, SaError> {
    Annealer::new(config.clone(), fitness, spec)?.run()
}

/// Annealing over the training labels of `split`, scored by `kind`.
pub fn run_sa(config: &SaConfig, split: &ExperimentSplit, kind: ClassifierKind) -> Result<SaResult, SaError> {
    let spec = ProblemSpec::new(split.train.len(), split.num_classes())?;
    run_sa_with(config, &ClassifierFitness::new(split, kind), spec)
}
