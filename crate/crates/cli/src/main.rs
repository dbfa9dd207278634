use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use labelmine::classifiers::ClassifierKind;
use labelmine::harness::{self, oracle, summarize, GridConfig, GridOutcome, Method};
use labelmine::RandomSeed;

#[derive(Parser)]
#[command(name = "labelmine", version, about = "Search for training labels with GA and SA, scored by classifier validation accuracy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the method x classifier x size x budget grid (all of it by default).
    Grid(Opts),
    /// Run a single cell.
    Run(Opts),
    /// Check GA and SA against exhaustive search on a tiny synthetic problem.
    Oracle(Opts),
    /// Train each classifier on the true labels and score the validation set.
    Sanity(Opts),
}

#[derive(Args, Clone, Debug, Default)]
struct Opts {
    /// ga, ga-elitism or sa (comma separated for `grid`).
    #[arg(long, value_delimiter = ',')]
    method: Vec<String>,
    /// nn, svm or rf (comma separated for `grid`).
    #[arg(long, value_delimiter = ',')]
    classifier: Vec<String>,
    /// GA population size or SA neighborhood size.
    #[arg(long, value_delimiter = ',')]
    size: Vec<usize>,
    /// Iteration budget(s).
    #[arg(long, value_delimiter = ',')]
    iterations: Vec<usize>,
    /// Runs per cell.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory holding the MNIST IDX files.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file whose keys override the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Suppress per-run progress lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Deserialize, Debug, Default)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
    #[default]
    None,
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Option<Vec<T>> {
        match self {
            OneOrMany::One(v) => Some(vec![v]),
            OneOrMany::Many(v) => Some(v),
            OneOrMany::None => None,
        }
    }
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    #[serde(default)]
    method: OneOrMany<String>,
    #[serde(default)]
    classifier: OneOrMany<String>,
    #[serde(default)]
    size: OneOrMany<usize>,
    #[serde(default)]
    iterations: OneOrMany<usize>,
    runs: Option<usize>,
    seed: Option<u64>,
    #[serde(alias = "data_dir")]
    data_dir: Option<PathBuf>,
    out: Option<PathBuf>,
}

impl Opts {
    fn resolve(mut self) -> Result<Opts> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let file: FileConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(v) = file.method.into_vec() {
            self.method = v;
        }
        if let Some(v) = file.classifier.into_vec() {
            self.classifier = v;
        }
        if let Some(v) = file.size.into_vec() {
            self.size = v;
        }
        if let Some(v) = file.iterations.into_vec() {
            self.iterations = v;
        }
        self.runs = file.runs.or(self.runs);
        self.seed = file.seed.or(self.seed);
        self.data_dir = file.data_dir.or(self.data_dir);
        self.out = file.out.or(self.out);
        Ok(self)
    }

    fn seed(&self) -> RandomSeed {
        RandomSeed(self.seed.unwrap_or(harness::DEFAULT_MASTER_SEED))
    }

    fn data_dir(&self) -> PathBuf {
        self.data_dir.clone().unwrap_or_else(|| PathBuf::from("data/mnist"))
    }

    fn grid(&self, single: bool) -> Result<GridConfig> {
        let out = self.out.clone().unwrap_or_else(|| PathBuf::from("results"));
        let mut grid = GridConfig::full(self.data_dir(), out, self.seed());
        grid.progress = !self.quiet;
        if !self.method.is_empty() {
            grid.methods = self.method.iter().map(|m| m.parse::<Method>()).collect::<Result<_, _>>()?;
        }
        if !self.classifier.is_empty() {
            grid.kinds = self
                .classifier
                .iter()
                .map(|c| c.parse::<ClassifierKind>())
                .collect::<Result<_, _>>()?;
        }
        if !self.size.is_empty() {
            grid.sizes = self.size.clone();
        }
        if !self.iterations.is_empty() {
            grid.iterations = self.iterations.clone();
        }
        if let Some(runs) = self.runs {
            grid.runs_per_cell = runs;
        }
        if single {
            for (name, n) in [
                ("--method", grid.methods.len()),
                ("--classifier", grid.kinds.len()),
                ("--size", grid.sizes.len()),
                ("--iterations", grid.iterations.len()),
            ] {
                if n != 1 {
                    bail!("`run` takes exactly one {name} value (got {n}); use `grid` for several");
                }
            }
            if self.method.is_empty() || self.classifier.is_empty() {
                bail!("`run` needs --method and --classifier");
            }
        }
        grid.validate()?;
        Ok(grid)
    }
}

struct Guard {
    name: String,
    passed: bool,
    detail: String,
}

impl Guard {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Guard {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn report(guards: &[Guard]) -> ExitCode {
    for g in guards {
        println!("{} {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
    if guards.iter().all(|g| g.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn outcome_guards(outcome: &GridOutcome, grid: &GridConfig) -> Vec<Guard> {
    let mut guards = vec![Guard::new(
        "complete",
        outcome.failures.is_empty() && outcome.records.len() == grid.expected_records(),
        format!(
            "{} of {} records, {} failed groups{}",
            outcome.records.len(),
            grid.expected_records(),
            outcome.failures.len(),
            outcome
                .failures
                .first()
                .map_or(String::new(), |f| format!(" (first: {:?}: {})", f.group, f.message)),
        ),
    )];
    if grid.methods.contains(&Method::GaElitism) {
        let violations = outcome.elitism_violations.len();
        guards.push(Guard::new(
            "elitism monotone",
            violations == 0,
            format!("{violations} elitism runs with a decreasing best fitness"),
        ));
    }
    if outcome.records.iter().any(|r| r.method == Method::GaElitism && r.final_fitness < r.initial_fitness) {
        guards.push(Guard::new("elitism final >= initial", false, "an elitism record regressed"));
    }
    guards
}

fn print_outcome(outcome: &GridOutcome, grid: &GridConfig) -> Result<Vec<Guard>> {
    let mut guards = outcome_guards(outcome, grid);
    if outcome.records.is_empty() {
        return Ok(guards);
    }
    let summary = summarize(&outcome.records)?;
    print!("{}", summary.render());
    let band = summary.band_report();
    let outside = band
        .outside_final_band
        .iter()
        .map(|(k, m)| format!("{} {} {} @{}: {:.1}%", k.kind.name(), k.method, k.size, k.iterations, 100.0 * m))
        .collect::<Vec<_>>();
    guards.push(Guard::new(
        "final accuracy band",
        band.final_band_ok(),
        if outside.is_empty() {
            format!("all {} cell means within [5%, 30%]", band.cells)
        } else {
            format!("outside [5%, 30%]: {}", outside.join("; "))
        },
    ));
    guards.push(Guard::new(
        "grand mean",
        band.grand_mean_ok(),
        format!("{:.2}% (must be below 25%)", 100.0 * band.grand_mean_final),
    ));
    guards.push(Guard::new(
        "initial accuracy band",
        band.initial_ok(),
        format!("{:.2}% (must lie in [6%, 18%])", 100.0 * band.mean_initial),
    ));
    println!("records: {}", grid.out_dir.join("records.csv").display());
    Ok(guards)
}

fn cmd_grid(opts: Opts, single: bool) -> Result<ExitCode> {
    let grid = opts.grid(single)?;
    let outcome = harness::run_grid(&grid)?;
    if outcome.resumed_groups > 0 {
        eprintln!("resumed {} completed groups from {}", outcome.resumed_groups, grid.out_dir.display());
    }
    Ok(report(&print_outcome(&outcome, &grid)?))
}

fn cmd_oracle(opts: Opts) -> Result<ExitCode> {
    let seed = opts.seed();
    let trials = opts.runs.unwrap_or(20);
    let t = oracle::run_oracle_trials(seed, trials)?;
    println!(
        "optimum {:?} with accuracy {:.4} (true labels {:.4})",
        t.oracle.best_code.labels(),
        t.oracle.best_fitness.accuracy(),
        t.true_label_fitness.accuracy()
    );
    Ok(report(&[
        Guard::new("codes evaluated", t.oracle.evaluated == 64, format!("{} (expected 64)", t.oracle.evaluated)),
        Guard::new("ga reaches optimum", t.ga_passes(), format!("{}/{} runs", t.ga_hits, t.trials)),
        Guard::new("sa reaches optimum", t.sa_passes(), format!("{}/{} runs", t.sa_hits, t.trials)),
    ]))
}

fn cmd_sanity(opts: Opts) -> Result<ExitCode> {
    let grid = opts.grid(false)?;
    let split = harness::load_split(&grid)?;
    let results = harness::sanity_check(&split, &grid.kinds, grid.master_seed)?;
    let guards: Vec<Guard> = results
        .into_iter()
        .map(|(kind, acc)| {
            Guard::new(
                format!("{} true-label accuracy", kind.name()),
                acc >= 0.60,
                format!("{:.2}% on {} validation rows (needs 60%)", 100.0 * acc, split.validation.len()),
            )
        })
        .collect();
    Ok(report(&guards))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Grid(o) => cmd_grid(o.resolve()?, false),
        Command::Run(o) => cmd_grid(o.resolve()?, true),
        Command::Oracle(o) => cmd_oracle(o.resolve()?),
        Command::Sanity(o) => cmd_sanity(o.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
