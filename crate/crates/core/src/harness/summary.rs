//! Per-cell aggregation of run records and text tables laid out like the
//! reference results.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{reference::reference, HarnessError, Method, RunRecord};
use crate::classifiers::ClassifierKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub kind: ClassifierKind,
    pub method: Method,
    pub size: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub runs: usize,
    pub initial_fitness: MeanStd,
    pub final_fitness: MeanStd,
    pub initial_label_accuracy: MeanStd,
    pub final_label_accuracy: MeanStd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub cells: BTreeMap<CellKey, CellSummary>,
}

pub fn summarize(records: &[RunRecord]) -> Result<Summary, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyRecords);
    }
    let mut groups: BTreeMap<CellKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = CellKey {
            kind: r.kind,
            method: r.method,
            size: r.size,
            iterations: r.iterations,
        };
        groups.entry(key).or_default().push(r);
    }
    let cells = groups
        .into_iter()
        .map(|(key, rs)| {
            let col = |f: fn(&RunRecord) -> f64| MeanStd::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            let summary = CellSummary {
                runs: rs.len(),
                initial_fitness: col(|r| r.initial_fitness),
                final_fitness: col(|r| r.final_fitness),
                initial_label_accuracy: col(|r| r.initial_label_accuracy),
                final_label_accuracy: col(|r| r.final_label_accuracy),
            };
            (key, summary)
        })
        .collect();
    Ok(Summary { cells })
}

impl Summary {
    pub fn get(&self, kind: ClassifierKind, method: Method, size: usize, iterations: usize) -> Option<&CellSummary> {
        self.cells.get(&CellKey {
            kind,
            method,
            size,
            iterations,
        })
    }

    /// Mean of the per-cell mean final fitness.
    pub fn grand_mean_final_fitness(&self) -> f64 {
        self.cells.values().map(|c| c.final_fitness.mean).sum::<f64>() / self.cells.len() as f64
    }

    fn axes(&self) -> (Vec<ClassifierKind>, Vec<Method>, Vec<usize>, Vec<usize>) {
        let mut kinds: Vec<_> = self.cells.keys().map(|k| k.kind).collect();
        let mut methods: Vec<_> = self.cells.keys().map(|k| k.method).collect();
        let mut sizes: Vec<_> = self.cells.keys().map(|k| k.size).collect();
        let mut iters: Vec<_> = self.cells.keys().map(|k| k.iterations).collect();
        for v in [&mut sizes, &mut iters] {
            v.sort_unstable();
            v.dedup();
        }
        kinds.sort();
        kinds.dedup();
        methods.sort();
        methods.dedup();
        (kinds, methods, sizes, iters)
    }

    fn table(&self, title: &str, pick: impl Fn(&ClassifierKind, &Method, usize, usize) -> Option<(f64, f64)>) -> String {
        let (kinds, methods, sizes, iters) = self.axes();
        let mut out = format!("{title}\n");
        let mut header = format!("{:<10} {:<16}", "classifier", "method");
        for size in &sizes {
            let _ = write!(header, " | size {size:<4} init");
            for it in &iters {
                let _ = write!(header, " {:>6}", format!("@{it}"));
            }
        }
        out.push_str(&header);
        out.push('\n');
        out.push_str(&"-".repeat(header.len()));
        out.push('\n');
        for kind in &kinds {
            for method in &methods {
                let _ = write!(out, "{:<10} {:<16}", kind.display_name(), method.display_name());
                for &size in &sizes {
                    let init = iters.iter().find_map(|&it| pick(kind, method, size, it).map(|p| p.0));
                    let _ = write!(out, " | {:>14}", fmt_pct(init));
                    for &it in &iters {
                        let _ = write!(out, " {:>6}", fmt_pct(pick(kind, method, size, it).map(|p| p.1)));
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    /// Tables of mean fitness, mean label accuracy and the reference
    /// reference, all in percent.
    pub fn render(&self) -> String {
        let fitness = self.table("Mean validation accuracy (%), initial and after each budget", |k, m, s, i| {
            self.get(*k, *m, s, i)
                .map(|c| (100.0 * c.initial_fitness.mean, 100.0 * c.final_fitness.mean))
        });
        let labels = self.table("Mean label accuracy on the training rows (%)", |k, m, s, i| {
            self.get(*k, *m, s, i)
                .map(|c| (100.0 * c.initial_label_accuracy.mean, 100.0 * c.final_label_accuracy.mean))
        });
        let reference_table = self.table("Reference values (%)", |k, m, s, i| reference(*k, *m, s, i));
        let runs = self.cells.values().map(|c| c.runs).min().unwrap_or(0);
        format!(
            "{fitness}\n{labels}\n{reference_table}\ncells: {}, runs per cell: {runs}, grand mean final accuracy: {:.2}%\n",
            self.cells.len(),
            100.0 * self.grand_mean_final_fitness()
        )
    }
}

/// Accepted range for each cell's mean final accuracy.
pub const FINAL_BAND: (f64, f64) = (0.05, 0.30);
/// Upper bound for the grand mean of final accuracy.
pub const GRAND_MEAN_MAX: f64 = 0.25;
/// Accepted range for the mean initial accuracy across cells.
pub const INITIAL_BAND: (f64, f64) = (0.06, 0.18);

/// How a summarized grid compares with the chance-level bands.
#[derive(Debug, Clone, PartialEq)]
pub struct BandReport {
    pub cells: usize,
    pub outside_final_band: Vec<(CellKey, f64)>,
    pub grand_mean_final: f64,
    pub mean_initial: f64,
}

impl BandReport {
    pub fn final_band_ok(&self) -> bool {
        self.outside_final_band.is_empty()
    }

    pub fn grand_mean_ok(&self) -> bool {
        self.grand_mean_final < GRAND_MEAN_MAX
    }

    pub fn initial_ok(&self) -> bool {
        (INITIAL_BAND.0..=INITIAL_BAND.1).contains(&self.mean_initial)
    }
}

impl Summary {
    pub fn band_report(&self) -> BandReport {
        let n = self.cells.len() as f64;
        BandReport {
            cells: self.cells.len(),
            outside_final_band: self
                .cells
                .iter()
                .map(|(k, c)| (*k, c.final_fitness.mean))
                .filter(|(_, m)| !(FINAL_BAND.0..=FINAL_BAND.1).contains(m))
                .collect(),
            grand_mean_final: self.grand_mean_final_fitness(),
            mean_initial: self.cells.values().map(|c| c.initial_fitness.mean).sum::<f64>() / n,
        }
    }
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RunGroup;
    use crate::seed::RandomSeed;

    fn rec(run: usize, init: f64, fin: f64) -> RunRecord {
        let group = RunGroup {
            method: Method::Sa,
            kind: ClassifierKind::Svm,
            size: 50,
            run,
        };
        RunRecord::new(group, 50, init, fin, 0.1, 0.1, RandomSeed(run as u64))
    }

    #[test]
    fn mean_and_sample_std() {
        let s = MeanStd::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(MeanStd::of(&[0.3]).std, 0.0);
    }

    #[test]
    fn summarize_groups_by_cell() {
        let recs = vec![rec(0, 0.1, 0.2), rec(1, 0.2, 0.3)];
        let sum = summarize(&recs).unwrap();
        assert_eq!(sum.cells.len(), 1);
        let c = sum.get(ClassifierKind::Svm, Method::Sa, 50, 50).unwrap();
        assert_eq!(c.runs, 2);
        assert!((c.final_fitness.mean - 0.25).abs() < 1e-12);
        assert!((c.initial_fitness.mean - 0.15).abs() < 1e-12);
        let text = sum.render();
        assert!(text.contains("SVM"));
        assert!(text.contains("25.0"));
        // reference SVM / SA / 50 / 50 is 7.8
        assert!(text.contains("7.8"));
    }

    #[test]
    fn band_report_flags_cells() {
        let band = summarize(&[rec(0, 0.1, 0.2), rec(1, 0.1, 0.28)]).unwrap().band_report();
        assert!(band.final_band_ok());
        assert!(band.grand_mean_ok());
        assert!(band.initial_ok());
        let band = summarize(&[rec(0, 0.1, 0.2), rec(1, 0.1, 0.45)]).unwrap().band_report();
        assert!(!band.final_band_ok());
        assert!((band.grand_mean_final - 0.325).abs() < 1e-12);
        assert!(!band.grand_mean_ok());
        let band = summarize(&[rec(0, 0.02, 0.31)]).unwrap().band_report();
        assert_eq!(band.outside_final_band.len(), 1);
        assert!(!band.initial_ok());
    }

    #[test]
    fn empty_records_are_an_error() {
        assert!(matches!(summarize(&[]), Err(HarnessError::EmptyRecords)));
    }
}
