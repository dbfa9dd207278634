//! CSV persistence of run records. Output is byte-identical for identical
//! records: fixed column order, fixed 4-decimal formatting, no timestamps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{HarnessError, Method, RunGroup, RunRecord, RunTiming};
use crate::classifiers::ClassifierKind;

pub const RECORD_COLUMNS: [&str; 10] = [
    "method",
    "classifier",
    "size",
    "iterations",
    "run",
    "initial_fitness",
    "final_fitness",
    "initial_label_accuracy",
    "final_label_accuracy",
    "seed",
];

pub const TIMING_COLUMNS: [&str; 6] = ["method", "classifier", "size", "iterations", "run", "wall_time_s"];

/// Round to the 4 decimals written to disk.
pub fn quantize(x: f64) -> f64 {
    format!("{x:.4}").parse().expect("formatted float parses")
}

fn record_row(r: &RunRecord) -> [String; 10] {
    [
        r.method.name().to_string(),
        r.kind.name().to_string(),
        r.size.to_string(),
        r.iterations.to_string(),
        r.run.to_string(),
        format!("{:.4}", r.initial_fitness),
        format!("{:.4}", r.final_fitness),
        format!("{:.4}", r.initial_label_accuracy),
        format!("{:.4}", r.final_label_accuracy),
        r.seed.to_string(),
    ]
}

fn timing_row(t: &RunTiming) -> [String; 6] {
    [
        t.group.method.name().to_string(),
        t.group.kind.name().to_string(),
        t.group.size.to_string(),
        t.iterations.to_string(),
        t.group.run.to_string(),
        format!("{:.3}", t.wall_time_s),
    ]
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serialize records to CSV text.
pub fn records_to_string(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record(record_row(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn emit_csv(path: &Path, records: &[RunRecord]) -> Result<(), HarnessError> {
    std::fs::write(path, records_to_string(records)).map_err(io_err(path))
}

pub fn emit_timings_csv(path: &Path, timings: &[RunTiming]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(TIMING_COLUMNS).map_err(|e| csv_err(path, e))?;
    for t in timings {
        w.write_record(timing_row(t)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path, line: u64) -> Result<T, HarnessError>
where
    T::Err: std::fmt::Display,
{
    let raw = rec
        .get(i)
        .ok_or_else(|| csv_err(path, format!("line {line}: missing column {}", RECORD_COLUMNS[i])))?;
    raw.parse::<T>()
        .map_err(|e| csv_err(path, format!("line {line}: column {}: {e}", RECORD_COLUMNS[i])))
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(RECORD_COLUMNS) {
        return Err(csv_err(path, format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let method: Method = field::<String>(&rec, 0, path, line)?
            .parse()
            .map_err(|e: HarnessError| csv_err(path, format!("line {line}: {e}")))?;
        let kind: ClassifierKind = field::<String>(&rec, 1, path, line)?
            .parse()
            .map_err(|e: crate::classifiers::ClassifierError| csv_err(path, format!("line {line}: {e}")))?;
        out.push(RunRecord {
            method,
            kind,
            size: field(&rec, 2, path, line)?,
            iterations: field(&rec, 3, path, line)?,
            run: field(&rec, 4, path, line)?,
            initial_fitness: field(&rec, 5, path, line)?,
            final_fitness: field(&rec, 6, path, line)?,
            initial_label_accuracy: field(&rec, 7, path, line)?,
            final_label_accuracy: field(&rec, 8, path, line)?,
            seed: field(&rec, 9, path, line)?,
        });
    }
    Ok(out)
}

/// Appends records and timings group by group, flushing after each so an
/// interrupted grid leaves a usable prefix on disk.
pub struct RecordWriter {
    records_path: PathBuf,
    records: BufWriter<File>,
    timings_path: PathBuf,
    timings: BufWriter<File>,
}

impl RecordWriter {
    /// Start `records.csv` and `timings.csv` in `dir`, rewriting `existing`
    /// records first.
    pub fn create(dir: &Path, existing: &[RunRecord]) -> Result<Self, HarnessError> {
        let records_path = dir.join("records.csv");
        let timings_path = dir.join("timings.csv");
        let mut records = BufWriter::new(File::create(&records_path).map_err(io_err(&records_path))?);
        records
            .write_all(records_to_string(existing).as_bytes())
            .map_err(io_err(&records_path))?;
        records.flush().map_err(io_err(&records_path))?;

        let keep_timings = !existing.is_empty() && timings_path.exists();
        let timings_file = if keep_timings {
            std::fs::OpenOptions::new().append(true).open(&timings_path)
        } else {
            File::create(&timings_path)
        }
        .map_err(io_err(&timings_path))?;
        let mut timings = BufWriter::new(timings_file);
        if !keep_timings {
            writeln!(timings, "{}", TIMING_COLUMNS.join(",")).map_err(io_err(&timings_path))?;
        }
        Ok(RecordWriter {
            records_path,
            records,
            timings_path,
            timings,
        })
    }

    pub fn append(&mut self, records: &[RunRecord], timings: &[RunTiming]) -> Result<(), HarnessError> {
        for r in records {
            writeln!(self.records, "{}", record_row(r).join(",")).map_err(io_err(&self.records_path))?;
        }
        self.records.flush().map_err(io_err(&self.records_path))?;
        for t in timings {
            writeln!(self.timings, "{}", timing_row(t).join(",")).map_err(io_err(&self.timings_path))?;
        }
        self.timings.flush().map_err(io_err(&self.timings_path))
    }
}

/// Records of one group, in the order they were written.
pub fn group_records<'a>(records: &'a [RunRecord], group: &RunGroup) -> Vec<&'a RunRecord> {
    records.iter().filter(|r| r.group() == *group).collect()
}
