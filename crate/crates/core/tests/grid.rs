mod common;

use labelmine::classifiers::ClassifierKind;
use labelmine::dataset::synthetic_split;
use labelmine::harness::{read_csv, run_grid, run_grid_on_split, GridConfig, Method};
use labelmine::RandomSeed;

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("labelmine-it-{name}-{}", std::process::id()))
}

#[test]
fn synthetic_grid_csv_is_byte_identical_across_runs() {
    let split = synthetic_split(30, 20, 3, 12, 0.2, RandomSeed(8)).unwrap();
    let grid = GridConfig {
        kinds: vec![ClassifierKind::Mlp, ClassifierKind::Svm, ClassifierKind::Rf],
        sizes: vec![4, 6],
        iterations: vec![1, 2],
        runs_per_cell: 2,
        ..GridConfig::full("unused", "unused", RandomSeed(99))
    };
    let (a, b) = (tmp("det-a"), tmp("det-b"));
    let first = run_grid_on_split(&grid, &split, Some(&a)).unwrap();
    run_grid_on_split(&grid, &split, Some(&b)).unwrap();
    let text = std::fs::read(a.join("records.csv")).unwrap();
    assert_eq!(text, std::fs::read(b.join("records.csv")).unwrap());
    assert_eq!(first.records.len(), grid.expected_records());
    assert_eq!(read_csv(&a.join("records.csv")).unwrap(), first.records);
    // 3 kinds x 3 methods x 2 sizes x 2 runs x 2 budgets, plus the header
    assert_eq!(String::from_utf8(text).unwrap().lines().count(), 72 + 1);
    for d in [a, b] {
        std::fs::remove_dir_all(d).unwrap();
    }
}

#[test]
fn different_master_seeds_give_different_runs() {
    let split = synthetic_split(30, 20, 3, 12, 0.2, RandomSeed(8)).unwrap();
    let base = GridConfig {
        methods: vec![Method::Sa],
        kinds: vec![ClassifierKind::Svm],
        sizes: vec![5],
        iterations: vec![2],
        runs_per_cell: 1,
        ..GridConfig::full("unused", "unused", RandomSeed(1))
    };
    let other = GridConfig {
        master_seed: RandomSeed(2),
        ..base.clone()
    };
    let a = run_grid_on_split(&base, &split, None).unwrap().records;
    let b = run_grid_on_split(&other, &split, None).unwrap().records;
    assert_ne!(a[0].seed, b[0].seed);
}

#[test]
fn mnist_grid_writes_records_and_summary() {
    let Some(dir) = common::mnist_dir() else {
        eprintln!("MNIST files not found; skipping");
        return;
    };
    let out = tmp("mnist");
    let grid = GridConfig {
        methods: vec![Method::GaElitism, Method::Sa],
        kinds: vec![ClassifierKind::Svm],
        sizes: vec![4],
        iterations: vec![1, 2],
        runs_per_cell: 1,
        ..GridConfig::full(dir, &out, RandomSeed(5))
    };
    let outcome = run_grid(&grid).unwrap();
    assert!(outcome.failures.is_empty());
    assert_eq!(outcome.records.len(), 4);
    for r in &outcome.records {
        assert!((0.0..=1.0).contains(&r.final_fitness));
        assert!((0.0..=1.0).contains(&r.final_label_accuracy));
    }
    assert!(std::fs::read_to_string(out.join("summary.txt")).unwrap().contains("SVM"));
    assert_eq!(std::fs::read_to_string(out.join("timings.csv")).unwrap().lines().count(), 5);
    std::fs::remove_dir_all(out).unwrap();
}
