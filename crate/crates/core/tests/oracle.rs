use labelmine::classifiers::ClassifierKind;
use labelmine::harness::oracle::{brute_force_oracle, oracle_problem, run_oracle_trials};
use labelmine::{HarnessError, RandomSeed};
use labelmine::dataset::synthetic_split;

#[test]
fn engines_find_the_exhaustive_optimum() {
    let t = run_oracle_trials(RandomSeed(2024), 20).unwrap();
    assert_eq!(t.oracle.evaluated, 64);
    assert!(t.oracle.best_fitness >= t.true_label_fitness);
    assert!(t.ga_passes(), "ga {}/{}", t.ga_hits, t.trials);
    assert!(t.sa_passes(), "sa {}/{}", t.sa_hits, t.trials);
}

#[test]
fn oracle_counts_match_search_space() {
    let split = synthetic_split(2, 4, 2, 3, 0.5, RandomSeed(9)).unwrap();
    assert_eq!(brute_force_oracle(&split, ClassifierKind::Centroid).unwrap().evaluated, 4);
    let split = synthetic_split(6, 9, 3, 4, 0.5, RandomSeed(9)).unwrap();
    assert_eq!(brute_force_oracle(&split, ClassifierKind::Centroid).unwrap().evaluated, 729);
    let split = oracle_problem(RandomSeed(1)).unwrap();
    assert_eq!(brute_force_oracle(&split, ClassifierKind::Centroid).unwrap().evaluated, 64);
}

#[test]
fn oracle_refuses_oversized_problems() {
    let split = synthetic_split(30, 6, 3, 4, 0.5, RandomSeed(5)).unwrap();
    match brute_force_oracle(&split, ClassifierKind::Centroid) {
        Err(HarnessError::OracleGuard { count }) => assert_eq!(count, 3u128.pow(30).to_string()),
        other => panic!("expected the guard to fire, got {other:?}"),
    }
}
