//! Labeling codes and the operators that transform them.
//!
//! A labeling code assigns one class index to every instance of a dataset.
//! It is the genome of the genetic search and the state of the annealer.

use rand::seq::index;
use rand::Rng;

use crate::seed::RandomSeed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabelError {
    #[error("a problem needs at least one instance (got L = {0})")]
    NoInstances(usize),
    #[error("a problem needs at least two classes (got C = {0})")]
    TooFewClasses(usize),
    #[error("label {label} at position {position} is outside [0, {num_classes})")]
    LabelOutOfRange {
        position: usize,
        label: usize,
        num_classes: usize,
    },
    #[error("labeling codes differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("mutation fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("neighbor radius must be at least 1")]
    ZeroRadius,
    #[error("segment [{start}, {start}+{len}) does not fit in a code of length {code_len}")]
    SegmentOutOfBounds {
        start: usize,
        len: usize,
        code_len: usize,
    },
}

/// Size of a labeling problem: `L` instances, each taking one of `C` classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSpec {
    num_instances: usize,
    num_classes: usize,
}

impl ProblemSpec {
    pub fn new(num_instances: usize, num_classes: usize) -> Result<Self, LabelError> {
        if num_instances == 0 {
            return Err(LabelError::NoInstances(num_instances));
        }
        if num_classes < 2 {
            return Err(LabelError::TooFewClasses(num_classes));
        }
        Ok(ProblemSpec {
            num_instances,
            num_classes,
        })
    }

    pub fn num_instances(&self) -> usize {
        self.num_instances
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// `C^L` when it fits in a `u128`.
    pub fn search_space_size(&self) -> Option<u128> {
        let exp = u32::try_from(self.num_instances).ok()?;
        (self.num_classes as u128).checked_pow(exp)
    }

    /// `log10(C^L)`, always representable.
    pub fn search_space_log10(&self) -> f64 {
        self.num_instances as f64 * (self.num_classes as f64).log10()
    }
}

/// A vector of class indices, one per instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelingCode {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelingCode {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self, LabelError> {
        if num_classes < 2 {
            return Err(LabelError::TooFewClasses(num_classes));
        }
        if let Some((position, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes)
        {
            return Err(LabelError::LabelOutOfRange {
                position,
                label,
                num_classes,
            });
        }
        Ok(LabelingCode {
            labels,
            num_classes,
        })
    }

    /// Each label drawn independently and uniformly from `[0, C)`.
    pub fn random(spec: &ProblemSpec, seed: RandomSeed) -> Self {
        let mut rng = seed.rng();
        let labels = (0..spec.num_instances)
            .map(|_| rng.random_range(0..spec.num_classes))
            .collect();
        LabelingCode {
            labels,
            num_classes: spec.num_classes,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Per-class label counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &label in &self.labels {
            counts[label] += 1;
        }
        counts
    }

    /// Reorder positions: output position `i` takes the label at `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        LabelingCode {
            labels: order.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }
}

fn check_lengths(a: &LabelingCode, b: &LabelingCode) -> Result<(), LabelError> {
    if a.len() != b.len() {
        return Err(LabelError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Fraction of positions where `code` agrees with `ground_truth`.
pub fn label_accuracy(code: &LabelingCode, ground_truth: &LabelingCode) -> Result<f64, LabelError> {
    check_lengths(code, ground_truth)?;
    if code.is_empty() {
        return Ok(0.0);
    }
    let agree = code
        .labels
        .iter()
        .zip(&ground_truth.labels)
        .filter(|(a, b)| a == b)
        .count();
    Ok(agree as f64 / code.len() as f64)
}

pub fn hamming_distance(a: &LabelingCode, b: &LabelingCode) -> Result<usize, LabelError> {
    check_lengths(a, b)?;
    Ok(a.labels.iter().zip(&b.labels).filter(|(x, y)| x != y).count())
}

/// Half-way merge: both parents are cut at `floor(L/2)` and the opposing
/// halves swapped.
pub fn crossover_half(
    parent_a: &LabelingCode,
    parent_b: &LabelingCode,
) -> Result<(LabelingCode, LabelingCode), LabelError> {
    check_lengths(parent_a, parent_b)?;
    let mid = parent_a.len() / 2;
    let num_classes = parent_a.num_classes.max(parent_b.num_classes);
    let splice = |head: &LabelingCode, tail: &LabelingCode| LabelingCode {
        labels: head.labels[..mid]
            .iter()
            .chain(&tail.labels[mid..])
            .copied()
            .collect(),
        num_classes,
    };
    Ok((splice(parent_a, parent_b), splice(parent_b, parent_a)))
}

/// Length of the segment reversed by [`mutate_inversion`].
pub fn inversion_length(code_len: usize, fraction: f64) -> usize {
    ((fraction * code_len as f64).round() as usize)
        .max(2)
        .min(code_len)
}

/// Reverse `code[start..start + len]`.
pub fn reverse_segment(
    code: &LabelingCode,
    start: usize,
    len: usize,
) -> Result<LabelingCode, LabelError> {
    if start + len > code.len() {
        return Err(LabelError::SegmentOutOfBounds {
            start,
            len,
            code_len: code.len(),
        });
    }
    let mut out = code.clone();
    out.labels[start..start + len].reverse();
    Ok(out)
}

/// Gene-order inversion: one contiguous segment of
/// `max(2, round(fraction * L))` labels, at a uniformly drawn start, is
/// reversed. Codes shorter than two labels come back unchanged.
pub fn mutate_inversion(
    code: &LabelingCode,
    fraction: f64,
    seed: RandomSeed,
) -> Result<LabelingCode, LabelError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(LabelError::InvalidFraction(fraction));
    }
    if code.len() < 2 {
        return Ok(code.clone());
    }
    let len = inversion_length(code.len(), fraction);
    let start = seed.rng().random_range(0..=code.len() - len);
    reverse_segment(code, start, len)
}

/// Random modification within a Hamming ball: between 1 and
/// `min(radius, L)` distinct positions (count drawn uniformly) each receive
/// a uniformly drawn label different from the one they had.
pub fn neighbor(
    code: &LabelingCode,
    radius: usize,
    seed: RandomSeed,
) -> Result<LabelingCode, LabelError> {
    if radius == 0 {
        return Err(LabelError::ZeroRadius);
    }
    let mut out = code.clone();
    if code.is_empty() {
        return Ok(out);
    }
    let mut rng = seed.rng();
    let bound = radius.min(code.len());
    let changes = rng.random_range(1..=bound);
    for position in index::sample(&mut rng, code.len(), changes) {
        let old = out.labels[position];
        let draw = rng.random_range(0..code.num_classes - 1);
        out.labels[position] = if draw >= old { draw + 1 } else { draw };
    }
    Ok(out)
}

/// A rule for proposing codes near a base code.
pub trait Neighborhood: Sync {
    fn propose(&self, base: &LabelingCode, seed: RandomSeed) -> Result<LabelingCode, LabelError>;
}

/// Proposals within a Hamming radius, via [`neighbor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HammingBall {
    pub radius: usize,
}

impl Neighborhood for HammingBall {
    fn propose(&self, base: &LabelingCode, seed: RandomSeed) -> Result<LabelingCode, LabelError> {
        neighbor(base, self.radius, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code(labels: &[usize], c: usize) -> LabelingCode {
        LabelingCode::new(labels.to_vec(), c).unwrap()
    }

    #[test]
    fn spec_rejects_degenerate_sizes() {
        assert_eq!(ProblemSpec::new(0, 10), Err(LabelError::NoInstances(0)));
        assert_eq!(ProblemSpec::new(5, 1), Err(LabelError::TooFewClasses(1)));
        let spec = ProblemSpec::new(200, 10).unwrap();
        assert_eq!(spec.search_space_size(), None);
        assert!((spec.search_space_log10() - 200.0).abs() < 1e-9);
        assert_eq!(ProblemSpec::new(6, 2).unwrap().search_space_size(), Some(64));
    }

    #[test]
    fn code_rejects_out_of_alphabet_labels() {
        let err = LabelingCode::new(vec![0, 3, 1], 3).unwrap_err();
        assert_eq!(
            err,
            LabelError::LabelOutOfRange {
                position: 1,
                label: 3,
                num_classes: 3
            }
        );
    }

    #[test]
    fn single_instance_binary_code() {
        for s in 0..20 {
            let c = LabelingCode::random(&ProblemSpec::new(1, 2).unwrap(), RandomSeed(s));
            assert_eq!(c.len(), 1);
            assert!(c.labels()[0] < 2);
        }
    }

    #[test]
    fn random_code_is_seed_deterministic() {
        let spec = ProblemSpec::new(200, 10).unwrap();
        assert_eq!(
            LabelingCode::random(&spec, RandomSeed(9)),
            LabelingCode::random(&spec, RandomSeed(9))
        );
        assert_ne!(
            LabelingCode::random(&spec, RandomSeed(9)),
            LabelingCode::random(&spec, RandomSeed(10))
        );
    }

    #[test]
    fn random_code_class_frequencies_are_uniform() {
        let spec = ProblemSpec::new(10_000, 10).unwrap();
        let counts = LabelingCode::random(&spec, RandomSeed(1234)).class_counts();
        for (class, &n) in counts.iter().enumerate() {
            let freq = n as f64 / 10_000.0;
            assert!((freq - 0.10).abs() <= 0.01, "class {class}: {freq}");
        }
        // Chi-square against uniform, 9 dof; 27.88 is the 0.001 critical value.
        let chi2: f64 = counts
            .iter()
            .map(|&n| (n as f64 - 1000.0).powi(2) / 1000.0)
            .sum();
        assert!(chi2 < 27.88, "chi2 = {chi2}");
    }

    #[test]
    fn label_accuracy_counts_agreement() {
        let truth = code(&[0, 1, 2, 3], 10);
        assert_eq!(label_accuracy(&truth, &truth).unwrap(), 1.0);
        assert_eq!(label_accuracy(&code(&[0, 1, 9, 9], 10), &truth).unwrap(), 0.5);
        assert!(matches!(
            label_accuracy(&code(&[0, 1], 10), &truth),
            Err(LabelError::LengthMismatch { left: 2, right: 4 })
        ));
    }

    #[test]
    fn random_code_accuracy_is_chance() {
        let truth = code(&(0..200).map(|i| i % 10).collect::<Vec<_>>(), 10);
        let spec = ProblemSpec::new(200, 10).unwrap();
        let accs: Vec<f64> = (0..1000)
            .map(|s| label_accuracy(&LabelingCode::random(&spec, RandomSeed(s)), &truth).unwrap())
            .collect();
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!((mean - 0.10).abs() < 0.005, "mean {mean}");
        let single = accs[0];
        assert!((single - 0.10).abs() <= 0.07, "single draw {single}");
    }

    #[test]
    fn crossover_examples() {
        let (c1, c2) = crossover_half(&code(&[0, 1, 2, 3], 10), &code(&[9, 8, 7, 6], 10)).unwrap();
        assert_eq!(c1.labels(), &[0, 1, 7, 6]);
        assert_eq!(c2.labels(), &[9, 8, 2, 3]);

        let a = code(&[3, 1, 4, 1, 5], 10);
        let (c1, c2) = crossover_half(&a, &a).unwrap();
        assert_eq!(c1, a);
        assert_eq!(c2, a);

        let (c1, _) = crossover_half(&code(&[1; 5], 3), &code(&[2; 5], 3)).unwrap();
        assert_eq!(c1.labels(), &[1, 1, 2, 2, 2]);

        assert!(crossover_half(&code(&[1; 5], 3), &code(&[2; 4], 3)).is_err());
    }

    #[test]
    fn inversion_examples() {
        let c = code(&[0, 1, 2, 3, 4, 5], 10);
        assert_eq!(reverse_segment(&c, 1, 3).unwrap().labels(), &[0, 3, 2, 1, 4, 5]);
        assert!(reverse_segment(&c, 4, 3).is_err());

        let flat = code(&[4; 30], 10);
        assert_eq!(mutate_inversion(&flat, 0.1, RandomSeed(3)).unwrap(), flat);

        let one = code(&[1], 2);
        assert_eq!(mutate_inversion(&one, 0.5, RandomSeed(3)).unwrap(), one);

        assert!(matches!(
            mutate_inversion(&c, 0.0, RandomSeed(0)),
            Err(LabelError::InvalidFraction(_))
        ));
        assert!(mutate_inversion(&c, 1.5, RandomSeed(0)).is_err());
    }

    #[test]
    fn inversion_length_rules() {
        assert_eq!(inversion_length(200, 0.10), 20);
        assert_eq!(inversion_length(6, 0.10), 2);
        assert_eq!(inversion_length(6, 1.0), 6);
        assert_eq!(inversion_length(2, 0.01), 2);
    }

    #[test]
    fn inversion_reverses_exactly_one_segment() {
        let spec = ProblemSpec::new(50, 10).unwrap();
        for s in 0..200 {
            let c = LabelingCode::random(&spec, RandomSeed(s));
            let m = mutate_inversion(&c, 0.2, RandomSeed(s + 1_000)).unwrap();
            let found = (0..=40).any(|start| reverse_segment(&c, start, 10).unwrap() == m);
            assert!(found, "seed {s}");
        }
    }

    #[test]
    fn neighbor_examples() {
        let spec = ProblemSpec::new(30, 10).unwrap();
        let base = LabelingCode::random(&spec, RandomSeed(5));
        for s in 0..100 {
            let n = neighbor(&base, 1, RandomSeed(s)).unwrap();
            assert_eq!(hamming_distance(&base, &n).unwrap(), 1);
        }

        let binary = code(&[0, 1, 1, 0, 1, 0, 0, 1], 2);
        for s in 0..100 {
            let n = neighbor(&binary, binary.len(), RandomSeed(s)).unwrap();
            for (old, new) in binary.labels().iter().zip(n.labels()) {
                assert!(old == new || *new == 1 - *old);
            }
        }

        let mut seen = std::collections::BTreeSet::new();
        for s in 0..1000 {
            let n = neighbor(&base, 5, RandomSeed(s)).unwrap();
            let d = hamming_distance(&base, &n).unwrap();
            assert!((1..=5).contains(&d));
            seen.insert(d);
        }
        assert_eq!(seen.len(), 5);

        assert_eq!(neighbor(&base, 0, RandomSeed(0)), Err(LabelError::ZeroRadius));
    }

    #[test]
    fn neighbor_radius_is_clamped_to_length() {
        let c = code(&[0, 1, 2], 4);
        for s in 0..50 {
            let n = neighbor(&c, 100, RandomSeed(s)).unwrap();
            let d = hamming_distance(&c, &n).unwrap();
            assert!((1..=3).contains(&d));
        }
    }

    #[test]
    fn hamming_examples() {
        let a = code(&[0, 1, 2], 10);
        assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        assert_eq!(hamming_distance(&a, &code(&[0, 9, 9], 10)).unwrap(), 2);
        assert!(hamming_distance(&a, &code(&[0], 10)).is_err());
    }

    fn arb_code() -> impl Strategy<Value = LabelingCode> {
        (2usize..12).prop_flat_map(|c| {
            prop::collection::vec(0..c, 1..80).prop_map(move |v| LabelingCode::new(v, c).unwrap())
        })
    }

    fn arb_pair() -> impl Strategy<Value = (LabelingCode, LabelingCode)> {
        (2usize..12, 1usize..80).prop_flat_map(|(c, l)| {
            let side = move || prop::collection::vec(0..c, l).prop_map(move |v| LabelingCode::new(v, c).unwrap());
            (side(), side())
        })
    }

    fn is_valid(code: &LabelingCode, len: usize) -> bool {
        code.len() == len && code.labels().iter().all(|&l| l < code.num_classes())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn inversion_preserves_multiset(c in arb_code(), frac in 0.01f64..=1.0, s in any::<u64>()) {
            let m = mutate_inversion(&c, frac, RandomSeed(s)).unwrap();
            prop_assert!(is_valid(&m, c.len()));
            prop_assert_eq!(m.class_counts(), c.class_counts());
            prop_assert_eq!(&m, &mutate_inversion(&c, frac, RandomSeed(s)).unwrap());
        }

        #[test]
        fn crossover_is_positionwise_exact((a, b) in arb_pair()) {
            let (c1, c2) = crossover_half(&a, &b).unwrap();
            let mid = a.len() / 2;
            prop_assert!(is_valid(&c1, a.len()) && is_valid(&c2, a.len()));
            for i in 0..a.len() {
                let (from1, from2) = if i < mid { (&a, &b) } else { (&b, &a) };
                prop_assert_eq!(c1.labels()[i], from1.labels()[i]);
                prop_assert_eq!(c2.labels()[i], from2.labels()[i]);
            }
        }

        #[test]
        fn neighbor_stays_in_ball(c in arb_code(), r in 1usize..10, s in any::<u64>()) {
            let n = neighbor(&c, r, RandomSeed(s)).unwrap();
            prop_assert!(is_valid(&n, c.len()));
            let d = hamming_distance(&c, &n).unwrap();
            prop_assert!(d >= 1 && d <= r.min(c.len()));
            prop_assert_eq!(&n, &neighbor(&c, r, RandomSeed(s)).unwrap());
        }

        #[test]
        fn hamming_is_symmetric((a, b) in arb_pair()) {
            let d = hamming_distance(&a, &b).unwrap();
            prop_assert_eq!(d, hamming_distance(&b, &a).unwrap());
            prop_assert_eq!(d == 0, a == b);
        }
    }
}
