//! Random forest of Gini-split decision trees with bootstrap rows and
//! per-split feature subsampling. Prediction is a majority vote.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::argmax;
use crate::dataset::FeatureMatrix;
use crate::seed::{tag, RandomSeed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    /// `floor(sqrt(D))`, at least one.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, dims: usize) -> usize {
        let n = match self {
            MaxFeatures::Sqrt => (dims as f64).sqrt() as usize,
            MaxFeatures::All => dims,
            MaxFeatures::Count(n) => n,
        };
        n.clamp(1, dims.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub trees: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 25,
            max_depth: Some(8),
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub classes: usize,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn predict(&self, features: &FeatureMatrix) -> Vec<usize> {
        let mut votes = vec![0.0; self.classes];
        features
            .iter_rows()
            .map(|row| {
                votes.iter_mut().for_each(|v| *v = 0.0);
                for tree in &self.trees {
                    votes[tree.predict_row(row)] += 1.0;
                }
                argmax(&votes)
            })
            .collect()
    }
}

struct Builder<'a> {
    features: &'a FeatureMatrix,
    labels: &'a [usize],
    classes: usize,
    max_depth: usize,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    pairs: Vec<(f64, usize)>,
    order: Vec<usize>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Builder<'_> {
    fn majority(&self, samples: &[usize]) -> usize {
        let mut counts = vec![0.0; self.classes];
        for &s in samples {
            counts[self.labels[s]] += 1.0;
        }
        argmax(&counts)
    }

    fn best_split(&mut self, samples: &[usize]) -> Option<BestSplit> {
        let dims = self.features.cols();
        let n = samples.len() as f64;
        let mut best: Option<BestSplit> = None;
        let mut left = vec![0usize; self.classes];
        let mut right = vec![0usize; self.classes];
        // Features are drawn without replacement until `mtry` non-constant
        // ones have been scored; constant features do not use up the quota.
        let mut scored = 0;
        for drawn in 0..dims {
            if scored == self.mtry {
                break;
            }
            let pick = self.rng.random_range(drawn..dims);
            self.order.swap(drawn, pick);
            let feature = self.order[drawn];
            self.pairs.clear();
            self.pairs.extend(
                samples
                    .iter()
                    .map(|&s| (self.features.row(s)[feature], self.labels[s])),
            );
            let (lo, hi) = self
                .pairs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(v, _)| (lo.min(v), hi.max(v)));
            if lo == hi {
                continue;
            }
            scored += 1;
            self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0);
            right.iter_mut().for_each(|c| *c = 0);
            for &(_, y) in &self.pairs {
                right[y] += 1;
            }
            let mut sq_left = 0.0;
            let mut sq_right: f64 = right.iter().map(|&c| (c * c) as f64).sum();
            for k in 0..self.pairs.len() - 1 {
                let y = self.pairs[k].1;
                sq_left += (2 * left[y] + 1) as f64;
                sq_right -= (2 * right[y] - 1) as f64;
                left[y] += 1;
                right[y] -= 1;
                let (v, next) = (self.pairs[k].0, self.pairs[k + 1].0);
                if v == next {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                // n * weighted Gini
                let impurity = nl - sq_left / nl + nr - sq_right / nr;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mid = v + (next - v) / 2.0;
                    best = Some(BestSplit {
                        feature,
                        threshold: if mid < next { mid } else { v },
                        impurity,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, samples: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let first = self.labels[samples[0]];
        let pure = samples.iter().all(|&s| self.labels[s] == first);
        if pure || depth >= self.max_depth || samples.len() < 2 {
            let class = self.majority(samples);
            self.nodes.push(Node::Leaf { class });
            return id;
        }
        let Some(split) = self.best_split(samples) else {
            let class = self.majority(samples);
            self.nodes.push(Node::Leaf { class });
            return id;
        };
        self.nodes.push(Node::Leaf { class: 0 });
        let mut cut = 0;
        for i in 0..samples.len() {
            if self.features.row(samples[i])[split.feature] <= split.threshold {
                samples.swap(i, cut);
                cut += 1;
            }
        }
        let (lo, hi) = samples.split_at_mut(cut);
        let left = self.grow(lo, depth + 1);
        let right = self.grow(hi, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

pub fn train(
    config: &ForestConfig,
    train: &FeatureMatrix,
    labels: &[usize],
    num_classes: usize,
    seed: RandomSeed,
) -> ForestModel {
    let n = train.rows();
    let trees = (0..config.trees.max(1))
        .map(|t| {
            let mut rng = seed.derive(&[tag::TREE, t as u64]).rng();
            let mut samples: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = Builder {
                features: train,
                labels,
                classes: num_classes,
                max_depth: config.max_depth.unwrap_or(usize::MAX),
                mtry: config.max_features.resolve(train.cols()),
                rng,
                nodes: Vec::new(),
                pairs: Vec::with_capacity(n),
                order: (0..train.cols()).collect(),
            };
            builder.grow(&mut samples, 0);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();
    ForestModel {
        classes: num_classes,
        trees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::make_synthetic;
    use crate::labelcodes::{LabelingCode, ProblemSpec};

    #[test]
    fn single_full_tree_memorizes_consistent_data() {
        let set = make_synthetic(80, 4, 10, 0.05, RandomSeed(1)).unwrap();
        // arbitrary labels on distinct rows are still consistent
        let labels = LabelingCode::random(&ProblemSpec::new(80, 4).unwrap(), RandomSeed(2));
        let config = ForestConfig {
            trees: 1,
            max_depth: None,
            max_features: MaxFeatures::All,
            bootstrap: false,
        };
        let model = train(&config, &set.features, labels.labels(), 4, RandomSeed(3));
        assert_eq!(model.predict(&set.features), labels.labels());
    }

    #[test]
    fn depth_limit_is_respected() {
        let set = make_synthetic(120, 5, 16, 0.05, RandomSeed(4)).unwrap();
        let labels = LabelingCode::random(&ProblemSpec::new(120, 5).unwrap(), RandomSeed(5));
        let model = train(&ForestConfig::default(), &set.features, labels.labels(), 5, RandomSeed(6));
        assert_eq!(model.trees.len(), 25);
        assert!(model.trees.iter().all(|t| t.depth() <= 8));
    }

    #[test]
    fn sqrt_feature_count() {
        assert_eq!(MaxFeatures::Sqrt.resolve(784), 28);
        assert_eq!(MaxFeatures::Sqrt.resolve(2), 1);
        assert_eq!(MaxFeatures::Count(50).resolve(10), 10);
    }
}
