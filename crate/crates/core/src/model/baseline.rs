//! Decision tree over the scalar L1 aggregate alone.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planspace::PlanLabel;
use crate::seed::StableHasher;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        label: PlanLabel,
    },
    /// Values `<= threshold` go left.
    Split {
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn predict(&self, x: f64) -> PlanLabel {
        match self {
            TreeNode::Leaf { label } => *label,
            TreeNode::Split { threshold, left, right } => {
                if x <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    /// Depth limit picked by cross-validation.
    pub max_depth: usize,
    pub cv_accuracy: f64,
}

impl DecisionTree {
    pub fn predict(&self, l1: f64) -> PlanLabel {
        self.root.predict(l1)
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

fn gini(sub: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = sub as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn majority(sub: usize, n: usize) -> PlanLabel {
    if 2 * sub > n {
        PlanLabel::SubOptimal
    } else {
        PlanLabel::Optimal
    }
}

/// `data` sorted by value.
fn grow(data: &[(f64, bool)], depth: usize) -> TreeNode {
    let n = data.len();
    let sub = data.iter().filter(|d| d.1).count();
    let leaf = TreeNode::Leaf {
        label: majority(sub, n),
    };
    if depth == 0 || sub == 0 || sub == n {
        return leaf;
    }
    let parent = gini(sub, n);
    let mut best: Option<(f64, usize)> = None;
    let mut left_sub = 0;
    for i in 1..n {
        left_sub += usize::from(data[i - 1].1);
        if data[i - 1].0 == data[i].0 {
            continue;
        }
        let impurity = (i as f64 * gini(left_sub, i) + (n - i) as f64 * gini(sub - left_sub, n - i)) / n as f64;
        if best.is_none_or(|(b, _)| impurity < b) {
            best = Some((impurity, i));
        }
    }
    match best {
        Some((impurity, i)) if impurity < parent - 1e-12 => TreeNode::Split {
            threshold: 0.5 * (data[i - 1].0 + data[i].0),
            left: Box::new(grow(&data[..i], depth - 1)),
            right: Box::new(grow(&data[i..], depth - 1)),
        },
        _ => leaf,
    }
}

fn fit(l1: &[f64], labels: &[PlanLabel], idx: &[usize], depth: usize) -> TreeNode {
    let mut data: Vec<(f64, bool)> = idx
        .iter()
        .map(|&i| (l1[i], labels[i] == PlanLabel::SubOptimal))
        .collect();
    data.sort_by(|a, b| a.0.total_cmp(&b.0));
    grow(&data, depth)
}

/// Picks the depth from `max_depth_grid` with the best `folds`-fold
/// cross-validated accuracy (ties go to the shallower tree) and refits on
/// all data.
pub fn train_baseline_dt(
    l1: &[f64],
    labels: &[PlanLabel],
    max_depth_grid: &[usize],
    folds: usize,
    seed: u64,
) -> Result<DecisionTree> {
    if l1.len() != labels.len() {
        return Err(Error::LengthMismatch(l1.len(), labels.len()));
    }
    if l1.is_empty() {
        return Err(Error::Training("no examples for the decision tree".into()));
    }
    if max_depth_grid.is_empty() {
        return Err(Error::Config("empty depth grid".into()));
    }
    let n = l1.len();
    let folds = folds.clamp(2, n.max(2));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut StableHasher::new(seed).str("cv").rng());

    let mut grid = max_depth_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut best: Option<(f64, usize)> = None;
    for &depth in &grid {
        let mut correct = 0;
        for f in 0..folds {
            let (test, train): (Vec<(usize, usize)>, Vec<(usize, usize)>) =
                idx.iter().copied().enumerate().partition(|(pos, _)| pos % folds == f);
            let train: Vec<usize> = train.into_iter().map(|(_, i)| i).collect();
            if train.is_empty() {
                continue;
            }
            let tree = fit(l1, labels, &train, depth);
            correct += test.iter().filter(|(_, i)| tree.predict(l1[*i]) == labels[*i]).count();
        }
        let acc = correct as f64 / n as f64;
        if best.is_none_or(|(b, _)| acc > b) {
            best = Some((acc, depth));
        }
    }
    let (cv_accuracy, max_depth) = best.expect("nonempty grid");
    Ok(DecisionTree {
        root: fit(l1, labels, &(0..n).collect::<Vec<_>>(), max_depth),
        max_depth,
        cv_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use PlanLabel::{Optimal as O, SubOptimal as S};

    #[test]
    fn separable_data_gives_a_stump() {
        let l1 = [0.0, 1.0, 2.0, 2.5, 6.0, 7.0, 8.0, 9.5];
        let labels = [O, O, O, O, S, S, S, S];
        let dt = train_baseline_dt(&l1, &labels, &[1, 2, 3, 4], 4, 0).unwrap();
        assert_eq!(dt.max_depth, 1);
        assert_eq!(dt.depth(), 1);
        assert!(l1.iter().zip(&labels).all(|(&x, &y)| dt.predict(x) == y));
    }

    #[test]
    fn constant_feature_predicts_the_majority() {
        let l1 = [3.0; 7];
        let labels = [S, S, S, S, O, O, O];
        let dt = train_baseline_dt(&l1, &labels, &[1, 3], 3, 0).unwrap();
        assert_eq!(dt.depth(), 0);
        assert_eq!(dt.predict(3.0), S);
    }

    #[test]
    fn errors_and_determinism() {
        assert!(train_baseline_dt(&[], &[], &[1], 5, 0).is_err());
        assert!(train_baseline_dt(&[1.0], &[], &[1], 5, 0).is_err());
        let l1: Vec<f64> = (0..60).map(|i| ((i * 37) % 23) as f64).collect();
        let labels: Vec<_> = l1.iter().map(|&x| if (x as i64 % 7) < 3 { S } else { O }).collect();
        let a = train_baseline_dt(&l1, &labels, &[1, 2, 3, 4, 5], 5, 9).unwrap();
        let b = train_baseline_dt(&l1, &labels, &[1, 2, 3, 4, 5], 5, 9).unwrap();
        assert_eq!(a, b);
    }
}
