use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planspace::PlanLabel;

/// Binary confusion counts with "optimal" as the positive class, so a true
/// negative is a correctly flagged sub-optimal plan.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// Share of sub-optimal plans that were flagged: `tn / (tn + fp)`.
    pub fn suboptimal_accuracy(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    /// Share of optimal plans recognized as such: `tp / (tp + fn)`.
    pub fn optimal_accuracy(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn record(&mut self, predicted: PlanLabel, actual: PlanLabel) {
        match (predicted, actual) {
            (PlanLabel::Optimal, PlanLabel::Optimal) => self.tp += 1,
            (PlanLabel::SubOptimal, PlanLabel::SubOptimal) => self.tn += 1,
            (PlanLabel::Optimal, PlanLabel::SubOptimal) => self.fp += 1,
            (PlanLabel::SubOptimal, PlanLabel::Optimal) => self.fn_ += 1,
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn confusion(predictions: &[PlanLabel], labels: &[PlanLabel]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch(predictions.len(), labels.len()));
    }
    let mut m = ConfusionMatrix::default();
    for (&p, &a) in predictions.iter().zip(labels) {
        m.record(p, a);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use PlanLabel::{Optimal as O, SubOptimal as S};

    #[test]
    fn conventions() {
        let m = confusion(&[O, S, S], &[O, S, S]).unwrap();
        assert_eq!((m.fp, m.fn_, m.accuracy()), (0, 0, 1.0));
        let m = confusion(&[S, S], &[O, S]).unwrap();
        assert_eq!((m.tp, m.tn, m.fn_, m.fp), (0, 1, 1, 0));
        assert!(matches!(confusion(&[O], &[]), Err(Error::LengthMismatch(1, 0))));
    }

    #[test]
    fn published_matrix_accuracy() {
        let m = ConfusionMatrix {
            tp: 1022,
            tn: 242,
            fp: 63,
            fn_: 30,
        };
        assert_eq!(m.total(), 1357);
        assert_eq!(format!("{:.2}", 100.0 * m.accuracy()), "93.15");
    }
}
