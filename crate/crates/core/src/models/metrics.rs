use serde::{Deserialize, Serialize};

/// Binary confusion matrix with class 1 as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn record(&mut self, truth: u8, predicted: u8) {
        match (truth, predicted) {
            (1, 1) => self.tp += 1,
            (0, 1) => self.fp += 1,
            (1, _) => self.fn_ += 1,
            _ => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fold_count: usize,
    pub confusion: Confusion,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricsReport {
    /// Metrics of a pooled confusion matrix. Undefined ratios report 0.
    pub fn from_confusion(c: Confusion, fold_count: usize) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        MetricsReport {
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision,
            recall,
            f1,
            fold_count,
            confusion: c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_confusion() {
        let m = MetricsReport::from_confusion(Confusion { tp: 2, fp: 1, fn_: 1, tn: 2 }, 1);
        assert_eq!(m.precision, 2.0 / 3.0);
        assert_eq!(m.recall, 2.0 / 3.0);
        assert_eq!(m.accuracy, 4.0 / 6.0);
        assert_eq!(m.f1, 2.0 * (2.0 / 3.0) * (2.0 / 3.0) / (4.0 / 3.0));
    }

    #[test]
    fn degenerate_matrices() {
        let none_predicted = MetricsReport::from_confusion(Confusion { tp: 0, fp: 0, fn_: 3, tn: 5 }, 1);
        assert_eq!(none_predicted.precision, 0.0);
        assert_eq!(none_predicted.f1, 0.0);
        assert_eq!(none_predicted.accuracy, 5.0 / 8.0);
        let empty = MetricsReport::from_confusion(Confusion::default(), 0);
        assert_eq!(empty.accuracy, 0.0);
    }
}
