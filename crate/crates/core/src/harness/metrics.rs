use serde::{Deserialize, Serialize};

use crate::dataset::MotionVocabulary;
use crate::error::{Error, Result};

/// Frame-level results of one fold. Confusion rows are true classes.
///
/// Group accuracies are macro averages of per-class recall over the classes
/// of that group that have test frames; `None` when the group is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub fold: usize,
    pub seed: u64,
    pub confusion: Vec<Vec<u64>>,
    pub per_class_accuracy: Vec<Option<f64>>,
    pub basic_accuracy: Option<f64>,
    pub combined_accuracy: Option<f64>,
    pub overall_accuracy: Option<f64>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

impl Metrics {
    pub fn from_predictions(
        vocab: &MotionVocabulary,
        truth: &[usize],
        predicted: &[usize],
        fold: usize,
        seed: u64,
    ) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                actual: predicted.len(),
            });
        }
        let n = vocab.len();
        let mut confusion = vec![vec![0u64; n]; n];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= n || p >= n {
                return Err(Error::Experiment(format!(
                    "class index out of range 0..{n}"
                )));
            }
            confusion[t][p] += 1;
        }
        Ok(Self::from_confusion(vocab, confusion, fold, seed))
    }

    pub fn from_confusion(
        vocab: &MotionVocabulary,
        confusion: Vec<Vec<u64>>,
        fold: usize,
        seed: u64,
    ) -> Self {
        let per_class_accuracy: Vec<Option<f64>> = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let total: u64 = row.iter().sum();
                (total > 0).then(|| row[i] as f64 / total as f64)
            })
            .collect();
        let nb = vocab.n_basic();
        Self {
            fold,
            seed,
            basic_accuracy: mean_of(per_class_accuracy[..nb].iter().copied()),
            combined_accuracy: mean_of(per_class_accuracy[nb..].iter().copied()),
            overall_accuracy: mean_of(per_class_accuracy.iter().copied()),
            per_class_accuracy,
            confusion,
        }
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.confusion.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub basic_accuracy: Option<Stat>,
    pub combined_accuracy: Option<Stat>,
    pub overall_accuracy: Option<Stat>,
    /// Confusion counts summed over runs.
    pub confusion: Vec<Vec<u64>>,
    /// Pooled confusion with each nonempty row scaled to sum to 1.
    pub confusion_normalized: Vec<Vec<f64>>,
}

pub fn aggregate(metrics: &[Metrics]) -> Result<Summary> {
    let first = metrics
        .first()
        .ok_or_else(|| Error::Experiment("cannot aggregate an empty metrics list".into()))?;
    let n = first.confusion.len();
    let mut confusion = vec![vec![0u64; n]; n];
    for m in metrics {
        if m.confusion.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: m.confusion.len(),
            });
        }
        for (acc, row) in confusion.iter_mut().zip(&m.confusion) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
    }
    let confusion_normalized = confusion
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|&v| {
                    if total == 0 {
                        0.0
                    } else {
                        v as f64 / total as f64
                    }
                })
                .collect()
        })
        .collect();
    let stat = |get: fn(&Metrics) -> Option<f64>| {
        Stat::of(&metrics.iter().filter_map(get).collect::<Vec<_>>())
    };
    Ok(Summary {
        runs: metrics.len(),
        basic_accuracy: stat(|m| m.basic_accuracy),
        combined_accuracy: stat(|m| m.combined_accuracy),
        overall_accuracy: stat(|m| m.overall_accuracy),
        confusion,
        confusion_normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> MotionVocabulary {
        MotionVocabulary::build(&["A", "B"], &[("AB", vec!["A", "B"])]).unwrap()
    }

    #[test]
    fn accuracies_follow_the_confusion_matrix() {
        let truth = [0, 0, 0, 1, 1, 2, 2, 2, 2];
        let pred = [0, 0, 1, 1, 1, 2, 0, 2, 1];
        let m = Metrics::from_predictions(&vocab(), &truth, &pred, 0, 0).unwrap();
        assert_eq!(m.row_totals(), vec![3, 2, 4]);
        assert_eq!(
            m.per_class_accuracy,
            vec![Some(2.0 / 3.0), Some(1.0), Some(0.5)]
        );
        assert!((m.basic_accuracy.unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(m.combined_accuracy, Some(0.5));
        assert!((m.overall_accuracy.unwrap() - (2.0 / 3.0 + 1.0 + 0.5) / 3.0).abs() < 1e-15);
        assert!(Metrics::from_predictions(&vocab(), &[0], &[3], 0, 0).is_err());
    }

    #[test]
    fn empty_group_is_none() {
        let m = Metrics::from_predictions(&vocab(), &[0, 1], &[0, 1], 0, 0).unwrap();
        assert_eq!(m.combined_accuracy, None);
        assert_eq!(m.overall_accuracy, Some(1.0));
    }

    #[test]
    fn aggregate_statistics() {
        let v = vocab();
        let a = Metrics::from_predictions(&v, &[0, 1, 2, 2, 2], &[0, 1, 2, 0, 1], 0, 0).unwrap();
        assert!(aggregate(&[]).is_err());
        let same = aggregate(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(same.overall_accuracy.unwrap().std, 0.0);
        assert_eq!(same.confusion[2], vec![2, 2, 2]);
        for row in &same.confusion_normalized {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        let mut lo = a.clone();
        lo.overall_accuracy = Some(0.4);
        let mut hi = a;
        hi.overall_accuracy = Some(0.6);
        let s = aggregate(&[lo, hi]).unwrap();
        let overall = s.overall_accuracy.unwrap();
        assert!((overall.mean - 0.5).abs() < 1e-15);
        assert!((overall.std - 0.1).abs() < 1e-15);
    }
}
