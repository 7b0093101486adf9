use std::collections::BTreeSet;

use super::{MotionVocabulary, Recording};
use crate::error::{Error, Result};

/// One train/test partition of trial indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FoldSpec {
    pub train_trials: BTreeSet<usize>,
    pub test_trials: BTreeSet<usize>,
}

impl FoldSpec {
    pub fn new(n_trials: usize, train_trials: impl IntoIterator<Item = usize>) -> Result<Self> {
        let train_trials: BTreeSet<usize> = train_trials.into_iter().collect();
        if train_trials.iter().any(|&t| t >= n_trials) {
            return Err(Error::Fold(format!(
                "training trial out of range 0..{n_trials}"
            )));
        }
        let test_trials: BTreeSet<usize> = (0..n_trials)
            .filter(|t| !train_trials.contains(t))
            .collect();
        if train_trials.is_empty() || test_trials.is_empty() {
            return Err(Error::Fold(
                "train and test trial sets must both be nonempty".into(),
            ));
        }
        Ok(Self {
            train_trials,
            test_trials,
        })
    }

    pub fn n_trials(&self) -> usize {
        self.train_trials.len() + self.test_trials.len()
    }
}

/// All `C(n_trials, n_train)` folds in lexicographic order of training trials.
pub fn enumerate_folds(n_trials: usize, n_train: usize) -> Result<Vec<FoldSpec>> {
    if n_train == 0 || n_train >= n_trials {
        return Err(Error::Fold(format!(
            "need 0 < n_train < n_trials, got n_train={n_train}, n_trials={n_trials}"
        )));
    }
    let mut folds = Vec::new();
    let mut combo: Vec<usize> = (0..n_train).collect();
    loop {
        folds.push(FoldSpec::new(n_trials, combo.iter().copied())?);
        // advance to the next combination
        let mut i = n_train;
        while i > 0 && combo[i - 1] == n_trials - n_train + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        combo[i - 1] += 1;
        for j in i..n_train {
            combo[j] = combo[j - 1] + 1;
        }
    }
    Ok(folds)
}

/// Recordings partitioned for one fold.
///
/// Combined-motion recordings from training trials are kept aside in
/// `train_combined`: they never enter `test`, and only a fully supervised
/// learner may train on them.
#[derive(Debug, Clone)]
pub struct Split<'a> {
    pub train_basic: Vec<&'a Recording>,
    pub train_combined: Vec<&'a Recording>,
    pub test: Vec<&'a Recording>,
}

pub fn make_split<'a>(
    recordings: &'a [Recording],
    fold: &FoldSpec,
    vocab: &MotionVocabulary,
) -> Result<Split<'a>> {
    let n_trials = fold.n_trials();
    let mut seen = vec![false; vocab.len() * n_trials];
    for r in recordings {
        if r.motion < vocab.len() && r.trial < n_trials {
            seen[r.motion * n_trials + r.trial] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Fold(format!(
            "no recording for motion `{}` trial {}",
            vocab.name(missing / n_trials),
            missing % n_trials + 1
        )));
    }

    let mut split = Split {
        train_basic: Vec::new(),
        train_combined: Vec::new(),
        test: Vec::new(),
    };
    for r in recordings {
        let in_train = fold.train_trials.contains(&r.trial);
        let in_test = fold.test_trials.contains(&r.trial);
        match (vocab.is_basic(r.motion), in_train, in_test) {
            (true, true, _) => split.train_basic.push(r),
            (false, true, _) => split.train_combined.push(r),
            (_, false, true) => split.test.push(r),
            _ => {}
        }
    }
    Ok(split)
}
