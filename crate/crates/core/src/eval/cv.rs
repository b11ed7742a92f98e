//! Stratified k-fold assignment.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvMode {
    /// Individual observations are distributed across folds.
    #[default]
    Record,
    /// All observations of a session share one fold.
    Session,
}

/// Fold index for every sample.
///
/// Record mode shuffles each class and deals the samples round-robin, so
/// fold sizes (and per-fold class counts) differ by at most one. Session
/// mode shuffles sessions per class and gives each to the fold currently
/// holding the fewest observations of that class.
pub fn kfold_split(
    labels: &[bool],
    groups: &[&str],
    folds: usize,
    mode: CvMode,
    seed: u64,
) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if labels.len() != groups.len() {
        return Err(Error::InvalidConfig(
            "labels and groups differ in length".into(),
        ));
    }
    if labels.len() < folds {
        return Err(Error::TooFewSamples {
            what: "cross-validation".into(),
            got: labels.len(),
            need: folds,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];

    match mode {
        CvMode::Record => {
            let mut next = 0;
            for class in [true, false] {
                let mut idx: Vec<usize> =
                    (0..labels.len()).filter(|&i| labels[i] == class).collect();
                idx.shuffle(&mut rng);
                for i in idx {
                    assignment[i] = next % folds;
                    next += 1;
                }
            }
        }
        CvMode::Session => {
            // BTreeMap keeps session order independent of hashing.
            let mut sessions: BTreeMap<&str, (bool, Vec<usize>)> = BTreeMap::new();
            for (i, (&g, &l)) in groups.iter().zip(labels).enumerate() {
                sessions.entry(g).or_insert((l, Vec::new())).1.push(i);
            }
            if sessions.len() < folds {
                return Err(Error::TooFewSamples {
                    what: "session folds".into(),
                    got: sessions.len(),
                    need: folds,
                });
            }
            for class in [true, false] {
                let mut members: Vec<&Vec<usize>> = sessions
                    .values()
                    .filter(|(l, _)| *l == class)
                    .map(|(_, idx)| idx)
                    .collect();
                members.shuffle(&mut rng);
                let mut load = vec![0usize; folds];
                for idx in members {
                    let fold = (0..folds).min_by_key(|&f| (load[f], f)).unwrap();
                    load[fold] += idx.len();
                    for &i in idx {
                        assignment[i] = fold;
                    }
                }
            }
        }
    }
    Ok(assignment)
}

/// Train and test indices of `fold`.
pub fn fold_indices(assignment: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..assignment.len()).partition(|&i| assignment[i] != fold)
}
