//! Random fold partitions for k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A partition of `0..n` into `k` folds.
///
/// Fold sizes differ by at most one: the first `n mod k` folds get the
/// extra sample. Built by [`make_folds`] (seeded shuffle) or from an
/// explicit assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPartition {
    k: usize,
    seed: Option<u64>,
    assignment: Vec<usize>,
    by_fold: Vec<Vec<usize>>,
}

impl FoldPartition {
    /// Wrap an explicit fold assignment (`assignment[i]` = fold of sample i).
    ///
    /// Every fold in `0..k` must be non-empty.
    pub fn from_assignment(assignment: Vec<usize>, k: usize) -> Result<Self> {
        let n = assignment.len();
        if k < 2 || k > n {
            return Err(Error::InvalidFolds { k, n });
        }
        let mut by_fold = vec![Vec::new(); k];
        for (i, &f) in assignment.iter().enumerate() {
            if f >= k {
                return Err(Error::InvalidArgument(format!(
                    "fold label {f} out of range for k={k}"
                )));
            }
            by_fold[f].push(i);
        }
        if by_fold.iter().any(|f| f.is_empty()) {
            return Err(Error::InvalidArgument("every fold must be non-empty".into()));
        }
        Ok(FoldPartition {
            k,
            seed: None,
            assignment,
            by_fold,
        })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Seed used by [`make_folds`], if the partition came from one.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Fold label per sample.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Ascending sample indices of fold `j`.
    pub fn fold(&self, j: usize) -> &[usize] {
        &self.by_fold[j]
    }

    pub fn fold_size(&self, j: usize) -> usize {
        self.by_fold[j].len()
    }

    /// Ascending sample indices outside every fold in `exclude`.
    pub fn complement(&self, exclude: &[usize]) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, f)| !exclude.contains(f))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Partition `0..n` into `k` folds by a seeded shuffle.
///
/// Deterministic: identical `(n, k, seed)` yield an identical assignment.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPartition> {
    if k < 2 || k > n {
        return Err(Error::InvalidFolds { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let mut assignment = vec![0usize; n];
    let mut pos = 0;
    for j in 0..k {
        let size = base + usize::from(j < extra);
        for &i in &order[pos..pos + size] {
            assignment[i] = j;
        }
        pos += size;
    }
    let mut part = FoldPartition::from_assignment(assignment, k)?;
    part.seed = Some(seed);
    Ok(part)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_examples() {
        let sizes = |n: usize, k: usize| -> Vec<usize> {
            let p = make_folds(n, k, 7).unwrap();
            (0..k).map(|j| p.fold_size(j)).collect()
        };
        assert_eq!(sizes(4, 2), vec![2, 2]);
        assert_eq!(sizes(10, 10), vec![1; 10]);
        assert_eq!(sizes(7, 3), vec![3, 2, 2]);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = make_folds(23, 4, 99).unwrap();
        let b = make_folds(23, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = make_folds(23, 4, 100).unwrap();
        assert_ne!(a.assignment(), c.assignment());
    }

    #[test]
    fn rejects_bad_k() {
        assert!(make_folds(5, 1, 0).is_err());
        assert!(make_folds(5, 6, 0).is_err());
        assert!(make_folds(0, 2, 0).is_err());
    }

    #[test]
    fn complement_excludes_requested_folds() {
        let p = make_folds(9, 3, 1).unwrap();
        let rest = p.complement(&[1]);
        assert_eq!(rest.len(), 9 - p.fold_size(1));
        assert!(rest.iter().all(|&i| p.assignment()[i] != 1));
        assert!(rest.windows(2).all(|w| w[0] < w[1]));
        let pair = p.complement(&[0, 2]);
        assert_eq!(pair, p.fold(1));
    }

    #[test]
    fn explicit_assignment_roundtrip() {
        let p = FoldPartition::from_assignment(vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(p.fold(0), &[0, 1]);
        assert_eq!(p.fold(1), &[2, 3]);
        assert!(FoldPartition::from_assignment(vec![0, 0, 0], 2).is_err());
        assert!(FoldPartition::from_assignment(vec![0, 2], 2).is_err());
    }
}
