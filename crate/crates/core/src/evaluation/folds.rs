//! Seeded stratified k-fold assignment.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Folds {
    k: usize,
    /// Fold of each instance, in instance order.
    assignment: Vec<usize>,
}

impl Folds {
    pub fn from_assignment(k: usize, assignment: Vec<usize>) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("need at least 2 folds"));
        }
        if let Some(f) = assignment.iter().find(|&&f| f >= k) {
            return Err(Error::invalid(format!("fold {f} out of range for k = {k}")));
        }
        Ok(Folds { k, assignment })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn test(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        self.assignment.iter().for_each(|&f| s[f] += 1);
        s
    }
}

/// Shuffles each class with a seeded generator, then deals the members
/// round-robin. The dealing pointer carries over from one class to the next
/// (canonical class order), so fold sizes differ by at most one as well.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<Folds> {
    if k < 2 {
        return Err(Error::invalid(format!("k = {k}; need at least 2 folds")));
    }
    if k > labels.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {} instances",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(Folds { k, assignment })
}
