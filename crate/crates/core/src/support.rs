use std::fmt;

use crate::error::{invalid, Result};

/// A sorted, duplicate-free set of zero-based column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// Builds a support from arbitrary indices, sorting and rejecting duplicates
    /// or indices `>= n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("support", "duplicate index"));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(invalid("support", format!("index {last} out of range for n = {n}")));
            }
        }
        Ok(SupportSet(indices))
    }

    /// `{0, 1, ..., k-1}`.
    pub fn range(k: usize) -> Self {
        SupportSet((0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Returns `self ∪ {i}`.
    pub fn with(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.insert(i);
        out
    }

    /// Returns `self ∖ {i}`.
    pub fn without(&self, i: usize) -> Self {
        SupportSet(self.0.iter().copied().filter(|&k| k != i).collect())
    }

    pub fn insert(&mut self, i: usize) -> bool {
        match self.0.binary_search(&i) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, i);
                true
            }
        }
    }

    pub fn union(&self, other: &SupportSet) -> Self {
        let mut out = self.clone();
        for i in other.iter() {
            out.insert(i);
        }
        out
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Indices of `{0..n}` not in the set, ascending.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Indices of the `k` largest values of `|scores|`, returned in ascending
/// index order. Ties go to the smaller index.
pub fn top_k_by_magnitude(scores: &[(usize, f64)], k: usize) -> Vec<usize> {
    let mut order: Vec<(usize, f64)> = scores.to_vec();
    order.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    let mut picked: Vec<usize> = order.into_iter().take(k).map(|(i, _)| i).collect();
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(SupportSet::new(vec![1, 1], 4).is_err());
        assert!(SupportSet::new(vec![4], 4).is_err());
        assert_eq!(SupportSet::new(vec![3, 0], 4).unwrap().indices(), &[0, 3]);
    }

    #[test]
    fn with_without_roundtrip() {
        let s = SupportSet::new(vec![2, 5], 8).unwrap();
        assert_eq!(s.with(3).indices(), &[2, 3, 5]);
        assert_eq!(s.with(3).without(3), s);
        assert_eq!(s.complement(6), vec![0, 1, 3, 4]);
    }

    #[test]
    fn top_k_breaks_ties_by_index() {
        let scores = [(0, 1.0), (1, -2.0), (2, 2.0), (3, 0.5)];
        assert_eq!(top_k_by_magnitude(&scores, 1), vec![1]);
        assert_eq!(top_k_by_magnitude(&scores, 3), vec![0, 1, 2]);
    }
}
