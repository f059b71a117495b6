use std::fmt;

use serde::{Deserialize, Serialize};

/// A subset of the ground set `{0, .., n-1}`, kept sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundSubset {
    members: Vec<usize>,
}

impl GroundSubset {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full(n: usize) -> Self {
        Self {
            members: (0..n).collect(),
        }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            members: mask
                .iter()
                .enumerate()
                .filter_map(|(i, &m)| m.then_some(i))
                .collect(),
        }
    }

    /// Subset encoded by the low `n` bits of `bits`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self {
            members: (0..n).filter(|&i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn to_bits(&self) -> u64 {
        self.members.iter().fold(0u64, |acc, &i| acc | 1 << i)
    }

    pub fn to_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &i in &self.members {
            mask[i] = true;
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    /// Largest member plus one, or zero for the empty set.
    pub fn bound(&self) -> usize {
        self.members.last().map_or(0, |&m| m + 1)
    }

    pub fn is_subset_of(&self, other: &GroundSubset) -> bool {
        self.members.iter().all(|&i| other.contains(i))
    }

    pub fn union(&self, other: &GroundSubset) -> GroundSubset {
        self.members.iter().chain(other.members.iter()).copied().collect()
    }

    pub fn intersection(&self, other: &GroundSubset) -> GroundSubset {
        self.members
            .iter()
            .copied()
            .filter(|&i| other.contains(i))
            .collect()
    }

    pub fn difference(&self, other: &GroundSubset) -> GroundSubset {
        self.members
            .iter()
            .copied()
            .filter(|&i| !other.contains(i))
            .collect()
    }

    /// `V \ self` for a ground set of size `n`.
    pub fn complement(&self, n: usize) -> GroundSubset {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }

    /// Sum of `weights` over the members.
    pub fn weight(&self, weights: &[f64]) -> f64 {
        self.members.iter().map(|&i| weights[i]).sum()
    }
}

impl FromIterator<usize> for GroundSubset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut members: Vec<usize> = iter.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }
}

impl From<Vec<usize>> for GroundSubset {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[usize; N]> for GroundSubset {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

impl fmt::Display for GroundSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}
