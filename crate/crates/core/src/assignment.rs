use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boolean entry x adversary matrix; `get(d, a)` is `x_da`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    num_adversaries: usize,
    bits: Vec<bool>,
    counts: Vec<usize>,
}

/// One step in the add/remove/swap neighbourhood of a single entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Move {
    Add { entry: usize, to: usize },
    Remove { entry: usize, from: usize },
    Swap { entry: usize, from: usize, to: usize },
}

impl Move {
    pub fn entry(&self) -> usize {
        match *self {
            Move::Add { entry, .. } | Move::Remove { entry, .. } | Move::Swap { entry, .. } => {
                entry
            }
        }
    }

    /// Bit flips performed by the move as `(entry, adversary, set)`.
    pub fn flips(&self) -> impl Iterator<Item = (usize, usize, bool)> {
        let (first, second) = match *self {
            Move::Add { entry, to } => ((entry, to, true), None),
            Move::Remove { entry, from } => ((entry, from, false), None),
            Move::Swap { entry, from, to } => ((entry, from, false), Some((entry, to, true))),
        };
        std::iter::once(first).chain(second)
    }

    /// Change in the number of adversaries holding the entry.
    pub fn count_delta(&self) -> isize {
        match self {
            Move::Add { .. } => 1,
            Move::Remove { .. } => -1,
            Move::Swap { .. } => 0,
        }
    }
}

impl Assignment {
    pub fn empty(num_entries: usize, num_adversaries: usize) -> Self {
        Self {
            num_adversaries,
            bits: vec![false; num_entries * num_adversaries],
            counts: vec![0; num_entries],
        }
    }

    /// Builds from `(entry, adversary)` pairs; duplicates are ignored.
    pub fn from_pairs(
        num_entries: usize,
        num_adversaries: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut a = Self::empty(num_entries, num_adversaries);
        for (d, adv) in pairs {
            a.check(d, adv)?;
            if !a.get(d, adv) {
                a.set_bit(d, adv, true);
            }
        }
        Ok(a)
    }

    pub fn num_entries(&self) -> usize {
        self.counts.len()
    }

    pub fn num_adversaries(&self) -> usize {
        self.num_adversaries
    }

    #[inline]
    pub fn get(&self, entry: usize, adversary: usize) -> bool {
        self.bits[entry * self.num_adversaries + adversary]
    }

    /// Number of adversaries holding `entry`.
    #[inline]
    pub fn count(&self, entry: usize) -> usize {
        self.counts[entry]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn adversaries_of(&self, entry: usize) -> impl Iterator<Item = usize> + '_ {
        let k = self.num_adversaries;
        self.bits[entry * k..(entry + 1) * k]
            .iter()
            .enumerate()
            .filter_map(|(a, &b)| b.then_some(a))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_entries()).flat_map(move |d| self.adversaries_of(d).map(move |a| (d, a)))
    }

    /// Entries with no adversary (the penalty count `C`).
    pub fn unassigned_count(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }

    /// Every entry held by between 1 and `t` adversaries.
    pub fn is_feasible(&self, t: usize) -> bool {
        self.counts.iter().all(|&c| (1..=t).contains(&c))
    }

    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    fn check(&self, entry: usize, adversary: usize) -> Result<()> {
        if entry >= self.num_entries() || adversary >= self.num_adversaries {
            return Err(Error::OutOfRange(format!(
                "entry {entry}, adversary {adversary}"
            )));
        }
        Ok(())
    }

    #[inline]
    fn set_bit(&mut self, entry: usize, adversary: usize, value: bool) {
        let i = entry * self.num_adversaries + adversary;
        debug_assert_ne!(self.bits[i], value);
        self.bits[i] = value;
        if value {
            self.counts[entry] += 1;
        } else {
            self.counts[entry] -= 1;
        }
    }

    /// Checks that `mv` is consistent with the current bits.
    pub fn validate_move(&self, mv: &Move) -> Result<()> {
        if let Move::Swap { from, to, .. } = *mv {
            if from == to {
                return Err(Error::InvalidParameter("swap to the same adversary".into()));
            }
        }
        for (d, a, set) in mv.flips() {
            self.check(d, a)?;
            match (set, self.get(d, a)) {
                (true, true) => {
                    return Err(Error::BitAlreadySet {
                        entry: d,
                        adversary: a,
                    })
                }
                (false, false) => {
                    return Err(Error::BitNotSet {
                        entry: d,
                        adversary: a,
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Flips exactly the bits named by `mv`. Cardinality bounds are the
    /// caller's business.
    pub fn apply(&mut self, mv: &Move) -> Result<()> {
        self.validate_move(mv)?;
        for (d, a, set) in mv.flips() {
            self.set_bit(d, a, set);
        }
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, mv: &Move) {
        for (d, a, set) in mv.flips() {
            self.set_bit(d, a, set);
        }
    }
}

/// Functional form of [`Assignment::apply`].
pub fn apply_move(mut assignment: Assignment, mv: &Move) -> Result<Assignment> {
    assignment.apply(mv)?;
    Ok(assignment)
}
