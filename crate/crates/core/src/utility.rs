//! Additive utility: each entry `d` handed to adversary `a` is worth `w_da`.
//!
//! Totals are normalized by the best value any cardinality-feasible
//! assignment can reach when disclosure is ignored: every entry sent to its
//! `t` highest-weight adversaries. That keeps utility on the same `[0, 1]`
//! scale as disclosure.

use crate::assignment::{Assignment, Move};
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Dense `|D| x k` weight matrix plus the cached top-`t` normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityWeights {
    num_adversaries: usize,
    weights: Vec<f64>,
    normalizer: f64,
    row_top_t: Vec<f64>,
}

impl UtilityWeights {
    pub fn new(rows: &[Vec<f64>], num_adversaries: usize, t: usize) -> Result<Self> {
        let mut weights = Vec::with_capacity(rows.len() * num_adversaries);
        for (d, row) in rows.iter().enumerate() {
            if row.len() != num_adversaries {
                return Err(Error::OutOfRange(format!(
                    "utility row {d} has {} columns, expected {num_adversaries}",
                    row.len()
                )));
            }
            for (a, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::BadWeight {
                        value: w,
                        location: format!("utility_weights[{d}][{a}]"),
                    });
                }
                weights.push(w);
            }
        }
        let row_top_t: Vec<f64> = rows.iter().map(|row| top_t_sum(row, t)).collect();
        let normalizer = row_top_t.iter().sum();
        Ok(Self {
            num_adversaries,
            weights,
            normalizer,
            row_top_t,
        })
    }

    #[inline]
    pub fn weight(&self, entry: usize, adversary: usize) -> f64 {
        self.weights[entry * self.num_adversaries + adversary]
    }

    pub fn row(&self, entry: usize) -> &[f64] {
        let k = self.num_adversaries;
        &self.weights[entry * k..(entry + 1) * k]
    }

    /// `Z = Σ_d Σ_{a ∈ top-t(d)} w_da`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Sum of entry `d`'s `t` largest weights.
    pub fn row_top_t(&self, entry: usize) -> f64 {
        self.row_top_t[entry]
    }

    pub fn num_entries(&self) -> usize {
        self.row_top_t.len()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.weights
            .chunks(self.num_adversaries)
            .map(|c| c.to_vec())
            .collect()
    }
}

fn top_t_sum(row: &[f64], t: usize) -> f64 {
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.iter().take(t).sum()
}

/// Unnormalized `Σ_d w_da x_da` for a single adversary.
pub fn adversary_utility(instance: &Instance, assignment: &Assignment, adversary: usize) -> f64 {
    let w = instance.utility();
    (0..instance.num_entries())
        .filter(|&d| assignment.get(d, adversary))
        .map(|d| w.weight(d, adversary))
        .fold(0.0, |s, x| s + x)
}

/// Total utility over all adversaries divided by the top-`t` normalizer.
pub fn total_utility(instance: &Instance, assignment: &Assignment) -> Result<f64> {
    let z = instance.utility().normalizer();
    if z <= 0.0 {
        return Err(Error::ZeroNormalization);
    }
    let raw: f64 = (0..instance.num_adversaries())
        .map(|a| adversary_utility(instance, assignment, a))
        .fold(0.0, |s, x| s + x);
    Ok(raw / z)
}

/// Contract for a nondecreasing utility over assignments. Only the additive
/// form ships; other families plug in here.
pub trait UtilityEvaluator {
    fn evaluate(&self, assignment: &Assignment) -> f64;
    fn marginal(&self, assignment: &Assignment, mv: &Move) -> f64;
}

/// Normalized additive utility bound to one instance.
#[derive(Debug, Clone, Copy)]
pub struct AdditiveUtility<'a> {
    instance: &'a Instance,
}

impl<'a> AdditiveUtility<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self { instance }
    }
}

impl UtilityEvaluator for AdditiveUtility<'_> {
    fn evaluate(&self, assignment: &Assignment) -> f64 {
        total_utility(self.instance, assignment).unwrap_or(0.0)
    }

    fn marginal(&self, _assignment: &Assignment, mv: &Move) -> f64 {
        let w = self.instance.utility();
        let z = w.normalizer();
        if z <= 0.0 {
            return 0.0;
        }
        let raw = match *mv {
            Move::Add { entry, to } => w.weight(entry, to),
            Move::Remove { entry, from } => -w.weight(entry, from),
            Move::Swap { entry, from, to } => w.weight(entry, to) - w.weight(entry, from),
        };
        raw / z
    }
}
