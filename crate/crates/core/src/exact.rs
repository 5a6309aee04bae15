//! Depth-first branch and bound over per-entry adversary subsets. Meant as
//! an oracle for small instances.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assignment::Move;
use crate::error::{Error, Result};
use crate::heuristics::SolveResult;
use crate::instance::Instance;
use crate::state::SearchState;

/// Largest accepted `(t + 1)·|D|·log2(k)`.
pub const SIZE_LIMIT_BITS: f64 = 40.0;

/// Slack under which a bound is treated as tying the incumbent.
const PRUNE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Maximize `u + λ(τ_I − f)`.
    TradeOff,
    /// Maximize `u` subject to `f < τ_I`.
    DiscBudget,
    /// Maximize `min_a (u + λ(τ_I − f_a))` with `f_a` the aggregated
    /// disclosure of adversary `a`. Same optimum as `TradeOff`.
    MaxMin,
}

/// Search-space size in bits, as checked by the size guard.
pub fn search_bits(instance: &Instance) -> f64 {
    (instance.t() + 1) as f64
        * instance.num_entries() as f64
        * (instance.num_adversaries() as f64).log2()
}

fn subsets(k: usize, t: usize, weights: &[f64]) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << k) {
        let size = mask.count_ones() as usize;
        if size > t {
            continue;
        }
        let members: Vec<usize> = (0..k).filter(|&a| mask >> a & 1 == 1).collect();
        let gain: f64 = members.iter().map(|&a| weights[a]).sum();
        out.push((members, gain));
    }
    // High-utility subsets first so good incumbents appear early.
    out.sort_by(|x, y| y.1.total_cmp(&x.1));
    out
}

struct Search<'a> {
    formulation: Formulation,
    state: SearchState<'a>,
    options: Vec<Vec<(Vec<usize>, f64)>>,
    /// Optimistic raw utility of entries `d..`.
    suffix_top: Vec<f64>,
    raw: f64,
    monotone: bool,
    best: f64,
    best_assignment: Option<crate::assignment::Assignment>,
    nodes: usize,
}

impl<'a> Search<'a> {
    fn score(&self) -> Option<f64> {
        let inst = self.state.instance();
        let g = self.state.objective();
        match self.formulation {
            Formulation::TradeOff => Some(g.tradeoff(inst.lambda(), inst.tau())),
            Formulation::DiscBudget => (g.disclosure < inst.tau()).then_some(g.utility),
            Formulation::MaxMin => Some(
                (0..inst.num_adversaries())
                    .map(|a| g.utility + inst.lambda() * (inst.tau() - self.state.level(a)))
                    .fold(f64::INFINITY, f64::min),
            ),
        }
    }

    fn bound(&self, d: usize) -> f64 {
        let inst = self.state.instance();
        let u = (self.raw + self.suffix_top[d]) / inst.utility().normalizer();
        // Disclosure only grows under monotone families, so the partial
        // value is a valid lower bound; otherwise use 0.
        let f = if self.monotone {
            self.state.disclosure()
        } else {
            0.0
        };
        match self.formulation {
            Formulation::TradeOff | Formulation::MaxMin => u + inst.lambda() * (inst.tau() - f),
            Formulation::DiscBudget => {
                if self.monotone && f >= inst.tau() {
                    f64::NEG_INFINITY
                } else {
                    u
                }
            }
        }
    }

    fn descend(&mut self, d: usize) {
        self.nodes += 1;
        if d == self.options.len() {
            if let Some(v) = self.score() {
                if self.best_assignment.is_none() || v > self.best {
                    self.best = v;
                    self.best_assignment = Some(self.state.assignment().clone());
                }
            }
            return;
        }
        let bound = self.bound(d);
        if bound == f64::NEG_INFINITY
            || (self.best_assignment.is_some() && bound < self.best - PRUNE_EPS)
        {
            return;
        }
        for i in 0..self.options[d].len() {
            let gain = self.options[d][i].1;
            for j in 0..self.options[d][i].0.len() {
                let a = self.options[d][i].0[j];
                self.state.apply(&Move::Add { entry: d, to: a });
            }
            self.raw += gain;
            self.descend(d + 1);
            self.raw -= gain;
            for j in 0..self.options[d][i].0.len() {
                let a = self.options[d][i].0[j];
                self.state.apply(&Move::Remove { entry: d, from: a });
            }
        }
    }
}

/// Optimum over every assignment with `1 ≤ |A_d| ≤ t`. The returned
/// `objective` is always the tradeoff evaluation of the optimal assignment.
pub fn solve_exact(instance: &Instance, formulation: Formulation) -> Result<SolveResult> {
    let bits = search_bits(instance);
    if bits > SIZE_LIMIT_BITS {
        return Err(Error::TooLarge {
            bits,
            limit: SIZE_LIMIT_BITS,
        });
    }
    let start = Instant::now();
    let n = instance.num_entries();
    let k = instance.num_adversaries();
    let w = instance.utility();
    let options: Vec<_> = (0..n).map(|d| subsets(k, instance.t(), w.row(d))).collect();
    let mut suffix_top = vec![0.0; n + 1];
    for d in (0..n).rev() {
        suffix_top[d] = suffix_top[d + 1] + w.row_top_t(d);
    }
    let mut search = Search {
        formulation,
        state: SearchState::new(instance),
        options,
        suffix_top,
        raw: 0.0,
        monotone: instance.model().family.is_monotone(),
        best: f64::NEG_INFINITY,
        best_assignment: None,
        nodes: 0,
    };
    search.descend(0);
    let nodes = search.nodes;
    let asg = search.best_assignment.ok_or(Error::Infeasible)?;
    Ok(SolveResult::evaluate(instance, asg, nodes, start.elapsed(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{solve, SearchParams};
    use crate::instance::tests_support::{raw_two_entries, two_entry_instance};
    use crate::instance::{validate_instance, DisclosureFamily};
    use crate::objective::discbudget_feasible;

    #[test]
    fn splits_the_pair() {
        let inst = two_entry_instance(DisclosureFamily::Step);
        let res = solve_exact(&inst, Formulation::TradeOff).unwrap();
        assert_eq!(res.assignment.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
        assert!((res.objective.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discbudget_infeasible_when_everything_leaks() {
        // One adversary: every assignment reveals the step property.
        let mut raw = raw_two_entries(DisclosureFamily::Step);
        raw.num_adversaries = 1;
        raw.utility_weights = vec![vec![0.9], vec![0.1]];
        let inst = validate_instance(raw).unwrap();
        assert_eq!(solve_exact(&inst, Formulation::DiscBudget), Err(Error::Infeasible));
    }

    #[test]
    fn discbudget_respects_budget() {
        let mut raw = raw_two_entries(DisclosureFamily::Linear);
        raw.tau_i = 0.6;
        let inst = validate_instance(raw).unwrap();
        let res = solve_exact(&inst, Formulation::DiscBudget).unwrap();
        assert!(discbudget_feasible(&inst, &res.assignment, 0.6));
        assert!((res.objective.utility - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maxmin_matches_tradeoff() {
        for family in [DisclosureFamily::Linear, DisclosureFamily::Quadratic] {
            let inst = crate::synth::tests_support::small_synthetic(2, family);
            let inst = inst.with_tradeoff(1.0, 0.0).unwrap();
            let small = shrink(&inst, 6);
            let a = solve_exact(&small, Formulation::TradeOff).unwrap();
            let b = solve_exact(&small, Formulation::MaxMin).unwrap();
            assert!((a.objective.value - b.objective.value).abs() < 1e-12);
        }
    }

    #[test]
    fn no_properties_matches_greedy() {
        let mut raw = raw_two_entries(DisclosureFamily::Linear);
        raw.properties.clear();
        raw.t = 2;
        raw.num_adversaries = 3;
        raw.utility_weights = vec![vec![0.9, 0.1, 0.3], vec![0.1, 0.8, 0.0]];
        let inst = validate_instance(raw).unwrap();
        let exact = solve_exact(&inst, Formulation::TradeOff).unwrap();
        let greedy = solve(&inst, &SearchParams::greedy(0));
        assert!((exact.objective.value - 1.0).abs() < 1e-12);
        assert!((greedy.objective.value - exact.objective.value).abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        let inst = crate::synth::generate_instance(&crate::synth::linear_average(500, 50, 2))
            .unwrap();
        assert!(matches!(
            solve_exact(&inst, Formulation::TradeOff),
            Err(Error::TooLarge { .. })
        ));
    }

    /// Keeps the first `n` entries, dropping properties that fall empty and
    /// renormalizing weights.
    fn shrink(inst: &Instance, n: usize) -> Instance {
        let mut raw = inst.to_raw();
        raw.num_entries = n;
        raw.utility_weights.truncate(n);
        let mut props = Vec::new();
        for p in raw.properties {
            let members: Vec<usize> = p.members.into_iter().filter(|&d| d < n).collect();
            if members.is_empty() {
                continue;
            }
            let share = 1.0 / members.len() as f64;
            props.push(crate::instance::RawProperty {
                id: props.len(),
                weights: vec![share; members.len()],
                members,
            });
        }
        raw.properties = props;
        validate_instance(raw).unwrap()
    }
}
