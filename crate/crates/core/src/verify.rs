//! Cross-checks between solvers on a single instance.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assignment::Move;
use crate::error::Error;
use crate::exact::{search_bits, solve_exact, Formulation, SIZE_LIMIT_BITS};
use crate::experiment::Algorithm;
use crate::heuristics::solve;
use crate::instance::{DisclosureFamily, Instance};
use crate::objective::tradeoff_objective;
use crate::relaxation::solve_lp_relaxation;
use crate::state::SearchState;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Runs the heuristics, the exact solver and the LP bound where they apply
/// and checks feasibility, recomputation and `heuristic ≤ exact ≤ LP`. Also
/// compares incremental move scoring against full recomputation along a
/// random walk.
pub fn verify_instance(instance: &Instance, seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let k = instance.num_adversaries();
    let mut best_heuristic = f64::NEG_INFINITY;
    for algorithm in [
        Algorithm::Greedy,
        Algorithm::GreedyL,
        Algorithm::Grasp,
        Algorithm::GraspL,
    ] {
        let res = solve(instance, &algorithm.search_params(k, seed).unwrap());
        checks.push(Check::new(
            format!("{algorithm}: cardinality"),
            res.assignment.is_feasible(instance.t()),
            format!("counts within [1, {}]", instance.t()),
        ));
        let fresh = tradeoff_objective(instance, &res.assignment);
        checks.push(Check::new(
            format!("{algorithm}: recomputed objective"),
            (fresh.value - res.objective.value).abs() <= TOL,
            format!("{} vs {}", res.objective.value, fresh.value),
        ));
        best_heuristic = best_heuristic.max(res.objective.value);
    }

    let exact = if search_bits(instance) <= SIZE_LIMIT_BITS {
        match solve_exact(instance, Formulation::TradeOff) {
            Ok(r) => {
                checks.push(Check::new(
                    "heuristic ≤ exact",
                    best_heuristic <= r.objective.value + TOL,
                    format!("{best_heuristic} vs {}", r.objective.value),
                ));
                Some(r.objective.value)
            }
            Err(e) => {
                checks.push(Check::new("exact", false, e.to_string()));
                None
            }
        }
    } else {
        None
    };

    let family = instance.model().family;
    let step_bound_applies = family == DisclosureFamily::Step && instance.lambda() == 1.0;
    if let (Some(opt), true) = (exact, family == DisclosureFamily::Linear || step_bound_applies) {
        match solve_lp_relaxation(instance) {
            Ok(frac) => checks.push(Check::new(
                "exact ≤ LP",
                opt <= frac.lp_objective + TOL,
                format!("{opt} vs {}", frac.lp_objective),
            )),
            Err(Error::LpInfeasible) => {
                checks.push(Check::new("LP", true, "infeasible, no bound"))
            }
            Err(e) => checks.push(Check::new("LP", false, e.to_string())),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SearchState::new(instance);
    let mut worst_gap = 0.0_f64;
    for _ in 0..200 {
        let d = rng.gen_range(0..instance.num_entries());
        let asg = state.assignment();
        let held: Vec<usize> = asg.adversaries_of(d).collect();
        let free: Vec<usize> = (0..k).filter(|&a| !asg.get(d, a)).collect();
        let mut moves = Vec::new();
        if held.len() < instance.t() {
            moves.extend(free.iter().map(|&a| Move::Add { entry: d, to: a }));
        }
        for &a in &held {
            moves.push(Move::Remove { entry: d, from: a });
            moves.extend(free.iter().map(|&b| Move::Swap {
                entry: d,
                from: a,
                to: b,
            }));
        }
        let Some(mv) = moves.choose(&mut rng).copied() else {
            continue;
        };
        let fast = state.evaluate(&mv).value;
        let full = state.evaluate_full(&mv).value;
        worst_gap = worst_gap.max((fast - full).abs());
        state.apply(&mv);
        worst_gap = worst_gap.max(state.drift());
    }
    checks.push(Check::new(
        "incremental = full recomputation",
        worst_gap <= TOL,
        format!("largest gap {worst_gap:e}"),
    ));
    checks
}
