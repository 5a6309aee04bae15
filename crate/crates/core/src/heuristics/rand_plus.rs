use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::{run_rng, SolveResult};
use crate::assignment::Assignment;
use crate::instance::Instance;
use crate::objective::tradeoff_objective;

/// Draws `t` distinct adversaries with probability proportional to `weights`,
/// one at a time. Falls back to uniform once the remaining mass is zero.
fn sample_row<R: Rng + ?Sized>(weights: &[f64], t: usize, rng: &mut R) -> Vec<usize> {
    let mut left: Vec<usize> = (0..weights.len()).collect();
    let mut picked = Vec::with_capacity(t);
    for _ in 0..t.min(weights.len()) {
        let mass: f64 = left.iter().map(|&a| weights[a]).sum();
        let i = if mass > 0.0 {
            let mut x = rng.gen::<f64>() * mass;
            let mut i = 0;
            loop {
                let w = weights[left[i]];
                if x < w || i + 1 == left.len() {
                    // Guard against landing on a zero weight through rounding.
                    if w > 0.0 {
                        break i;
                    }
                    break left.iter().rposition(|&a| weights[a] > 0.0).unwrap();
                }
                x -= w;
                i += 1;
            }
        } else {
            rng.gen_range(0..left.len())
        };
        picked.push(left.remove(i));
    }
    picked
}

/// Baseline: each run gives every entry `t` adversaries sampled in
/// proportion to utility weight; the best run by objective is returned,
/// earliest on ties.
pub fn rand_plus(instance: &Instance, runs: usize, seed: u64) -> SolveResult {
    let start = Instant::now();
    let n = instance.num_entries();
    let k = instance.num_adversaries();
    let t = instance.t();
    let scored: Vec<(Assignment, f64)> = (0..runs.max(1))
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(seed, run);
            let mut asg = Assignment::empty(n, k);
            for d in 0..n {
                for a in sample_row(instance.utility().row(d), t, &mut rng) {
                    asg.apply_unchecked(&crate::assignment::Move::Add { entry: d, to: a });
                }
            }
            let g = tradeoff_objective(instance, &asg).value;
            (asg, g)
        })
        .collect();
    let mut best = 0;
    for (i, s) in scored.iter().enumerate() {
        if s.1 > scored[best].1 {
            best = i;
        }
    }
    let (asg, _) = scored.into_iter().nth(best).unwrap();
    SolveResult::evaluate(instance, asg, runs.max(1), start.elapsed(), seed)
}
