//! LP relaxation of the integer program for step and linear disclosure,
//! randomized rounding and a cardinality repair pass.
//!
//! Step: each adversary must miss at least one member of every property,
//! `Σ_{d∈D_p} x_da ≤ |D_p| − 1`, and the objective is utility alone.
//! Linear: an epigraph variable `y` bounds the aggregated disclosure of
//! every adversary and enters the objective as `−λ·y`.

use std::time::Instant;

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome, Variable};
use rand::Rng;
use serde::Serialize;

use crate::assignment::{Assignment, Move};
use crate::error::{Error, Result};
use crate::heuristics::SolveResult;
use crate::instance::{Aggregation, DisclosureFamily, Instance};
use crate::objective::tradeoff_objective;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalSolution {
    /// `x̂_da ∈ [0, 1]`, one row per entry.
    pub x_hat: Vec<Vec<f64>>,
    /// LP optimum including the constant `λ·τ_I`. An upper bound on the
    /// integral tradeoff optimum (for step, on the best zero-disclosure
    /// assignment).
    pub lp_objective: f64,
}

impl FractionalSolution {
    pub fn is_integral(&self, tol: f64) -> bool {
        self.x_hat
            .iter()
            .flatten()
            .all(|&x| x.min(1.0 - x).abs() <= tol)
    }
}

/// Solves the relaxation for the instance's disclosure family.
pub fn solve_lp_relaxation(instance: &Instance) -> Result<FractionalSolution> {
    let model = instance.model();
    if !matches!(model.family, DisclosureFamily::Step | DisclosureFamily::Linear) {
        return Err(Error::UnsupportedFamily(model.family.name().into()));
    }
    let n = instance.num_entries();
    let k = instance.num_adversaries();
    let np = instance.num_properties();
    let z = instance.utility().normalizer();
    let lambda = instance.lambda();

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let x: Vec<Vec<Variable>> = (0..n)
        .map(|d| {
            (0..k)
                .map(|a| lp.add_var(instance.utility().weight(d, a) / z, (0.0, 1.0)))
                .collect()
        })
        .collect();
    for row in &x {
        let terms: Vec<(Variable, f64)> = row.iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&terms[..], ComparisonOp::Ge, 1.0);
        lp.add_constraint(&terms[..], ComparisonOp::Le, instance.t() as f64);
    }

    let hg = instance.hypergraph();
    match model.family {
        DisclosureFamily::Step => {
            for prop in hg.properties() {
                let cap = prop.members.len() as f64 - 1.0;
                for a in 0..k {
                    let terms: Vec<(Variable, f64)> =
                        prop.members.iter().map(|&d| (x[d][a], 1.0)).collect();
                    lp.add_constraint(&terms[..], ComparisonOp::Le, cap);
                }
            }
        }
        _ => {
            let y = lp.add_var(-lambda, (0.0, f64::INFINITY));
            let weight = |p: usize, i: usize| hg.property(p).weight_of(i).unwrap_or(0.0);
            for a in 0..k {
                match model.aggregation {
                    Aggregation::Worst => {
                        for p in 0..np {
                            let mut terms: Vec<(Variable, f64)> = hg
                                .property(p)
                                .members
                                .iter()
                                .enumerate()
                                .map(|(i, &d)| (x[d][a], weight(p, i)))
                                .collect();
                            terms.push((y, -1.0));
                            lp.add_constraint(&terms[..], ComparisonOp::Le, 0.0);
                        }
                    }
                    Aggregation::Average => {
                        if np == 0 {
                            continue;
                        }
                        let mut coef = vec![0.0; n];
                        for p in 0..np {
                            for (i, &d) in hg.property(p).members.iter().enumerate() {
                                coef[d] += weight(p, i) / np as f64;
                            }
                        }
                        let mut terms: Vec<(Variable, f64)> = (0..n)
                            .filter(|&d| coef[d] != 0.0)
                            .map(|d| (x[d][a], coef[d]))
                            .collect();
                        terms.push((y, -1.0));
                        lp.add_constraint(&terms[..], ComparisonOp::Le, 0.0);
                    }
                }
            }
        }
    }

    let solution = match lp.solve() {
        Ok(SolveOutcome::Solution(s)) => s,
        Ok(SolveOutcome::Interrupted(_)) => return Err(Error::LpFailure("interrupted".into())),
        Err(microlp::Error::Infeasible) => return Err(Error::LpInfeasible),
        Err(e) => return Err(Error::LpFailure(e.to_string())),
    };
    let x_hat = x
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| solution.var_value(v).clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    Ok(FractionalSolution {
        x_hat,
        lp_objective: solution.objective() + lambda * instance.tau(),
    })
}

/// Sets each bit independently with probability `x̂_da`. No repair: rows
/// may end up empty or above `t`.
pub fn round_once<R: Rng + ?Sized>(frac: &FractionalSolution, rng: &mut R) -> Assignment {
    let n = frac.x_hat.len();
    let k = frac.x_hat.first().map_or(0, Vec::len);
    let mut asg = Assignment::empty(n, k);
    for (d, row) in frac.x_hat.iter().enumerate() {
        for (a, &p) in row.iter().enumerate() {
            if rng.gen::<f64>() < p {
                asg.apply_unchecked(&Move::Add { entry: d, to: a });
            }
        }
    }
    asg
}

/// Adversaries of row `d` by descending `x̂`, lower id first on ties.
fn ranked(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    order
}

/// Empty rows get their highest-`x̂` adversary; rows above `t` keep only
/// their `t` highest-`x̂` adversaries. Ties go to the lower id.
pub fn repair(frac: &FractionalSolution, t: usize, assignment: &Assignment) -> Assignment {
    let mut out = assignment.clone();
    for (d, row) in frac.x_hat.iter().enumerate() {
        let count = out.count(d);
        if count == 0 {
            out.apply_unchecked(&Move::Add {
                entry: d,
                to: ranked(row)[0],
            });
        } else if count > t {
            let held: Vec<usize> = ranked(row).into_iter().filter(|&a| out.get(d, a)).collect();
            for &a in &held[t..] {
                out.apply_unchecked(&Move::Remove { entry: d, from: a });
            }
        }
    }
    out
}

/// Best of `runs` repaired roundings by tradeoff objective, earliest on
/// ties. Always cardinality-feasible.
pub fn round_and_repair<R: Rng + ?Sized>(
    instance: &Instance,
    frac: &FractionalSolution,
    runs: usize,
    rng: &mut R,
) -> SolveResult {
    let start = Instant::now();
    let mut best: Option<(Assignment, f64)> = None;
    for _ in 0..runs.max(1) {
        let asg = repair(frac, instance.t(), &round_once(frac, rng));
        let g = tradeoff_objective(instance, &asg).value;
        if best.as_ref().map_or(true, |(_, b)| g > *b) {
            best = Some((asg, g));
        }
    }
    let (asg, _) = best.unwrap();
    SolveResult::evaluate(instance, asg, runs.max(1), start.elapsed(), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests_support::raw_two_entries;
    use crate::instance::validate_instance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_pair_lp_is_integral() {
        let inst = validate_instance(raw_two_entries(DisclosureFamily::Step)).unwrap();
        let frac = solve_lp_relaxation(&inst).unwrap();
        assert!((frac.lp_objective - 1.0).abs() < 1e-9);
        assert!(frac.is_integral(1e-9));
        assert!((frac.x_hat[0][0] - 1.0).abs() < 1e-9);
        assert!((frac.x_hat[1][1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_properties_puts_mass_on_top_t() {
        let mut raw = raw_two_entries(DisclosureFamily::Linear);
        raw.properties.clear();
        let inst = validate_instance(raw).unwrap();
        let frac = solve_lp_relaxation(&inst).unwrap();
        assert_eq!(frac.x_hat.len(), 2);
        assert!((frac.x_hat[0][0] - 1.0).abs() < 1e-9 && frac.x_hat[0][1].abs() < 1e-9);
        assert!((frac.x_hat[1][1] - 1.0).abs() < 1e-9 && frac.x_hat[1][0].abs() < 1e-9);
        assert!((frac.lp_objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_adversary_step_is_infeasible() {
        let mut raw = raw_two_entries(DisclosureFamily::Step);
        raw.num_adversaries = 1;
        raw.utility_weights = vec![vec![0.9], vec![0.1]];
        let inst = validate_instance(raw).unwrap();
        assert_eq!(solve_lp_relaxation(&inst), Err(Error::LpInfeasible));
    }

    #[test]
    fn quadratic_is_refused() {
        let inst = validate_instance(raw_two_entries(DisclosureFamily::Quadratic)).unwrap();
        assert!(matches!(solve_lp_relaxation(&inst), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn integral_rounding_is_a_no_op() {
        let frac = FractionalSolution {
            x_hat: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            lp_objective: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let asg = round_once(&frac, &mut rng);
        assert_eq!(asg.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
        assert_eq!(repair(&frac, 1, &asg), asg);
    }

    #[test]
    fn repair_rules() {
        let frac = FractionalSolution {
            x_hat: vec![vec![0.5, 0.5], vec![0.2, 0.7]],
            lp_objective: 0.0,
        };
        let empty = Assignment::empty(2, 2);
        let fixed = repair(&frac, 1, &empty);
        assert_eq!(fixed.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
        let full = Assignment::from_pairs(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let fixed = repair(&frac, 1, &full);
        assert_eq!(fixed.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn repaired_output_is_feasible() {
        let inst = crate::synth::tests_support::small_synthetic(6, DisclosureFamily::Linear);
        let frac = solve_lp_relaxation(&inst).unwrap();
        for row in &frac.x_hat {
            let s: f64 = row.iter().sum();
            assert!((1.0 - 1e-6..=inst.t() as f64 + 1e-6).contains(&s));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let res = round_and_repair(&inst, &frac, 50, &mut rng);
        assert!(res.assignment.is_feasible(inst.t()));
        assert!(res.objective.value <= frac.lp_objective + 1e-9);
    }
}
