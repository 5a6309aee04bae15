use rand::seq::SliceRandom;
use rand::Rng;

use super::construction::Shortlist;
use super::SearchParams;
use crate::assignment::{Assignment, Move};
use crate::instance::Instance;
use crate::objective::ObjectiveValue;
use crate::state::SearchState;

fn neighborhood(asg: &Assignment, d: usize, t: usize) -> Vec<Move> {
    let k = asg.num_adversaries();
    let held: Vec<usize> = asg.adversaries_of(d).collect();
    let mut moves = Vec::with_capacity(held.len() * k + k);
    for &a in &held {
        moves.push(Move::Remove { entry: d, from: a });
    }
    for &a in &held {
        for b in (0..k).filter(|&b| !asg.get(d, b)) {
            moves.push(Move::Swap {
                entry: d,
                from: a,
                to: b,
            });
        }
    }
    if held.len() < t {
        for b in (0..k).filter(|&b| !asg.get(d, b)) {
            moves.push(Move::Add { entry: d, to: b });
        }
    }
    moves
}

/// One pass over the entries in random order; each entry moves to the best
/// of its neighbors if that strictly improves the objective.
pub(crate) fn search_state<'a, R: Rng + ?Sized>(
    mut state: SearchState<'a>,
    params: &SearchParams,
    rng: &mut R,
) -> (SearchState<'a>, usize) {
    let inst = state.instance();
    let mut order: Vec<usize> = (0..inst.num_entries()).collect();
    order.shuffle(rng);
    let mut moves = 0;
    for d in order {
        let mut best = Shortlist::new(1, state.objective().value);
        for mv in neighborhood(state.assignment(), d, inst.t()) {
            let value = if params.full_recompute {
                state.evaluate_full(&mv).value
            } else {
                state.evaluate(&mv).value
            };
            best.offer(mv, value);
        }
        if let Some(c) = best.pick(rng) {
            state.apply(&c.mv);
            moves += 1;
        }
    }
    (state, moves)
}

/// Single local-search pass starting from `assignment`. The result never
/// scores below the input.
pub fn local_search<R: Rng + ?Sized>(
    instance: &Instance,
    assignment: &Assignment,
    params: &SearchParams,
    rng: &mut R,
) -> (Assignment, ObjectiveValue) {
    let (state, _) = search_state(SearchState::from_assignment(instance, assignment), params, rng);
    let g = state.objective();
    (state.into_assignment(), g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests_support::two_entry_instance;
    use crate::instance::DisclosureFamily;
    use crate::objective::tradeoff_objective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn swap_out_of_a_bad_start() {
        // d0 → a1 and d1 → a1: leaks the step property and wastes d0.
        let inst = two_entry_instance(DisclosureFamily::Step);
        let start = Assignment::from_pairs(2, 2, [(0, 1), (1, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, g) = local_search(&inst, &start, &SearchParams::greedy(0), &mut rng);
        assert!(g.value > tradeoff_objective(&inst, &start).value);
        assert_eq!(g.disclosure, 0.0);
        assert!(a.is_feasible(1));
    }

    #[test]
    fn local_optimum_is_kept() {
        let inst = two_entry_instance(DisclosureFamily::Linear);
        let start = Assignment::from_pairs(2, 2, [(0, 0), (1, 1)]).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, _) = local_search(&inst, &start, &SearchParams::greedy(0), &mut rng);
            assert_eq!(a, start);
        }
    }

    #[test]
    fn full_entries_get_no_additions() {
        let asg = Assignment::from_pairs(1, 3, [(0, 0)]).unwrap();
        let moves = neighborhood(&asg, 0, 1);
        assert!(moves.iter().all(|m| !matches!(m, Move::Add { .. })));
        assert_eq!(moves.len(), 3);
        assert_eq!(neighborhood(&asg, 0, 2).len(), 5);
    }

    #[test]
    fn never_worse_than_its_input() {
        let inst = crate::synth::tests_support::small_synthetic(5, DisclosureFamily::Quadratic);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let start = crate::synth::tests_support::random_assignment(&inst, &mut rng);
            let before = tradeoff_objective(&inst, &start).value;
            let (a, g) = local_search(&inst, &start, &SearchParams::greedy(0), &mut rng);
            assert!(g.value >= before);
            assert!((tradeoff_objective(&inst, &a).value - g.value).abs() < 1e-9);
        }
    }
}
