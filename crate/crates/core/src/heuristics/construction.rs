use rand::seq::SliceRandom;
use rand::Rng;

use super::{Scope, SearchParams, IMPROVEMENT_EPS};
use crate::assignment::{Assignment, Move};
use crate::instance::Instance;
use crate::objective::ObjectiveValue;
use crate::state::SearchState;

/// A scored candidate move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub mv: Move,
    pub value: f64,
}

/// The best `n` improving candidates seen so far, best first. Among equal
/// values the earlier offer ranks higher, so offering candidates in
/// `(entry, adversary)` order breaks ties lexicographically.
pub(crate) struct Shortlist {
    n: usize,
    threshold: f64,
    items: Vec<Candidate>,
}

impl Shortlist {
    pub(crate) fn new(n: usize, current: f64) -> Self {
        Self {
            n,
            threshold: current + IMPROVEMENT_EPS,
            items: Vec::with_capacity(n + 1),
        }
    }

    #[inline]
    pub(crate) fn offer(&mut self, mv: Move, value: f64) {
        if value <= self.threshold {
            return;
        }
        if self.items.len() == self.n && value <= self.items[self.n - 1].value {
            return;
        }
        let pos = self.items.partition_point(|c| c.value >= value);
        self.items.insert(pos, Candidate { mv, value });
        self.items.truncate(self.n);
    }

    /// Draws uniformly from the list. No randomness is consumed when the
    /// list holds a single candidate.
    pub(crate) fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Candidate> {
        match self.items.len() {
            0 => None,
            1 => Some(self.items[0]),
            len => Some(self.items[rng.gen_range(0..len)]),
        }
    }
}

/// Chooses the next assignment among scored `candidates` given the current
/// objective `g`: the best improving one (greedy) or a uniform draw among the
/// `n` best improving ones (GRASP). `None` when nothing improves on `g`.
pub fn pick_next_best<R: Rng + ?Sized>(
    candidates: &[Candidate],
    g: f64,
    params: &SearchParams,
    rng: &mut R,
) -> Option<Move> {
    let mut list = Shortlist::new(params.list_size(), g);
    for c in candidates {
        list.offer(c.mv, c.value);
    }
    list.pick(rng).map(|c| c.mv)
}

#[inline]
fn score(state: &SearchState<'_>, mv: &Move, params: &SearchParams) -> f64 {
    if params.full_recompute {
        state.evaluate_full(mv).value
    } else {
        state.evaluate(mv).value
    }
}

pub(crate) fn construct_state<'a, R: Rng + ?Sized>(
    instance: &'a Instance,
    params: &SearchParams,
    rng: &mut R,
) -> (SearchState<'a>, usize) {
    let mut state = SearchState::new(instance);
    let n = instance.num_entries();
    let k = instance.num_adversaries();
    let t = instance.t();
    let mut steps = 0;
    match params.scope {
        Scope::Global => {
            for _ in 0..t * n {
                let mut list = Shortlist::new(params.list_size(), state.objective().value);
                for d in 0..n {
                    if state.assignment().count(d) >= t {
                        continue;
                    }
                    for a in 0..k {
                        if state.assignment().get(d, a) {
                            continue;
                        }
                        let mv = Move::Add { entry: d, to: a };
                        list.offer(mv, score(&state, &mv, params));
                    }
                }
                match list.pick(rng) {
                    Some(c) => {
                        state.apply(&c.mv);
                        steps += 1;
                    }
                    None => break,
                }
            }
        }
        Scope::Myopic => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            for _ in 0..t {
                for &d in &order {
                    if state.assignment().count(d) >= t {
                        continue;
                    }
                    let mut list = Shortlist::new(params.list_size(), state.objective().value);
                    for a in 0..k {
                        if state.assignment().get(d, a) {
                            continue;
                        }
                        let mv = Move::Add { entry: d, to: a };
                        list.offer(mv, score(&state, &mv, params));
                    }
                    if let Some(c) = list.pick(rng) {
                        state.apply(&c.mv);
                        steps += 1;
                    }
                }
            }
        }
    }
    (state, steps)
}

/// Builds an initial assignment by repeatedly adding the next best pair.
/// Never exceeds `t` adversaries per entry.
pub fn construction<R: Rng + ?Sized>(
    instance: &Instance,
    params: &SearchParams,
    rng: &mut R,
) -> (Assignment, ObjectiveValue) {
    let (state, _) = construct_state(instance, params, rng);
    let g = state.objective();
    (state.into_assignment(), g)
}
