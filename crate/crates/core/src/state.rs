//! Assignment plus running disclosure/utility totals, so that a candidate
//! move is scored in `O(|P(d)| + k)` instead of a full recomputation.
//!
//! Per `(property, adversary)` cell the state keeps an accumulator:
//! member count (step), weighted share and member count (linear,
//! quadratic), or dot product and both squared norms (cosine). Per adversary
//! it keeps the row sum, the row maximum and the number of non-zero cells.

use crate::assignment::{Assignment, Move};
use crate::disclosure::{disclosure_vector, DisclosureVector};
use crate::instance::{Aggregation, DisclosureFamily, Instance};
use crate::objective::{tradeoff_objective, ObjectiveValue};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Cell {
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Debug, Clone)]
pub struct SearchState<'a> {
    inst: &'a Instance,
    assignment: Assignment,
    raw_utility: f64,
    cells: Vec<Cell>,
    values: Vec<f64>,
    row_sum: Vec<f64>,
    row_max: Vec<f64>,
    row_nonzero: Vec<usize>,
    unassigned: usize,
}

impl<'a> SearchState<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let n = inst.num_entries();
        let k = inst.num_adversaries();
        let cells = k * inst.num_properties();
        Self {
            inst,
            assignment: Assignment::empty(n, k),
            raw_utility: 0.0,
            cells: vec![Cell::default(); cells],
            values: vec![0.0; cells],
            row_sum: vec![0.0; k],
            row_max: vec![0.0; k],
            row_nonzero: vec![0; k],
            unassigned: n,
        }
    }

    pub fn from_assignment(inst: &'a Instance, assignment: &Assignment) -> Self {
        let mut s = Self::new(inst);
        for (d, a) in assignment.pairs() {
            s.apply(&Move::Add { entry: d, to: a });
        }
        s
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn into_assignment(self) -> Assignment {
        self.assignment
    }

    pub fn objective(&self) -> ObjectiveValue {
        ObjectiveValue::new(
            self.raw_utility / self.inst.utility().normalizer(),
            self.disclosure(),
            self.unassigned,
            self.inst.lambda(),
            self.inst.tau(),
        )
    }

    pub fn disclosure(&self) -> f64 {
        (0..self.inst.num_adversaries())
            .map(|a| self.level(a))
            .fold(0.0, f64::max)
    }

    /// Current `f_a[p]` values.
    pub fn disclosure_vector(&self) -> DisclosureVector {
        let p = self.inst.num_properties();
        DisclosureVector::from_rows(
            (0..self.inst.num_adversaries())
                .map(|a| self.values[a * p..(a + 1) * p].to_vec())
                .collect(),
        )
    }

    /// Aggregated disclosure of one adversary.
    pub fn level(&self, adversary: usize) -> f64 {
        let p = self.inst.num_properties();
        if p == 0 {
            return 0.0;
        }
        match self.inst.model().aggregation {
            Aggregation::Worst => self.row_max[adversary],
            Aggregation::Average => {
                if self.row_nonzero[adversary] == 0 {
                    0.0
                } else {
                    self.row_sum[adversary] / p as f64
                }
            }
        }
    }

    #[inline]
    fn cell_value(&self, p: usize, cell: Cell) -> f64 {
        match self.inst.model().family {
            DisclosureFamily::Step => {
                let size = self.inst.hypergraph().property(p).members.len() as f64;
                if cell.a >= size - 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            DisclosureFamily::Linear => cell.a,
            DisclosureFamily::Quadratic => cell.a * cell.a,
            DisclosureFamily::Cosine => {
                if cell.b <= 0.0 || cell.c <= 0.0 || cell.a <= 0.0 {
                    0.0
                } else {
                    (cell.a / (cell.b.sqrt() * cell.c.sqrt())).min(1.0)
                }
            }
        }
    }

    /// Accumulator of cell `(p, adversary)` after flipping `x_{d,adversary}`,
    /// where `p` is the `i`-th property incident to `d`.
    #[inline]
    fn cell_after(&self, d: usize, i: usize, p: usize, adversary: usize, set: bool) -> Cell {
        let np = self.inst.num_properties();
        let mut cell = self.cells[adversary * np + p];
        let sign = if set { 1.0 } else { -1.0 };
        match self.inst.model().family {
            DisclosureFamily::Step => cell.a += sign,
            DisclosureFamily::Linear | DisclosureFamily::Quadratic => {
                let pos = self.inst.hypergraph().incidence_positions(d)[i];
                let w = self.inst.hypergraph().property(p).weight_of(pos).unwrap_or(0.0);
                cell.b += sign;
                cell.a = if cell.b < 0.5 {
                    0.0
                } else {
                    (cell.a + sign * w).clamp(0.0, 1.0)
                };
            }
            DisclosureFamily::Cosine => {
                let idx = self.inst.cosine_index().expect("cosine cache");
                let link = idx.links[d][i];
                let c = idx.count[d];
                if let Some(e) = link.partner {
                    if self.assignment.get(e, adversary) {
                        cell.a += sign * c * idx.count[e];
                    }
                }
                if link.first_side {
                    cell.b += sign * c * c;
                } else {
                    cell.c += sign * c * c;
                }
            }
        }
        cell
    }

    /// Level of `adversary` after flipping `x_{d,adversary}`.
    fn level_after_flip(&self, d: usize, adversary: usize, set: bool) -> f64 {
        let np = self.inst.num_properties();
        if np == 0 {
            return 0.0;
        }
        let incident = self.inst.hypergraph().incidence(d);
        let base = adversary * np;
        match self.inst.model().aggregation {
            Aggregation::Average => {
                let mut sum = self.row_sum[adversary];
                let mut nonzero = self.row_nonzero[adversary] as isize;
                for (i, &p) in incident.iter().enumerate() {
                    let old = self.values[base + p];
                    let new = self.cell_value(p, self.cell_after(d, i, p, adversary, set));
                    sum += new - old;
                    nonzero += (new != 0.0) as isize - (old != 0.0) as isize;
                }
                if nonzero == 0 {
                    0.0
                } else {
                    sum.max(0.0) / np as f64
                }
            }
            Aggregation::Worst => {
                let current = self.row_max[adversary];
                let mut max_new = 0.0_f64;
                let mut lost_max = false;
                for (i, &p) in incident.iter().enumerate() {
                    let old = self.values[base + p];
                    let new = self.cell_value(p, self.cell_after(d, i, p, adversary, set));
                    max_new = max_new.max(new);
                    if new < old && old >= current {
                        lost_max = true;
                    }
                }
                if !lost_max {
                    return current.max(max_new);
                }
                // The old maximum may have been this entry's doing; rescan.
                let mut m = max_new;
                let mut j = 0;
                for p in 0..np {
                    if j < incident.len() && incident[j] == p {
                        j += 1;
                        continue;
                    }
                    m = m.max(self.values[base + p]);
                }
                m
            }
        }
    }

    /// Objective after `mv`, without changing the state. `mv` must be valid.
    pub fn evaluate(&self, mv: &Move) -> ObjectiveValue {
        let d = mv.entry();
        let w = self.inst.utility();
        let mut raw = self.raw_utility;
        let mut changed = [(usize::MAX, 0.0); 2];
        for (slot, (_, a, set)) in mv.flips().enumerate() {
            raw += if set { w.weight(d, a) } else { -w.weight(d, a) };
            changed[slot] = (a, self.level_after_flip(d, a, set));
        }
        let mut f = 0.0_f64;
        for a in 0..self.inst.num_adversaries() {
            let level = match changed.iter().find(|(c, _)| *c == a) {
                Some(&(_, l)) => l,
                None => self.level(a),
            };
            f = f.max(level);
        }
        let before = self.assignment.count(d);
        let after = (before as isize + mv.count_delta()) as usize;
        let unassigned = self.unassigned + (after == 0) as usize - (before == 0) as usize;
        ObjectiveValue::new(
            raw / w.normalizer(),
            f,
            unassigned,
            self.inst.lambda(),
            self.inst.tau(),
        )
    }

    /// Same as [`evaluate`](Self::evaluate) but by full recomputation.
    pub fn evaluate_full(&self, mv: &Move) -> ObjectiveValue {
        let mut next = self.assignment.clone();
        next.apply_unchecked(mv);
        tradeoff_objective(self.inst, &next)
    }

    /// Applies a valid move and updates all running totals.
    pub fn apply(&mut self, mv: &Move) {
        debug_assert!(self.assignment.validate_move(mv).is_ok(), "{mv:?}");
        let d = mv.entry();
        let before = self.assignment.count(d);
        let np = self.inst.num_properties();
        for (_, a, set) in mv.flips() {
            let w = self.inst.utility().weight(d, a);
            self.raw_utility += if set { w } else { -w };
            let base = a * np;
            let mut rescan = false;
            for (i, &p) in self.inst.hypergraph().incidence(d).iter().enumerate() {
                let cell = self.cell_after(d, i, p, a, set);
                let old = self.values[base + p];
                let new = self.cell_value(p, cell);
                self.cells[base + p] = cell;
                self.values[base + p] = new;
                self.row_sum[a] += new - old;
                self.row_nonzero[a] =
                    (self.row_nonzero[a] as isize + (new != 0.0) as isize - (old != 0.0) as isize)
                        as usize;
                if new < old && old >= self.row_max[a] {
                    rescan = true;
                } else if new > self.row_max[a] {
                    self.row_max[a] = new;
                }
            }
            if self.row_nonzero[a] == 0 {
                self.row_sum[a] = 0.0;
            }
            if rescan {
                self.row_max[a] = self.values[base..base + np]
                    .iter()
                    .copied()
                    .fold(0.0, f64::max);
            }
        }
        self.assignment.apply_unchecked(mv);
        let after = self.assignment.count(d);
        if before == 0 && after > 0 {
            self.unassigned -= 1;
        } else if before > 0 && after == 0 {
            self.unassigned += 1;
        }
    }

    /// Largest absolute gap between the running totals and a from-scratch
    /// evaluation, over utility, disclosure and every `f_a[p]`.
    pub fn drift(&self) -> f64 {
        let fresh = tradeoff_objective(self.inst, &self.assignment);
        let ours = self.objective();
        let v = disclosure_vector(self.inst, &self.assignment);
        let mut gap = (fresh.utility - ours.utility)
            .abs()
            .max((fresh.disclosure - ours.disclosure).abs())
            .max((fresh.unassigned as f64 - ours.unassigned as f64).abs());
        let np = self.inst.num_properties();
        for a in 0..self.inst.num_adversaries() {
            for p in 0..np {
                gap = gap.max((v.get(a, p) - self.values[a * np + p]).abs());
            }
        }
        gap
    }
}
