use serde::Serialize;

use crate::assignment::Assignment;
use crate::disclosure::overall_disclosure;
use crate::instance::Instance;
use crate::utility::total_utility;

/// Penalized tradeoff `G = u + λ(τ_I − f) − C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveValue {
    pub utility: f64,
    pub disclosure: f64,
    /// Entries held by no adversary.
    pub unassigned: usize,
    pub value: f64,
}

impl ObjectiveValue {
    pub fn new(utility: f64, disclosure: f64, unassigned: usize, lambda: f64, tau: f64) -> Self {
        Self {
            utility,
            disclosure,
            unassigned,
            value: utility + lambda * (tau - disclosure) - unassigned as f64,
        }
    }

    /// Tradeoff value without the cardinality penalty.
    pub fn tradeoff(&self, lambda: f64, tau: f64) -> f64 {
        self.utility + lambda * (tau - self.disclosure)
    }
}

/// Recomputes `G` from scratch.
pub fn tradeoff_objective(instance: &Instance, assignment: &Assignment) -> ObjectiveValue {
    let u = total_utility(instance, assignment).expect("validated instances have Z > 0");
    let f = overall_disclosure(instance, assignment);
    ObjectiveValue::new(
        u,
        f,
        assignment.unassigned_count(),
        instance.lambda(),
        instance.tau(),
    )
}

/// Cardinality-feasible and `f(S) < τ_I` (strict).
pub fn discbudget_feasible(instance: &Instance, assignment: &Assignment, tau: f64) -> bool {
    assignment.is_feasible(instance.t()) && overall_disclosure(instance, assignment) < tau
}
