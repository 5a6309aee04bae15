//! Per-property, per-adversary disclosure `f_a(S_a)[p]` for the four
//! supported families, and aggregation to the scalar `f(S)`.
//!
//! Everything here recomputes from scratch. The search code keeps running
//! totals instead (see [`crate::state`]) and is checked against these
//! functions.

use std::collections::HashMap;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::instance::{Aggregation, DisclosureFamily, Instance};

/// `k` rows of `|P|` disclosure values.
#[derive(Debug, Clone, PartialEq)]
pub struct DisclosureVector {
    num_properties: usize,
    values: Vec<f64>,
}

impl DisclosureVector {
    pub fn zeros(num_adversaries: usize, num_properties: usize) -> Self {
        Self {
            num_properties,
            values: vec![0.0; num_adversaries * num_properties],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let num_properties = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == num_properties));
        Self {
            num_properties,
            values: rows.concat(),
        }
    }

    pub fn num_properties(&self) -> usize {
        self.num_properties
    }

    pub fn num_adversaries(&self) -> usize {
        if self.num_properties == 0 {
            0
        } else {
            self.values.len() / self.num_properties
        }
    }

    #[inline]
    pub fn get(&self, adversary: usize, property: usize) -> f64 {
        self.values[adversary * self.num_properties + property]
    }

    pub fn set(&mut self, adversary: usize, property: usize, value: f64) {
        self.values[adversary * self.num_properties + property] = value;
    }

    pub fn row(&self, adversary: usize) -> &[f64] {
        let p = self.num_properties;
        &self.values[adversary * p..(adversary + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.num_properties.max(1))
    }

    /// `max_a f_a[p]` for each property.
    pub fn per_property_max(&self) -> Vec<f64> {
        (0..self.num_properties)
            .map(|p| {
                self.rows()
                    .map(|r| r[p])
                    .fold(0.0_f64, f64::max)
            })
            .collect()
    }

    /// Scalar disclosure of one adversary's row under `mode`.
    pub fn adversary_level(&self, adversary: usize, mode: Aggregation) -> f64 {
        aggregate_row(self.row(adversary), mode)
    }
}

pub(crate) fn aggregate_row(row: &[f64], mode: Aggregation) -> f64 {
    if row.is_empty() {
        return 0.0;
    }
    match mode {
        Aggregation::Worst => row.iter().copied().fold(0.0, f64::max),
        Aggregation::Average => row.iter().fold(0.0, |s, x| s + x) / row.len() as f64,
    }
}

/// `worst`: `max_a max_p f_a[p]`; `average`: `max_a mean_p f_a[p]`.
pub fn aggregate_disclosure(v: &DisclosureVector, mode: Aggregation) -> f64 {
    if v.num_properties() == 0 {
        return 0.0;
    }
    v.rows().map(|r| aggregate_row(r, mode)).fold(0.0, f64::max)
}

/// `f_a[p] = 1` exactly when every member of `D_p` went to `a`.
pub fn step_disclosure(instance: &Instance, assignment: &Assignment) -> DisclosureVector {
    let k = instance.num_adversaries();
    let mut v = DisclosureVector::zeros(k, instance.num_properties());
    for prop in instance.hypergraph().properties() {
        for a in 0..k {
            if prop.members.iter().all(|&d| assignment.get(d, a)) {
                v.set(a, prop.id, 1.0);
            }
        }
    }
    v
}

fn weighted_share(instance: &Instance, assignment: &Assignment) -> Result<DisclosureVector> {
    let k = instance.num_adversaries();
    let mut v = DisclosureVector::zeros(k, instance.num_properties());
    for prop in instance.hypergraph().properties() {
        let weights = prop.weights.as_ref().ok_or(Error::MissingWeights(prop.id))?;
        for a in 0..k {
            let s: f64 = prop
                .members
                .iter()
                .zip(weights)
                .filter(|(&d, _)| assignment.get(d, a))
                .map(|(_, &w)| w)
                .fold(0.0, |acc, w| acc + w);
            v.set(a, prop.id, s.clamp(0.0, 1.0));
        }
    }
    Ok(v)
}

/// `f_a[p] = Σ_{d ∈ D_p} a_dp x_da`.
pub fn linear_disclosure(instance: &Instance, assignment: &Assignment) -> Result<DisclosureVector> {
    weighted_share(instance, assignment)
}

/// `f_a[p] = (Σ_{d ∈ D_p} a_dp x_da)^2`.
pub fn quadratic_disclosure(
    instance: &Instance,
    assignment: &Assignment,
) -> Result<DisclosureVector> {
    let mut v = weighted_share(instance, assignment)?;
    for x in v.values.iter_mut() {
        *x *= *x;
    }
    Ok(v)
}

/// Cosine similarity between the two users' location-count vectors, each
/// restricted to the entries adversary `a` received. Zero when either
/// restricted vector is empty.
pub fn cosine_disclosure(instance: &Instance, assignment: &Assignment) -> Result<DisclosureVector> {
    let k = instance.num_adversaries();
    let mut v = DisclosureVector::zeros(k, instance.num_properties());
    let entries = instance.entries();
    for prop in instance.hypergraph().properties() {
        let mut users: Vec<&str> = Vec::with_capacity(2);
        for &d in &prop.members {
            let c = entries[d].payload.as_ref().ok_or(Error::MissingPayload(d))?;
            if !users.contains(&c.user.as_str()) {
                users.push(c.user.as_str());
            }
        }
        if users.len() != 2 {
            return Err(Error::NotAUserPair {
                property: prop.id,
                found: users.len(),
            });
        }
        for a in 0..k {
            let mut first: HashMap<&str, f64> = HashMap::new();
            let mut second: HashMap<&str, f64> = HashMap::new();
            for &d in prop.members.iter().filter(|&&d| assignment.get(d, a)) {
                let c = entries[d].payload.as_ref().unwrap();
                let side = if c.user == users[0] {
                    &mut first
                } else {
                    &mut second
                };
                *side.entry(c.location.as_str()).or_insert(0.0) += c.count as f64;
            }
            v.set(a, prop.id, cosine(&first, &second));
        }
    }
    Ok(v)
}

fn cosine(x: &HashMap<&str, f64>, y: &HashMap<&str, f64>) -> f64 {
    let nx: f64 = x.values().map(|c| c * c).sum();
    let ny: f64 = y.values().map(|c| c * c).sum();
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    let dot: f64 = x
        .iter()
        .filter_map(|(loc, cx)| y.get(loc).map(|cy| cx * cy))
        .fold(0.0, |s, v| s + v);
    (dot / (nx.sqrt() * ny.sqrt())).clamp(0.0, 1.0)
}

/// Disclosure vector for the instance's own family.
pub fn disclosure_vector(instance: &Instance, assignment: &Assignment) -> DisclosureVector {
    let v = match instance.model().family {
        DisclosureFamily::Step => Ok(step_disclosure(instance, assignment)),
        DisclosureFamily::Linear => linear_disclosure(instance, assignment),
        DisclosureFamily::Quadratic => quadratic_disclosure(instance, assignment),
        DisclosureFamily::Cosine => cosine_disclosure(instance, assignment),
    };
    v.expect("validated instances carry what their family needs")
}

/// Scalar `f(S)` under the instance's model.
pub fn overall_disclosure(instance: &Instance, assignment: &Assignment) -> f64 {
    aggregate_disclosure(
        &disclosure_vector(instance, assignment),
        instance.model().aggregation,
    )
}
