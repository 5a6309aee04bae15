//! Problem data: entries, sensitive properties as hyperedges over entries,
//! utility weights and the tradeoff parameters.
//!
//! Instances are built from a [`RawInstance`] (the JSON document) through
//! [`validate_instance`], which checks every invariant and builds the lookup
//! caches the solvers rely on. A validated [`Instance`] is immutable.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::utility::UtilityWeights;

/// Tolerance on `Σ a_dp = 1` for linear and quadratic properties.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisclosureFamily {
    Step,
    Linear,
    Quadratic,
    Cosine,
}

impl DisclosureFamily {
    pub fn name(self) -> &'static str {
        match self {
            DisclosureFamily::Step => "step",
            DisclosureFamily::Linear => "linear",
            DisclosureFamily::Quadratic => "quadratic",
            DisclosureFamily::Cosine => "cosine",
        }
    }

    /// Whether adding assignments can only raise per-property disclosure.
    pub fn is_monotone(self) -> bool {
        !matches!(self, DisclosureFamily::Cosine)
    }

    fn needs_weights(self) -> bool {
        matches!(self, DisclosureFamily::Linear | DisclosureFamily::Quadratic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Largest single property disclosure for the worst adversary.
    Worst,
    /// Mean property disclosure for the worst adversary.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DisclosureModel {
    pub family: DisclosureFamily,
    pub aggregation: Aggregation,
}

impl DisclosureModel {
    pub fn new(family: DisclosureFamily, aggregation: Aggregation) -> Self {
        Self {
            family,
            aggregation,
        }
    }
}

/// Aggregated check-in record carried by entries of location instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkin {
    pub user: String,
    pub location: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataEntry {
    pub id: usize,
    pub payload: Option<Checkin>,
}

/// A property `p` together with the entry set `D_p` that reveals it.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitiveProperty {
    pub id: usize,
    /// Strictly increasing entry ids.
    pub members: Vec<usize>,
    /// `a_dp` aligned with `members`.
    pub weights: Option<Vec<f64>>,
}

impl SensitiveProperty {
    pub fn weight_of(&self, position: usize) -> Option<f64> {
        self.weights.as_ref().map(|w| w[position])
    }
}

/// Entry/property incidence in hyperedge form, with its transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyHypergraph {
    num_entries: usize,
    properties: Vec<SensitiveProperty>,
    incidence: Vec<Vec<usize>>,
    /// `incidence_pos[d][i]` is the position of `d` inside the members of
    /// property `incidence[d][i]`.
    incidence_pos: Vec<Vec<usize>>,
    dimension: usize,
}

impl DependencyHypergraph {
    pub fn from_properties(num_entries: usize, properties: Vec<SensitiveProperty>) -> Result<Self> {
        let mut incidence = vec![Vec::new(); num_entries];
        let mut incidence_pos = vec![Vec::new(); num_entries];
        let mut dimension = 0;
        for (p, prop) in properties.iter().enumerate() {
            if prop.id != p {
                return Err(Error::OutOfRange(format!(
                    "property at position {p} has id {}",
                    prop.id
                )));
            }
            if prop.members.is_empty() {
                return Err(Error::EmptyProperty(p));
            }
            if let Some(w) = &prop.weights {
                if w.len() != prop.members.len() {
                    return Err(Error::OutOfRange(format!(
                        "property {p} has {} weights for {} members",
                        w.len(),
                        prop.members.len()
                    )));
                }
            }
            for (pos, &d) in prop.members.iter().enumerate() {
                if d >= num_entries {
                    return Err(Error::OutOfRange(format!("property {p} member {d}")));
                }
                if pos > 0 && prop.members[pos - 1] >= d {
                    return Err(Error::InvalidParameter(format!(
                        "property {p} members must be strictly increasing"
                    )));
                }
                incidence[d].push(p);
                incidence_pos[d].push(pos);
            }
            dimension = dimension.max(prop.members.len());
        }
        Ok(Self {
            num_entries,
            properties,
            incidence,
            incidence_pos,
            dimension,
        })
    }

    pub fn num_entries(&self) -> usize {
        self.num_entries
    }

    pub fn num_properties(&self) -> usize {
        self.properties.len()
    }

    pub fn properties(&self) -> &[SensitiveProperty] {
        &self.properties
    }

    pub fn property(&self, p: usize) -> &SensitiveProperty {
        &self.properties[p]
    }

    /// Properties containing entry `d`, ascending.
    pub fn incidence(&self, d: usize) -> &[usize] {
        &self.incidence[d]
    }

    pub(crate) fn incidence_positions(&self, d: usize) -> &[usize] {
        &self.incidence_pos[d]
    }

    /// Size of the largest hyperedge.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Flattens back into `(entry, property)` pairs, sorted.
    pub fn to_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .properties
            .iter()
            .flat_map(|p| p.members.iter().map(move |&d| (d, p.id)))
            .collect();
        edges.sort_unstable();
        edges
    }
}

/// Builds the hyperedge form of a bipartite entry/property graph.
pub fn bipartite_to_hypergraph(
    edges: &BTreeSet<(usize, usize)>,
    num_entries: usize,
    num_properties: usize,
) -> Result<DependencyHypergraph> {
    let mut members = vec![Vec::new(); num_properties];
    for &(d, p) in edges {
        if d >= num_entries || p >= num_properties {
            return Err(Error::OutOfRange(format!("edge ({d}, {p})")));
        }
        members[p].push(d);
    }
    let properties = members
        .into_iter()
        .enumerate()
        .map(|(id, mut members)| {
            members.sort_unstable();
            SensitiveProperty {
                id,
                members,
                weights: None,
            }
        })
        .collect();
    DependencyHypergraph::from_properties(num_entries, properties)
}

/// Which endpoint of a friendship property an entry belongs to, and the entry
/// of the other endpoint at the same location, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CosineLink {
    pub first_side: bool,
    pub partner: Option<usize>,
}

/// Lookup tables for cosine disclosure.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineIndex {
    pub(crate) user: Vec<usize>,
    pub(crate) location: Vec<usize>,
    pub(crate) count: Vec<f64>,
    pub(crate) pairs: Vec<(usize, usize)>,
    /// Aligned with the hypergraph incidence lists.
    pub(crate) links: Vec<Vec<CosineLink>>,
}

impl CosineIndex {
    fn build(entries: &[DataEntry], hypergraph: &DependencyHypergraph) -> Result<Self> {
        let mut user_ids: HashMap<&str, usize> = HashMap::new();
        let mut location_ids: HashMap<&str, usize> = HashMap::new();
        let n = entries.len();
        let mut user = Vec::with_capacity(n);
        let mut location = Vec::with_capacity(n);
        let mut count = Vec::with_capacity(n);
        let mut seen = HashMap::new();
        for e in entries {
            let c = e.payload.as_ref().ok_or(Error::MissingPayload(e.id))?;
            let next = user_ids.len();
            let u = *user_ids.entry(c.user.as_str()).or_insert(next);
            let next = location_ids.len();
            let l = *location_ids.entry(c.location.as_str()).or_insert(next);
            if seen.insert((u, l), e.id).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate (user, location) entry ({}, {})",
                    c.user, c.location
                )));
            }
            user.push(u);
            location.push(l);
            count.push(c.count as f64);
        }

        let mut pairs = Vec::with_capacity(hypergraph.num_properties());
        for prop in hypergraph.properties() {
            let users: BTreeSet<usize> = prop.members.iter().map(|&d| user[d]).collect();
            if users.len() != 2 {
                return Err(Error::NotAUserPair {
                    property: prop.id,
                    found: users.len(),
                });
            }
            let mut it = users.into_iter();
            pairs.push((it.next().unwrap(), it.next().unwrap()));
        }

        let mut links: Vec<Vec<CosineLink>> = (0..n)
            .map(|d| Vec::with_capacity(hypergraph.incidence(d).len()))
            .collect();
        for d in 0..n {
            for &p in hypergraph.incidence(d) {
                let (first, second) = pairs[p];
                let first_side = user[d] == first;
                let other = if first_side { second } else { first };
                let partner = seen.get(&(other, location[d])).copied().filter(|e| {
                    hypergraph.property(p).members.binary_search(e).is_ok()
                });
                links[d].push(CosineLink {
                    first_side,
                    partner,
                });
            }
        }
        Ok(Self {
            user,
            location,
            count,
            pairs,
            links,
        })
    }
}

/// The JSON document form of an instance. Key names are part of the file
/// format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub num_entries: usize,
    pub num_adversaries: usize,
    pub t: usize,
    pub lambda: f64,
    #[serde(rename = "tau_I")]
    pub tau_i: f64,
    pub model: DisclosureModel,
    pub properties: Vec<RawProperty>,
    pub utility_weights: Vec<Vec<f64>>,
    /// Check-in payloads, one per entry; required by the cosine family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Checkin>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawProperty {
    pub id: usize,
    pub members: Vec<usize>,
    #[serde(default)]
    pub weights: Vec<f64>,
}

impl RawInstance {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    entries: Vec<DataEntry>,
    hypergraph: DependencyHypergraph,
    utility: UtilityWeights,
    k: usize,
    t: usize,
    lambda: f64,
    tau: f64,
    model: DisclosureModel,
    dimension_warning: bool,
    cosine: Option<CosineIndex>,
}

/// Checks every instance invariant and builds the caches.
pub fn validate_instance(raw: RawInstance) -> Result<Instance> {
    let n = raw.num_entries;
    let k = raw.num_adversaries;
    if n == 0 {
        return Err(Error::NoEntries);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("num_adversaries must be ≥ 1".into()));
    }
    if raw.t == 0 {
        return Err(Error::InvalidParameter("t must be ≥ 1".into()));
    }
    if raw.t > k {
        return Err(Error::TExceedsK { t: raw.t, k });
    }
    if !(0.0..=1.0).contains(&raw.lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {} outside [0, 1]",
            raw.lambda
        )));
    }
    if !(0.0..=1.0).contains(&raw.tau_i) {
        return Err(Error::InvalidParameter(format!(
            "tau_I = {} outside [0, 1]",
            raw.tau_i
        )));
    }
    if raw.utility_weights.len() != n {
        return Err(Error::OutOfRange(format!(
            "utility_weights has {} rows, expected {n}",
            raw.utility_weights.len()
        )));
    }

    let family = raw.model.family;
    let mut properties = Vec::with_capacity(raw.properties.len());
    for (pos, rp) in raw.properties.into_iter().enumerate() {
        if rp.id != pos {
            return Err(Error::OutOfRange(format!(
                "property at position {pos} has id {}",
                rp.id
            )));
        }
        if rp.members.is_empty() {
            return Err(Error::EmptyProperty(rp.id));
        }
        let has_weights = !rp.weights.is_empty();
        if has_weights && rp.weights.len() != rp.members.len() {
            return Err(Error::OutOfRange(format!(
                "property {} has {} weights for {} members",
                rp.id,
                rp.weights.len(),
                rp.members.len()
            )));
        }
        let mut pairs: Vec<(usize, f64)> = if has_weights {
            rp.members.iter().copied().zip(rp.weights.iter().copied()).collect()
        } else {
            rp.members.iter().map(|&d| (d, f64::NAN)).collect()
        };
        pairs.sort_by_key(|&(d, _)| d);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter(format!(
                "property {} lists a member twice",
                rp.id
            )));
        }
        let members: Vec<usize> = pairs.iter().map(|&(d, _)| d).collect();
        let weights = if has_weights {
            let w: Vec<f64> = pairs.iter().map(|&(_, w)| w).collect();
            for (&d, &v) in members.iter().zip(&w) {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::BadWeight {
                        value: v,
                        location: format!("property {} member {d}", rp.id),
                    });
                }
            }
            Some(w)
        } else {
            None
        };
        if family.needs_weights() {
            let w = weights.as_ref().ok_or(Error::MissingWeights(rp.id))?;
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(Error::WeightSum {
                    property: rp.id,
                    sum,
                });
            }
        }
        properties.push(SensitiveProperty {
            id: rp.id,
            members,
            weights,
        });
    }

    let hypergraph = DependencyHypergraph::from_properties(n, properties)?;
    let utility = UtilityWeights::new(&raw.utility_weights, k, raw.t)?;
    if utility.normalizer() <= 0.0 {
        return Err(Error::ZeroNormalization);
    }

    let entries: Vec<DataEntry> = match raw.entries {
        Some(list) => {
            if list.len() != n {
                return Err(Error::OutOfRange(format!(
                    "{} entry payloads for {n} entries",
                    list.len()
                )));
            }
            list.into_iter()
                .enumerate()
                .map(|(id, c)| DataEntry {
                    id,
                    payload: Some(c),
                })
                .collect()
        }
        None => (0..n).map(|id| DataEntry { id, payload: None }).collect(),
    };
    let cosine = if family == DisclosureFamily::Cosine {
        Some(CosineIndex::build(&entries, &hypergraph)?)
    } else {
        None
    };

    let dimension_warning = hypergraph.dimension() <= k;
    Ok(Instance {
        entries,
        hypergraph,
        utility,
        k,
        t: raw.t,
        lambda: raw.lambda,
        tau: raw.tau_i,
        model: raw.model,
        dimension_warning,
        cosine,
    })
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        validate_instance(RawInstance::from_json(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        self.to_raw().to_json()
    }

    pub fn to_raw(&self) -> RawInstance {
        let entries = if self.entries.iter().all(|e| e.payload.is_some()) {
            Some(
                self.entries
                    .iter()
                    .map(|e| e.payload.clone().unwrap())
                    .collect(),
            )
        } else {
            None
        };
        RawInstance {
            num_entries: self.num_entries(),
            num_adversaries: self.k,
            t: self.t,
            lambda: self.lambda,
            tau_i: self.tau,
            model: self.model,
            properties: self
                .hypergraph
                .properties()
                .iter()
                .map(|p| RawProperty {
                    id: p.id,
                    members: p.members.clone(),
                    weights: p.weights.clone().unwrap_or_default(),
                })
                .collect(),
            utility_weights: self.utility.to_rows(),
            entries,
        }
    }

    /// Same instance with different tradeoff parameters.
    pub fn with_tradeoff(&self, lambda: f64, tau: f64) -> Result<Self> {
        let mut raw = self.to_raw();
        raw.lambda = lambda;
        raw.tau_i = tau;
        validate_instance(raw)
    }

    pub fn with_model(&self, model: DisclosureModel) -> Result<Self> {
        let mut raw = self.to_raw();
        raw.model = model;
        validate_instance(raw)
    }

    pub fn num_entries(&self) -> usize {
        self.hypergraph.num_entries()
    }

    pub fn num_properties(&self) -> usize {
        self.hypergraph.num_properties()
    }

    /// `k = |A|`.
    pub fn num_adversaries(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn model(&self) -> DisclosureModel {
        self.model
    }

    pub fn entries(&self) -> &[DataEntry] {
        &self.entries
    }

    pub fn hypergraph(&self) -> &DependencyHypergraph {
        &self.hypergraph
    }

    pub fn utility(&self) -> &UtilityWeights {
        &self.utility
    }

    /// Set when the largest hyperedge is no bigger than `k`: some property
    /// can then be split with one member per adversary at most.
    pub fn dimension_warning(&self) -> bool {
        self.dimension_warning
    }

    pub fn cosine_index(&self) -> Option<&CosineIndex> {
        self.cosine.as_ref()
    }
}
