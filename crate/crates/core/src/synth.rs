//! Random bipartite entry/property instances with sparse high-utility pairs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    validate_instance, Aggregation, DisclosureFamily, DisclosureModel, Instance, RawInstance,
    RawProperty,
};

/// Redraws allowed for a property whose sampled member set is empty.
pub const MAX_PROPERTY_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_entries: usize,
    pub num_properties: usize,
    pub k: usize,
    #[serde(default = "default_t")]
    pub t: usize,
    /// Probability of each entry/property edge.
    #[serde(default = "default_p_f")]
    pub p_f: f64,
    /// Probability that a pair draws a high utility weight.
    #[serde(default = "default_p_u")]
    pub p_u: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub tau: f64,
    pub model: DisclosureModel,
    /// Every weight set to `1/k` instead of the random scheme.
    #[serde(default)]
    pub uniform_utility: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_t() -> usize {
    1
}
fn default_p_f() -> f64 {
    0.3
}
fn default_p_u() -> f64 {
    0.4
}
fn default_lambda() -> f64 {
    1.0
}

impl SynthConfig {
    /// Defaults: `t = 1`, `p_f = 0.3`, `p_u = 0.4`, `λ = 1`, `τ_I = 0`.
    pub fn new(num_entries: usize, num_properties: usize, k: usize, model: DisclosureModel) -> Self {
        Self {
            num_entries,
            num_properties,
            k,
            t: default_t(),
            p_f: default_p_f(),
            p_u: default_p_u(),
            lambda: default_lambda(),
            tau: 0.0,
            model,
            uniform_utility: false,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Same as [`generate_instance`], before validation.
pub fn generate_raw(cfg: &SynthConfig) -> Result<RawInstance> {
    for (name, p) in [("p_f", cfg.p_f), ("p_u", cfg.p_u)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
        }
    }
    if cfg.model.family == DisclosureFamily::Cosine {
        return Err(Error::UnsupportedFamily(
            "cosine needs check-in payloads; use geodata".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.num_entries;
    let k = cfg.k;

    let mut properties = Vec::with_capacity(cfg.num_properties);
    for p in 0..cfg.num_properties {
        let mut members = Vec::new();
        for _ in 0..MAX_PROPERTY_RETRIES {
            members = (0..n).filter(|_| rng.gen_bool(cfg.p_f)).collect();
            if !members.is_empty() {
                break;
            }
        }
        if members.is_empty() {
            return Err(Error::DegenerateEdgeProbability(p));
        }
        let share = 1.0 / members.len() as f64;
        properties.push(RawProperty {
            id: p,
            weights: vec![share; members.len()],
            members,
        });
    }

    let utility_weights = if cfg.uniform_utility {
        vec![vec![1.0 / k as f64; k]; n]
    } else {
        let u_min: f64 = rng.gen_range(0.0..0.1);
        (0..n)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        let w = if rng.gen_bool(cfg.p_u) {
                            rng.gen_range(0.8..=1.0)
                        } else {
                            u_min
                        };
                        w / k as f64
                    })
                    .collect()
            })
            .collect()
    };

    Ok(RawInstance {
        num_entries: n,
        num_adversaries: k,
        t: cfg.t,
        lambda: cfg.lambda,
        tau_i: cfg.tau,
        model: cfg.model,
        properties,
        utility_weights,
        entries: None,
    })
}

/// Deterministic given `cfg.seed`. Properties get equal weights
/// `1/|D_p|`.
pub fn generate_instance(cfg: &SynthConfig) -> Result<Instance> {
    validate_instance(generate_raw(cfg)?)
}

/// Shorthand for the linear family with average aggregation.
pub fn linear_average(num_entries: usize, num_properties: usize, k: usize) -> SynthConfig {
    SynthConfig::new(
        num_entries,
        num_properties,
        k,
        DisclosureModel::new(DisclosureFamily::Linear, Aggregation::Average),
    )
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::assignment::{Assignment, Move};
    use rand::seq::index::sample;

    /// 20 entries, 6 properties, `k = 3`, `t = 2`, worst aggregation.
    pub fn small_synthetic(seed: u64, family: DisclosureFamily) -> Instance {
        let mut cfg = SynthConfig::new(20, 6, 3, DisclosureModel::new(family, Aggregation::Worst));
        cfg.t = 2;
        cfg.seed = seed;
        generate_instance(&cfg).unwrap()
    }

    /// Uniformly random cardinality-feasible assignment.
    pub fn random_assignment<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Assignment {
        let k = inst.num_adversaries();
        let mut asg = Assignment::empty(inst.num_entries(), k);
        for d in 0..inst.num_entries() {
            let c = rng.gen_range(1..=inst.t());
            for a in sample(rng, k, c) {
                asg.apply(&Move::Add { entry: d, to: a }).unwrap();
            }
        }
        asg
    }
}
