//! Reference implementations written directly from the definitions, sharing
//! nothing with the library beyond the plain instance document. Slow and
//! obvious on purpose.
#![allow(dead_code)]

use std::collections::BTreeMap;

use privpart::instance::{Checkin, RawProperty};
use privpart::{Aggregation, Assignment, DisclosureFamily, DisclosureModel, RawInstance};
use rand::Rng;

/// `x[d][a]`.
pub type Matrix = Vec<Vec<bool>>;

pub fn to_assignment(x: &Matrix) -> Assignment {
    let k = x.first().map_or(0, Vec::len);
    let pairs = x
        .iter()
        .enumerate()
        .flat_map(|(d, row)| row.iter().enumerate().filter(|(_, &b)| b).map(move |(a, _)| (d, a)));
    Assignment::from_pairs(x.len(), k, pairs).unwrap()
}

pub fn from_assignment(asg: &Assignment) -> Matrix {
    (0..asg.num_entries())
        .map(|d| (0..asg.num_adversaries()).map(|a| asg.get(d, a)).collect())
        .collect()
}

fn weighted_share(prop: &RawProperty, x: &Matrix, a: usize) -> f64 {
    let mut s = 0.0;
    for (i, &d) in prop.members.iter().enumerate() {
        if x[d][a] {
            s += prop.weights[i];
        }
    }
    s.min(1.0)
}

fn cosine_share(raw: &RawInstance, prop: &RawProperty, x: &Matrix, a: usize) -> f64 {
    let entries = raw.entries.as_ref().unwrap();
    let first = &entries[prop.members[0]].user;
    let mut u: BTreeMap<&str, f64> = BTreeMap::new();
    let mut v: BTreeMap<&str, f64> = BTreeMap::new();
    for &d in &prop.members {
        if !x[d][a] {
            continue;
        }
        let c = &entries[d];
        let side = if &c.user == first { &mut u } else { &mut v };
        *side.entry(&c.location).or_default() += c.count as f64;
    }
    let norm = |m: &BTreeMap<&str, f64>| m.values().map(|c| c * c).sum::<f64>().sqrt();
    let (nu, nv) = (norm(&u), norm(&v));
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let mut dot = 0.0;
    for (loc, cu) in &u {
        if let Some(cv) = v.get(loc) {
            dot += cu * cv;
        }
    }
    (dot / (nu * nv)).min(1.0)
}

/// `f[a][p]` under `family`, ignoring the instance's own family.
pub fn disclosure_as(raw: &RawInstance, family: DisclosureFamily, x: &Matrix) -> Vec<Vec<f64>> {
    (0..raw.num_adversaries)
        .map(|a| {
            raw.properties
                .iter()
                .map(|prop| match family {
                    DisclosureFamily::Step => {
                        if prop.members.iter().all(|&d| x[d][a]) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    DisclosureFamily::Linear => weighted_share(prop, x, a),
                    DisclosureFamily::Quadratic => weighted_share(prop, x, a).powi(2),
                    DisclosureFamily::Cosine => cosine_share(raw, prop, x, a),
                })
                .collect()
        })
        .collect()
}

pub fn disclosure(raw: &RawInstance, x: &Matrix) -> Vec<Vec<f64>> {
    disclosure_as(raw, raw.model.family, x)
}

pub fn aggregate(f: &[Vec<f64>], mode: Aggregation) -> f64 {
    let mut best = 0.0_f64;
    for row in f {
        if row.is_empty() {
            continue;
        }
        let level = match mode {
            Aggregation::Worst => row.iter().cloned().fold(0.0, f64::max),
            Aggregation::Average => row.iter().sum::<f64>() / row.len() as f64,
        };
        best = best.max(level);
    }
    best
}

pub fn normalizer(raw: &RawInstance) -> f64 {
    raw.utility_weights
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort_by(|a, b| b.partial_cmp(a).unwrap());
            r.iter().take(raw.t).sum::<f64>()
        })
        .sum()
}

pub fn utility(raw: &RawInstance, x: &Matrix) -> f64 {
    let mut s = 0.0;
    for (d, row) in x.iter().enumerate() {
        for (a, &b) in row.iter().enumerate() {
            if b {
                s += raw.utility_weights[d][a];
            }
        }
    }
    s / normalizer(raw)
}

/// `u + λ(τ − f) − C`.
pub fn objective(raw: &RawInstance, x: &Matrix) -> f64 {
    let f = aggregate(&disclosure(raw, x), raw.model.aggregation);
    let unassigned = x.iter().filter(|row| !row.iter().any(|&b| b)).count();
    utility(raw, x) + raw.lambda * (raw.tau_i - f) - unassigned as f64
}

/// Every way to give each entry between 1 and `t` adversaries.
pub fn feasible_assignments(n: usize, k: usize, t: usize) -> Vec<Matrix> {
    let rows: Vec<Vec<bool>> = (1u32..(1 << k))
        .filter(|m| m.count_ones() as usize <= t)
        .map(|m| (0..k).map(|a| m & (1 << a) != 0).collect())
        .collect();
    let mut out: Vec<Matrix> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * rows.len());
        for partial in &out {
            for row in &rows {
                let mut m = partial.clone();
                m.push(row.clone());
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// Exhaustive maximum of the tradeoff objective over feasible assignments.
pub fn brute_force(raw: &RawInstance) -> (f64, Matrix) {
    let mut best: Option<(f64, Matrix)> = None;
    for x in feasible_assignments(raw.num_entries, raw.num_adversaries, raw.t) {
        let g = objective(raw, &x);
        if best.as_ref().map_or(true, |(b, _)| g > *b) {
            best = Some((g, x));
        }
    }
    best.unwrap()
}

fn simplex<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

fn random_members<R: Rng>(rng: &mut R, n: usize, min: usize) -> Vec<usize> {
    loop {
        let members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if members.len() >= min {
            return members;
        }
    }
}

/// Small random instance: `|D| ≤ 6`, `k ≤ 3`, `t ≤ 2`, up to 3 properties.
/// Step properties have at least two members; cosine instances are built
/// from a few users checking in at shared locations.
pub fn random_instance<R: Rng>(rng: &mut R, family: DisclosureFamily) -> RawInstance {
    let k = rng.gen_range(1..=3);
    let t = rng.gen_range(1..=2.min(k));
    let aggregation = if rng.gen_bool(0.5) {
        Aggregation::Worst
    } else {
        Aggregation::Average
    };
    let (lambda, tau_i) = match family {
        DisclosureFamily::Step => (1.0, 0.0),
        _ => ([0.5, 1.0][rng.gen_range(0..2)], [0.0, 0.3][rng.gen_range(0..2)]),
    };

    let (n, properties, entries) = if family == DisclosureFamily::Cosine {
        let (entries, properties) = random_checkins(rng);
        (entries.len(), properties, Some(entries))
    } else {
        let n = rng.gen_range(2..=6);
        let np = rng.gen_range(1..=3);
        let properties = (0..np)
            .map(|id| {
                let members = random_members(rng, n, 2);
                let weights = if family == DisclosureFamily::Step {
                    vec![]
                } else {
                    simplex(rng, members.len())
                };
                RawProperty {
                    id,
                    members,
                    weights,
                }
            })
            .collect();
        (n, properties, None)
    };

    let utility_weights = (0..n)
        .map(|_| (0..k).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    RawInstance {
        num_entries: n,
        num_adversaries: k,
        t,
        lambda,
        tau_i,
        model: DisclosureModel::new(family, aggregation),
        properties,
        utility_weights,
        entries,
    }
}

/// Two or three users over three locations, at most six check-in entries,
/// one property per user pair.
fn random_checkins<R: Rng>(rng: &mut R) -> (Vec<Checkin>, Vec<RawProperty>) {
    let users = rng.gen_range(2..=3);
    loop {
        let mut entries = Vec::new();
        for u in 0..users {
            for l in 0..3 {
                if entries.len() < 6 && rng.gen_bool(0.6) {
                    entries.push(Checkin {
                        user: format!("u{u}"),
                        location: format!("l{l}"),
                        count: rng.gen_range(1..=3),
                    });
                }
            }
        }
        let of = |u: usize| -> Vec<usize> {
            (0..entries.len())
                .filter(|&d| entries[d].user == format!("u{u}"))
                .collect()
        };
        let mut properties = Vec::new();
        for u in 0..users {
            for v in u + 1..users {
                let (a, b) = (of(u), of(v));
                if a.is_empty() || b.is_empty() {
                    continue;
                }
                let mut members = [a, b].concat();
                members.sort_unstable();
                properties.push(RawProperty {
                    id: properties.len(),
                    members,
                    weights: vec![],
                });
            }
        }
        if !properties.is_empty() {
            return (entries, properties);
        }
    }
}

/// Each bit set with probability one half; rows may be empty.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, k: usize) -> Matrix {
    (0..n)
        .map(|_| (0..k).map(|_| rng.gen_bool(0.5)).collect())
        .collect()
}

pub const FAMILIES: [DisclosureFamily; 4] = [
    DisclosureFamily::Step,
    DisclosureFamily::Linear,
    DisclosureFamily::Quadratic,
    DisclosureFamily::Cosine,
];
