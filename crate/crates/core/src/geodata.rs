//! Location check-ins and friendship links turned into cosine-disclosure
//! instances.
//!
//! Check-in lines follow the common location-network layout, tab or comma
//! separated: `user, timestamp, latitude, longitude, location` or the short
//! `user, timestamp, location`. Friendship lines are `user, user`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    validate_instance, Aggregation, Checkin, DisclosureFamily, DisclosureModel, Instance,
    RawInstance, RawProperty,
};

/// Utility of an entry at an adversary outside its location's region.
pub const OUT_OF_REGION_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckinRecord {
    pub user: String,
    pub timestamp: String,
    pub location: String,
}

/// Visits of one user to one location.
pub type AggregatedEntry = Checkin;

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    /// Sorted by `(user, location)`.
    pub entries: Vec<AggregatedEntry>,
    pub valid_lines: usize,
    pub skipped_lines: usize,
}

fn split_fields(line: &str) -> Vec<&str> {
    let sep = if line.contains('\t') { '\t' } else { ',' };
    line.split(sep).map(str::trim).collect()
}

/// Parses one check-in line. `None` for malformed lines.
pub fn parse_checkin(line: &str) -> Option<CheckinRecord> {
    let f = split_fields(line);
    let location = match f.len() {
        3 => f[2],
        5 => {
            f[2].parse::<f64>().ok()?;
            f[3].parse::<f64>().ok()?;
            f[4]
        }
        _ => return None,
    };
    if f[0].is_empty() || location.is_empty() {
        return None;
    }
    Some(CheckinRecord {
        user: f[0].to_string(),
        timestamp: f[1].to_string(),
        location: location.to_string(),
    })
}

/// Counts visits per distinct `(user, location)`. Blank lines are ignored;
/// malformed ones are skipped and counted.
pub fn ingest_checkins<R: BufRead>(reader: R) -> Result<Ingested> {
    let mut counts: BTreeMap<(String, String), u32> = BTreeMap::new();
    let mut valid_lines = 0;
    let mut skipped_lines = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_checkin(&line) {
            Some(r) => {
                valid_lines += 1;
                *counts.entry((r.user, r.location)).or_insert(0) += 1;
            }
            None => skipped_lines += 1,
        }
    }
    if valid_lines == 0 {
        return Err(Error::NoCheckins);
    }
    let entries = counts
        .into_iter()
        .map(|((user, location), count)| Checkin {
            user,
            location,
            count,
        })
        .collect();
    Ok(Ingested {
        entries,
        valid_lines,
        skipped_lines,
    })
}

/// Undirected friendship pairs, each stored as `(smaller, larger)`.
/// Self-links and malformed lines are skipped; returns the skip count too.
pub fn read_friendships<R: BufRead>(reader: R) -> Result<(BTreeSet<(String, String)>, usize)> {
    let mut edges = BTreeSet::new();
    let mut skipped = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f = split_fields(&line);
        if f.len() != 2 || f[0].is_empty() || f[1].is_empty() || f[0] == f[1] {
            skipped += 1;
            continue;
        }
        let (a, b) = if f[0] < f[1] { (f[0], f[1]) } else { (f[1], f[0]) };
        edges.insert((a.to_string(), b.to_string()));
    }
    Ok((edges, skipped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationConfig {
    pub k: usize,
    #[serde(default = "one")]
    pub t: usize,
    #[serde(default = "one_f")]
    pub lambda: f64,
    #[serde(default)]
    pub tau: f64,
    /// Keep a seeded random subset of this many users.
    #[serde(default)]
    pub max_users: Option<usize>,
    /// Keep a seeded random subset of this many surviving edges.
    #[serde(default)]
    pub max_edges: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}

impl LocationConfig {
    pub fn new(k: usize, t: usize, seed: u64) -> Self {
        Self {
            k,
            t,
            lambda: 1.0,
            tau: 0.0,
            max_users: None,
            max_edges: None,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocationInstance {
    pub instance: Instance,
    /// Friendship links dropped because an endpoint has no entries.
    pub dropped_edges: usize,
}

fn sorted_subset<T: Clone, R: Rng + ?Sized>(items: &[T], cap: Option<usize>, rng: &mut R) -> Vec<T> {
    match cap {
        Some(c) if c < items.len() => {
            let mut idx = sample(rng, items.len(), c).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| items[i].clone()).collect()
        }
        _ => items.to_vec(),
    }
}

/// One entry per aggregated check-in and one property per surviving
/// friendship, whose members are all entries of both users. Locations are
/// split uniformly at random across adversaries; an entry's weight is
/// `U(0.8, 1)` at its location's adversary and
/// [`OUT_OF_REGION_WEIGHT`] elsewhere. Deterministic given `cfg.seed`.
pub fn build_location_raw(
    entries: &[AggregatedEntry],
    friendships: &BTreeSet<(String, String)>,
    cfg: &LocationConfig,
) -> Result<(RawInstance, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut entries: Vec<AggregatedEntry> = entries.to_vec();
    entries.sort_by(|a, b| (&a.user, &a.location).cmp(&(&b.user, &b.location)));
    entries.dedup_by(|a, b| a.user == b.user && a.location == b.location);

    let users: Vec<String> = entries
        .iter()
        .map(|e| e.user.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let kept: BTreeSet<String> = sorted_subset(&users, cfg.max_users, &mut rng)
        .into_iter()
        .collect();
    entries.retain(|e| kept.contains(&e.user));

    let mut by_user: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (d, e) in entries.iter().enumerate() {
        by_user.entry(e.user.as_str()).or_default().push(d);
    }
    let surviving: Vec<&(String, String)> = friendships
        .iter()
        .filter(|(u, v)| by_user.contains_key(u.as_str()) && by_user.contains_key(v.as_str()))
        .collect();
    let dropped_edges = friendships.len() - surviving.len();
    let surviving = sorted_subset(&surviving, cfg.max_edges, &mut rng);
    if surviving.is_empty() {
        return Err(Error::NoFriendships);
    }

    let properties = surviving
        .iter()
        .enumerate()
        .map(|(id, (u, v))| {
            let mut members = by_user[u.as_str()].clone();
            members.extend(&by_user[v.as_str()]);
            members.sort_unstable();
            RawProperty {
                id,
                members,
                weights: vec![],
            }
        })
        .collect();

    let locations: BTreeSet<&str> = entries.iter().map(|e| e.location.as_str()).collect();
    let region: BTreeMap<&str, usize> = locations
        .into_iter()
        .map(|l| (l, rng.gen_range(0..cfg.k.max(1))))
        .collect();
    let utility_weights = entries
        .iter()
        .map(|e| {
            let home = region[e.location.as_str()];
            (0..cfg.k)
                .map(|a| {
                    if a == home {
                        rng.gen_range(0.8..=1.0)
                    } else {
                        OUT_OF_REGION_WEIGHT
                    }
                })
                .collect()
        })
        .collect();

    let raw = RawInstance {
        num_entries: entries.len(),
        num_adversaries: cfg.k,
        t: cfg.t,
        lambda: cfg.lambda,
        tau_i: cfg.tau,
        model: DisclosureModel::new(DisclosureFamily::Cosine, Aggregation::Average),
        properties,
        utility_weights,
        entries: Some(entries),
    };
    Ok((raw, dropped_edges))
}

/// Validated form of [`build_location_raw`].
pub fn build_location_instance(
    entries: &[AggregatedEntry],
    friendships: &BTreeSet<(String, String)>,
    cfg: &LocationConfig,
) -> Result<LocationInstance> {
    let (raw, dropped_edges) = build_location_raw(entries, friendships, cfg)?;
    Ok(LocationInstance {
        instance: validate_instance(raw)?,
        dropped_edges,
    })
}

/// A synthetic check-in network in the raw text layouts.
///
/// Users are split into hosts and guests. Every friendship links a guest to
/// a host, and the guest visits the host's home location, which the host
/// frequents. All other check-ins go to locations private to one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub users: usize,
    /// Distinct `(user, location)` pairs.
    pub entries: usize,
    pub edges: usize,
    /// Share of users that are hosts.
    #[serde(default = "default_host_share")]
    pub host_share: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_host_share() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    /// `user \t timestamp \t lat \t lon \t location` lines.
    pub checkins: String,
    /// `user \t user` lines.
    pub friendships: String,
}

impl NetworkConfig {
    pub fn new(users: usize, entries: usize, edges: usize, seed: u64) -> Self {
        Self {
            users,
            entries,
            edges,
            host_share: default_host_share(),
            seed,
        }
    }
}

pub fn generate_network(cfg: &NetworkConfig) -> Result<Network> {
    let hosts = ((cfg.users as f64 * cfg.host_share).round() as usize).clamp(1, cfg.users - 1);
    let guests = cfg.users - hosts;
    if cfg.edges > hosts * guests {
        return Err(Error::InvalidParameter(format!(
            "{} edges exceed the {} possible host/guest pairs",
            cfg.edges,
            hosts * guests
        )));
    }
    if cfg.entries < hosts + cfg.edges + guests {
        return Err(Error::InvalidParameter(format!(
            "{} entries cannot cover homes, visits and one private check-in per guest",
            cfg.entries
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let name = |u: usize| format!("u{u:05}");

    // Every guest gets one host first, then the rest are spread at random.
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for g in 0..guests.min(cfg.edges) {
        edges.insert((rng.gen_range(0..hosts), g));
    }
    while edges.len() < cfg.edges {
        edges.insert((rng.gen_range(0..hosts), rng.gen_range(0..guests)));
    }

    // (user, location, visits)
    let mut visits: Vec<(usize, String, u32)> = Vec::with_capacity(cfg.entries);
    for h in 0..hosts {
        visits.push((h, format!("home{h:05}"), rng.gen_range(20..=40)));
    }
    for &(h, g) in &edges {
        visits.push((hosts + g, format!("home{h:05}"), rng.gen_range(5..=15)));
    }
    let mut private = vec![0usize; cfg.users];
    let mut add_private = |u: usize, rng: &mut ChaCha8Rng, visits: &mut Vec<(usize, String, u32)>| {
        visits.push((u, format!("spot{u:05}-{:03}", private[u]), rng.gen_range(1..=3)));
        private[u] += 1;
    };
    for g in 0..guests {
        add_private(hosts + g, &mut rng, &mut visits);
    }
    while visits.len() < cfg.entries {
        let u = rng.gen_range(0..cfg.users);
        add_private(u, &mut rng, &mut visits);
    }

    let mut lines = Vec::new();
    for (u, loc, count) in &visits {
        for _ in 0..*count {
            let ts = format!("2010-{:02}-{:02}T{:02}:00:00Z", rng.gen_range(1..=12), rng.gen_range(1..=28), rng.gen_range(0..24));
            let lat: f64 = rng.gen_range(-90.0..90.0);
            let lon: f64 = rng.gen_range(-180.0..180.0);
            lines.push(format!("{}\t{ts}\t{lat:.6}\t{lon:.6}\t{loc}", name(*u)));
        }
    }
    lines.shuffle(&mut rng);
    let friendships = edges
        .iter()
        .map(|&(h, g)| format!("{}\t{}", name(h), name(hosts + g)))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Network {
        checkins: lines.join("\n"),
        friendships,
    })
}

/// Generates a network and builds its instance in one step.
pub fn synthetic_location_instance(net: &NetworkConfig, cfg: &LocationConfig) -> Result<LocationInstance> {
    let network = generate_network(net)?;
    let ingested = ingest_checkins(network.checkins.as_bytes())?;
    let (edges, _) = read_friendships(network.friendships.as_bytes())?;
    build_location_instance(&ingested.entries, &edges, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::Assignment;
    use crate::disclosure::disclosure_vector;

    #[test]
    fn counts_repeated_visits() {
        let text = "u1\tt0\tL1\nu1\tt1\tL1\nu1\tt2\tL2\n";
        let got = ingest_checkins(text.as_bytes()).unwrap();
        let triples: Vec<_> = got
            .entries
            .iter()
            .map(|e| (e.user.as_str(), e.location.as_str(), e.count))
            .collect();
        assert_eq!(triples, vec![("u1", "L1", 2), ("u1", "L2", 1)]);
        assert_eq!(got.valid_lines, 3);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert_eq!(ingest_checkins("".as_bytes()), Err(Error::NoCheckins));
    }

    #[test]
    fn malformed_lines_are_skipped() {
        let mut text = String::new();
        for i in 0..7 {
            text.push_str(&format!("u{i},2010-01-01,39.7,-104.9,L{i}\n"));
        }
        text.push_str("just-one-field\nu1,ts,notalat,1.0,L1\nu2,ts,,\n");
        let got = ingest_checkins(text.as_bytes()).unwrap();
        assert_eq!(got.entries.len(), 7);
        assert_eq!(got.skipped_lines, 3);
        let total: u32 = got.entries.iter().map(|e| e.count).sum();
        assert_eq!(total as usize, got.valid_lines);
    }

    fn pair(a: &str, b: &str) -> BTreeSet<(String, String)> {
        [(a.to_string(), b.to_string())].into_iter().collect()
    }

    fn checkin(u: &str, l: &str, c: u32) -> Checkin {
        Checkin {
            user: u.into(),
            location: l.into(),
            count: c,
        }
    }

    #[test]
    fn property_spans_both_users() {
        let entries = vec![checkin("a", "L1", 2), checkin("a", "L2", 1), checkin("b", "L1", 4)];
        let built = build_location_instance(&entries, &pair("a", "b"), &LocationConfig::new(2, 1, 0))
            .unwrap();
        let hg = built.instance.hypergraph();
        assert_eq!(hg.num_properties(), 1);
        assert_eq!(hg.property(0).members, vec![0, 1, 2]);
    }

    #[test]
    fn identical_and_disjoint_trajectories() {
        let same = vec![checkin("a", "L1", 3), checkin("b", "L1", 5)];
        let inst = build_location_instance(&same, &pair("a", "b"), &LocationConfig::new(2, 1, 0))
            .unwrap()
            .instance;
        let together = Assignment::from_pairs(2, 2, [(0, 0), (1, 0)]).unwrap();
        assert!((disclosure_vector(&inst, &together).get(0, 0) - 1.0).abs() < 1e-12);

        let apart = vec![checkin("a", "L1", 3), checkin("b", "L2", 5)];
        let inst = build_location_instance(&apart, &pair("a", "b"), &LocationConfig::new(2, 2, 0))
            .unwrap()
            .instance;
        let full = Assignment::from_pairs(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert_eq!(disclosure_vector(&inst, &full).per_property_max(), vec![0.0]);
    }

    #[test]
    fn edges_without_entries_are_dropped() {
        let entries = vec![checkin("a", "L1", 1), checkin("b", "L1", 1)];
        let mut edges = pair("a", "b");
        edges.insert(("a".into(), "zed".into()));
        let built = build_location_instance(&entries, &edges, &LocationConfig::new(2, 1, 0)).unwrap();
        assert_eq!(built.dropped_edges, 1);
        assert_eq!(
            build_location_instance(&entries, &pair("x", "y"), &LocationConfig::new(2, 1, 0))
                .err(),
            Some(Error::NoFriendships)
        );
    }

    #[test]
    fn weights_follow_the_location_partition() {
        let entries = vec![checkin("a", "L1", 1), checkin("b", "L1", 1), checkin("b", "L2", 1)];
        let inst = build_location_instance(&entries, &pair("a", "b"), &LocationConfig::new(3, 1, 5))
            .unwrap()
            .instance;
        for d in 0..3 {
            let row = inst.utility().row(d);
            assert_eq!(row.iter().filter(|&&w| w == OUT_OF_REGION_WEIGHT).count(), 2);
            assert!(row.iter().any(|&w| (0.8..=1.0).contains(&w)));
        }
        let high = |d: usize| inst.utility().row(d).iter().position(|&w| w >= 0.8).unwrap();
        assert_eq!(high(0), high(1));
    }

    #[test]
    fn builds_are_deterministic() {
        let net = NetworkConfig::new(40, 300, 50, 3);
        let a = synthetic_location_instance(&net, &LocationConfig::new(3, 2, 1)).unwrap();
        let b = synthetic_location_instance(&net, &LocationConfig::new(3, 2, 1)).unwrap();
        assert_eq!(a.instance, b.instance);
        assert_eq!(a.instance.num_entries(), 300);
        assert_eq!(a.instance.num_properties(), 50);
    }

    #[test]
    fn caps_subsample() {
        let net = generate_network(&NetworkConfig::new(40, 300, 50, 3)).unwrap();
        let ingested = ingest_checkins(net.checkins.as_bytes()).unwrap();
        let (edges, _) = read_friendships(net.friendships.as_bytes()).unwrap();
        let mut cfg = LocationConfig::new(2, 1, 9);
        cfg.max_edges = Some(10);
        let built = build_location_instance(&ingested.entries, &edges, &cfg).unwrap();
        assert_eq!(built.instance.num_properties(), 10);
        cfg.max_users = Some(20);
        cfg.max_edges = None;
        let built = build_location_instance(&ingested.entries, &edges, &cfg).unwrap();
        assert!(built.dropped_edges > 0);
    }
}
