//! Seeded benchmark runs over algorithms, adversary counts and seeds, with
//! CSV/JSON reports.
//!
//! `results.csv` holds only deterministic columns so that reruns compare
//! byte for byte; wall-clock times go to `timings.csv`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{solve_exact, Formulation};
use crate::geodata::{
    build_location_instance, ingest_checkins, read_friendships, synthetic_location_instance,
    LocationConfig, NetworkConfig,
};
use crate::heuristics::{rand_plus, solve, SearchParams, SolveResult};
use crate::instance::{DisclosureFamily, Instance};
use crate::relaxation::{round_and_repair, solve_lp_relaxation};
use crate::synth::{generate_instance, SynthConfig};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "PRIVPART_WORKERS";

/// Threshold at which a property counts as fully disclosed.
pub const FULL_DISCLOSURE: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "rand+")]
    RandPlus,
    #[serde(rename = "lp")]
    Lp,
    #[serde(rename = "ilp")]
    Ilp,
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "greedyl")]
    GreedyL,
    #[serde(rename = "grasp")]
    Grasp,
    #[serde(rename = "graspl")]
    GraspL,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::RandPlus,
        Algorithm::Lp,
        Algorithm::Ilp,
        Algorithm::Greedy,
        Algorithm::GreedyL,
        Algorithm::Grasp,
        Algorithm::GraspL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RandPlus => "rand+",
            Algorithm::Lp => "lp",
            Algorithm::Ilp => "ilp",
            Algorithm::Greedy => "greedy",
            Algorithm::GreedyL => "greedyl",
            Algorithm::Grasp => "grasp",
            Algorithm::GraspL => "graspl",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    /// Heuristic parameters, or `None` for non-heuristic algorithms.
    pub fn search_params(self, k: usize, seed: u64) -> Option<SearchParams> {
        match self {
            Algorithm::Greedy => Some(SearchParams::greedy(seed)),
            Algorithm::GreedyL => Some(SearchParams::greedy_myopic(seed)),
            Algorithm::Grasp => Some(SearchParams::grasp(seed)),
            Algorithm::GraspL => Some(SearchParams::grasp_myopic(k, seed)),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Runs one algorithm on one instance.
pub fn run_algorithm(
    instance: &Instance,
    algorithm: Algorithm,
    seed: u64,
    restarts: usize,
) -> Result<SolveResult> {
    let k = instance.num_adversaries();
    match algorithm {
        Algorithm::RandPlus => Ok(rand_plus(instance, restarts, seed)),
        Algorithm::Lp => {
            let start = Instant::now();
            let frac = solve_lp_relaxation(instance)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut res = round_and_repair(instance, &frac, restarts, &mut rng);
            res.wall_time = start.elapsed();
            res.seed_used = seed;
            Ok(res)
        }
        Algorithm::Ilp => {
            let mut res = solve_exact(instance, Formulation::TradeOff)?;
            res.seed_used = seed;
            Ok(res)
        }
        _ => Ok(solve(instance, &algorithm.search_params(k, seed).unwrap())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceSource {
    /// A fixed instance document; `ks` is ignored.
    File { path: PathBuf },
    /// A fresh synthetic instance per `(k, seed)`.
    Synth(SynthConfig),
    /// Check-in and friendship files; the location partition is reseeded per
    /// seed.
    Geodata {
        checkins: PathBuf,
        friendships: PathBuf,
        location: LocationConfig,
    },
    /// A generated check-in network per seed.
    Network {
        network: NetworkConfig,
        location: LocationConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: InstanceSource,
    /// Adversary counts to sweep. Empty means the source's own `k`.
    #[serde(default)]
    pub ks: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// Inner restarts for RAND+ and for LP rounding.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Disclosure levels for the exceedance curves.
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_restarts() -> usize {
    100
}

fn default_thresholds() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds".into()));
        }
        if self.thresholds.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::UnsortedThresholds);
        }
        Ok(())
    }
}

/// One `(algorithm, seed, k)` result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub k: usize,
    pub t: usize,
    pub num_entries: usize,
    pub num_properties: usize,
    pub utility: f64,
    pub disclosure: f64,
    pub objective: f64,
    pub fully_disclosed: usize,
    #[serde(skip)]
    pub wall_ms: f64,
    #[serde(skip)]
    pub per_property_disclosure: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanStderr {
    /// Sample mean and `s/√n`; zero error for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return Self { mean, stderr: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            stderr: (var / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub k: usize,
    pub runs: usize,
    pub utility: MeanStderr,
    pub disclosure: MeanStderr,
    pub objective: MeanStderr,
    pub fully_disclosed: MeanStderr,
    pub wall_ms: MeanStderr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub algorithm: Algorithm,
    pub k: usize,
    pub threshold: f64,
    /// Mean over seeds of the number of properties above `threshold`.
    pub mean_count: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Sorted by `(k, algorithm, seed)`.
    pub rows: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub curves: Vec<CurvePoint>,
}

impl Report {
    pub fn rows_for(&self, algorithm: Algorithm, k: usize) -> impl Iterator<Item = &RunRecord> {
        self.rows
            .iter()
            .filter(move |r| r.algorithm == algorithm && r.k == k)
    }

    pub fn summary_for(&self, algorithm: Algorithm, k: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.algorithm == algorithm && s.k == k)
    }
}

/// Properties whose max-over-adversaries disclosure reaches `threshold`.
pub fn count_fully_disclosed(result: &SolveResult, threshold: f64) -> usize {
    count_at_least(&result.per_property_disclosure, threshold)
}

fn count_at_least(per_property: &[f64], threshold: f64) -> usize {
    per_property.iter().filter(|&&f| f >= threshold).count()
}

/// For each threshold, the number of properties whose disclosure strictly
/// exceeds it. Thresholds must be ascending.
pub fn disclosure_level_curve(result: &SolveResult, thresholds: &[f64]) -> Result<Vec<usize>> {
    level_curve(&result.per_property_disclosure, thresholds)
}

fn level_curve(per_property: &[f64], thresholds: &[f64]) -> Result<Vec<usize>> {
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedThresholds);
    }
    Ok(thresholds
        .iter()
        .map(|&x| per_property.iter().filter(|&&f| f > x).count())
        .collect())
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Builds the instances of the sweep, keyed by `(k, seed)`.
fn build_instances(cfg: &ExperimentConfig) -> Result<Vec<((usize, u64), Instance)>> {
    let ks = |own: usize| {
        if cfg.ks.is_empty() {
            vec![own]
        } else {
            cfg.ks.clone()
        }
    };
    let keys: Vec<(usize, u64)> = match &cfg.source {
        InstanceSource::File { .. } => Vec::new(),
        InstanceSource::Synth(s) => ks(s.k),
        InstanceSource::Geodata { location, .. } | InstanceSource::Network { location, .. } => {
            ks(location.k)
        }
    }
    .into_iter()
    .flat_map(|k| cfg.seeds.iter().map(move |&s| (k, s)))
    .collect();

    match &cfg.source {
        InstanceSource::File { path } => {
            let inst = Instance::from_json(&read_file(path)?)?;
            Ok(cfg
                .seeds
                .iter()
                .map(|&s| ((inst.num_adversaries(), s), inst.clone()))
                .collect())
        }
        InstanceSource::Synth(base) => keys
            .par_iter()
            .map(|&(k, seed)| {
                let c = SynthConfig {
                    k,
                    seed,
                    ..base.clone()
                };
                Ok(((k, seed), generate_instance(&c)?))
            })
            .collect(),
        InstanceSource::Geodata {
            checkins,
            friendships,
            location,
        } => {
            let ingested = ingest_checkins(read_file(checkins)?.as_bytes())?;
            let (edges, _) = read_friendships(read_file(friendships)?.as_bytes())?;
            keys.par_iter()
                .map(|&(k, seed)| {
                    let c = LocationConfig {
                        k,
                        seed,
                        ..location.clone()
                    };
                    Ok(((k, seed), build_location_instance(&ingested.entries, &edges, &c)?.instance))
                })
                .collect()
        }
        InstanceSource::Network { network, location } => keys
            .par_iter()
            .map(|&(k, seed)| {
                let net = NetworkConfig {
                    seed,
                    ..network.clone()
                };
                let c = LocationConfig {
                    k,
                    seed,
                    ..location.clone()
                };
                Ok(((k, seed), synthetic_location_instance(&net, &c)?.instance))
            })
            .collect(),
    }
}

fn worker_count(cfg: &ExperimentConfig) -> usize {
    cfg.workers
        .or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok())
        .unwrap_or(0)
}

/// Runs every `(k, seed, algorithm)` cell on a bounded worker pool. The
/// report is independent of the worker count and of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &ExperimentConfig) -> Result<Report> {
    let instances = build_instances(cfg)?;
    let mut algorithms = cfg.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();
    for (_, inst) in &instances {
        let family = inst.model().family;
        let lp_capable = matches!(family, DisclosureFamily::Step | DisclosureFamily::Linear);
        if !lp_capable && algorithms.iter().any(|a| matches!(a, Algorithm::Lp | Algorithm::Ilp)) {
            return Err(Error::Config(format!(
                "lp and ilp need step or linear disclosure, not {}",
                family.name()
            )));
        }
    }

    let cells: Vec<(usize, Algorithm)> = (0..instances.len())
        .flat_map(|i| algorithms.iter().map(move |&a| (i, a)))
        .collect();
    let results: Vec<Result<RunRecord>> = cells
        .par_iter()
        .map(|&(i, algorithm)| {
            let ((k, seed), inst) = &instances[i];
            let res = run_algorithm(inst, algorithm, *seed, cfg.restarts)?;
            Ok(RunRecord {
                algorithm,
                seed: *seed,
                k: *k,
                t: inst.t(),
                num_entries: inst.num_entries(),
                num_properties: inst.num_properties(),
                utility: res.objective.utility,
                disclosure: res.objective.disclosure,
                objective: res.objective.tradeoff(inst.lambda(), inst.tau()),
                fully_disclosed: count_fully_disclosed(&res, FULL_DISCLOSURE),
                wall_ms: res.wall_time.as_secs_f64() * 1e3,
                per_property_disclosure: res.per_property_disclosure,
            })
        })
        .collect();
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (a.k, a.algorithm, a.seed).cmp(&(b.k, b.algorithm, b.seed)));

    let mut groups: BTreeMap<(usize, Algorithm), Vec<&RunRecord>> = BTreeMap::new();
    for r in &rows {
        groups.entry((r.k, r.algorithm)).or_default().push(r);
    }
    let mut summary = Vec::new();
    let mut curves = Vec::new();
    for (&(k, algorithm), group) in &groups {
        let stat = |f: &dyn Fn(&RunRecord) -> f64| {
            MeanStderr::of(&group.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        summary.push(SummaryRow {
            algorithm,
            k,
            runs: group.len(),
            utility: stat(&|r| r.utility),
            disclosure: stat(&|r| r.disclosure),
            objective: stat(&|r| r.objective),
            fully_disclosed: stat(&|r| r.fully_disclosed as f64),
            wall_ms: stat(&|r| r.wall_ms),
        });
        let mut totals = vec![0usize; cfg.thresholds.len()];
        for r in group {
            for (t, c) in totals
                .iter_mut()
                .zip(level_curve(&r.per_property_disclosure, &cfg.thresholds)?)
            {
                *t += c;
            }
        }
        for (&threshold, total) in cfg.thresholds.iter().zip(totals) {
            curves.push(CurvePoint {
                algorithm,
                k,
                threshold,
                mean_count: total as f64 / group.len() as f64,
            });
        }
    }
    Ok(Report {
        rows,
        summary,
        curves,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Deterministic `results.csv` content.
pub fn results_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct TimingRow {
    algorithm: Algorithm,
    seed: u64,
    k: usize,
    wall_ms: f64,
}

/// Writes `results.csv`, `timings.csv`, `curves.csv` and `summary.json`.
pub fn write_report(report: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(report)?)?;

    let mut w = csv::Writer::from_path(dir.join("timings.csv")).map_err(csv_error)?;
    for r in &report.rows {
        w.serialize(TimingRow {
            algorithm: r.algorithm,
            seed: r.seed,
            k: r.k,
            wall_ms: r.wall_ms,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("curves.csv")).map_err(csv_error)?;
    for c in &report.curves {
        w.serialize(c).map_err(csv_error)?;
    }
    w.flush()?;

    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&report.summary)?,
    )?;
    Ok(())
}
