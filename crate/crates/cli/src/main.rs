use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use privpart::exact::{solve_exact, Formulation};
use privpart::experiment::{
    count_fully_disclosed, run_algorithm, run_experiment, write_report, Algorithm,
    ExperimentConfig, FULL_DISCLOSURE,
};
use privpart::geodata::{
    build_location_raw, generate_network, ingest_checkins, read_friendships, LocationConfig,
    NetworkConfig,
};
use privpart::synth::{generate_raw, SynthConfig};
use privpart::verify::verify_instance;
use privpart::{Aggregation, DisclosureFamily, DisclosureModel, Error, Instance};

#[derive(Parser)]
#[command(name = "privpart", version, about = "Privacy-aware data partitioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Step,
    Linear,
    Quadratic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Agg {
    Worst,
    Average,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Tradeoff,
    Discbudget,
    Maxmin,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance.
    Gen {
        #[arg(long, default_value_t = 500)]
        entries: usize,
        #[arg(long, default_value_t = 50)]
        properties: usize,
        #[arg(short, long, default_value_t = 2)]
        k: usize,
        #[arg(short, long, default_value_t = 1)]
        t: usize,
        #[arg(long, value_enum, default_value = "linear")]
        family: Family,
        #[arg(long, value_enum, default_value = "average")]
        aggregation: Agg,
        #[arg(long, default_value_t = 0.3)]
        p_f: f64,
        #[arg(long, default_value_t = 0.4)]
        p_u: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// All utility weights 1/k.
        #[arg(long)]
        uniform_utility: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a cosine-disclosure instance from check-ins and friendships.
    Ingest {
        #[arg(long, required_unless_present = "network")]
        checkins: Option<PathBuf>,
        #[arg(long, required_unless_present = "network")]
        friendships: Option<PathBuf>,
        /// Use a generated network instead: USERS,ENTRIES,EDGES.
        #[arg(long, value_delimiter = ',')]
        network: Option<Vec<usize>>,
        #[arg(short, long, default_value_t = 2)]
        k: usize,
        #[arg(short, long, default_value_t = 1)]
        t: usize,
        #[arg(long)]
        max_users: Option<usize>,
        #[arg(long)]
        max_edges: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one algorithm on one instance.
    Solve {
        instance: PathBuf,
        #[arg(short, long, default_value = "greedy")]
        algorithm: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restarts for rand+ and lp rounding.
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        /// Formulation for ilp.
        #[arg(long, value_enum, default_value = "tradeoff")]
        formulation: Form,
        /// Also write the assignment pairs.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment config and write reports.
    Bench {
        config: PathBuf,
        #[arg(short, long, default_value = "bench-out")]
        out: PathBuf,
    },
    /// Cross-check solvers on an instance, or on random small ones.
    Verify {
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load(path: &PathBuf) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = Instance::from_json(&text)?;
    if inst.dimension_warning() {
        eprintln!("warning: largest property is not bigger than k");
    }
    Ok(inst)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            entries,
            properties,
            k,
            t,
            family,
            aggregation,
            p_f,
            p_u,
            lambda,
            tau,
            uniform_utility,
            seed,
            output,
        } => {
            let family = match family {
                Family::Step => DisclosureFamily::Step,
                Family::Linear => DisclosureFamily::Linear,
                Family::Quadratic => DisclosureFamily::Quadratic,
            };
            let aggregation = match aggregation {
                Agg::Worst => Aggregation::Worst,
                Agg::Average => Aggregation::Average,
            };
            let cfg = SynthConfig {
                t,
                p_f,
                p_u,
                lambda,
                tau,
                uniform_utility,
                seed,
                ..SynthConfig::new(entries, properties, k, DisclosureModel::new(family, aggregation))
            };
            let raw = generate_raw(&cfg)?;
            privpart::validate_instance(raw.clone())?;
            emit(&raw.to_json()?, output.as_ref())
        }
        Command::Ingest {
            checkins,
            friendships,
            network,
            k,
            t,
            max_users,
            max_edges,
            seed,
            output,
        } => {
            let (checkin_text, friend_text) = match network {
                Some(n) => {
                    if n.len() != 3 {
                        bail!("--network takes USERS,ENTRIES,EDGES");
                    }
                    let net = generate_network(&NetworkConfig::new(n[0], n[1], n[2], seed))?;
                    (net.checkins, net.friendships)
                }
                None => {
                    let c = checkins.unwrap();
                    let f = friendships.unwrap();
                    (
                        fs::read_to_string(&c).with_context(|| format!("reading {}", c.display()))?,
                        fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?,
                    )
                }
            };
            let ingested = ingest_checkins(checkin_text.as_bytes())?;
            let (edges, skipped_edges) = read_friendships(friend_text.as_bytes())?;
            let cfg = LocationConfig {
                max_users,
                max_edges,
                ..LocationConfig::new(k, t, seed)
            };
            let (raw, dropped) = build_location_raw(&ingested.entries, &edges, &cfg)?;
            privpart::validate_instance(raw.clone())?;
            eprintln!(
                "{} check-ins ({} skipped) → {} entries; {} friendships ({} malformed, {} without entries) → {} properties",
                ingested.valid_lines,
                ingested.skipped_lines,
                raw.num_entries,
                edges.len(),
                skipped_edges,
                dropped,
                raw.properties.len()
            );
            emit(&raw.to_json()?, output.as_ref())
        }
        Command::Solve {
            instance,
            algorithm,
            seed,
            restarts,
            formulation,
            output,
        } => {
            let inst = load(&instance)?;
            let Some(alg) = Algorithm::parse(&algorithm) else {
                bail!("unknown algorithm {algorithm:?}");
            };
            let res = match (alg, formulation) {
                (Algorithm::Ilp, Form::Discbudget) => solve_exact(&inst, Formulation::DiscBudget)?,
                (Algorithm::Ilp, Form::Maxmin) => solve_exact(&inst, Formulation::MaxMin)?,
                _ => run_algorithm(&inst, alg, seed, restarts)?,
            };
            let summary = json!({
                "algorithm": alg.name(),
                "seed": seed,
                "utility": res.objective.utility,
                "disclosure": res.objective.disclosure,
                "objective": res.objective.value,
                "unassigned": res.objective.unassigned,
                "fully_disclosed": count_fully_disclosed(&res, FULL_DISCLOSURE),
                "iterations": res.iterations,
                "wall_ms": res.wall_time.as_secs_f64() * 1e3,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(path) = output {
                let pairs: Vec<(usize, usize)> = res.assignment.pairs().collect();
                let doc = json!({
                    "summary": summary,
                    "per_property_disclosure": res.per_property_disclosure,
                    "assignment": pairs,
                });
                emit(&serde_json::to_string_pretty(&doc)?, Some(&path))?;
            }
            Ok(())
        }
        Command::Bench { config, out } => {
            let text =
                fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let report = run_experiment(&cfg)?;
            write_report(&report, &out)?;
            for s in &report.summary {
                println!(
                    "{:<8} k={:<3} utility {:.4}±{:.4}  disclosure {:.4}±{:.4}  objective {:.4}±{:.4}",
                    s.algorithm.name(),
                    s.k,
                    s.utility.mean,
                    s.utility.stderr,
                    s.disclosure.mean,
                    s.disclosure.stderr,
                    s.objective.mean,
                    s.objective.stderr
                );
            }
            eprintln!("reports written to {}", out.display());
            Ok(())
        }
        Command::Verify {
            instance,
            random,
            seed,
        } => {
            let instances: Vec<Instance> = match instance {
                Some(path) => vec![load(&path)?],
                None => (0..random as u64)
                    .map(|i| {
                        let family = [
                            DisclosureFamily::Step,
                            DisclosureFamily::Linear,
                            DisclosureFamily::Quadratic,
                        ][(i % 3) as usize];
                        let cfg = SynthConfig {
                            t: 1 + (i % 2) as usize,
                            seed: seed.wrapping_add(i),
                            ..SynthConfig::new(
                                6,
                                3,
                                3,
                                DisclosureModel::new(family, Aggregation::Worst),
                            )
                        };
                        privpart::synth::generate_instance(&cfg)
                    })
                    .collect::<Result<_, _>>()?,
            };
            let mut failed = 0;
            for (i, inst) in instances.iter().enumerate() {
                for c in verify_instance(inst, seed) {
                    if !c.passed {
                        failed += 1;
                    }
                    println!(
                        "[{}] #{i} {}: {}",
                        if c.passed { "ok" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
            }
            if failed > 0 {
                bail!("{failed} checks failed");
            }
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible | Error::LpInfeasible) => 2,
        Some(Error::TooLarge { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
