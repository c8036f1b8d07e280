use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use spatial_fpp::boxing::{boxing_constants, boxing_report, build_boxing, greedy_centre_path, verify_events};
use spatial_fpp::brw::{self, domination_check, envelope_check, simulate_berbrw, simulate_coupled, Environment, GrowthEnvelope};
use spatial_fpp::dist::{explosion_sum_for, EdgeLengthDistribution};
use spatial_fpp::fpp::assign_edge_lengths;
use spatial_fpp::genmodel::{read_sgx, write_sgx, GChoice, GirgParams, SamplerOptions, SpatialGraph};
use spatial_fpp::harness::{ecdf_csv, run_distance_experiment, summarize, DistanceSampleSet, ExperimentConfig};
use spatial_fpp::perc::{percolate, PercolationRule};
use spatial_fpp::spatial::Window;
use spatial_fpp::{Error, Result};

/// Exit code for runs whose output carries a statistical or regime warning.
const GUARD_EXIT: u8 = 4;

#[derive(Parser)]
#[command(name = "sfpp", version, about = "First passage percolation on scale-free spatial random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph from the model of a config file and write it as SGX.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Size; defaults to the first entry of the config's grid.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also draw edge lengths from the config's law.
        #[arg(long)]
        lengths: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the distance experiment of a config file.
    Distances {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// CSV output; overrides the config, stdout when neither is set.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluate the explosion criterion of an edge-length law.
    Criterion {
        /// Law such as `exp:1`, `unif:0:1`, `det:1`, `shift:1:exp:1`, `table:<file>`.
        #[arg(long)]
        law: String,
        #[arg(long, default_value_t = 40)]
        k_max: usize,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Keep edges whose length is below the weight-dependent threshold.
    Percolate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma_tilde: f64,
        /// Decay exponent; read from the graph when omitted.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a boxing system, check its events and walk the centre path.
    /// Graphs on the unit window are first scaled to volume `n`.
    Boxing {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        mu: f64,
        /// Comma-separated centre coordinates; the window centre by default.
        #[arg(long)]
        center: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Power-law exponent; read from the graph when omitted.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Run the branching random walk on the vertices of a graph.
    Brw {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        root: usize,
        #[arg(long, default_value_t = 3)]
        generations: usize,
        #[arg(long, default_value_t = brw::DEFAULT_CAP)]
        cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Couple the walk with the graph and check sphere containment.
        #[arg(long)]
        coupled: bool,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Summarise a distance CSV: medians per size and KS distances.
    Report {
        #[arg(long)]
        csv: PathBuf,
        /// Write the empirical distribution functions of the weighted distances.
        #[arg(long)]
        ecdf: Option<PathBuf>,
    },
}

fn read_graph(path: &Path) -> Result<SpatialGraph> {
    read_sgx(BufReader::new(File::open(path)?))
}

fn write_graph(g: &SpatialGraph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_sgx(g, &mut out)?;
    out.flush()?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn param(g: &SpatialGraph, key: &str) -> Result<f64> {
    g.provenance
        .get(key)
        .ok_or_else(|| Error::Config(format!("graph does not record {key}; pass it explicitly")))?
        .parse()
        .map_err(|_| Error::Parse(format!("graph parameter {key} is not a number")))
}

/// GIRG parameters recorded in the provenance of a generated graph.
fn girg_params(g: &SpatialGraph) -> Result<GirgParams> {
    let mut p = GirgParams::new(g.points.dim(), param(g, "tau")?, param(g, "alpha")?);
    for (key, slot) in [
        ("a1_under", &mut p.a1_under),
        ("a1_over", &mut p.a1_over),
        ("a2", &mut p.a2),
        ("gamma", &mut p.gamma),
        ("c1", &mut p.c1),
        ("c_upper", &mut p.c_upper),
    ] {
        if g.provenance.get(key).is_some() {
            *slot = param(g, key)?;
        }
    }
    if let Some(choice) = g.provenance.get("g") {
        p.g_choice = GChoice::parse(choice)?;
    }
    Ok(p)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate { config, n, seed, lengths, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let size = n.unwrap_or(cfg.n_grid[0]);
            let seed = seed.unwrap_or(cfg.seed);
            let mut g = cfg.model.generate(size, seed, SamplerOptions::default())?;
            if lengths {
                g = assign_edge_lengths(&g, &cfg.length_law()?, seed, true)?;
            }
            write_graph(&g, &out)?;
            eprintln!("wrote {} vertices and {} edges to {}", g.num_vertices(), g.num_edges(), out.display());
            Ok(cfg.model.regime_flags().is_empty())
        }
        Command::Distances { config, workers, csv, json } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let set = run_distance_experiment(&cfg)?;
            match csv.or(cfg.output.csv.clone()) {
                Some(path) => write_text(&path, &set.to_csv())?,
                None => print!("{}", set.to_csv()),
            }
            let summary = summarize(&set);
            if let Some(path) = json.or(cfg.output.json.clone()) {
                let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Numeric(e.to_string()))?;
                write_text(&path, &text)?;
            }
            if let Some(path) = &cfg.output.ecdf {
                let samples: Vec<(String, Vec<f64>)> = set.sizes().into_iter().map(|n| (n.to_string(), set.weighted(n))).collect();
                write_text(path, &ecdf_csv(&samples))?;
            }
            for flag in &set.flags {
                eprintln!("warning: {flag}");
            }
            Ok(set.flags.is_empty())
        }
        Command::Criterion { law, k_max, tau } => {
            let dist = EdgeLengthDistribution::parse_with_base(&law, None)?;
            let report = explosion_sum_for(&dist, k_max, tau)?;
            print_json(&report)?;
            Ok(report.notes.is_empty())
        }
        Command::Percolate { input, c, gamma_tilde, alpha, out } => {
            let g = read_graph(&input)?;
            let alpha = match alpha {
                Some(a) => a,
                None => param(&g, "alpha")?,
            };
            let law = g.provenance.length_law.clone().ok_or_else(|| Error::Contract("graph has no edge-length law".into()))?;
            let rule = PercolationRule::new(c, gamma_tilde, alpha, law)?;
            let p = percolate(&g, &rule)?;
            write_graph(&p, &out)?;
            eprintln!("kept {} of {} edges", p.num_edges(), g.num_edges());
            Ok(true)
        }
        Command::Boxing { input, mu, center, epsilon, tau } => {
            let mut g = read_graph(&input)?;
            if g.points.window() == Window::unit() && g.num_vertices() > 1 {
                g = g.blown_up()?;
            }
            let tau = match tau {
                Some(t) => t,
                None => param(&g, "tau")?,
            };
            let center: Vec<f64> = match center {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad centre coordinate {x:?}"))))
                    .collect::<Result<_>>()?,
                None => {
                    let w = g.points.window();
                    vec![w.lo + w.side / 2.0; g.points.dim()]
                }
            };
            let constants = boxing_constants(epsilon, tau)?;
            let sys = build_boxing(&g, &center, mu, constants)?;
            let events = verify_events(&g, &sys, constants.weight_slack);
            let path = greedy_centre_path(&g, &sys);
            print_json(&boxing_report(&sys, &events, &path))?;
            Ok(true)
        }
        Command::Brw { input, root, generations, cap, seed, coupled, epsilon } => {
            let g = read_graph(&input)?;
            let params = girg_params(&g)?;
            let run = if coupled {
                simulate_coupled(&g, root, generations, cap, &params, seed)?
            } else {
                simulate_berbrw(&Environment::of_graph(&g), root, generations, cap, &params, seed)?
            };
            #[derive(Serialize)]
            struct Out {
                summary: brw::RunSummary,
                envelope_index: Option<u32>,
                domination: Option<brw::DominationReport>,
            }
            let envelope = GrowthEnvelope::new(epsilon, params.tau, params.alpha, params.d);
            let domination = if coupled { Some(domination_check(&g, &run, generations)?) } else { None };
            let ok = domination.as_ref().is_none_or(|d| d.holds) && !run.truncated;
            print_json(&Out { summary: brw::summarize(&run), envelope_index: envelope_check(&run, &envelope, 64), domination })?;
            Ok(ok)
        }
        Command::Report { csv, ecdf } => {
            let set = DistanceSampleSet::from_csv(&std::fs::read_to_string(&csv)?)?;
            if let Some(path) = ecdf {
                let samples: Vec<(String, Vec<f64>)> = set.sizes().into_iter().map(|n| (n.to_string(), set.weighted(n))).collect();
                write_text(&path, &ecdf_csv(&samples))?;
            }
            print_json(&summarize(&set))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(GUARD_EXIT),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
