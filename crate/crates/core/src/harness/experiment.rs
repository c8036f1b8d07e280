//! Distance experiments over a grid of sizes.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::stats::{ks_statistic, median};
use crate::fpp::{assign_edge_lengths, graph_distance, shortest_weighted};
use crate::genmodel::{giant_component, SamplerOptions, SpatialGraph};
use crate::rng::{self, tag, KeyedStream};
use crate::{Error, Length, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub model: String,
    pub n: usize,
    pub seed: u64,
    pub u: usize,
    pub v: usize,
    pub d_g: Option<usize>,
    pub d_l: Length,
    pub in_giant: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DistanceSampleSet {
    pub rows: Vec<DistanceRow>,
    /// Warnings that make the command exit with the statistical-guard code.
    pub flags: Vec<String>,
}

pub const CSV_HEADER: &str = "model,n,seed,u,v,dG,dL,in_giant";

impl DistanceSampleSet {
    pub fn sizes(&self) -> Vec<usize> {
        let mut n: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        n.dedup();
        n
    }

    /// Finite weighted distances of pairs inside the giant at size `n`.
    pub fn weighted(&self, n: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n == n && r.in_giant).filter_map(|r| r.d_l.finite()).collect()
    }

    /// Graph distances of pairs inside the giant at size `n`.
    pub fn hops(&self, n: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n == n && r.in_giant).filter_map(|r| r.d_g.map(|h| h as f64)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let dg = r.d_g.map_or("inf".to_string(), |h| h.to_string());
            writeln!(s, "{},{},{},{},{},{},{},{}", r.model, r.n, r.seed, r.u, r.v, dg, r.d_l, r.in_giant).expect("string write");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(Error::Parse(format!("distance CSV must start with {CSV_HEADER:?}")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("distance CSV line {}: bad {what}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad("field count"));
            }
            rows.push(DistanceRow {
                model: f[0].to_string(),
                n: f[1].parse().map_err(|_| bad("n"))?,
                seed: f[2].parse().map_err(|_| bad("seed"))?,
                u: f[3].parse().map_err(|_| bad("u"))?,
                v: f[4].parse().map_err(|_| bad("v"))?,
                d_g: if f[5] == "inf" { None } else { Some(f[5].parse().map_err(|_| bad("dG"))?) },
                d_l: f[6].parse().map_err(|_| bad("dL"))?,
                in_giant: f[7].parse().map_err(|_| bad("in_giant"))?,
            });
        }
        Ok(DistanceSampleSet { rows, flags: vec![] })
    }
}

/// Seed of replica `r` at size `n`.
pub fn replica_seed(seed: u64, n: usize, r: usize) -> u64 {
    rng::hash(seed, tag::REPLICA, &[n as u64, r as u64])
}

/// Up to `count` distinct unordered pairs of `members`, sorted.
pub fn sample_pairs(members: &[usize], count: usize, seed: u64) -> Vec<(usize, usize)> {
    let s = members.len();
    let total = s * s.saturating_sub(1) / 2;
    let target = count.min(total);
    let mut stream = KeyedStream::new(seed, tag::PAIRS, &[s as u64]);
    let mut pairs: Vec<(usize, usize)> = if total <= 2 * target {
        let mut all: Vec<(usize, usize)> = (0..s).flat_map(|i| (i + 1..s).map(move |j| (i, j))).collect();
        all.shuffle(&mut stream);
        all.truncate(target);
        all.into_iter().map(|(i, j)| (members[i], members[j])).collect()
    } else {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(target);
        while out.len() < target {
            let (i, j) = (stream.random_range(0..s), stream.random_range(0..s));
            if i == j {
                continue;
            }
            let (a, b) = (members[i.min(j)], members[i.max(j)]);
            if seen.insert((a, b)) {
                out.push((a, b));
            }
        }
        out
    };
    for p in &mut pairs {
        *p = (p.0.min(p.1), p.0.max(p.1));
    }
    pairs.sort_unstable();
    pairs
}

/// Lattice index of the point with the given integer coordinates in the
/// window `[-m, m]^d`.
fn lattice_index(coords: &[i64], m: usize) -> usize {
    let width = 2 * m as i64 + 1;
    coords.iter().rev().fold(0i64, |acc, &x| acc * width + (x + m as i64)) as usize
}

struct Job {
    n: usize,
    seed: u64,
}

fn run_job(cfg: &ExperimentConfig, job: &Job) -> Result<(Vec<DistanceRow>, Option<String>)> {
    let law = cfg.length_law()?;
    let g = cfg.model.generate(job.n, job.seed, SamplerOptions::default())?;
    let g = assign_edge_lengths(&g, &law, job.seed, true)?;
    let comps = giant_component(&g);
    let model = cfg.model.name().to_string();
    let row = |g: &SpatialGraph, u: usize, v: usize, in_giant: bool| -> Result<DistanceRow> {
        let (d_l, _) = shortest_weighted(g, u, v)?;
        Ok(DistanceRow { model: model.clone(), n: job.n, seed: job.seed, u, v, d_g: graph_distance(g, u, v), d_l, in_giant })
    };
    if cfg.model.is_lattice() {
        let d = g.points.dim();
        let origin = lattice_index(&vec![0; d], job.n);
        let mut far = vec![0i64; d];
        far[0] = job.n as i64;
        let target = lattice_index(&far, job.n);
        let in_giant = comps.label[origin] == comps.giant && comps.label[target] == comps.giant;
        return Ok((vec![row(&g, origin, target, in_giant)?], None));
    }
    let giant = comps.giant_members();
    if giant.len() < 2 {
        return Ok((vec![], Some(format!("n = {} seed = {}: giant component has {} vertices, skipped", job.n, job.seed, giant.len()))));
    }
    let pairs = sample_pairs(&giant, cfg.pairs, job.seed);
    let rows = pairs.par_iter().map(|&(u, v)| row(&g, u, v, true)).collect::<Result<Vec<_>>>()?;
    Ok((rows, None))
}

/// Generates every `(n, replica)` graph, assigns lengths, and measures
/// distances between pairs drawn without replacement from the giant
/// component. For lattice models the pair is the origin and the lattice
/// point `m e_1`. The output does not depend on the number of workers.
pub fn run_distance_experiment(cfg: &ExperimentConfig) -> Result<DistanceSampleSet> {
    cfg.validate()?;
    let jobs: Vec<Job> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.replicas).map(move |r| Job { n, seed: replica_seed(cfg.seed, n, r) }))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let results = pool.install(|| jobs.par_iter().map(|j| run_job(cfg, j)).collect::<Result<Vec<_>>>())?;
    let mut set = DistanceSampleSet { rows: vec![], flags: cfg.model.regime_flags() };
    for (rows, flag) in results {
        set.rows.extend(rows);
        set.flags.extend(flag);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub pairs: usize,
    pub median_weighted: Option<f64>,
    pub median_hops: Option<f64>,
    /// KS distance of the weighted distances to those at the previous size.
    pub ks_to_previous: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub sizes: Vec<SizeSummary>,
    pub flags: Vec<String>,
}

pub fn summarize(set: &DistanceSampleSet) -> ExperimentSummary {
    let mut sizes: Vec<SizeSummary> = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    for n in set.sizes() {
        let w = set.weighted(n);
        let ks = previous.as_ref().and_then(|p| ks_statistic(p, &w).ok());
        sizes.push(SizeSummary { n, pairs: w.len(), median_weighted: median(&w), median_hops: median(&set.hops(n)), ks_to_previous: ks });
        previous = Some(w);
    }
    ExperimentSummary { sizes, flags: set.flags.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_distinct_sorted_and_deterministic() {
        let members: Vec<usize> = (0..50).map(|i| i * 3).collect();
        let p = sample_pairs(&members, 100, 9);
        assert_eq!(p.len(), 100);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(p.iter().all(|(u, v)| u < v));
        assert_eq!(p, sample_pairs(&members, 100, 9));
        assert_eq!(sample_pairs(&[1, 2, 3], 10, 1).len(), 3);
    }

    #[test]
    fn lattice_indices() {
        assert_eq!(lattice_index(&[-2, -2], 2), 0);
        assert_eq!(lattice_index(&[0, 0], 2), 12);
        assert_eq!(lattice_index(&[2, 0], 2), 14);
    }

    #[test]
    fn csv_round_trip() {
        let set = DistanceSampleSet {
            rows: vec![DistanceRow { model: "girg".into(), n: 10, seed: 3, u: 1, v: 2, d_g: None, d_l: Length::Infinite, in_giant: false }],
            flags: vec![],
        };
        assert_eq!(DistanceSampleSet::from_csv(&set.to_csv()).unwrap(), set);
    }
}
