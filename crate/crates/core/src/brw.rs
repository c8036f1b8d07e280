//! Bernoulli branching random walk on a fixed point environment.
//!
//! Every individual at location `x` places, independently at each other
//! environment point `y`, a child with probability
//! `C * min(1, a |x - y|^{-alpha d} (W_x W_y)^alpha)`. Individuals sharing a
//! location reproduce independently, so a generation is a multiset of
//! locations.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{contract, domain};
use crate::fpp::bfs_distances;
use crate::genmodel::{GChoice, GirgParams, SpatialGraph};
use crate::rng::{self, tag, KeyedStream};
use crate::spatial::PointSet;
use crate::Result;

/// Default bound on the size of a generation.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct Environment<'a> {
    pub points: &'a PointSet,
    pub weights: &'a [f64],
}

impl<'a> Environment<'a> {
    pub fn of_graph(g: &'a SpatialGraph) -> Self {
        Environment { points: &g.points, weights: &g.weights }
    }

    fn fingerprint(&self) -> u64 {
        let mut h = rng::hash(self.points.len() as u64, self.points.dim() as u64, &[]);
        for x in self.points.coords().iter().chain(self.weights) {
            h = rng::mix64(h ^ x.to_bits());
        }
        h
    }
}

/// Offspring probability between locations `x` and `y`.
pub fn offspring_prob(params: &GirgParams, env: &Environment, x: usize, y: usize) -> f64 {
    params
        .with_choice(GChoice::UpperBound)
        .prob_at(env.points.distance(x, y), env.weights[x], env.weights[y])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generation {
    pub k: usize,
    /// `(location, multiplicity)` sorted by location.
    pub members: Vec<(usize, u64)>,
    pub size: u64,
    /// Largest distance from the root location.
    pub max_displacement: f64,
}

impl Generation {
    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search_by_key(&v, |m| m.0).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrwRun {
    pub root: usize,
    pub generations: Vec<Generation>,
    /// A generation exceeded the cap and the run stopped there.
    pub truncated: bool,
    pub cap: u64,
    #[serde(skip)]
    env_fingerprint: u64,
}

/// Exploration order of a graph used to couple coins: vertex depth and the
/// position in breadth-first order, for vertices explored before the
/// horizon.
struct Exploration<'g> {
    graph: &'g SpatialGraph,
    depth: Vec<Option<usize>>,
    position: Vec<usize>,
}

impl Exploration<'_> {
    /// The first individual at `x` in generation `k` reuses the edge coin of
    /// `{x, y}` when `x` is explored at depth `k` and `y` was not explored
    /// earlier.
    fn coupled(&self, k: usize, x: usize, y: usize) -> bool {
        self.depth[x] == Some(k) && self.position[y] > self.position[x]
    }
}

fn run<'a>(
    env: &Environment<'a>,
    root: usize,
    max_gen: usize,
    cap: u64,
    params: &GirgParams,
    seed: u64,
    coupling: Option<&Exploration<'_>>,
) -> Result<BrwRun> {
    let n = env.points.len();
    if root >= n {
        return Err(domain(format!("root {root} is not an environment point (size {n})")));
    }
    let upper = params.with_choice(GChoice::UpperBound);
    let displacement = |members: &[(usize, u64)]| members.iter().map(|&(x, _)| env.points.distance(root, x)).fold(0.0, f64::max);
    let mut generations = vec![Generation { k: 0, members: vec![(root, 1)], size: 1, max_displacement: 0.0 }];
    let mut truncated = false;
    for k in 0..max_gen {
        let parents = &generations[k].members;
        if parents.is_empty() {
            break;
        }
        let per_parent: Vec<Vec<(usize, u64)>> = parents
            .par_iter()
            .map(|&(x, m)| {
                let mut out = Vec::new();
                for y in 0..n {
                    if y == x {
                        continue;
                    }
                    let p = upper.prob_at(env.points.distance(x, y), env.weights[x], env.weights[y]);
                    let mut trials = m;
                    let mut born = 0u64;
                    if let Some(c) = coupling {
                        if c.coupled(k, x, y) {
                            trials -= 1;
                            born += c.graph.has_edge(x, y) as u64;
                        }
                    }
                    if trials > 0 && p > 0.0 {
                        let mut s = KeyedStream::new(seed, tag::BRW, &[k as u64, x as u64, y as u64]);
                        born += if trials == 1 {
                            (s.random::<f64>() < p) as u64
                        } else {
                            Binomial::new(trials, p).expect("valid binomial").sample(&mut s)
                        };
                    }
                    if born > 0 {
                        out.push((y, born));
                    }
                }
                out
            })
            .collect();
        let mut counts = vec![0u64; n];
        for list in per_parent {
            for (y, c) in list {
                counts[y] = counts[y].saturating_add(c);
            }
        }
        let members: Vec<(usize, u64)> = counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(y, &c)| (y, c)).collect();
        let size = members.iter().fold(0u64, |a, m| a.saturating_add(m.1));
        let max_displacement = displacement(&members);
        generations.push(Generation { k: k + 1, members, size, max_displacement });
        if size > cap {
            truncated = true;
            break;
        }
    }
    Ok(BrwRun { root, generations, truncated, cap, env_fingerprint: env.fingerprint() })
}

/// Independent run with fresh coins for every trial.
pub fn simulate_berbrw(env: &Environment, root: usize, max_gen: usize, cap: u64, params: &GirgParams, seed: u64) -> Result<BrwRun> {
    run(env, root, max_gen, cap, params, seed, None)
}

/// Run over the vertices of `g`, whose edges must have been drawn with the
/// offspring probability. While a breadth-first exploration of `g` from the
/// root examines the pair `{x, y}` for the first time, the first individual
/// at `x` uses the edge of `g` as its child coin; all other trials use fresh
/// coins. The run has the law of the branching walk and its generation `k`
/// covers the vertices at graph distance `k`.
pub fn simulate_coupled(g: &SpatialGraph, root: usize, max_gen: usize, cap: u64, params: &GirgParams, seed: u64) -> Result<BrwRun> {
    let n = g.num_vertices();
    if root >= n {
        return Err(domain(format!("root {root} is not a vertex (size {n})")));
    }
    let dist = bfs_distances(g, root);
    let mut order: Vec<usize> = (0..n).filter(|&v| dist[v].is_some_and(|d| d < max_gen)).collect();
    order.sort_by_key(|&v| (dist[v], v));
    let mut position = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let depth = (0..n).map(|v| dist[v].filter(|&d| d < max_gen)).collect();
    let exploration = Exploration { graph: g, depth, position };
    run(&Environment::of_graph(g), root, max_gen, cap, params, seed, Some(&exploration))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub holds: bool,
    /// Vertices at graph distance exactly `j`, for `j = 0..=k`.
    pub sphere_sizes: Vec<usize>,
    pub generation_sizes: Vec<u64>,
    /// Depths where a sphere vertex was missing from the generation.
    pub violations: Vec<usize>,
}

/// Checks that for every `j <= k` each vertex at graph distance `j` from
/// the root is a location of generation `j`.
pub fn domination_check(g: &SpatialGraph, run: &BrwRun, k: usize) -> Result<DominationReport> {
    if Environment::of_graph(g).fingerprint() != run.env_fingerprint {
        return Err(contract("run and graph use different environments"));
    }
    let dist = bfs_distances(g, run.root);
    let mut report = DominationReport { holds: true, sphere_sizes: vec![], generation_sizes: vec![], violations: vec![] };
    for j in 0..=k {
        let sphere: Vec<usize> = (0..g.num_vertices()).filter(|&v| dist[v] == Some(j)).collect();
        report.sphere_sizes.push(sphere.len());
        let gen = run.generations.get(j);
        report.generation_sizes.push(gen.map_or(0, |x| x.size));
        let ok = match gen {
            Some(gen) => sphere.iter().all(|&v| gen.contains(v)),
            None => sphere.is_empty(),
        };
        if !ok {
            report.holds = false;
            report.violations.push(j);
        }
    }
    Ok(report)
}

/// Doubly-exponential envelope for generation sizes and displacements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthEnvelope {
    pub epsilon: f64,
    pub tau: f64,
    pub zeta: f64,
}

impl GrowthEnvelope {
    /// Envelope with the smallest admissible displacement constant.
    pub fn new(epsilon: f64, tau: f64, alpha: f64, d: usize) -> Self {
        GrowthEnvelope { epsilon, tau, zeta: zeta_floor(epsilon, tau, alpha, d) }
    }

    fn base(&self) -> f64 {
        (1.0 + self.epsilon) / (self.tau - 2.0)
    }

    /// `2 exp{i (1 + eps) ((1 + eps)/(tau - 2))^k}`.
    pub fn size_bound(&self, i: u32, k: usize) -> f64 {
        2.0 * (i as f64 * (1.0 + self.epsilon) * self.base().powf(k as f64)).exp()
    }

    /// `exp{i zeta ((1 + eps)/(tau - 2))^k}`.
    pub fn displacement_bound(&self, i: u32, k: usize) -> f64 {
        (i as f64 * self.zeta * self.base().powf(k as f64)).exp()
    }
}

/// Smallest admissible displacement constant.
pub fn zeta_floor(epsilon: f64, tau: f64, alpha: f64, d: usize) -> f64 {
    let d = d as f64;
    let first = 2.0 * (epsilon / (1.0 + epsilon) + (tau - 1.0) / (tau - 2.0)) / d;
    let second = (2.0 * alpha + epsilon * (tau - 2.0) / (1.0 + epsilon)) / ((alpha - 1.0) * d);
    first.max(second)
}

/// Smallest `i <= i_max` whose envelope holds for every simulated
/// generation; `None` when none does.
pub fn envelope_check(run: &BrwRun, envelope: &GrowthEnvelope, i_max: u32) -> Option<u32> {
    (1..=i_max).find(|&i| {
        run.generations
            .iter()
            .all(|g| g.size as f64 <= envelope.size_bound(i, g.k) && g.max_displacement <= envelope.displacement_bound(i, g.k))
    })
}

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Mean number of children of an individual of weight `w`, divided by
/// `w E[W]`: `lambda C V_d a^{1/alpha} alpha/(alpha - 1)`.
pub fn rank_one_constant(lambda: f64, params: &GirgParams) -> f64 {
    let a = params.alpha;
    lambda * params.c_upper * unit_ball_volume(params.d) * params.a1_over.powf(1.0 / a) * a / (a - 1.0)
}

/// Bound `c^k w E[W] E[W^2]^{k-1}` on the mean size of generation `k` from
/// a root of weight `w`.
pub fn rank_one_bound(k: usize, constant: f64, root_weight: f64, mean_w: f64, mean_w2: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    constant.powi(k as i32) * root_weight * mean_w * mean_w2.powi(k as i32 - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRow {
    pub k: usize,
    pub size: u64,
    pub max_displacement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub root: usize,
    pub truncated: bool,
    pub generations: Vec<GenerationRow>,
}

pub fn summarize(run: &BrwRun) -> RunSummary {
    RunSummary {
        root: run.root,
        truncated: run.truncated,
        generations: run
            .generations
            .iter()
            .map(|g| GenerationRow { k: g.k, size: g.size, max_displacement: g.max_displacement })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodel::Provenance;
    use crate::spatial::{Metric, Window};

    fn line(coords: Vec<f64>, weights: Vec<f64>, edges: &[(u32, u32)]) -> SpatialGraph {
        let n = weights.len();
        let ps = PointSet::new(1, Window::centred(100.0), Metric::Box, coords).unwrap();
        SpatialGraph::from_edges(ps, weights, (0..n as u64).collect(), edges, Provenance::new("test", 0)).unwrap()
    }

    #[test]
    fn single_point_dies_out() {
        let g = line(vec![0.0], vec![1.0], &[]);
        let r = simulate_berbrw(&Environment::of_graph(&g), 0, 5, DEFAULT_CAP, &GirgParams::new(1, 2.5, 2.0), 1).unwrap();
        assert_eq!(r.generations.len(), 2);
        assert_eq!(r.generations[1].size, 0);
    }

    #[test]
    fn envelope_values() {
        let e = GrowthEnvelope { epsilon: 0.1, tau: 2.5, zeta: 1.0 };
        assert!((e.size_bound(1, 0) - 6.008).abs() < 0.01);
        assert!((e.size_bound(1, 1) - 22.49).abs() < 0.01);
    }

    #[test]
    fn lone_root_passes_envelope_at_one() {
        let g = line(vec![0.0], vec![1.0], &[]);
        let r = simulate_berbrw(&Environment::of_graph(&g), 0, 3, DEFAULT_CAP, &GirgParams::new(1, 2.5, 2.0), 1).unwrap();
        assert_eq!(envelope_check(&r, &GrowthEnvelope::new(0.1, 2.5, 2.0, 1), 10), Some(1));
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn different_environment_is_rejected() {
        let g = line(vec![0.0, 1.0], vec![1.0, 2.0], &[(0, 1)]);
        let h = line(vec![0.0, 1.5], vec![1.0, 2.0], &[(0, 1)]);
        let run = simulate_coupled(&g, 0, 2, DEFAULT_CAP, &GirgParams::new(1, 2.5, 2.0), 3).unwrap();
        assert!(domination_check(&h, &run, 2).is_err());
        assert!(domination_check(&g, &run, 2).unwrap().holds);
    }
}
