//! Edge lengths, weighted and graph distances, balls and explosion proxies.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::dist::EdgeLengthDistribution;
use crate::error::contract;
use crate::genmodel::SpatialGraph;
use crate::rng::{self, tag};
use crate::{Length, Result};

/// Gives every edge an i.i.d. length keyed by the unordered pair of vertex
/// keys, so graphs sharing a seed and keys agree on shared edges.
pub fn assign_edge_lengths(g: &SpatialGraph, dist: &EdgeLengthDistribution, seed: u64, overwrite: bool) -> Result<SpatialGraph> {
    if g.has_lengths() && !overwrite {
        return Err(contract("graph already carries edge lengths"));
    }
    let mut out = g.clone();
    out.set_lengths_with(|u, v| dist.from_uniform(rng::pair_uniform(seed, tag::EDGE_LENGTH, g.keys[u], g.keys[v])))?;
    out.provenance.length_law = Some(dist.clone());
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    hops: u32,
    vertex: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, hops, vertex)
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.hops.cmp(&self.hops))
            .then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn require_lengths(g: &SpatialGraph) -> Result<()> {
    if g.has_lengths() {
        Ok(())
    } else {
        Err(contract("edge lengths have not been assigned"))
    }
}

/// Label-setting search from `source`; settled vertices are reported to
/// `visit` in order of `(distance, hops)` and the search stops when it
/// returns `false`.
struct Search {
    dist: Vec<f64>,
    hops: Vec<u32>,
    parent: Vec<u32>,
    settled: Vec<bool>,
}

impl Search {
    fn run<F: FnMut(usize, f64, u32) -> bool>(g: &SpatialGraph, source: usize, cutoff: f64, mut visit: F) -> Result<Search> {
        let n = g.num_vertices();
        let mut s = Search { dist: vec![f64::INFINITY; n], hops: vec![u32::MAX; n], parent: vec![u32::MAX; n], settled: vec![false; n] };
        let mut heap = BinaryHeap::new();
        s.dist[source] = 0.0;
        s.hops[source] = 0;
        heap.push(Entry { dist: 0.0, hops: 0, vertex: source as u32 });
        while let Some(Entry { dist, hops, vertex }) = heap.pop() {
            let u = vertex as usize;
            if s.settled[u] || dist > s.dist[u] || (dist == s.dist[u] && hops > s.hops[u]) {
                continue;
            }
            if dist > cutoff {
                break;
            }
            s.settled[u] = true;
            if !visit(u, dist, hops) {
                break;
            }
            for (v, len) in g.weighted_neighbors(u) {
                if len < 0.0 {
                    return Err(contract(format!("negative edge length on ({u},{v})")));
                }
                if s.settled[v] {
                    continue;
                }
                let nd = dist + len;
                let nh = hops + 1;
                if nd < s.dist[v] || (nd == s.dist[v] && nh < s.hops[v]) {
                    s.dist[v] = nd;
                    s.hops[v] = nh;
                    s.parent[v] = u as u32;
                    heap.push(Entry { dist: nd, hops: nh, vertex: v as u32 });
                }
            }
        }
        Ok(s)
    }

    fn path_to(&self, target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut cur = target;
        while self.parent[cur] != u32::MAX {
            cur = self.parent[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Weighted distance from `u` to `v` and a path realising it.
pub fn shortest_weighted(g: &SpatialGraph, u: usize, v: usize) -> Result<(Length, Vec<usize>)> {
    shortest_weighted_to_set(g, u, &[v])
}

/// Weighted distance from `u` to the nearest vertex of `targets`.
pub fn shortest_weighted_to_set(g: &SpatialGraph, u: usize, targets: &[usize]) -> Result<(Length, Vec<usize>)> {
    require_lengths(g)?;
    let mut is_target = vec![false; g.num_vertices()];
    for &t in targets {
        is_target[t] = true;
    }
    let mut hit = None;
    let search = Search::run(g, u, f64::INFINITY, |x, _, _| {
        if is_target[x] {
            hit = Some(x);
            false
        } else {
            true
        }
    })?;
    Ok(match hit {
        Some(t) => (Length::Finite(search.dist[t]), search.path_to(t)),
        None => (Length::Infinite, Vec::new()),
    })
}

/// Weighted distances from `u` to every vertex.
pub fn single_source(g: &SpatialGraph, u: usize) -> Result<Vec<Length>> {
    require_lengths(g)?;
    let s = Search::run(g, u, f64::INFINITY, |_, _, _| true)?;
    Ok(s.dist.into_iter().map(Length::from_f64).collect())
}

/// Hop distances from `u`; `None` when unreachable.
pub fn bfs_distances(g: &SpatialGraph, u: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.num_vertices()];
    dist[u] = Some(0);
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x].expect("queued vertices are labelled");
        for &y in g.neighbors(x) {
            let y = y as usize;
            if dist[y].is_none() {
                dist[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Graph distance between `u` and `v`.
pub fn graph_distance(g: &SpatialGraph, u: usize, v: usize) -> Option<usize> {
    if u == v {
        return Some(0);
    }
    let mut dist = vec![usize::MAX; g.num_vertices()];
    dist[u] = 0;
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            let y = y as usize;
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                if y == v {
                    return Some(dist[y]);
                }
                queue.push_back(y);
            }
        }
    }
    None
}

/// `(B^G(v,k), boundary)`: vertices within `k` hops and those at exactly `k`.
pub fn graph_ball(g: &SpatialGraph, v: usize, k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut dist = vec![usize::MAX; g.num_vertices()];
    dist[v] = 0;
    let mut ball = vec![v];
    let mut frontier = vec![v];
    for layer in 1..=k {
        let mut next = Vec::new();
        for &x in &frontier {
            for &y in g.neighbors(x) {
                let y = y as usize;
                if dist[y] == usize::MAX {
                    dist[y] = layer;
                    next.push(y);
                }
            }
        }
        ball.extend_from_slice(&next);
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let boundary = if k == 0 {
        vec![v]
    } else {
        let mut b: Vec<usize> = ball.iter().copied().filter(|&x| dist[x] == k).collect();
        b.sort_unstable();
        b
    };
    ball.sort_unstable();
    (ball, boundary)
}

/// Vertices within weighted distance `t` of `v`.
pub fn weighted_ball(g: &SpatialGraph, v: usize, t: f64) -> Result<Vec<usize>> {
    require_lengths(g)?;
    let mut ball = Vec::new();
    Search::run(g, v, t, |x, _, _| {
        ball.push(x);
        true
    })?;
    ball.sort_unstable();
    Ok(ball)
}

/// `(B^{L,G}(v,k), boundary)`: vertices whose shortest weighted path from `v`
/// uses at most (respectively exactly) `k` edges. Among several shortest
/// paths the one with the fewest edges counts.
pub fn hop_constrained_ball(g: &SpatialGraph, v: usize, k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    require_lengths(g)?;
    let s = Search::run(g, v, f64::INFINITY, |_, _, _| true)?;
    let ball: Vec<usize> = (0..g.num_vertices()).filter(|&x| s.settled[x] && (s.hops[x] as usize) <= k).collect();
    let boundary = ball.iter().copied().filter(|&x| s.hops[x] as usize == k).collect();
    Ok((ball, boundary))
}

/// Finite proxies of the explosion time seen from one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplosionProxy {
    /// `tau[k-1]`: weighted distance to the `k`-th closest vertex, `v` included.
    pub tau_values: Vec<Length>,
    /// `x[k-1]`: weighted distance from `v` to the `k`-th hop layer.
    pub x_values: Vec<Length>,
}

impl ExplosionProxy {
    /// CSV lines `k,tau_k,x_k` with a header.
    pub fn to_csv(&self) -> String {
        let rows = self.tau_values.len().max(self.x_values.len());
        let mut out = String::from("k,tau_k,x_k\n");
        let cell = |v: Option<&Length>| v.map(|l| l.to_string()).unwrap_or_default();
        for k in 0..rows {
            out.push_str(&format!("{},{},{}\n", k + 1, cell(self.tau_values.get(k)), cell(self.x_values.get(k))));
        }
        out
    }
}

pub fn explosion_proxy(g: &SpatialGraph, v: usize, k_ball: usize, k_max: usize) -> Result<ExplosionProxy> {
    require_lengths(g)?;
    let dist = single_source(g, v)?;
    let mut settled: Vec<f64> = dist.iter().filter_map(|d| d.finite()).collect();
    settled.sort_by(f64::total_cmp);
    let tau_values = (0..k_ball).map(|k| settled.get(k).map_or(Length::Infinite, |&d| Length::Finite(d))).collect();
    let hops = bfs_distances(g, v);
    let mut x = vec![Length::Infinite; k_max];
    for u in 0..g.num_vertices() {
        if let Some(h) = hops[u] {
            if h >= 1 && h <= k_max && dist[u] < x[h - 1] {
                x[h - 1] = dist[u];
            }
        }
    }
    // the hop layers of a component end at once, so the minima are monotone
    Ok(ExplosionProxy { tau_values, x_values: x })
}

/// Weighted distance from `v` to the nearest vertex of weight at least
/// `min_weight`, with that vertex.
pub fn t_k_proxy(g: &SpatialGraph, v: usize, min_weight: f64) -> Result<(Length, Option<usize>)> {
    require_lengths(g)?;
    let mut hit = None;
    let s = Search::run(g, v, f64::INFINITY, |x, _, _| {
        if g.weights[x] >= min_weight {
            hit = Some(x);
            false
        } else {
            true
        }
    })?;
    Ok(match hit {
        Some(x) => (Length::Finite(s.dist[x]), Some(x)),
        None => (Length::Infinite, None),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    Weighted,
    Hops,
}

/// A distance request from one source, optionally to one target, optionally
/// truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceQuery {
    pub source: usize,
    pub target: Option<usize>,
    pub mode: DistanceMode,
    pub cutoff: Option<f64>,
}

impl DistanceQuery {
    /// Distances to the target, or to every vertex when no target is set;
    /// entries beyond the cutoff are infinite.
    pub fn run(&self, g: &SpatialGraph) -> Result<Vec<Length>> {
        if let Some(c) = self.cutoff {
            if !(c >= 0.0) {
                return Err(crate::error::domain("cutoff must be nonnegative"));
            }
        }
        let cutoff = self.cutoff.unwrap_or(f64::INFINITY);
        let clip = |l: Length| if l.to_f64() <= cutoff { l } else { Length::Infinite };
        let all: Vec<Length> = match self.mode {
            DistanceMode::Weighted => single_source(g, self.source)?,
            DistanceMode::Hops => bfs_distances(g, self.source).into_iter().map(|d| d.map_or(Length::Infinite, |h| Length::Finite(h as f64))).collect(),
        };
        Ok(match self.target {
            Some(t) => vec![clip(all[t])],
            None => all.into_iter().map(clip).collect(),
        })
    }
}
