//! Exact edge sampling for distance- and weight-dependent kernels.
//!
//! Vertices are split into weight layers `[2^i, 2^{i+1})` and, inside each
//! layer, sorted along a Morton curve so that every dyadic cell is a
//! contiguous range. For a pair of layers the cell pairs are refined from the
//! root: adjacent cells are split further, non-adjacent cells are handled in
//! bulk by geometric jumping under an upper envelope followed by rejection,
//! and adjacent cells at the finest useful level are enumerated pair by pair.
//! Every accepted pair uses the keyed edge coin, so the output depends only
//! on the seed.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;

use super::kernel::EdgeKernel;
use crate::rng::{self, tag, KeyedStream};
use crate::spatial::{Metric, PointSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerMode {
    /// Accelerated sampler.
    #[default]
    Auto,
    /// Every pair is tested; the reference implementation.
    Naive,
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    pub mode: SamplerMode,
    pub max_edges: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { mode: SamplerMode::Auto, max_edges: 200_000_000 }
    }
}

impl SamplerOptions {
    pub fn naive() -> Self {
        SamplerOptions { mode: SamplerMode::Naive, ..Default::default() }
    }
}

/// Samples every unordered pair `{u, v}` independently with probability
/// `kernel.prob(u, v, dist(u, v))`. Coins are keyed by `keys`.
pub fn sample_edges<K: EdgeKernel>(points: &PointSet, keys: &[u64], kernel: &K, seed: u64, opts: SamplerOptions) -> Result<Vec<(u32, u32)>> {
    let n = points.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let mut edges = match opts.mode {
        SamplerMode::Naive => naive(points, keys, kernel, seed, opts.max_edges)?,
        SamplerMode::Auto => accelerated(points, keys, kernel, seed, opts.max_edges)?,
    };
    edges.par_sort_unstable();
    Ok(edges)
}

#[inline]
fn coin(seed: u64, keys: &[u64], u: usize, v: usize) -> f64 {
    rng::pair_uniform(seed, tag::EDGE_COIN, keys[u], keys[v])
}

fn cap_error(cap: usize) -> Error {
    Error::ResourceCap(format!("edge count exceeds the cap of {cap}"))
}

fn naive<K: EdgeKernel>(points: &PointSet, keys: &[u64], kernel: &K, seed: u64, cap: usize) -> Result<Vec<(u32, u32)>> {
    let n = points.len();
    let count = AtomicUsize::new(0);
    let per_vertex: Vec<Vec<(u32, u32)>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut out = Vec::new();
            if count.load(Ordering::Relaxed) > cap {
                return out;
            }
            for v in u + 1..n {
                if kernel.accepts(u, v, points.distance(u, v), coin(seed, keys, u, v)) {
                    out.push((u as u32, v as u32));
                }
            }
            count.fetch_add(out.len(), Ordering::Relaxed);
            out
        })
        .collect();
    if count.load(Ordering::Relaxed) > cap {
        return Err(cap_error(cap));
    }
    Ok(per_vertex.concat())
}

struct Layer {
    /// `(morton code, vertex)` sorted by code.
    entries: Vec<(u64, u32)>,
    w_lo: f64,
    w_hi: f64,
}

impl Layer {
    fn range(&self, level: u32, cell: u64, grid: &Grid) -> (usize, usize) {
        let shift = grid.d as u32 * (grid.bits - level);
        let lo = cell << shift;
        let start = self.entries.partition_point(|e| e.0 < lo);
        let hi = (cell + 1) << shift;
        let end = start + self.entries[start..].partition_point(|e| e.0 < hi);
        (start, end)
    }
}

struct Grid {
    d: usize,
    bits: u32,
    lo: f64,
    side: f64,
    torus: bool,
}

impl Grid {
    fn morton(&self, x: &[f64]) -> u64 {
        let cells = (1u64 << self.bits) as f64;
        let mut code = 0u64;
        for (axis, &c) in x.iter().enumerate() {
            let q = (((c - self.lo) / self.side) * cells).floor().clamp(0.0, cells - 1.0) as u64;
            for b in 0..self.bits {
                code |= ((q >> b) & 1) << (b as usize * self.d + axis);
            }
        }
        code
    }

    /// Per-axis integer coordinates of a cell at `level`.
    fn decode(&self, level: u32, cell: u64, out: &mut [i64]) {
        for (axis, o) in out.iter_mut().enumerate() {
            let mut q = 0i64;
            for b in 0..level {
                q |= (((cell >> (b as usize * self.d + axis)) & 1) as i64) << b;
            }
            *o = q;
        }
    }

    /// Axis gap in whole cells between two cells, respecting wrap-around.
    fn gap(&self, level: u32, a: i64, b: i64) -> i64 {
        let diff = (a - b).abs();
        if self.torus {
            diff.min((1i64 << level) - diff)
        } else {
            diff
        }
    }

    /// `(adjacent, minimum distance)` between two cells at `level`.
    fn relation(&self, level: u32, a: u64, b: u64, ca: &mut [i64], cb: &mut [i64]) -> (bool, f64) {
        self.decode(level, a, ca);
        self.decode(level, b, cb);
        let width = self.side / (1u64 << level) as f64;
        let mut adjacent = true;
        let mut sq = 0.0;
        for axis in 0..self.d {
            let g = self.gap(level, ca[axis], cb[axis]);
            if g > 1 {
                adjacent = false;
                let s = (g - 1) as f64 * width;
                sq += s * s;
            }
        }
        (adjacent, sq.sqrt())
    }
}

struct Job<'a, K: EdgeKernel> {
    points: &'a PointSet,
    keys: &'a [u64],
    kernel: &'a K,
    seed: u64,
    grid: &'a Grid,
    a: &'a Layer,
    b: &'a Layer,
    same_layer: bool,
    layer_ids: (usize, usize),
    target: u32,
    cap: usize,
    overflow: &'a AtomicBool,
    out: Vec<(u32, u32)>,
}

impl<K: EdgeKernel> Job<'_, K> {
    fn push(&mut self, u: u32, v: u32) {
        self.out.push(if u < v { (u, v) } else { (v, u) });
    }

    fn test_pair(&mut self, u: u32, v: u32) {
        let (ui, vi) = (u as usize, v as usize);
        if self.kernel.accepts(ui, vi, self.points.distance(ui, vi), coin(self.seed, self.keys, ui, vi)) {
            self.push(u, v);
        }
    }

    /// All pairs between two cell ranges; `within` marks the same cell of one layer.
    fn enumerate(&mut self, ra: (usize, usize), rb: (usize, usize), within: bool) {
        let (a, b) = (self.a, self.b);
        for i in ra.0..ra.1 {
            let u = a.entries[i].1;
            let start = if within { i + 1 } else { rb.0 };
            for j in start..rb.1 {
                self.test_pair(u, b.entries[j].1);
            }
        }
    }

    /// Geometric jumping over all pairs between two non-adjacent cells.
    fn jump(&mut self, level: u32, cells: (u64, u64), ra: (usize, usize), rb: (usize, usize), dist_min: f64) {
        let envelope = self.kernel.envelope(dist_min, (self.a.w_lo, self.a.w_hi), (self.b.w_lo, self.b.w_hi));
        if envelope <= 0.0 {
            return;
        }
        if envelope >= 1.0 {
            self.enumerate(ra, rb, false);
            return;
        }
        let nb = (rb.1 - rb.0) as u64;
        let total = (ra.1 - ra.0) as u64 * nb;
        let keys = [self.layer_ids.0 as u64, self.layer_ids.1 as u64, level as u64, cells.0, cells.1];
        let mut stream = KeyedStream::new(self.seed, tag::JUMP, &keys);
        let log_q = (-envelope).ln_1p();
        let mut idx: u64 = 0;
        loop {
            let skip = (stream.open01().ln() / log_q).floor();
            if !(skip < (total - idx) as f64) {
                break;
            }
            idx += skip as u64;
            let u = self.a.entries[ra.0 + (idx / nb) as usize].1;
            let v = self.b.entries[rb.0 + (idx % nb) as usize].1;
            let (ui, vi) = (u as usize, v as usize);
            if self.kernel.accepts(ui, vi, self.points.distance(ui, vi), coin(self.seed, self.keys, ui, vi) * envelope) {
                self.push(u, v);
            }
            idx += 1;
            if idx >= total {
                break;
            }
        }
    }

    fn over_cap(&self) -> bool {
        if self.out.len() > self.cap {
            self.overflow.store(true, Ordering::Relaxed);
        }
        self.overflow.load(Ordering::Relaxed)
    }

    /// Refines the cell pair `(ca, cb)` at `level`; the cells are adjacent.
    fn refine(&mut self, level: u32, ca: u64, cb: u64) {
        if self.over_cap() {
            return;
        }
        let ra = self.a.range(level, ca, self.grid);
        let rb = self.b.range(level, cb, self.grid);
        if ra.0 == ra.1 || rb.0 == rb.1 {
            return;
        }
        let within = self.same_layer && ca == cb;
        if level >= self.target {
            self.enumerate(ra, rb, within);
            return;
        }
        let d = self.grid.d;
        let children = 1u64 << d;
        let mut xa = vec![0i64; d];
        let mut xb = vec![0i64; d];
        for s in 0..children {
            let child_a = (ca << d) | s;
            let sub_a = self.a.range(level + 1, child_a, self.grid);
            if sub_a.0 == sub_a.1 {
                continue;
            }
            let first = if within { s } else { 0 };
            for t in first..children {
                let child_b = (cb << d) | t;
                let sub_b = self.b.range(level + 1, child_b, self.grid);
                if sub_b.0 == sub_b.1 {
                    continue;
                }
                let (adjacent, dist_min) = self.grid.relation(level + 1, child_a, child_b, &mut xa, &mut xb);
                if adjacent {
                    self.refine(level + 1, child_a, child_b);
                } else {
                    self.jump(level + 1, (child_a, child_b), sub_a, sub_b, dist_min);
                }
            }
        }
    }
}

fn accelerated<K: EdgeKernel>(points: &PointSet, keys: &[u64], kernel: &K, seed: u64, cap: usize) -> Result<Vec<(u32, u32)>> {
    let d = points.dim();
    let window = points.window();
    let bits = ((63 / d) as u32).min(30);
    let grid = Grid { d, bits, lo: window.lo, side: window.side, torus: points.metric() == Metric::Torus };

    let mut by_layer: Vec<Vec<(u64, u32)>> = Vec::new();
    for v in 0..points.len() {
        let w = kernel.weight(v).max(1.0);
        let layer = (w.log2().floor() as usize).min(1023);
        if by_layer.len() <= layer {
            by_layer.resize_with(layer + 1, Vec::new);
        }
        by_layer[layer].push((grid.morton(points.point(v)), v as u32));
    }
    let layers: Vec<(usize, Layer)> = by_layer
        .into_iter()
        .enumerate()
        .filter(|(_, e)| !e.is_empty())
        .map(|(i, mut entries)| {
            entries.sort_unstable();
            let w_hi = entries.iter().map(|e| kernel.weight(e.1 as usize)).fold(1.0, f64::max);
            let w_lo = entries.iter().map(|e| kernel.weight(e.1 as usize)).fold(f64::INFINITY, f64::min);
            (i, Layer { entries, w_lo: w_lo.max(1.0), w_hi })
        })
        .collect();

    let mut pairs = Vec::new();
    for x in 0..layers.len() {
        for y in x..layers.len() {
            pairs.push((x, y));
        }
    }
    let count = AtomicUsize::new(0);
    let overflow = AtomicBool::new(false);
    let results: Vec<Vec<(u32, u32)>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let (a, b) = (&layers[x].1, &layers[y].1);
            let reach = kernel.reach(a.w_hi, b.w_hi);
            let target = if reach > 0.0 && reach.is_finite() {
                ((window.side / reach).log2().floor().max(0.0) as u32).min(bits)
            } else if reach <= 0.0 {
                bits
            } else {
                0
            };
            let mut job = Job {
                points,
                keys,
                kernel,
                seed,
                grid: &grid,
                a,
                b,
                same_layer: x == y,
                layer_ids: (layers[x].0, layers[y].0),
                target,
                cap,
                overflow: &overflow,
                out: Vec::new(),
            };
            job.refine(0, 0, 0);
            count.fetch_add(job.out.len(), Ordering::Relaxed);
            if count.load(Ordering::Relaxed) > cap {
                overflow.store(true, Ordering::Relaxed);
            }
            job.out
        })
        .collect();
    if overflow.load(Ordering::Relaxed) {
        return Err(cap_error(cap));
    }
    Ok(results.concat())
}
