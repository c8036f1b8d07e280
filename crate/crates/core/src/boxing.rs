//! Doubly-exponential boxing systems.
//!
//! A system around a point `u` with parameter `mu` has nested sup-norm boxes
//! `Box_k` of side `mu^{D C^k / d}`. The annulus `Box_k \ Box_{k-1}` is tiled by
//! subboxes of side `mu^{C^k / d}`, and the heaviest vertex of each subbox is
//! its centre. Paths that hop from centre to centre through consecutive
//! annuli reach far away at bounded total length.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::EdgeLengthDistribution;
use crate::error::{contract, parameter};
use crate::genmodel::SpatialGraph;
use crate::rng;
use crate::spatial::Window;
use crate::{Error, Length, Result};

/// Upper bound on grid cells examined when tiling one annulus.
pub const MAX_GRID_CELLS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxingConstants {
    pub epsilon: f64,
    pub tau: f64,
    /// Relative slack of the centre weight band.
    pub weight_slack: f64,
    /// Growth factor of the exponents from one annulus to the next.
    pub growth: f64,
    /// Ratio between the exponents of box side and subbox side.
    pub box_exponent: f64,
}

pub fn boxing_constants(epsilon: f64, tau: f64) -> Result<BoxingConstants> {
    if !(tau > 2.0 && tau < 3.0) {
        return Err(parameter(format!("boxing needs tau in (2,3), got {tau}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(parameter(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let weight_slack = (tau - 2.0) * epsilon / (2.0 * (tau - 1.0));
    let growth = (1.0 - epsilon) / (tau - 2.0);
    let box_exponent = (1.0 - weight_slack) * (1.0 - epsilon / (tau - 1.0)) / (1.0 - epsilon) - weight_slack / 2.0;
    if growth <= 1.0 {
        return Err(parameter(format!("growth factor {growth} is not above 1; need epsilon < 3 - tau")));
    }
    if box_exponent < 1.0 - 1e-12 {
        return Err(parameter(format!("box exponent {box_exponent} is below 1")));
    }
    Ok(BoxingConstants { epsilon, tau, weight_slack, growth, box_exponent })
}

impl BoxingConstants {
    fn level_exponent(&self, k: usize) -> f64 {
        self.growth.powf(k as f64)
    }

    /// Side `mu^{D C^k / d}` of `Box_k`.
    pub fn box_side(&self, mu: f64, d: usize, k: usize) -> f64 {
        mu.powf(self.box_exponent * self.level_exponent(k) / d as f64)
    }

    /// Side `mu^{C^k / d}` of the subboxes of annulus `k`.
    pub fn subbox_side(&self, mu: f64, d: usize, k: usize) -> f64 {
        mu.powf(self.level_exponent(k) / d as f64)
    }

    /// Band `[mu^{C^k(1-delta)/(tau-1)}, mu^{C^k(1+delta)/(tau-1)}]` for centre weights.
    pub fn weight_band(&self, mu: f64, k: usize, delta: f64) -> (f64, f64) {
        let e = self.level_exponent(k) / (self.tau - 1.0);
        (mu.powf(e * (1.0 - delta)), mu.powf(e * (1.0 + delta)))
    }

    /// Band `[mu^{(D-1)C^k}/2, mu^{(D-1)C^k}]` for the number of subboxes.
    pub fn subbox_count_band(&self, mu: f64, k: usize) -> (f64, f64) {
        let hi = mu.powf((self.box_exponent - 1.0) * self.level_exponent(k));
        (hi / 2.0, hi)
    }

    /// Required number of centre neighbours, `exp{C^k (D-1) ln mu / 2} / 2`.
    pub fn neighbour_threshold(&self, mu: f64, k: usize) -> f64 {
        (self.level_exponent(k) * (self.box_exponent - 1.0) * mu.ln() / 2.0).exp() / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Cuboid {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Cuboid {
    fn around(center: &[f64], side: f64) -> Self {
        Cuboid {
            lo: center.iter().map(|c| c - side / 2.0).collect(),
            hi: center.iter().map(|c| c + side / 2.0).collect(),
        }
    }

    fn of_window(w: Window, d: usize) -> Self {
        Cuboid { lo: vec![w.lo; d], hi: vec![w.lo + w.side; d] }
    }

    fn intersect(&self, other: &Cuboid) -> Cuboid {
        Cuboid {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l).max(0.0)).product()
    }

    fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| h <= l)
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| *x >= *l && *x <= *h)
    }
}

/// Volume of `cell` not covered by any of `holes` (inclusion-exclusion).
fn uncovered_volume(cell: &Cuboid, holes: &[Cuboid]) -> f64 {
    let mut vol = cell.volume();
    for mask in 1u32..(1 << holes.len()) {
        let mut part = cell.clone();
        for (i, h) in holes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                part = part.intersect(h);
            }
        }
        let sign = if mask.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        vol += sign * part.volume();
    }
    vol
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subbox {
    /// Lower corner of the grid cell; the subbox is the cell clipped to its
    /// annulus and the window.
    pub lo: Vec<f64>,
    pub side: f64,
    /// Volume after clipping.
    pub volume: f64,
    pub members: usize,
    pub centre: Option<usize>,
}

/// Region `outer ∩ window` minus the holes, tiled by a grid anchored at the
/// lower corner of `outer`. Cells whose clipped volume is below half a cell
/// are dropped.
fn tile(g: &SpatialGraph, outer: &Cuboid, holes: &[Cuboid], side: f64) -> Result<Vec<Subbox>> {
    let d = g.points.dim();
    let window = Cuboid::of_window(g.points.window(), d);
    let region = outer.intersect(&window);
    if region.is_empty() {
        return Ok(Vec::new());
    }
    let anchor = &outer.lo;
    let mut first = Vec::with_capacity(d);
    let mut count = Vec::with_capacity(d);
    let mut total: u64 = 1;
    for a in 0..d {
        let lo = ((region.lo[a] - anchor[a]) / side).floor() as i64;
        let hi = ((region.hi[a] - anchor[a]) / side).ceil() as i64;
        let c = (hi - lo).max(1);
        first.push(lo);
        count.push(c);
        total = total.saturating_mul(c as u64);
    }
    if total > MAX_GRID_CELLS {
        return Err(Error::ResourceCap(format!("annulus tiling needs {total} cells, cap is {MAX_GRID_CELLS}")));
    }
    let clipped_holes: Vec<Cuboid> = holes.iter().map(|h| h.intersect(&region)).filter(|h| !h.is_empty()).collect();
    let full = side.powi(d as i32);
    let mut boxes = Vec::new();
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut idx = vec![0i64; d];
    for flat in 0..total {
        let mut rem = flat;
        for a in 0..d {
            idx[a] = first[a] + (rem % count[a] as u64) as i64;
            rem /= count[a] as u64;
        }
        let cell = Cuboid {
            lo: (0..d).map(|a| anchor[a] + idx[a] as f64 * side).collect(),
            hi: (0..d).map(|a| anchor[a] + (idx[a] + 1) as f64 * side).collect(),
        };
        let vol = uncovered_volume(&cell.intersect(&region), &clipped_holes);
        if vol >= 0.5 * full * (1.0 - 1e-12) {
            index.insert(idx.clone(), boxes.len());
            boxes.push(Subbox { lo: cell.lo, side, volume: vol, members: 0, centre: None });
        }
    }
    for v in 0..g.num_vertices() {
        let x = g.points.point(v);
        if !region.contains(x) || holes.iter().any(|h| h.contains(x)) {
            continue;
        }
        let cell: Vec<i64> = (0..d)
            .map(|a| (((x[a] - anchor[a]) / side).floor() as i64).clamp(first[a], first[a] + count[a] - 1))
            .collect();
        if let Some(&b) = index.get(&cell) {
            let sb = &mut boxes[b];
            sb.members += 1;
            match sb.centre {
                Some(c) if g.weights[c] >= g.weights[v] => {}
                _ => sb.centre = Some(v),
            }
        }
    }
    Ok(boxes)
}

/// Heaviest vertex of `cube ∩ window`, ties to the smallest id.
fn heaviest_in(g: &SpatialGraph, cube: &Cuboid) -> Option<usize> {
    let mut best: Option<usize> = None;
    for v in 0..g.num_vertices() {
        if cube.contains(g.points.point(v)) && best.is_none_or(|b| g.weights[v] > g.weights[b]) {
            best = Some(v);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annulus {
    pub k: usize,
    pub outer_side: f64,
    /// Side of the removed inner box; zero for the innermost annulus.
    pub inner_side: f64,
    pub subbox_side: f64,
    pub subboxes: Vec<Subbox>,
}

impl Annulus {
    /// Number of kept subboxes.
    pub fn count(&self) -> usize {
        self.subboxes.len()
    }

    pub fn centres(&self) -> Vec<usize> {
        self.subboxes.iter().filter_map(|s| s.centre).collect()
    }

    pub fn empty_subboxes(&self) -> usize {
        self.subboxes.iter().filter(|s| s.centre.is_none()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxingSystem {
    pub center: Vec<f64>,
    pub mu: f64,
    pub dim: usize,
    pub constants: BoxingConstants,
    pub k_max: usize,
    pub annuli: Vec<Annulus>,
    /// Heaviest vertex of the innermost box.
    pub root: Option<usize>,
    fingerprint: u64,
}

impl BoxingSystem {
    /// Fraction of kept subboxes without any vertex.
    pub fn empty_fraction(&self) -> f64 {
        let total: usize = self.annuli.iter().map(Annulus::count).sum();
        if total == 0 {
            return 0.0;
        }
        let empty: usize = self.annuli.iter().map(Annulus::empty_subboxes).sum();
        empty as f64 / total as f64
    }
}

/// Hash of vertex weights and the edge list, used to check that two
/// systems were built over the same graph.
fn fingerprint(g: &SpatialGraph) -> u64 {
    let mut h = rng::hash(g.num_vertices() as u64, g.num_edges() as u64, &[]);
    for w in &g.weights {
        h = rng::mix64(h ^ w.to_bits());
    }
    for (u, v, _) in g.edges() {
        h = rng::mix64(h ^ ((u as u64) << 32 | v as u64));
    }
    h
}

/// Largest `k` with `D_k^d` at most `volume`, if any.
fn largest_level(constants: &BoxingConstants, mu: f64, d: usize, volume: f64) -> Option<usize> {
    let mut k_max = None;
    let mut k = 0;
    while constants.box_side(mu, d, k).powi(d as i32) <= volume {
        k_max = Some(k);
        k += 1;
    }
    k_max
}

pub fn build_boxing(g: &SpatialGraph, center: &[f64], mu: f64, constants: BoxingConstants) -> Result<BoxingSystem> {
    let d = g.points.dim();
    if !(mu > 1.0) || !mu.is_finite() {
        return Err(parameter(format!("boxing parameter mu must exceed 1, got {mu}")));
    }
    if center.len() != d {
        return Err(parameter(format!("center has {} coordinates, graph has dimension {d}", center.len())));
    }
    let window = g.points.window();
    if !center.iter().all(|&x| window.contains(x)) {
        return Err(parameter("boxing center lies outside the window"));
    }
    let k_max = match largest_level(&constants, mu, d, window.volume(d)) {
        Some(k) if k >= 1 => k,
        _ => return Err(parameter(format!("window of volume {} is too small for mu = {mu}", window.volume(d)))),
    };
    let annuli = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let outer_side = constants.box_side(mu, d, k);
            let inner_side = if k == 0 { 0.0 } else { constants.box_side(mu, d, k - 1) };
            let subbox_side = constants.subbox_side(mu, d, k);
            let holes = if k == 0 { vec![] } else { vec![Cuboid::around(center, inner_side)] };
            let subboxes = tile(g, &Cuboid::around(center, outer_side), &holes, subbox_side)?;
            Ok(Annulus { k, outer_side, inner_side, subbox_side, subboxes })
        })
        .collect::<Result<Vec<_>>>()?;
    let root = heaviest_in(g, &Cuboid::around(center, annuli[0].outer_side));
    Ok(BoxingSystem {
        center: center.to_vec(),
        mu,
        dim: d,
        constants,
        k_max,
        annuli,
        root,
        fingerprint: fingerprint(g),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentreCounts {
    pub centre: usize,
    /// Adjacent centres in the same annulus.
    pub same: usize,
    /// Adjacent centres in the next annulus; absent for the outermost one.
    pub next: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusEvents {
    pub k: usize,
    pub weight_band: (f64, f64),
    /// All centre weights lie in the band.
    pub weights_ok: bool,
    pub neighbour_threshold: f64,
    pub counts: Vec<CentreCounts>,
    pub min_count: Option<usize>,
    /// Every centre has enough neighbours in annuli `k` and `k + 1`;
    /// absent for the outermost annulus.
    pub neighbours_ok: Option<bool>,
    pub empty_subboxes: usize,
    pub count_in_band: bool,
}

pub fn verify_events(g: &SpatialGraph, sys: &BoxingSystem, delta: f64) -> Vec<AnnulusEvents> {
    let centre_sets: Vec<HashSet<usize>> = sys.annuli.iter().map(|a| a.centres().into_iter().collect()).collect();
    (0..sys.annuli.len())
        .into_par_iter()
        .map(|k| {
            let a = &sys.annuli[k];
            let band = sys.constants.weight_band(sys.mu, k, delta);
            let centres = a.centres();
            let weights_ok = centres.iter().all(|&c| g.weights[c] >= band.0 && g.weights[c] <= band.1);
            let outermost = k + 1 == sys.annuli.len();
            let counts: Vec<CentreCounts> = centres
                .iter()
                .map(|&c| {
                    let same = g.neighbors(c).iter().filter(|&&v| centre_sets[k].contains(&(v as usize))).count();
                    let next = (!outermost)
                        .then(|| g.neighbors(c).iter().filter(|&&v| centre_sets[k + 1].contains(&(v as usize))).count());
                    CentreCounts { centre: c, same, next }
                })
                .collect();
            let min_count = counts.iter().map(|c| c.next.map_or(c.same, |n| n.min(c.same))).min();
            let threshold = sys.constants.neighbour_threshold(sys.mu, k);
            let neighbours_ok = (!outermost).then(|| counts.iter().all(|c| (c.same.min(c.next.unwrap_or(0)) as f64) >= threshold));
            let (lo, hi) = sys.constants.subbox_count_band(sys.mu, k);
            AnnulusEvents {
                k,
                weight_band: band,
                weights_ok,
                neighbour_threshold: threshold,
                counts,
                min_count,
                neighbours_ok,
                empty_subboxes: a.empty_subboxes(),
                count_in_band: (a.count() as f64) >= lo && (a.count() as f64) <= hi,
            }
        })
        .collect()
}

fn length_of(g: &SpatialGraph, u: usize, v: usize) -> f64 {
    g.edge_length(u, v).unwrap_or(1.0)
}

/// Result of walking from a start vertex through a sequence of levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentrePath {
    pub vertices: Vec<usize>,
    /// Level of each vertex; the start has level 0.
    pub levels: Vec<usize>,
    pub total_length: f64,
    pub truncated: bool,
    /// Level the walk failed to enter, when truncated.
    pub stopped_before: Option<usize>,
    /// Every vertex meets the lower weight bound of its level.
    pub certified: bool,
}

/// From `start`, repeatedly take the shortest edge to a centre of the next
/// level that has centres. Levels without centres are skipped.
fn walk(g: &SpatialGraph, start: usize, levels: &[(usize, Vec<usize>)], lower: &dyn Fn(usize) -> f64) -> CentrePath {
    let mut path = CentrePath {
        vertices: vec![start],
        levels: vec![0],
        total_length: 0.0,
        truncated: false,
        stopped_before: None,
        certified: g.weights[start] >= lower(0),
    };
    let mut current = start;
    for (level, centres) in levels {
        if centres.is_empty() {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &c in centres {
            if c != current && g.has_edge(current, c) {
                let cand = (length_of(g, current, c), c);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some((len, c)) => {
                path.vertices.push(c);
                path.levels.push(*level);
                path.total_length += len;
                path.certified &= g.weights[c] >= lower(*level);
                current = c;
            }
            None => {
                path.truncated = true;
                path.stopped_before = Some(*level);
                break;
            }
        }
    }
    path
}

/// Greedy centre path from the heaviest vertex of the innermost box outwards
/// to the outermost annulus. An empty innermost box yields an empty,
/// truncated path.
pub fn greedy_centre_path(g: &SpatialGraph, sys: &BoxingSystem) -> CentrePath {
    let delta = sys.constants.weight_slack;
    let Some(root) = sys.root else {
        return CentrePath {
            vertices: vec![],
            levels: vec![],
            total_length: 0.0,
            truncated: true,
            stopped_before: Some(0),
            certified: false,
        };
    };
    let levels: Vec<(usize, Vec<usize>)> = sys.annuli.iter().skip(1).map(|a| (a.k, a.centres())).collect();
    walk(g, root, &levels, &|k| sys.constants.weight_band(sys.mu, k, delta).0)
}

/// `3 sum_k F^{-1}(exp{-c (a C^k ln K)^g - c (a C^{k+1} ln K)^g})` with
/// `a = (1 - delta)/(tau - 1)`; bounds the length of a certified centre path
/// in a graph percolated with the same `c` and `g`.
pub fn epsilon_k_bound(dist: &EdgeLengthDistribution, k_param: f64, constants: &BoxingConstants, gamma_tilde: f64, c: f64) -> Length {
    let a = (1.0 - constants.weight_slack) / (constants.tau - 1.0);
    let log_k = k_param.ln();
    if !(log_k > 0.0) {
        return Length::Infinite;
    }
    let mut sum = 0.0;
    for k in 0..10_000usize {
        let inner = a * constants.level_exponent(k) * log_k;
        let outer = a * constants.level_exponent(k + 1) * log_k;
        let level = (-c * inner.powf(gamma_tilde) - c * outer.powf(gamma_tilde)).exp();
        if level <= 0.0 {
            // every further term sits at the left end of the support
            return if dist.infimum() > 0.0 { Length::Infinite } else { Length::Finite(3.0 * sum) };
        }
        let term = match dist.quantile_closed(level).expect("level lies in (0, 1]") {
            Length::Finite(t) => t,
            Length::Infinite => return Length::Infinite,
        };
        sum += term;
        if term == 0.0 || term < 1e-18 * sum {
            return Length::Finite(3.0 * sum);
        }
    }
    Length::Infinite
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeReport {
    /// First rebased annulus of the smaller system.
    pub r: usize,
    /// Largest level at which the two systems stay apart; absent when even
    /// the innermost boxes are too close.
    pub k_star: Option<usize>,
    /// Level of the shared annulus.
    pub top_level: usize,
    pub shared_side: f64,
    pub path: Option<Vec<usize>>,
    pub total_length: Option<f64>,
    /// Edges used to join the two paths (0, 1 or 2).
    pub bridge_edges: Option<usize>,
    pub certified: bool,
    pub failure: Option<String>,
}

fn level_centres(g: &SpatialGraph, center: &[f64], outer_side: f64, inner_side: f64, subbox_side: f64) -> Result<Vec<usize>> {
    let holes = if inner_side > 0.0 { vec![Cuboid::around(center, inner_side)] } else { vec![] };
    Ok(tile(g, &Cuboid::around(center, outer_side), &holes, subbox_side)?.into_iter().filter_map(|s| s.centre).collect())
}

/// Joins the centre paths of two systems. The system with the smaller
/// `mu` is rebased so that from annulus `r` on its boxes use the other
/// system's radii; both paths then enter a shared annulus around the
/// midpoint, where the endpoints are joined directly or through a third
/// centre.
pub fn bridge_systems(g: &SpatialGraph, a: &BoxingSystem, b: &BoxingSystem) -> Result<BridgeReport> {
    let fp = fingerprint(g);
    if a.fingerprint != fp || b.fingerprint != fp {
        return Err(contract("boxing systems were built over different graphs"));
    }
    if a.constants != b.constants {
        return Err(contract("boxing systems use different constants"));
    }
    let (s1, s2) = if a.mu <= b.mu { (a, b) } else { (b, a) };
    let cons = s1.constants;
    let d = s1.dim;
    let (mu1, mu2) = (s1.mu, s2.mu);
    let delta = cons.weight_slack;
    let r = (((mu2.ln().ln() - mu1.ln().ln()) / cons.growth.ln()).ceil().max(1.0)) as usize;

    let euclid = s1.center.iter().zip(&s2.center).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let sup = s1.center.iter().zip(&s2.center).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let limit = euclid / (2.0 * (d as f64).sqrt());
    let mut k_star = None;
    let mut k = 0;
    while cons.box_side(mu2, d, k) < limit {
        k_star = Some(k);
        k += 1;
    }
    let top = k_star.unwrap_or(0) + 1;

    // levels of the first system: own annuli below r, rebased ones after
    let mut levels1: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut bounds1: Vec<f64> = vec![cons.weight_band(mu1, 0, delta).0];
    for k in 1..r {
        let c = level_centres(g, &s1.center, cons.box_side(mu1, d, k), cons.box_side(mu1, d, k - 1), cons.subbox_side(mu1, d, k))?;
        levels1.push((k, c));
        bounds1.push(cons.weight_band(mu1, k, delta).0);
    }
    let mut side1 = cons.box_side(mu1, d, r - 1);
    for j in 0..top {
        let outer = cons.box_side(mu2, d, j);
        let c = level_centres(g, &s1.center, outer, side1, cons.subbox_side(mu2, d, j))?;
        levels1.push((r + j, c));
        bounds1.push(cons.weight_band(mu2, j, delta).0);
        side1 = outer;
    }
    let mut levels2: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut bounds2: Vec<f64> = vec![cons.weight_band(mu2, 0, delta).0];
    for j in 1..top {
        let c = level_centres(g, &s2.center, cons.box_side(mu2, d, j), cons.box_side(mu2, d, j - 1), cons.subbox_side(mu2, d, j))?;
        levels2.push((j, c));
        bounds2.push(cons.weight_band(mu2, j, delta).0);
    }
    let side2 = cons.box_side(mu2, d, top - 1);

    // shared annulus around the midpoint, large enough to hold both top boxes
    let mid: Vec<f64> = s1.center.iter().zip(&s2.center).map(|(x, y)| (x + y) / 2.0).collect();
    let formula_side = ((d as f64).sqrt() / 2.0 + 1.0).powf(1.0 / d as f64) * cons.box_side(mu2, d, top);
    let shared_side = formula_side.max(sup + side1.max(side2));
    let holes = [Cuboid::around(&s1.center, side1), Cuboid::around(&s2.center, side2)];
    let shared: Vec<usize> = tile(g, &Cuboid::around(&mid, shared_side), &holes, cons.subbox_side(mu2, d, top))?
        .into_iter()
        .filter_map(|s| s.centre)
        .collect();
    let shared_bound = cons.weight_band(mu2, top, delta).0;
    levels1.push((levels1.len() + 1, shared.clone()));
    bounds1.push(shared_bound);
    levels2.push((levels2.len() + 1, shared.clone()));
    bounds2.push(shared_bound);

    let mut report = BridgeReport {
        r,
        k_star,
        top_level: top,
        shared_side,
        path: None,
        total_length: None,
        bridge_edges: None,
        certified: false,
        failure: None,
    };
    let (Some(root1), Some(root2)) = (s1.root, s2.root) else {
        report.failure = Some("an innermost box holds no vertex".into());
        return Ok(report);
    };
    let relevel = |levels: &[(usize, Vec<usize>)]| -> Vec<(usize, Vec<usize>)> {
        levels.iter().enumerate().map(|(i, (_, c))| (i + 1, c.clone())).collect()
    };
    let p1 = walk(g, root1, &relevel(&levels1), &|i| bounds1[i]);
    let p2 = walk(g, root2, &relevel(&levels2), &|i| bounds2[i]);
    let reached_top = |p: &CentrePath, len: usize| !p.truncated && p.levels.last() == Some(&len);
    if !reached_top(&p1, levels1.len()) || !reached_top(&p2, levels2.len()) {
        report.failure = Some("a centre path stopped before the shared annulus".into());
        return Ok(report);
    }
    let (e1, e2) = (*p1.vertices.last().unwrap(), *p2.vertices.last().unwrap());
    let mut middle: Vec<usize> = Vec::new();
    let (edges, join) = if e1 == e2 {
        (0, 0.0)
    } else if g.has_edge(e1, e2) {
        (1, length_of(g, e1, e2))
    } else {
        let mut best: Option<(f64, usize)> = None;
        for &c in &shared {
            if c != e1 && c != e2 && g.has_edge(e1, c) && g.has_edge(c, e2) {
                let cand = (length_of(g, e1, c) + length_of(g, c, e2), c);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some((len, c)) => {
                middle.push(c);
                (2, len)
            }
            None => {
                report.failure = Some("no centre of the shared annulus joins the two paths".into());
                return Ok(report);
            }
        }
    };
    let mut path = p1.vertices.clone();
    path.extend(&middle);
    let mut tail = p2.vertices.clone();
    tail.reverse();
    if edges == 0 {
        tail.remove(0);
    }
    path.extend(tail);
    report.certified = p1.certified && p2.certified && middle.iter().all(|&c| g.weights[c] >= shared_bound);
    report.total_length = Some(p1.total_length + p2.total_length + join);
    report.bridge_edges = Some(edges);
    report.path = Some(path);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusRow {
    pub k: usize,
    #[serde(rename = "Dk")]
    pub box_side: f64,
    #[serde(rename = "Rk")]
    pub subbox_side: f64,
    #[serde(rename = "bk")]
    pub count: usize,
    pub f1: bool,
    #[serde(rename = "min_N")]
    pub min_count: Option<usize>,
    pub f2: Option<bool>,
    /// The greedy path failed to enter this annulus.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxingReport {
    pub mu: f64,
    pub center: Vec<f64>,
    pub constants: BoxingConstants,
    pub k_max: usize,
    pub empty_fraction: f64,
    pub annuli: Vec<AnnulusRow>,
    pub path: CentrePath,
}

pub fn boxing_report(sys: &BoxingSystem, events: &[AnnulusEvents], path: &CentrePath) -> BoxingReport {
    let annuli = sys
        .annuli
        .iter()
        .zip(events)
        .map(|(a, e)| AnnulusRow {
            k: a.k,
            box_side: a.outer_side,
            subbox_side: a.subbox_side,
            count: a.count(),
            f1: e.weights_ok,
            min_count: e.min_count,
            f2: e.neighbours_ok,
            truncated: path.stopped_before == Some(a.k),
        })
        .collect();
    BoxingReport {
        mu: sys.mu,
        center: sys.center.clone(),
        constants: sys.constants,
        k_max: sys.k_max,
        empty_fraction: sys.empty_fraction(),
        annuli,
        path: path.clone(),
    }
}
