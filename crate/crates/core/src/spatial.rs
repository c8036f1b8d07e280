//! Point sets, the blow-up map, the intensity coupling and a cell-grid index.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand_distr::{Distribution, Poisson};

use crate::error::{contract, domain};
use crate::rng::{self, tag, KeyedStream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Plain Euclidean distance inside the window.
    Box,
    /// Euclidean distance with every axis wrapped around the window side.
    Torus,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Box => "box",
            Metric::Torus => "torus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(Metric::Box),
            "torus" => Ok(Metric::Torus),
            other => Err(Error::Parse(format!("unknown metric {other:?}"))),
        }
    }
}

/// Axis-aligned cube `[lo, lo + side]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub side: f64,
}

impl Window {
    /// The cube of the given side centred at the origin.
    pub fn centred(side: f64) -> Self {
        Window { lo: -side / 2.0, side }
    }

    pub fn unit() -> Self {
        Window::centred(1.0)
    }

    pub fn volume(&self, d: usize) -> f64 {
        self.side.powi(d as i32)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.lo + self.side
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    d: usize,
    window: Window,
    metric: Metric,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(d: usize, window: Window, metric: Metric, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        if coords.len() % d != 0 {
            return Err(contract("coordinate count is not a multiple of the dimension"));
        }
        if let Some(x) = coords.iter().find(|&&x| !window.contains(x)) {
            return Err(contract(format!("coordinate {x} outside window [{}, {}]", window.lo, window.lo + window.side)));
        }
        Ok(PointSet { d, window, metric, coords })
    }

    pub fn empty(d: usize, window: Window, metric: Metric) -> Self {
        PointSet { d, window, metric, coords: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Per-axis separation under the metric.
    #[inline]
    pub fn axis_gap(&self, a: f64, b: f64) -> f64 {
        let g = (a - b).abs();
        match self.metric {
            Metric::Box => g,
            Metric::Torus => {
                let g = g % self.window.side;
                g.min(self.window.side - g)
            }
        }
    }

    pub fn distance_between(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(&a, &b)| {
                let g = self.axis_gap(a, b);
                g * g
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance_between(self.point(i), self.point(j))
    }

    /// Sub-point-set with the given ids, renumbered in order.
    pub fn select(&self, ids: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(ids.len() * self.d);
        for &i in ids {
            coords.extend_from_slice(self.point(i));
        }
        PointSet { d: self.d, window: self.window, metric: self.metric, coords }
    }

    /// Same coordinates in a different metric.
    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn write_pts<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "PTS v1 d={} side={} metric={} lo={}", self.d, self.window.side, self.metric.name(), self.window.lo)?;
        let mut line = String::new();
        for i in 0..self.len() {
            line.clear();
            write!(line, "{i}").unwrap();
            for x in self.point(i) {
                write!(line, " {x}").unwrap();
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_pts<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty point file".into()))??;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("PTS") || fields.next() != Some("v1") {
            return Err(Error::Parse(format!("bad point header {header:?}")));
        }
        let (mut d, mut side, mut metric, mut lo) = (None, None, Metric::Box, None);
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| Error::Parse(format!("bad header field {f:?}")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|e| Error::Parse(format!("{k}: {e}")));
            match k {
                "d" => d = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("d: {e}")))?),
                "side" => side = Some(num(v)?),
                "metric" => metric = Metric::parse(v)?,
                "lo" => lo = Some(num(v)?),
                _ => return Err(Error::Parse(format!("unknown header field {k:?}"))),
            }
        }
        let d = d.ok_or_else(|| Error::Parse("missing d".into()))?;
        let side = side.ok_or_else(|| Error::Parse("missing side".into()))?;
        let window = Window { lo: lo.unwrap_or(-side / 2.0), side };
        let mut coords = Vec::new();
        for (expected, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let id: usize = it.next().unwrap().parse().map_err(|e| Error::Parse(format!("id: {e}")))?;
            if id != expected {
                return Err(Error::Parse(format!("ids must be dense, expected {expected} got {id}")));
            }
            let before = coords.len();
            for x in it {
                coords.push(x.parse::<f64>().map_err(|e| Error::Parse(format!("coordinate: {e}")))?);
            }
            if coords.len() - before != d {
                return Err(Error::Parse(format!("point {id} has wrong dimension")));
            }
        }
        PointSet::new(d, window, metric, coords)
    }
}

/// `sqrt(4 ln n / n)`.
pub fn xi(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(domain(format!("xi needs n >= 3, got {n}")));
    }
    let n = n as f64;
    Ok((4.0 * n.ln() / n).sqrt())
}

/// Uniform coordinate in the window for point `key`, axis `axis`.
#[inline]
pub(crate) fn keyed_coordinate(seed: u64, key: u64, axis: usize, window: Window) -> f64 {
    let u = rng::unit(rng::hash(seed, tag::POSITION, &[key, axis as u64]));
    (window.lo + u * window.side).min(window.lo + window.side)
}

/// `n` i.i.d. uniform points in `[-1/2, 1/2]^d`, keyed per point id.
pub fn sample_binomial_points(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if n == 0 || d == 0 {
        return Err(domain("binomial point set needs n >= 1 and d >= 1"));
    }
    let window = Window::unit();
    let coords = (0..n * d).map(|i| keyed_coordinate(seed, (i / d) as u64, i % d, window)).collect();
    Ok(PointSet { d, window, metric: Metric::Box, coords })
}

/// Poisson point process of the given intensity on `window`.
pub fn sample_poisson_points(intensity: f64, d: usize, window: Window, metric: Metric, seed: u64) -> Result<PointSet> {
    if !(intensity >= 0.0) || d == 0 {
        return Err(domain("Poisson point set needs intensity >= 0 and d >= 1"));
    }
    let mean = intensity * window.volume(d);
    let count = poisson_count(mean, seed)?;
    let coords = (0..count * d).map(|i| keyed_coordinate(seed, (i / d) as u64, i % d, window)).collect();
    Ok(PointSet { d, window, metric, coords })
}

fn poisson_count(mean: f64, seed: u64) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    if mean > 1e9 {
        return Err(Error::ResourceCap(format!("expected point count {mean:.3e} exceeds 1e9")));
    }
    let mut stream = KeyedStream::new(seed, tag::COUNT, &[]);
    let law = Poisson::new(mean).map_err(|e| domain(e.to_string()))?;
    Ok(law.sample(&mut stream) as usize)
}

/// Scales `[-1/2, 1/2]^d` by `n^{1/d}`.
pub fn blow_up(ps: &PointSet, n: usize) -> Result<PointSet> {
    if ps.window != Window::unit() {
        return Err(contract("blow-up expects the window [-1/2, 1/2]^d"));
    }
    let factor = (n as f64).powf(1.0 / ps.d as f64);
    Ok(PointSet {
        d: ps.d,
        window: Window::centred(factor),
        metric: ps.metric,
        coords: ps.coords.iter().map(|x| x * factor).collect(),
    })
}

/// A Poisson base set at intensity `1 + xi_3` whose thinnings realise every
/// intensity in `(0, 1 + xi_3]` at once.
#[derive(Debug, Clone)]
pub struct CoupledEnsemble {
    pub n: usize,
    pub seed: u64,
    pub base: PointSet,
    /// Retention uniform `U_v` per base point.
    pub retention: Vec<f64>,
    /// Vertex set of the blown-up graph with exactly `n` vertices; `None`
    /// when the Poisson counts do not straddle `n`.
    pub bgirg: Option<Vec<usize>>,
}

impl CoupledEnsemble {
    pub fn base_intensity() -> f64 {
        1.0 + xi(3).expect("3 >= 3")
    }

    /// Ids whose retention uniform lies below `lambda / (1 + xi_3)`, sorted.
    pub fn retained(&self, lambda: f64) -> Vec<usize> {
        let cut = lambda / Self::base_intensity();
        (0..self.retention.len()).filter(|&v| self.retention[v] <= cut).collect()
    }

    pub fn straddles(&self) -> bool {
        self.bgirg.is_some()
    }

    /// Edge uniform shared by every graph built on this ensemble.
    pub fn edge_uniform(&self, u: usize, v: usize) -> f64 {
        rng::pair_uniform(self.seed, tag::EDGE_COIN, u as u64, v as u64)
    }

    /// Edge-length uniform shared by every graph built on this ensemble.
    pub fn edge_length_uniform(&self, u: usize, v: usize) -> f64 {
        rng::pair_uniform(self.seed, tag::EDGE_LENGTH, u as u64, v as u64)
    }
}

/// Samples the coupled Poisson ensemble on `[-n^{1/d}/2, n^{1/d}/2]^d`.
pub fn sample_coupled_ppp(n: usize, d: usize, seed: u64) -> Result<CoupledEnsemble> {
    let xi_n = xi(n)?;
    let side = (n as f64).powf(1.0 / d as f64);
    let base = sample_poisson_points(CoupledEnsemble::base_intensity(), d, Window::centred(side), Metric::Box, seed)?;
    let retention = (0..base.len()).map(|v| rng::keyed_uniform(seed, tag::RETENTION, &[v as u64])).collect();
    let mut ens = CoupledEnsemble { n, seed, base, retention, bgirg: None };
    let low = ens.retained(1.0 - xi_n);
    let high = ens.retained(1.0 + xi_n);
    if low.len() <= n && n <= high.len() {
        let mut extra: Vec<usize> = {
            let mut low_iter = low.iter().peekable();
            high.iter()
                .copied()
                .filter(|v| {
                    while low_iter.next_if(|&&w| w < *v).is_some() {}
                    low_iter.peek().map_or(true, |&&w| w != *v)
                })
                .collect()
        };
        extra.sort_by(|&a, &b| {
            let ka = rng::hash(seed, tag::SUBSET, &[a as u64]);
            let kb = rng::hash(seed, tag::SUBSET, &[b as u64]);
            ka.cmp(&kb).then(a.cmp(&b))
        });
        let mut vertices = low;
        vertices.extend_from_slice(&extra[..n - vertices.len()]);
        vertices.sort_unstable();
        ens.bgirg = Some(vertices);
    }
    Ok(ens)
}

/// Uniform grid of cells over the window with per-cell id lists.
#[derive(Debug, Clone)]
pub struct CellIndex {
    side: f64,
    cells_per_axis: i64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl CellIndex {
    pub fn build(ps: &PointSet, side: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(domain("cell side must be positive"));
        }
        let cells_per_axis = ((ps.window.side / side).ceil() as i64).max(1);
        let mut index = CellIndex { side, cells_per_axis, cells: HashMap::new() };
        for i in 0..ps.len() {
            let key = index.cell_of(ps, ps.point(i));
            index.cells.entry(key).or_default().push(i);
        }
        Ok(index)
    }

    pub fn cell_side(&self) -> f64 {
        self.side
    }

    pub fn cell_of(&self, ps: &PointSet, x: &[f64]) -> Vec<i64> {
        x.iter()
            .map(|&c| (((c - ps.window.lo) / self.side).floor() as i64).clamp(0, self.cells_per_axis - 1))
            .collect()
    }

    pub fn occupancy(&self) -> impl Iterator<Item = (&Vec<i64>, &Vec<usize>)> {
        self.cells.iter()
    }

    /// Ids at metric distance at most `r` from `center`, sorted.
    pub fn neighbors_within(&self, ps: &PointSet, center: &[f64], r: f64) -> Vec<usize> {
        let d = ps.d;
        let home = self.cell_of(ps, center);
        let reach = (r / self.side).ceil() as i64 + 1;
        let torus = ps.metric == Metric::Torus;
        let n = self.cells_per_axis;
        let ranges: Vec<(i64, i64)> = home
            .iter()
            .map(|&h| {
                if torus && 2 * reach + 1 >= n {
                    (0, n - 1)
                } else if torus {
                    (h - reach, h + reach)
                } else {
                    ((h - reach).max(0), (h + reach).min(n - 1))
                }
            })
            .collect();
        let mut out = Vec::new();
        let mut cursor: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut key = vec![0i64; d];
        'outer: loop {
            for (k, &c) in key.iter_mut().zip(&cursor) {
                *k = if torus { c.rem_euclid(n) } else { c };
            }
            if let Some(ids) = self.cells.get(&key) {
                out.extend(ids.iter().copied().filter(|&i| ps.distance_between(ps.point(i), center) <= r));
            }
            for axis in 0..d {
                cursor[axis] += 1;
                if cursor[axis] <= ranges[axis].1 {
                    continue 'outer;
                }
                cursor[axis] = ranges[axis].0;
            }
            break;
        }
        out.sort_unstable();
        out
    }
}
