//! Text graph format `SGX v1`.
//!
//! ```text
//! SGX v1
//! model girg
//! seed 42
//! params d=2 tau=2.5 ...
//! window d=2 lo=-0.5 side=1 metric=box
//! length_law exp:1
//! hradius 14.2
//! v <id> <x_1> ... <x_d> <weight>
//! k <id> <key>
//! h <id> <phi> <r>
//! e <u> <v> [length]
//! ```
//! Floats use the shortest round-trip representation, so reading a written
//! graph gives back an identical value.

use std::io::{BufRead, Write};

use super::graph::{HyperbolicCoords, Provenance, SpatialGraph};
use crate::dist::EdgeLengthDistribution;
use crate::spatial::{Metric, PointSet, Window};
use crate::{Error, Result};

pub fn write_sgx<W: Write>(g: &SpatialGraph, mut out: W) -> Result<()> {
    let p = &g.provenance;
    writeln!(out, "SGX v1")?;
    writeln!(out, "model {}", p.model)?;
    writeln!(out, "seed {}", p.seed)?;
    let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "params {}", params.join(" "))?;
    let w = g.points.window();
    writeln!(out, "window d={} lo={} side={} metric={}", g.points.dim(), w.lo, w.side, g.points.metric().name())?;
    match &p.length_law {
        Some(law) => writeln!(out, "length_law {law}")?,
        None => writeln!(out, "length_law none")?,
    }
    if let Some(h) = &p.hyperbolic {
        writeln!(out, "hradius {}", h.radius)?;
    }
    for v in 0..g.num_vertices() {
        write!(out, "v {v}")?;
        for x in g.points.point(v) {
            write!(out, " {x}")?;
        }
        writeln!(out, " {}", g.weights[v])?;
    }
    for v in 0..g.num_vertices() {
        if g.keys[v] != v as u64 {
            writeln!(out, "k {v} {}", g.keys[v])?;
        }
    }
    if let Some(h) = &p.hyperbolic {
        for v in 0..g.num_vertices() {
            writeln!(out, "h {v} {} {}", h.phi[v], h.r[v])?;
        }
    }
    for (u, v, len) in g.edges() {
        match len {
            Some(l) => writeln!(out, "e {u} {v} {l}")?,
            None => writeln!(out, "e {u} {v}")?,
        }
    }
    Ok(())
}

fn perr(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("SGX line {line}: {msg}"))
}

pub fn read_sgx<R: BufRead>(input: R) -> Result<SpatialGraph> {
    let mut prov = Provenance::default();
    let mut window: Option<(usize, Window, Metric)> = None;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut keys: Vec<u64> = Vec::new();
    let mut hradius = None;
    let mut phi = Vec::new();
    let mut radii = Vec::new();
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    let mut saw_header = false;
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "SGX v1" {
                return Err(perr(lineno, "expected header \"SGX v1\""));
            }
            saw_header = true;
            continue;
        }
        let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
        let num = |s: &str| s.parse::<f64>().map_err(|e| perr(lineno, e));
        let int = |s: &str| s.parse::<u64>().map_err(|e| perr(lineno, e));
        match tag {
            "model" => prov.model = rest.to_string(),
            "seed" => prov.seed = int(rest)?,
            "params" => {
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| perr(lineno, "expected key=value"))?;
                    prov.params.push((k.to_string(), v.to_string()));
                }
            }
            "window" => {
                let (mut d, mut lo, mut side, mut metric) = (None, None, None, Metric::Box);
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| perr(lineno, "expected key=value"))?;
                    match k {
                        "d" => d = Some(int(v)? as usize),
                        "lo" => lo = Some(num(v)?),
                        "side" => side = Some(num(v)?),
                        "metric" => metric = Metric::parse(v)?,
                        _ => return Err(perr(lineno, format!("unknown window field {k}"))),
                    }
                }
                match (d, lo, side) {
                    (Some(d), Some(lo), Some(side)) => window = Some((d, Window { lo, side }, metric)),
                    _ => return Err(perr(lineno, "window needs d, lo and side")),
                }
            }
            "length_law" => {
                if rest != "none" {
                    prov.length_law = Some(rest.parse::<EdgeLengthDistribution>()?);
                }
            }
            "hradius" => hradius = Some(num(rest)?),
            "v" => {
                let d = window.as_ref().ok_or_else(|| perr(lineno, "vertex before window"))?.0;
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() != d + 2 {
                    return Err(perr(lineno, "vertex line has wrong arity"));
                }
                if int(fields[0])? as usize != weights.len() {
                    return Err(perr(lineno, "vertex ids must be dense and ordered"));
                }
                for f in &fields[1..=d] {
                    coords.push(num(f)?);
                }
                weights.push(num(fields[d + 1])?);
                keys.push(weights.len() as u64 - 1);
            }
            "k" => {
                let mut it = rest.split_whitespace();
                let id = int(it.next().unwrap_or(""))? as usize;
                let key = int(it.next().unwrap_or(""))?;
                *keys.get_mut(id).ok_or_else(|| perr(lineno, "key for unknown vertex"))? = key;
            }
            "h" => {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() != 3 || int(fields[0])? as usize != phi.len() {
                    return Err(perr(lineno, "bad hyperbolic line"));
                }
                phi.push(num(fields[1])?);
                radii.push(num(fields[2])?);
            }
            "e" => {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() < 2 || fields.len() > 3 {
                    return Err(perr(lineno, "edge line has wrong arity"));
                }
                let (u, v) = (int(fields[0])? as u32, int(fields[1])? as u32);
                if u >= v {
                    return Err(perr(lineno, "edges must satisfy u < v"));
                }
                edges.push((u, v));
                if let Some(l) = fields.get(2) {
                    lengths.push(((u, v), num(l)?));
                }
            }
            other => return Err(perr(lineno, format!("unknown record {other:?}"))),
        }
    }
    let (d, window, metric) = window.ok_or_else(|| Error::Parse("SGX file has no window".into()))?;
    let points = PointSet::new(d, window, metric, coords)?;
    if let Some(radius) = hradius {
        if phi.len() != weights.len() {
            return Err(Error::Parse("hyperbolic coordinates missing for some vertices".into()));
        }
        prov.hyperbolic = Some(HyperbolicCoords { phi, r: radii, radius });
    }
    let mut g = SpatialGraph::from_edges(points, weights, keys, &edges, prov)?;
    if !lengths.is_empty() {
        if lengths.len() != edges.len() {
            return Err(Error::Parse("either every edge or no edge carries a length".into()));
        }
        lengths.sort_by_key(|a| a.0);
        g.set_lengths_with(|u, v| {
            let i = lengths.binary_search_by_key(&(u as u32, v as u32), |e| e.0).expect("edge present");
            lengths[i].1
        })?;
    }
    Ok(g)
}
