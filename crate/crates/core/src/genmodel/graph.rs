use crate::dist::EdgeLengthDistribution;
use crate::error::contract;
use crate::spatial::PointSet;
use crate::Result;

/// Native hyperbolic coordinates kept alongside an HRG.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicCoords {
    pub phi: Vec<f64>,
    pub r: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub model: String,
    pub params: Vec<(String, String)>,
    pub seed: u64,
    pub length_law: Option<EdgeLengthDistribution>,
    pub hyperbolic: Option<HyperbolicCoords>,
}

impl Provenance {
    pub fn new(model: &str, seed: u64) -> Self {
        Provenance { model: model.to_string(), seed, ..Default::default() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Immutable simple graph on a point set, stored as sorted adjacency lists.
///
/// `keys[v]` is the identity of vertex `v` in the randomness of its
/// generator; graphs restricted from a common base keep the base keys, so
/// edge coins and edge lengths agree between them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGraph {
    pub points: PointSet,
    pub weights: Vec<f64>,
    pub keys: Vec<u64>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    lengths: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl SpatialGraph {
    /// Builds the graph from an undirected edge list; duplicates are merged.
    pub fn from_edges(points: PointSet, weights: Vec<f64>, keys: Vec<u64>, edges: &[(u32, u32)], provenance: Provenance) -> Result<Self> {
        let n = points.len();
        if weights.len() != n || keys.len() != n {
            return Err(contract("weights and keys must have one entry per point"));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w >= 1.0)) {
            return Err(contract(format!("weights must be >= 1, found {w}")));
        }
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u == v {
                return Err(contract(format!("self-loop at {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(contract(format!("edge ({u},{v}) out of range")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        // sort and dedupe each list, then compact
        let mut compact = Vec::with_capacity(neighbors.len());
        let mut new_offsets = vec![0usize; n + 1];
        for i in 0..n {
            let list = &mut neighbors[offsets[i]..offsets[i + 1]];
            list.sort_unstable();
            let mut last = None;
            for &x in list.iter() {
                if last != Some(x) {
                    compact.push(x);
                    last = Some(x);
                }
            }
            new_offsets[i + 1] = compact.len();
        }
        Ok(SpatialGraph { points, weights, keys, offsets: new_offsets, neighbors: compact, lengths: None, provenance })
    }

    pub fn num_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Neighbours with the length of the connecting edge.
    pub fn weighted_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        let lengths = self.lengths.as_deref();
        range.map(move |slot| (self.neighbors[slot] as usize, lengths.map_or(1.0, |l| l[slot])))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn edge_length(&self, u: usize, v: usize) -> Option<f64> {
        let slot = self.offsets[u] + self.neighbors(u).binary_search(&(v as u32)).ok()?;
        Some(self.lengths.as_ref().map_or(1.0, |l| l[slot]))
    }

    pub fn has_lengths(&self) -> bool {
        self.lengths.is_some()
    }

    /// Edges `(u, v, length)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Option<f64>)> + '_ {
        (0..self.num_vertices()).flat_map(move |u| {
            let range = self.offsets[u]..self.offsets[u + 1];
            range.filter_map(move |slot| {
                let v = self.neighbors[slot] as usize;
                (u < v).then(|| (u, v, self.lengths.as_ref().map(|l| l[slot])))
            })
        })
    }

    pub fn edge_list(&self) -> Vec<(u32, u32)> {
        self.edges().map(|(u, v, _)| (u as u32, v as u32)).collect()
    }

    /// Sets the length of every edge from `f(u, v)` evaluated with `u < v`.
    pub fn set_lengths_with<F: FnMut(usize, usize) -> f64>(&mut self, mut f: F) -> Result<()> {
        let mut lengths = vec![0.0; self.neighbors.len()];
        for u in 0..self.num_vertices() {
            for slot in self.offsets[u]..self.offsets[u + 1] {
                let v = self.neighbors[slot] as usize;
                if u < v {
                    let len = f(u, v);
                    if !(len >= 0.0) || len.is_infinite() {
                        return Err(contract(format!("edge ({u},{v}) has invalid length {len}")));
                    }
                    lengths[slot] = len;
                    let back = self.offsets[v] + self.neighbors(v).binary_search(&(u as u32)).expect("symmetric");
                    lengths[back] = len;
                }
            }
        }
        self.lengths = Some(lengths);
        Ok(())
    }

    pub fn clear_lengths(&mut self) {
        self.lengths = None;
        self.provenance.length_law = None;
    }

    /// Keeps the edges for which `keep(u, v, length)` holds.
    pub fn filter_edges<F: FnMut(usize, usize, Option<f64>) -> bool>(&self, mut keep: F) -> SpatialGraph {
        let mut g = self.clone();
        let mut neighbors = Vec::with_capacity(self.neighbors.len());
        let mut lengths = self.lengths.as_ref().map(|_| Vec::with_capacity(self.neighbors.len()));
        let mut offsets = vec![0usize; self.num_vertices() + 1];
        for u in 0..self.num_vertices() {
            for slot in self.offsets[u]..self.offsets[u + 1] {
                let v = self.neighbors[slot] as usize;
                let len = self.lengths.as_ref().map(|l| l[slot]);
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                if keep(a, b, len) {
                    neighbors.push(v as u32);
                    if let (Some(ls), Some(len)) = (lengths.as_mut(), len) {
                        ls.push(len);
                    }
                }
            }
            offsets[u + 1] = neighbors.len();
        }
        g.offsets = offsets;
        g.neighbors = neighbors;
        g.lengths = lengths;
        g
    }

    /// Induced subgraph on `ids` (sorted, distinct), renumbered in order.
    pub fn induced(&self, ids: &[usize]) -> SpatialGraph {
        let mut new_id = vec![u32::MAX; self.num_vertices()];
        for (i, &v) in ids.iter().enumerate() {
            new_id[v] = i as u32;
        }
        let mut offsets = vec![0usize; ids.len() + 1];
        let mut neighbors = Vec::new();
        let mut lengths = self.lengths.as_ref().map(|_| Vec::new());
        for (i, &v) in ids.iter().enumerate() {
            for slot in self.offsets[v]..self.offsets[v + 1] {
                let w = new_id[self.neighbors[slot] as usize];
                if w != u32::MAX {
                    neighbors.push(w);
                    if let (Some(ls), Some(src)) = (lengths.as_mut(), self.lengths.as_ref()) {
                        ls.push(src[slot]);
                    }
                }
            }
            offsets[i + 1] = neighbors.len();
        }
        SpatialGraph {
            points: self.points.select(ids),
            weights: ids.iter().map(|&v| self.weights[v]).collect(),
            keys: ids.iter().map(|&v| self.keys[v]).collect(),
            offsets,
            neighbors,
            lengths,
            provenance: Provenance {
                hyperbolic: self.provenance.hyperbolic.as_ref().map(|h| HyperbolicCoords {
                    phi: ids.iter().map(|&v| h.phi[v]).collect(),
                    r: ids.iter().map(|&v| h.r[v]).collect(),
                    radius: h.radius,
                }),
                ..self.provenance.clone()
            },
        }
    }

    /// Same graph with `[-1/2, 1/2]^d` positions scaled by `n^{1/d}`, where
    /// `n` is the recorded size or else the vertex count.
    pub fn blown_up(&self) -> Result<SpatialGraph> {
        let n = match self.provenance.get("n") {
            Some(s) => s.parse().map_err(|_| crate::Error::Parse(format!("recorded size {s:?} is not an integer")))?,
            None => self.num_vertices(),
        };
        let points = crate::spatial::blow_up(&self.points, n)?;
        Ok(self.with_geometry(points, self.weights.clone()))
    }

    /// Same edge set on a different point set and weights.
    pub(crate) fn with_geometry(&self, points: PointSet, weights: Vec<f64>) -> SpatialGraph {
        SpatialGraph { points, weights, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{Metric, Window};

    fn line(n: usize) -> PointSet {
        let coords = (0..n).map(|i| i as f64 / n as f64 - 0.5).collect();
        PointSet::new(1, Window::unit(), Metric::Box, coords).unwrap()
    }

    #[test]
    fn adjacency_is_symmetric_sorted_and_deduplicated() {
        let g = SpatialGraph::from_edges(line(4), vec![1.0; 4], (0..4).collect(), &[(2, 0), (0, 1), (1, 0), (3, 2)], Provenance::new("test", 0)).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.neighbors(2), &[0, 3]);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.edge_list(), vec![(0, 1), (0, 2), (2, 3)]);
    }

    #[test]
    fn rejects_self_loops_and_small_weights() {
        assert!(SpatialGraph::from_edges(line(2), vec![1.0; 2], vec![0, 1], &[(1, 1)], Provenance::default()).is_err());
        assert!(SpatialGraph::from_edges(line(2), vec![0.5, 1.0], vec![0, 1], &[], Provenance::default()).is_err());
    }

    #[test]
    fn lengths_follow_edges_through_restriction() {
        let mut g = SpatialGraph::from_edges(line(4), vec![1.0; 4], (0..4).collect(), &[(0, 1), (1, 2), (2, 3)], Provenance::default()).unwrap();
        g.set_lengths_with(|u, v| (u * 10 + v) as f64).unwrap();
        assert_eq!(g.edge_length(2, 1), Some(12.0));
        let sub = g.induced(&[1, 2, 3]);
        assert_eq!(sub.edge_length(0, 1), Some(12.0));
        assert_eq!(sub.keys, vec![1, 2, 3]);
        let f = g.filter_edges(|_, _, l| l.unwrap() > 5.0);
        assert_eq!(f.edge_list(), vec![(1, 2), (2, 3)]);
        assert_eq!(f.edge_length(3, 2), Some(23.0));
    }
}
