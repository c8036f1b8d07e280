//! Graph generators: GIRG and threshold GIRG, their Poisson extensions on
//! windows, scale-free percolation, hyperbolic random graphs.

mod graph;
mod hrg;
mod kernel;
mod sampler;
mod sgx;

pub use graph::{HyperbolicCoords, Provenance, SpatialGraph};
pub use hrg::{
    admissibility_exponent, generate_hrg, hrg_finite_prob, hrg_limit_h, hrg_prob, hrg_to_girg, hyperbolic_distance, map_angle, map_radius,
    threshold_boundary, verify_limit_convergence, HrgParams, LimitReport, LIMIT_CONSTANT,
};
pub use kernel::{connection_prob, EdgeKernel, GChoice, GirgKernel, GirgParams, SfpKernel, SfpParams};
pub use sampler::{sample_edges, SamplerMode, SamplerOptions};
pub use sgx::{read_sgx, write_sgx};

use crate::dist::{keyed_weights, VertexWeightModel};
use crate::error::parameter;
use crate::rng::{self, tag};
use crate::spatial::{sample_binomial_points, sample_poisson_points, CoupledEnsemble, Metric, PointSet, Window};
use crate::{Error, Result};

/// Largest lattice window accepted by [`generate_sfp`].
pub const SFP_MAX_VERTICES: usize = 20_000_000;

fn girg_provenance(model: &str, params: &GirgParams, seed: u64) -> Provenance {
    Provenance::new(model, seed)
        .param("d", params.d)
        .param("tau", params.tau)
        .param("alpha", params.alpha)
        .param("a1_under", params.a1_under)
        .param("a1_over", params.a1_over)
        .param("a2", params.a2)
        .param("gamma", params.gamma)
        .param("c1", params.c1)
        .param("c_upper", params.c_upper)
        .param("g", params.g_choice.name())
}

/// GIRG on `n` uniform points of `[-1/2, 1/2]^d`.
pub fn generate_girg(params: &GirgParams, n: usize, weights: &VertexWeightModel, seed: u64, opts: SamplerOptions) -> Result<SpatialGraph> {
    params.validate()?;
    if n < 2 {
        return Err(parameter("GIRG needs n >= 2"));
    }
    let points = sample_binomial_points(n, params.d, seed)?;
    let w = keyed_weights(weights, seed, 0..n as u64);
    let keys: Vec<u64> = (0..n as u64).collect();
    let kernel = GirgKernel { params, weights: &w, scale: (n as f64).powf(1.0 / params.d as f64) };
    let edges = sample_edges(&points, &keys, &kernel, seed, opts)?;
    let model = if params.g_choice == GChoice::Threshold { "girg-threshold" } else { "girg" };
    SpatialGraph::from_edges(points, w, keys, &edges, girg_provenance(model, params, seed).param("n", n))
}

/// Graph with the limit connection function on the whole base set of a
/// coupled ensemble; thinnings are obtained with [`SpatialGraph::induced`].
pub fn coupled_base_graph(ens: &CoupledEnsemble, params: &GirgParams, weights: &VertexWeightModel, opts: SamplerOptions) -> Result<SpatialGraph> {
    params.validate()?;
    base_graph(&ens.base, params, weights, ens.seed, opts)
}

fn base_graph(points: &PointSet, params: &GirgParams, weights: &VertexWeightModel, seed: u64, opts: SamplerOptions) -> Result<SpatialGraph> {
    if points.dim() != params.d {
        return Err(crate::error::contract("point set dimension differs from the model dimension"));
    }
    let n = points.len();
    let w = keyed_weights(weights, seed, 0..n as u64);
    let keys: Vec<u64> = (0..n as u64).collect();
    let kernel = GirgKernel { params, weights: &w, scale: 1.0 };
    let edges = sample_edges(points, &keys, &kernel, seed, opts)?;
    SpatialGraph::from_edges(points.clone(), w, keys, &edges, girg_provenance("egirg", params, seed))
}

/// Blown-up GIRG with exactly `n` vertices taken from a coupled ensemble.
pub fn bgirg_from_ensemble(ens: &CoupledEnsemble, params: &GirgParams, weights: &VertexWeightModel, opts: SamplerOptions) -> Result<SpatialGraph> {
    let vertices = ens
        .bgirg
        .as_ref()
        .ok_or_else(|| Error::Contract("Poisson counts do not straddle n; resample the ensemble".into()))?;
    let base = coupled_base_graph(ens, params, weights, opts)?;
    let mut g = base.induced(vertices);
    g.provenance.model = "bgirg".into();
    g.provenance.params.push(("n".into(), ens.n.to_string()));
    Ok(g)
}

/// Base intensity of the window construction; thinnings of one base set
/// realise every intensity up to this value with nested vertex and edge sets.
pub fn egirg_base_intensity(lambda: f64) -> f64 {
    CoupledEnsemble::base_intensity().max(lambda)
}

/// Extended GIRG restricted to the window `[-side/2, side/2]^d`, Poisson of
/// intensity `lambda`, edges by the limit connection function.
pub fn generate_egirg_window(
    params: &GirgParams,
    lambda: f64,
    side: f64,
    weights: &VertexWeightModel,
    seed: u64,
    opts: SamplerOptions,
) -> Result<SpatialGraph> {
    params.validate()?;
    if !(lambda > 0.0) || !(side > 0.0) {
        return Err(parameter("window graph needs lambda > 0 and side > 0"));
    }
    let base_intensity = egirg_base_intensity(lambda);
    let base = sample_poisson_points(base_intensity, params.d, Window::centred(side), Metric::Box, seed)?;
    let full = base_graph(&base, params, weights, seed, opts)?;
    let cut = lambda / base_intensity;
    let kept: Vec<usize> = (0..base.len()).filter(|&v| rng::keyed_uniform(seed, tag::RETENTION, &[v as u64]) <= cut).collect();
    let mut g = full.induced(&kept);
    g.provenance.params.push(("lambda".into(), lambda.to_string()));
    g.provenance.params.push(("side".into(), side.to_string()));
    Ok(g)
}

/// Scale-free percolation on the lattice points of `[-m, m]^d`.
pub fn generate_sfp(params: &SfpParams, weights: &VertexWeightModel, seed: u64, opts: SamplerOptions) -> Result<SpatialGraph> {
    params.validate()?;
    let width = 2 * params.m + 1;
    let count = (width as f64).powi(params.d as i32);
    if count > SFP_MAX_VERTICES as f64 {
        return Err(Error::ResourceCap(format!("lattice window has {count:.3e} vertices, cap is {SFP_MAX_VERTICES}")));
    }
    let count = count as usize;
    let m = params.m as i64;
    let mut coords = Vec::with_capacity(count * params.d);
    for i in 0..count {
        let mut rest = i;
        for _ in 0..params.d {
            coords.push((rest % width) as i64 as f64 - m as f64);
            rest /= width;
        }
    }
    let window = Window { lo: -(m as f64) - 0.5, side: width as f64 };
    let points = PointSet::new(params.d, window, Metric::Box, coords)?;
    let w = keyed_weights(weights, seed, 0..count as u64);
    let keys: Vec<u64> = (0..count as u64).collect();
    let kernel = SfpKernel { params, weights: &w };
    let edges = sample_edges(&points, &keys, &kernel, seed, opts)?;
    let prov = Provenance::new("sfp", seed)
        .param("d", params.d)
        .param("alpha_tilde", params.alpha_tilde)
        .param("tau_tilde", params.tau_tilde)
        .param("lambda", params.lambda)
        .param("m", params.m)
        .param("gamma_sfp", params.gamma_sfp());
    SpatialGraph::from_edges(points, w, keys, &edges, prov)
}

/// Connected components with the largest one singled out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component index per vertex; components are numbered by smallest member.
    pub label: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Largest component, ties broken by smallest member.
    pub giant: usize,
}

impl Components {
    pub fn members(&self, component: usize) -> Vec<usize> {
        (0..self.label.len()).filter(|&v| self.label[v] == component).collect()
    }

    pub fn giant_members(&self) -> Vec<usize> {
        self.members(self.giant)
    }

    pub fn giant_size(&self) -> usize {
        self.sizes.get(self.giant).copied().unwrap_or(0)
    }
}

pub fn giant_component(g: &SpatialGraph) -> Components {
    let n = g.num_vertices();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (u, v, _) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            // smaller id stays root so roots are component minima
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi] = lo;
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut label = vec![0; n];
    let mut sizes = Vec::new();
    for v in 0..n {
        let root = find(&mut parent, v);
        if index[root] == usize::MAX {
            index[root] = sizes.len();
            sizes.push(0);
        }
        label[v] = index[root];
        sizes[index[root]] += 1;
    }
    let giant = (0..sizes.len()).fold(0, |best, c| if sizes[c] > sizes[best] { c } else { best });
    Components { label, sizes, giant }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_graph(n: usize, edges: &[(u32, u32)]) -> SpatialGraph {
        let coords = (0..n).map(|i| i as f64 / n as f64 - 0.5).collect();
        let ps = PointSet::new(1, Window::unit(), Metric::Box, coords).unwrap();
        SpatialGraph::from_edges(ps, vec![1.0; n], (0..n as u64).collect(), edges, Provenance::default()).unwrap()
    }

    #[test]
    fn giant_of_path_plus_isolated() {
        let c = giant_component(&line_graph(4, &[(0, 1), (1, 2)]));
        assert_eq!(c.giant_members(), vec![0, 1, 2]);
    }

    #[test]
    fn giant_of_empty_graph_is_vertex_zero() {
        let c = giant_component(&line_graph(5, &[]));
        assert_eq!(c.sizes, vec![1; 5]);
        assert_eq!(c.giant_members(), vec![0]);
    }

    #[test]
    fn giant_tie_goes_to_smallest_member() {
        let c = giant_component(&line_graph(4, &[(2, 3), (0, 1)]));
        assert_eq!(c.giant_members(), vec![0, 1]);
    }

    #[test]
    fn same_seed_same_graph() {
        let p = GirgParams::new(2, 2.5, 1.95);
        let w = VertexWeightModel::pareto(2.5).unwrap();
        let a = generate_girg(&p, 3000, &w, 77, SamplerOptions::default()).unwrap();
        let b = generate_girg(&p, 3000, &w, 77, SamplerOptions::default()).unwrap();
        assert_eq!(a.edge_list(), b.edge_list());
        let c = generate_girg(&p, 3000, &w, 78, SamplerOptions::default()).unwrap();
        assert_ne!(a.edge_list(), c.edge_list());
    }

    #[test]
    fn sfp_lattice_neighbours_always_joined() {
        let p = SfpParams { d: 2, alpha_tilde: 3.0, tau_tilde: 2.5, lambda: 0.5, m: 6 };
        let w = VertexWeightModel::pareto(2.5).unwrap();
        let g = generate_sfp(&p, &w, 3, SamplerOptions::default()).unwrap();
        for u in 0..g.num_vertices() {
            for v in u + 1..g.num_vertices() {
                if (g.points.distance(u, v) - 1.0).abs() < 1e-12 {
                    assert!(g.has_edge(u, v));
                }
            }
        }
        assert_eq!(g.num_vertices(), 169);
    }

    #[test]
    fn sfp_window_cap() {
        let p = SfpParams { d: 3, alpha_tilde: 4.0, tau_tilde: 2.5, lambda: 0.5, m: 200 };
        let w = VertexWeightModel::pareto(2.5).unwrap();
        assert!(matches!(generate_sfp(&p, &w, 3, SamplerOptions::default()), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn egirg_edges_nest_across_intensity() {
        let p = GirgParams::new(2, 2.5, 1.95);
        let w = VertexWeightModel::pareto(2.5).unwrap();
        let low = generate_egirg_window(&p, 0.6, 30.0, &w, 5, SamplerOptions::default()).unwrap();
        let high = generate_egirg_window(&p, 1.4, 30.0, &w, 5, SamplerOptions::default()).unwrap();
        let high_edges: std::collections::HashSet<(u64, u64)> = high.edges().map(|(u, v, _)| (high.keys[u], high.keys[v])).collect();
        assert!(low.num_vertices() < high.num_vertices());
        assert!(low.edges().all(|(u, v, _)| high_edges.contains(&(low.keys[u], low.keys[v]))));
    }
}
