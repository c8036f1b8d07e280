//! Hyperbolic random graphs and their embedding as a one-dimensional GIRG.

use std::f64::consts::PI;

use super::graph::{HyperbolicCoords, Provenance, SpatialGraph};
use super::kernel::EdgeKernel;
use super::sampler::{sample_edges, SamplerOptions};
use crate::error::parameter;
use crate::rng::{self, tag, KeyedStream};
use crate::spatial::{Metric, PointSet, Window};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrgParams {
    pub alpha_h: f64,
    pub c_h: f64,
    /// Temperature; `None` selects the threshold variant.
    pub t_h: Option<f64>,
    pub n: usize,
}

impl HrgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_h > 0.5 && self.alpha_h < 1.0) {
            return Err(parameter(format!("alpha_H must lie in (1/2, 1), got {}", self.alpha_h)));
        }
        if let Some(t) = self.t_h {
            if !(t > 0.0) {
                return Err(parameter(format!("temperature must be positive, got {t}")));
            }
        }
        if self.n < 2 {
            return Err(parameter("HRG needs n >= 2"));
        }
        if !self.c_h.is_finite() {
            return Err(parameter("C_H must be finite"));
        }
        Ok(())
    }

    /// Disk radius `2 ln n + C_H`.
    pub fn radius(&self) -> f64 {
        2.0 * (self.n as f64).ln() + self.c_h
    }

    pub fn tau(&self) -> f64 {
        2.0 * self.alpha_h + 1.0
    }
}

/// `cosh` of the hyperbolic distance, in a cancellation-free form.
fn cosh_distance(u: (f64, f64), v: (f64, f64)) -> f64 {
    let half = 0.5 * (u.0 - v.0);
    let s = half.sin();
    (u.1 - v.1).cosh() + 2.0 * u.1.sinh() * v.1.sinh() * s * s
}

/// Hyperbolic distance between `(phi, r)` pairs.
pub fn hyperbolic_distance(u: (f64, f64), v: (f64, f64)) -> f64 {
    cosh_distance(u, v).max(1.0).acosh()
}

/// Logistic connection probability at hyperbolic distance `dist`.
pub fn hrg_prob(dist: f64, radius: f64, temperature: f64) -> f64 {
    1.0 / (1.0 + ((dist - radius) / (2.0 * temperature)).exp())
}

struct HrgKernel<'a> {
    phi: &'a [f64],
    r: &'a [f64],
    weights: &'a [f64],
    radius: f64,
    cosh_radius: f64,
    temperature: Option<f64>,
    n: f64,
    c_h: f64,
}

impl HrgKernel<'_> {
    fn prob_from_cosh(&self, c: f64) -> f64 {
        match self.temperature {
            Some(t) => hrg_prob(c.max(1.0).acosh(), self.radius, t),
            None => {
                if c <= self.cosh_radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl EdgeKernel for HrgKernel<'_> {
    fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    fn prob(&self, u: usize, v: usize, _dist: f64) -> f64 {
        self.prob_from_cosh(cosh_distance((self.phi[u], self.r[u]), (self.phi[v], self.r[v])))
    }

    fn envelope(&self, dist_min: f64, wi: (f64, f64), wj: (f64, f64)) -> f64 {
        // the angular gap is at most pi and cosh d >= 1 + 2 sinh r sinh r' sin^2(gap/2)
        let gap = dist_min.min(PI);
        let ri = (self.radius - 2.0 * wi.1.ln()).max(0.0);
        let rj = (self.radius - 2.0 * wj.1.ln()).max(0.0);
        let s = (0.5 * gap).sin();
        let lower = 1.0 + 2.0 * ri.sinh() * rj.sinh() * s * s;
        self.prob_from_cosh(lower)
    }

    fn reach(&self, wi_max: f64, wj_max: f64) -> f64 {
        // angular scale of the limit kernel, 2 pi e^{-C/2} w w / (pi n)
        2.0 * (-self.c_h / 2.0).exp() * wi_max * wj_max / self.n
    }
}

/// Samples `n` points of the hyperbolic disk and connects them.
///
/// The point set holds the angles on the circle `[0, 2 pi)` and the weights
/// are the induced `exp((R - r)/2)`; the radii are kept in the provenance.
pub fn generate_hrg(params: &HrgParams, seed: u64, opts: SamplerOptions) -> Result<SpatialGraph> {
    params.validate()?;
    let n = params.n;
    let radius = params.radius();
    let alpha = params.alpha_h;
    let norm = (alpha * radius).cosh() - 1.0;
    let mut phi = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    for v in 0..n {
        let mut s = KeyedStream::new(seed, tag::POSITION, &[v as u64]);
        phi.push(2.0 * PI * rng::unit(rand::RngCore::next_u64(&mut s)));
        let u = s.open01();
        r.push(((1.0 + u * norm).acosh() / alpha).min(radius));
    }
    let weights: Vec<f64> = r.iter().map(|&rv| ((radius - rv) / 2.0).exp().max(1.0)).collect();
    let points = PointSet::new(1, Window { lo: 0.0, side: 2.0 * PI }, Metric::Torus, phi.clone())?;
    let keys: Vec<u64> = (0..n as u64).collect();
    let kernel = HrgKernel {
        phi: &phi,
        r: &r,
        weights: &weights,
        radius,
        cosh_radius: radius.cosh(),
        temperature: params.t_h,
        n: n as f64,
        c_h: params.c_h,
    };
    let edges = sample_edges(&points, &keys, &kernel, seed, opts)?;
    let mut prov = Provenance::new(if params.t_h.is_some() { "hrg" } else { "hrg-threshold" }, seed)
        .param("alpha_h", params.alpha_h)
        .param("c_h", params.c_h)
        .param("n", n);
    if let Some(t) = params.t_h {
        prov = prov.param("t_h", t);
    }
    prov.hyperbolic = Some(HyperbolicCoords { phi, r, radius });
    SpatialGraph::from_edges(points, weights, keys, &edges, prov)
}

/// Maps an HRG to positions `(phi - pi)/(2 pi)` on the unit torus with
/// weights `exp((R - r)/2)`; the edge set is unchanged.
pub fn hrg_to_girg(hrg: &SpatialGraph) -> Result<SpatialGraph> {
    let coords = hrg
        .provenance
        .hyperbolic
        .as_ref()
        .ok_or_else(|| crate::error::contract("graph carries no hyperbolic coordinates"))?;
    let x: Vec<f64> = coords.phi.iter().map(|&p| map_angle(p)).collect();
    let weights = coords.r.iter().map(|&rv| map_radius(rv, coords.radius)).collect();
    let points = PointSet::new(1, Window::unit(), Metric::Torus, x)?;
    let mut g = hrg.with_geometry(points, weights);
    g.provenance.model = format!("{}-as-girg", hrg.provenance.model);
    Ok(g)
}

/// Angle in `[0, 2 pi]` to position in `[-1/2, 1/2]`.
pub fn map_angle(phi: f64) -> f64 {
    (phi - PI) / (2.0 * PI)
}

/// Radius to weight `exp((R - r)/2)`.
pub fn map_radius(r: f64, radius: f64) -> f64 {
    ((radius - r) / 2.0).exp()
}

/// Limit connection function of the mapped HRG; `t_h = None` gives the
/// threshold limit.
pub fn hrg_limit_h(delta: f64, w1: f64, w2: f64, c_h: f64, t_h: Option<f64>) -> f64 {
    let scaled = (c_h / 2.0).exp() * delta.abs() * PI / (w1 * w2);
    match t_h {
        Some(t) => {
            if delta == 0.0 {
                1.0
            } else {
                1.0 / (1.0 + scaled.powf(1.0 / t))
            }
        }
        None => {
            if delta.abs() <= (-c_h / 2.0).exp() * w1 * w2 / PI {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Connection probability of the finite HRG for mapped positions `Delta / n`
/// apart and the given weights.
pub fn hrg_finite_prob(delta: f64, w1: f64, w2: f64, params: &HrgParams) -> f64 {
    let radius = params.radius();
    let c = cosh_distance(finite_coords(0.0, w1, radius), finite_coords(delta / params.n as f64, w2, radius));
    match params.t_h {
        Some(t) => hrg_prob(c.max(1.0).acosh(), radius, t),
        None => {
            if c <= radius.cosh() {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn finite_coords(x: f64, w: f64, radius: f64) -> (f64, f64) {
    (2.0 * PI * x + PI, radius - 2.0 * w.ln())
}

/// `beta(alpha)` of the temperature admissibility window.
pub fn admissibility_exponent(alpha: f64) -> f64 {
    if alpha < 2.0 {
        1.0 / (3.0 * (2.0 - alpha) + 2.0)
    } else {
        1.0 / alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub n: usize,
    pub samples: usize,
    /// Largest relative error (temperature) or the largest band half-width
    /// divided by `w1 w2` (threshold).
    pub max_error: f64,
    /// `max_error * n`.
    pub constant: f64,
    pub passed: bool,
}

/// Largest admissible `n * error` for a pass.
pub const LIMIT_CONSTANT: f64 = 50.0;

/// Compares the finite HRG connection rule with its limit on the
/// admissibility window, using a deterministic corner grid plus random
/// points drawn log-uniformly.
pub fn verify_limit_convergence(params: &HrgParams, samples: usize, seed: u64) -> Result<LimitReport> {
    params.validate()?;
    let n = params.n as f64;
    let (delta_range, w_max) = match params.t_h {
        Some(t) => {
            let beta = admissibility_exponent(1.0 / t);
            ((n.powf(-beta), n.powf(beta)), n.powf(beta))
        }
        None => ((n.powf(-0.5), n.powf(0.5)), n.powf(0.5)),
    };
    let mut triples = Vec::new();
    let grid = [0.0, 0.5, 1.0];
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                triples.push((a, b, c));
            }
        }
    }
    let mut stream = KeyedStream::new(seed, tag::PROBE, &[params.n as u64]);
    for _ in 0..samples {
        triples.push((stream.open01(), stream.open01(), stream.open01()));
    }
    let log_interp = |lo: f64, hi: f64, t: f64| (lo.ln() + t * (hi.ln() - lo.ln())).exp();
    let mut max_error: f64 = 0.0;
    let mut used = 0;
    for (a, b, c) in triples {
        let w1 = log_interp(1.0, w_max, b);
        let w2 = log_interp(1.0, w_max, c);
        match params.t_h {
            Some(t) => {
                let delta = log_interp(delta_range.0, delta_range.1, a);
                let h = hrg_limit_h(delta, w1, w2, params.c_h, Some(t));
                let p = hrg_finite_prob(delta, w1, w2, params);
                max_error = max_error.max((p - h).abs() / h);
                used += 1;
            }
            None => {
                let boundary = (-params.c_h / 2.0).exp() * w1 * w2 / PI;
                if boundary < delta_range.0 || boundary > delta_range.1 {
                    continue;
                }
                let exact = threshold_boundary(w1, w2, params);
                max_error = max_error.max((exact - boundary).abs() / (w1 * w2));
                used += 1;
            }
        }
    }
    let constant = max_error * n;
    Ok(LimitReport { n: params.n, samples: used, max_error, constant, passed: constant <= LIMIT_CONSTANT })
}

/// Separation `Delta` at which the finite threshold HRG switches from edge to
/// no edge, found by bisection.
pub fn threshold_boundary(w1: f64, w2: f64, params: &HrgParams) -> f64 {
    let radius = params.radius();
    let target = radius.cosh();
    let n = params.n as f64;
    let f = |delta: f64| cosh_distance(finite_coords(0.0, w1, radius), finite_coords(delta / n, w2, radius)) - target;
    let (mut lo, mut hi) = (0.0, n / 2.0);
    if f(lo) > 0.0 {
        return 0.0;
    }
    if f(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}
