//! Connection functions and the kernel interface used by the edge sampler.

use crate::error::parameter;
use crate::Result;

/// Which member of the admissible family of connection functions to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GChoice {
    Canonical,
    LowerBound,
    UpperBound,
    Threshold,
}

impl GChoice {
    pub fn name(self) -> &'static str {
        match self {
            GChoice::Canonical => "canonical",
            GChoice::LowerBound => "lower-bound",
            GChoice::UpperBound => "upper-bound",
            GChoice::Threshold => "threshold",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(GChoice::Canonical),
            "lower-bound" | "lower" => Ok(GChoice::LowerBound),
            "upper-bound" | "upper" => Ok(GChoice::UpperBound),
            "threshold" => Ok(GChoice::Threshold),
            other => Err(parameter(format!("unknown connection function {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GirgParams {
    pub d: usize,
    pub tau: f64,
    pub alpha: f64,
    pub a1_under: f64,
    pub a1_over: f64,
    pub a2: f64,
    pub gamma: f64,
    pub c1: f64,
    pub c_upper: f64,
    pub g_choice: GChoice,
}

impl GirgParams {
    pub fn new(d: usize, tau: f64, alpha: f64) -> Self {
        GirgParams {
            d,
            tau,
            alpha,
            a1_under: 1.0,
            a1_over: 1.0,
            a2: 1.0,
            gamma: 0.5,
            c1: 1.0,
            c_upper: 1.0,
            g_choice: GChoice::Canonical,
        }
    }

    pub fn with_choice(mut self, g: GChoice) -> Self {
        self.g_choice = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(parameter("dimension must be at least 1"));
        }
        if !(self.tau > 1.0) {
            return Err(parameter(format!("tau must exceed 1, got {}", self.tau)));
        }
        if !(self.alpha > 1.0) {
            return Err(parameter(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(parameter(format!("gamma must lie in (0,1), got {}", self.gamma)));
        }
        for (name, v) in [("a1_under", self.a1_under), ("a1_over", self.a1_over), ("a2", self.a2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.c1 > 0.0 && self.c1 <= self.c_upper) {
            return Err(parameter(format!("need 0 < c1 <= C1, got c1={} C1={}", self.c1, self.c_upper)));
        }
        Ok(())
    }

    /// Warnings for parameters outside the headline regime.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !(self.tau > 2.0 && self.tau < 3.0) {
            w.push(format!("tau = {} lies outside (2,3)", self.tau));
        }
        w
    }

    /// `r^d`.
    #[inline]
    fn volume_of(&self, r: f64) -> f64 {
        match self.d {
            1 => r,
            2 => r * r,
            3 => r * r * r,
            d => r.powi(d as i32),
        }
    }

    /// `1 ^ a (w1 w2 / r^d)^alpha`.
    #[inline]
    fn power_term(&self, a: f64, r: f64, w1: f64, w2: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        let x = w1 * w2 / self.volume_of(r);
        // alpha > 1, so a x >= 1 with x >= 1 already saturates
        if x >= 1.0 && a * x >= 1.0 {
            return 1.0;
        }
        (a * x.powf(self.alpha)).min(1.0)
    }

    fn weight_penalty(&self, w1: f64, w2: f64) -> f64 {
        (-self.a2 * (w1.ln().powf(self.gamma) + w2.ln().powf(self.gamma))).exp()
    }

    /// Upper envelope `g_over` at blown-up distance `r`.
    pub fn g_over(&self, r: f64, w1: f64, w2: f64) -> f64 {
        self.power_term(self.a1_over, r, w1, w2)
    }

    /// Lower envelope `g_under` at blown-up distance `r`.
    pub fn g_under(&self, r: f64, w1: f64, w2: f64) -> f64 {
        self.weight_penalty(w1, w2).min(self.power_term(self.a1_under, r, w1, w2))
    }

    /// Threshold indicators `(g_under_inf, g_over_inf)` at blown-up distance `r`.
    pub fn threshold_pair(&self, r: f64, w1: f64, w2: f64) -> (f64, f64) {
        let radius = |a: f64| a * (w1 * w2).powf(1.0 / self.d as f64);
        let upper = if r <= radius(self.a1_over) { 1.0 } else { 0.0 };
        let lower = if r <= radius(self.a1_under) { self.weight_penalty(w1, w2) } else { 0.0 };
        (lower, upper)
    }

    /// Connection probability at blown-up distance `r`.
    pub fn prob_at(&self, r: f64, w1: f64, w2: f64) -> f64 {
        match self.g_choice {
            GChoice::Canonical => self.g_over(r, w1, w2),
            GChoice::LowerBound => (self.c1 * self.g_under(r, w1, w2)).min(1.0),
            GChoice::UpperBound => (self.c_upper * self.g_over(r, w1, w2)).min(1.0),
            GChoice::Threshold => self.threshold_pair(r, w1, w2).1,
        }
    }

    /// `coin <= prob_at(r, w1, w2)`, skipping the power for coins above
    /// the linear bound `a w1 w2 / r^d`.
    #[inline]
    pub fn accepts_at(&self, r: f64, w1: f64, w2: f64, coin: f64) -> bool {
        let factor = match self.g_choice {
            GChoice::Canonical => 1.0,
            GChoice::UpperBound => self.c_upper,
            _ => return coin <= self.prob_at(r, w1, w2),
        };
        if r > 0.0 {
            let x = w1 * w2 / self.volume_of(r);
            // x^alpha <= x below 1
            if x < 1.0 && coin > factor * self.a1_over * x {
                return false;
            }
        }
        coin <= self.prob_at(r, w1, w2)
    }

    /// Upper bound of [`prob_at`](Self::prob_at) over distances `>= r_min`
    /// and weights in the given ranges.
    pub fn envelope_at(&self, r_min: f64, w1: (f64, f64), w2: (f64, f64)) -> f64 {
        match self.g_choice {
            GChoice::LowerBound => {
                let penalty = self.weight_penalty(w1.0, w2.0);
                let power = self.power_term(self.a1_under, r_min, w1.1, w2.1);
                (self.c1 * penalty.min(power)).min(1.0)
            }
            _ => self.prob_at(r_min, w1.1, w2.1),
        }
    }

    /// Blown-up distance beyond which the connection probability is below 1.
    pub fn reach_at(&self, w1: f64, w2: f64) -> f64 {
        let a = match self.g_choice {
            GChoice::LowerBound => self.a1_under,
            _ => self.a1_over,
        };
        match self.g_choice {
            GChoice::Threshold => a * (w1 * w2).powf(1.0 / self.d as f64),
            _ => a.powf(1.0 / (self.alpha * self.d as f64)) * (w1 * w2).powf(1.0 / self.d as f64),
        }
    }
}

/// Connection probability of two vertices whose positions in `[-1/2,1/2]^d`
/// differ by `delta`, in a graph on `n` vertices.
pub fn connection_prob(params: &GirgParams, delta: &[f64], w1: f64, w2: f64, n: usize) -> f64 {
    let norm = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = (n as f64).powf(1.0 / params.d as f64) * norm;
    params.prob_at(r, w1, w2)
}

/// Pairwise connection rule consumed by the edge sampler.
///
/// `envelope` must bound `prob` from above for every pair whose distance is
/// at least `dist_min` and whose weights lie in the given ranges.
pub trait EdgeKernel: Sync {
    fn weight(&self, v: usize) -> f64;
    fn prob(&self, u: usize, v: usize, dist: f64) -> f64;
    /// Whether a pair with uniform `coin` is an edge, i.e. `coin <= prob`.
    fn accepts(&self, u: usize, v: usize, dist: f64, coin: f64) -> bool {
        coin <= self.prob(u, v, dist)
    }
    fn envelope(&self, dist_min: f64, wi: (f64, f64), wj: (f64, f64)) -> f64;
    /// Distance (in point coordinates) beyond which probabilities are small.
    fn reach(&self, wi_max: f64, wj_max: f64) -> f64;
}

/// GIRG kernel in point coordinates scaled by `scale` to blown-up distance.
pub struct GirgKernel<'a> {
    pub params: &'a GirgParams,
    pub weights: &'a [f64],
    pub scale: f64,
}

impl EdgeKernel for GirgKernel<'_> {
    fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    fn prob(&self, u: usize, v: usize, dist: f64) -> f64 {
        self.params.prob_at(dist * self.scale, self.weights[u], self.weights[v])
    }

    fn accepts(&self, u: usize, v: usize, dist: f64, coin: f64) -> bool {
        self.params.accepts_at(dist * self.scale, self.weights[u], self.weights[v], coin)
    }

    fn envelope(&self, dist_min: f64, wi: (f64, f64), wj: (f64, f64)) -> f64 {
        self.params.envelope_at(dist_min * self.scale, wi, wj)
    }

    fn reach(&self, wi_max: f64, wj_max: f64) -> f64 {
        self.params.reach_at(wi_max, wj_max) / self.scale
    }
}

/// Scale-free percolation on the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfpParams {
    pub d: usize,
    pub alpha_tilde: f64,
    pub tau_tilde: f64,
    pub lambda: f64,
    pub m: usize,
}

impl SfpParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(parameter("dimension must be at least 1"));
        }
        if !(self.alpha_tilde > self.d as f64) {
            return Err(parameter(format!("alpha_tilde must exceed d, got {}", self.alpha_tilde)));
        }
        if !(self.tau_tilde > 1.0) {
            return Err(parameter(format!("tau_tilde must exceed 1, got {}", self.tau_tilde)));
        }
        if !(self.lambda > 0.0) {
            return Err(parameter(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.m < 1 {
            return Err(parameter("window radius must be at least 1"));
        }
        Ok(())
    }

    /// `alpha_tilde (tau_tilde - 1) / d`.
    pub fn gamma_sfp(&self) -> f64 {
        self.alpha_tilde * (self.tau_tilde - 1.0) / self.d as f64
    }

    /// True when the degree exponent lies in the explosive regime.
    pub fn headline_regime(&self) -> bool {
        let g = self.gamma_sfp();
        g > 1.0 && g < 2.0
    }

    pub fn prob(&self, dist: f64, w1: f64, w2: f64) -> f64 {
        if dist <= 1.0 {
            1.0
        } else {
            -(-self.lambda * dist.powf(-self.alpha_tilde) * w1 * w2).exp_m1()
        }
    }
}

pub struct SfpKernel<'a> {
    pub params: &'a SfpParams,
    pub weights: &'a [f64],
}

impl EdgeKernel for SfpKernel<'_> {
    fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    fn prob(&self, u: usize, v: usize, dist: f64) -> f64 {
        self.params.prob(dist, self.weights[u], self.weights[v])
    }

    fn envelope(&self, dist_min: f64, wi: (f64, f64), wj: (f64, f64)) -> f64 {
        self.params.prob(dist_min, wi.1, wj.1)
    }

    fn reach(&self, wi_max: f64, wj_max: f64) -> f64 {
        (self.params.lambda * wi_max * wj_max).powf(1.0 / self.params.alpha_tilde).max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_saturates_at_one() {
        let mut p = GirgParams::new(1, 2.5, 2.0);
        p.a1_over = 1.0;
        // n |delta| = 4 with n = 4, |delta| = 1
        assert_eq!(connection_prob(&p, &[1.0], 2.0, 2.0, 4), 1.0);
        assert_eq!(connection_prob(&p, &[0.0], 1.0, 1.0, 10), 1.0);
    }

    #[test]
    fn canonical_decays_monotonically() {
        let p = GirgParams::new(2, 2.5, 1.5);
        let mut last = 1.0;
        for k in 0..40 {
            let r = 1.5f64.powi(k);
            let q = p.prob_at(r, 1.0, 1.0);
            assert!(q <= last);
            last = q;
        }
        assert!(last < 1e-10);
    }

    #[test]
    fn threshold_indicator() {
        let p = GirgParams::new(1, 2.5, 2.0).with_choice(GChoice::Threshold);
        assert_eq!(connection_prob(&p, &[2.0], 1.0, 1.0, 1), 0.0);
        assert_eq!(connection_prob(&p, &[1.0], 1.0, 1.0, 1), 1.0);
    }

    #[test]
    fn sfp_probability_example() {
        let s = SfpParams { d: 1, alpha_tilde: 2.0, tau_tilde: 2.0, lambda: 1.0, m: 3 };
        assert!((s.prob(2.0, 1.0, 1.0) - (1.0 - (-0.25f64).exp())).abs() < 1e-15);
        assert!((s.prob(2.0, 1.0, 1.0) - 0.221199).abs() < 1e-6);
        assert_eq!(s.prob(1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn lower_envelope_dominates_over_weight_ranges() {
        let p = GirgParams::new(2, 2.5, 1.5).with_choice(GChoice::LowerBound);
        let env = p.envelope_at(3.0, (2.0, 4.0), (8.0, 16.0));
        for &w1 in &[2.0, 3.0, 3.99] {
            for &w2 in &[8.0, 12.0, 15.99] {
                for &r in &[3.0, 5.0, 100.0] {
                    assert!(p.prob_at(r, w1, w2) <= env + 1e-15);
                }
            }
        }
    }

    #[test]
    fn validation_rejects_bad_constants() {
        let mut p = GirgParams::new(2, 2.5, 1.5);
        p.c1 = 2.0;
        assert!(p.validate().is_err());
        let mut p = GirgParams::new(2, 2.5, 1.0);
        assert!(p.validate().is_err());
        p.alpha = 2.0;
        p.gamma = 1.0;
        assert!(p.validate().is_err());
    }
}
