//! Weight-dependent percolation on edge lengths.
//!
//! An edge survives when its length is at most a threshold that shrinks with
//! the weights of its endpoints. Each edge between weights `w1, w2` is kept
//! with probability at least `exp(-c (ln w1)^g - c (ln w2)^g)`.

use crate::dist::EdgeLengthDistribution;
use crate::error::{contract, parameter};
use crate::genmodel::SpatialGraph;
use crate::{Length, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PercolationRule {
    pub c: f64,
    pub gamma_tilde: f64,
    pub dist: EdgeLengthDistribution,
}

impl PercolationRule {
    /// `alpha` is the decay exponent of the graph's connection function and
    /// bounds `c` from above.
    pub fn new(c: f64, gamma_tilde: f64, alpha: f64, dist: EdgeLengthDistribution) -> Result<Self> {
        if !(c > 0.0 && c < alpha) {
            return Err(parameter(format!("percolation constant must lie in (0, alpha = {alpha}), got {c}")));
        }
        if !(gamma_tilde > 0.0 && gamma_tilde < 1.0) {
            return Err(parameter(format!("gamma_tilde must lie in (0,1), got {gamma_tilde}")));
        }
        Ok(PercolationRule { c, gamma_tilde, dist })
    }

    /// Lower bound on the retention probability of an edge.
    pub fn retention_floor(&self, w1: f64, w2: f64) -> f64 {
        (-self.c * (w1.ln().powf(self.gamma_tilde) + w2.ln().powf(self.gamma_tilde))).exp()
    }
}

/// `F^{-1}(exp(-c (ln w1)^g - c (ln w2)^g))`; infinite when the level is 1
/// and the law is unbounded.
pub fn threshold(rule: &PercolationRule, w1: f64, w2: f64) -> Length {
    let q = rule.retention_floor(w1.max(1.0), w2.max(1.0));
    rule.dist.quantile_closed(q).expect("level lies in [0, 1]")
}

/// Keeps exactly the edges with `L_e <= thr(W_u, W_v)`.
pub fn percolate(g: &SpatialGraph, rule: &PercolationRule) -> Result<SpatialGraph> {
    if !g.has_lengths() {
        return Err(contract("percolation needs edge lengths"));
    }
    match &g.provenance.length_law {
        Some(law) if *law == rule.dist => {}
        Some(law) => return Err(contract(format!("rule law {} differs from the graph's law {law}", rule.dist))),
        None => return Err(contract("graph does not record its edge-length law")),
    }
    let mut out = g.filter_edges(|u, v, len| Length::Finite(len.expect("lengths present")) <= threshold(rule, g.weights[u], g.weights[v]));
    out.provenance.params.push(("perc_c".into(), rule.c.to_string()));
    out.provenance.params.push(("perc_gamma_tilde".into(), rule.gamma_tilde.to_string()));
    out.provenance.model = format!("{}+percolated", g.provenance.model);
    Ok(out)
}

/// Weight of a vertex in the percolated graph viewed as a GIRG:
/// `w exp(-(c/alpha)(ln w)^g)`.
pub fn mapped_weight(w: f64, c: f64, alpha: f64, gamma_tilde: f64) -> f64 {
    w * (-(c / alpha) * w.ln().powf(gamma_tilde)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rule(c: f64) -> PercolationRule {
        PercolationRule::new(c, 0.5, 2.0, EdgeLengthDistribution::exponential(1.0).unwrap()).unwrap()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold(&rule(1.0), 1.0, 1.0), Length::Infinite);
        let t = threshold(&rule(1.0), E, E).finite().unwrap();
        assert!((t - 0.14541).abs() < 1e-5);
        assert!((t + (1.0 - (-2.0f64).exp()).ln()).abs() < 1e-12);
        let bounded = PercolationRule::new(1.0, 0.5, 2.0, EdgeLengthDistribution::uniform(0.0, 3.0).unwrap()).unwrap();
        assert_eq!(threshold(&bounded, 1.0, 1.0), Length::Finite(3.0));
    }

    #[test]
    fn threshold_nonincreasing_in_weight() {
        let r = rule(0.7);
        for &w2 in &[1.0, 3.0, 50.0] {
            let mut last = Length::Infinite;
            for k in 0..60 {
                let w1 = 1.2f64.powi(k);
                let t = threshold(&r, w1, w2);
                assert!(t <= last);
                last = t;
            }
        }
    }

    #[test]
    fn mapped_weight_examples() {
        assert_eq!(mapped_weight(1.0, 1.0, 2.0, 0.5), 1.0);
        assert!((mapped_weight(E, 2.0, 2.0, 0.5) - 1.0).abs() < 1e-15);
        for k in 0..50 {
            let w = E * 1.5f64.powi(k);
            assert!(mapped_weight(w, 1.0, 2.0, 0.5).ln() >= 0.5 * w.ln() - 1e-12);
        }
    }

    #[test]
    fn rejects_c_at_or_above_alpha() {
        let law = EdgeLengthDistribution::exponential(1.0).unwrap();
        assert!(PercolationRule::new(2.0, 0.5, 2.0, law.clone()).is_err());
        assert!(PercolationRule::new(1.0, 1.0, 2.0, law).is_err());
    }
}
