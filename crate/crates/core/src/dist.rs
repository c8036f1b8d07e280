//! Edge-length laws, vertex-weight laws and the explosion criterion.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter};
use crate::{Error, Length, Result};

/// Step quantile table: `q_1 < q_2 < ... < q_m = 1` with values `v_1 <= ... <= v_m`.
///
/// The CDF is the right-continuous step function jumping to `q_i` at `v_i`.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    points: Vec<(f64, f64)>,
    source: Option<String>,
}

impl PartialEq for QuantileTable {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl QuantileTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(parameter("quantile table is empty"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(parameter("quantile table levels must be strictly increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(parameter("quantile table values must be nondecreasing"));
            }
        }
        let (q_first, v_first) = points[0];
        if !(q_first > 0.0) || v_first < 0.0 || !v_first.is_finite() {
            return Err(parameter("quantile table needs q > 0 and finite values >= 0"));
        }
        if points.last().map(|p| p.0) != Some(1.0) {
            return Err(parameter("quantile table must end at level q = 1"));
        }
        Ok(QuantileTable { points, source: None })
    }

    /// Reads lines `"q value"`; blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(q), Some(v), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("{}:{}: expected \"q value\"", path.display(), lineno + 1)));
            };
            let q: f64 = q.parse().map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            let v: f64 = v.parse().map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            points.push((q, v));
        }
        let mut table = QuantileTable::new(points)?;
        table.source = Some(path.display().to_string());
        Ok(table)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn cdf(&self, t: f64) -> f64 {
        // largest level whose value is <= t
        let idx = self.points.partition_point(|p| p.1 <= t);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].0
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        let idx = self.points.partition_point(|p| p.0 < q);
        self.points[idx.min(self.points.len() - 1)].1
    }
}

/// A nonnegative edge-length law.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeLengthDistribution {
    Deterministic(f64),
    Exponential { rate: f64 },
    Uniform { a: f64, b: f64 },
    Shifted { base: Box<EdgeLengthDistribution>, offset: f64 },
    Table(QuantileTable),
}

impl EdgeLengthDistribution {
    pub fn deterministic(v: f64) -> Result<Self> {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(parameter(format!("deterministic length must be finite and >= 0, got {v}")));
        }
        Ok(EdgeLengthDistribution::Deterministic(v))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(parameter(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(EdgeLengthDistribution::Exponential { rate })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(parameter(format!("uniform law needs 0 <= a < b, got ({a}, {b})")));
        }
        Ok(EdgeLengthDistribution::Uniform { a, b })
    }

    pub fn shifted(base: EdgeLengthDistribution, offset: f64) -> Result<Self> {
        if !(offset >= 0.0 && offset.is_finite()) {
            return Err(parameter(format!("shift offset must be finite and >= 0, got {offset}")));
        }
        Ok(EdgeLengthDistribution::Shifted { base: Box::new(base), offset })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        use EdgeLengthDistribution::*;
        match self {
            Deterministic(v) => {
                if t >= *v {
                    1.0
                } else {
                    0.0
                }
            }
            Exponential { rate } => {
                if t < 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
            Uniform { a, b } => ((t - a) / (b - a)).clamp(0.0, 1.0),
            Shifted { base, offset } => base.cdf(t - offset),
            Table(table) => table.cdf(t),
        }
    }

    /// Generalised inverse `inf{t : F(t) >= q}` for `q` in `(0, 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!("quantile level must lie in (0,1), got {q}")));
        }
        Ok(self.quantile_unchecked(q))
    }

    /// Quantile on `(0, 1]`; level 1 gives the essential supremum.
    pub fn quantile_closed(&self, q: f64) -> Result<Length> {
        if q >= 1.0 && q.is_finite() {
            return Ok(self.supremum());
        }
        if q == 0.0 {
            return Ok(Length::Finite(self.infimum()));
        }
        self.quantile(q).map(Length::Finite)
    }

    fn quantile_unchecked(&self, q: f64) -> f64 {
        use EdgeLengthDistribution::*;
        match self {
            Deterministic(v) => *v,
            Exponential { rate } => -(-q).ln_1p() / rate,
            Uniform { a, b } => a + q * (b - a),
            Shifted { base, offset } => offset + base.quantile_unchecked(q),
            Table(table) => table.quantile(q),
        }
    }

    /// Left end of the support, i.e. the limit of the quantile at `0+`.
    pub fn infimum(&self) -> f64 {
        use EdgeLengthDistribution::*;
        match self {
            Deterministic(v) => *v,
            Exponential { .. } => 0.0,
            Uniform { a, .. } => *a,
            Shifted { base, offset } => offset + base.infimum(),
            Table(table) => table.points[0].1,
        }
    }

    /// Essential supremum of the law.
    pub fn supremum(&self) -> Length {
        use EdgeLengthDistribution::*;
        match self {
            Deterministic(v) => Length::Finite(*v),
            Exponential { .. } => Length::Infinite,
            Uniform { b, .. } => Length::Finite(*b),
            Shifted { base, offset } => match base.supremum() {
                Length::Finite(s) => Length::Finite(s + offset),
                Length::Infinite => Length::Infinite,
            },
            Table(table) => Length::Finite(table.points.last().map(|p| p.1).unwrap_or(0.0)),
        }
    }

    pub fn has_atom_at_zero(&self) -> bool {
        self.cdf(0.0) > 0.0
    }

    /// Length for an open uniform `u`.
    pub fn from_uniform(&self, u: f64) -> f64 {
        self.quantile_unchecked(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let u = if u == 0.0 { f64::MIN_POSITIVE } else { u };
        self.from_uniform(u)
    }

    /// Parses the config grammar; `table:` paths are resolved against `base_dir`.
    pub fn parse_with_base(s: &str, base_dir: Option<&Path>) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("length law {s:?}: {msg}"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| bad(&e.to_string()));
        let (head, rest) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        match head.trim() {
            "det" => Self::deterministic(num(rest)?),
            "exp" => Self::exponential(num(rest)?),
            "unif" => {
                let (a, b) = rest.split_once(':').ok_or_else(|| bad("expected unif:a:b"))?;
                Self::uniform(num(a)?, num(b)?)
            }
            "shift" => {
                let (offset, inner) = rest.split_once(':').ok_or_else(|| bad("expected shift:offset:<inner>"))?;
                Self::shifted(Self::parse_with_base(inner, base_dir)?, num(offset)?)
            }
            "table" => {
                let path = Path::new(rest.trim());
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.to_path_buf(),
                };
                let mut table = QuantileTable::from_file(&full)?;
                table.source = Some(rest.trim().to_string());
                Ok(EdgeLengthDistribution::Table(table))
            }
            other => Err(bad(&format!("unknown kind {other:?}"))),
        }
    }
}

impl FromStr for EdgeLengthDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_base(s, None)
    }
}

impl fmt::Display for EdgeLengthDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use EdgeLengthDistribution::*;
        match self {
            Deterministic(v) => write!(f, "det:{v}"),
            Exponential { rate } => write!(f, "exp:{rate}"),
            Uniform { a, b } => write!(f, "unif:{a}:{b}"),
            Shifted { base, offset } => write!(f, "shift:{offset}:{base}"),
            Table(t) => write!(f, "table:{}", t.source.as_deref().unwrap_or("<inline>")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Explosive,
    Conservative,
    Inconclusive,
}

/// Outcome of the explosion criterion for one edge-length law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionReport {
    pub partial_sum: f64,
    pub terms_used: usize,
    pub terms: Vec<f64>,
    /// Integral of the quantile of `exp(-exp(y))` over `[k_max, 40]`.
    pub tail_bound_estimate: f64,
    /// Integral of the quantile of `exp(-exp(y))` over `[1, 40]`.
    pub integral: f64,
    pub verdict: Verdict,
    pub atom_at_zero: bool,
    pub notes: Vec<String>,
}

/// Threshold below which the last term counts as vanished.
pub const VANISHING_TERM: f64 = 1e-12;
/// Lower bound on all terms for a conservative verdict.
pub const CONSERVATIVE_FLOOR: f64 = 1e-3;
/// Tolerance on the tail integral for an explosive verdict.
pub const TAIL_TOLERANCE: f64 = 1e-6;
const QUADRATURE_UPPER: f64 = 40.0;
const QUADRATURE_TOL: f64 = 1e-9;
const DECAY_WINDOW: usize = 5;

/// Quantile of `exp(-exp(y))`; an underflowing level uses the left end of the support.
pub fn doubly_exponential_quantile(dist: &EdgeLengthDistribution, y: f64) -> f64 {
    let q = (-y.exp()).exp();
    if q > 0.0 && q < 1.0 {
        dist.quantile_unchecked(q)
    } else if q >= 1.0 {
        dist.supremum().to_f64()
    } else {
        dist.infimum()
    }
}

/// Evaluates the explosion sum over `k = 1..=k_max` and classifies the law.
pub fn explosion_sum(dist: &EdgeLengthDistribution, k_max: usize) -> Result<CriterionReport> {
    explosion_sum_for(dist, k_max, None)
}

/// As [`explosion_sum`], flagging weight exponents outside `(2, 3)`.
pub fn explosion_sum_for(dist: &EdgeLengthDistribution, k_max: usize, tau: Option<f64>) -> Result<CriterionReport> {
    if k_max < 1 {
        return Err(domain("k_max must be at least 1"));
    }
    let terms: Vec<f64> = (1..=k_max).map(|k| doubly_exponential_quantile(dist, k as f64)).collect();
    let partial_sum: f64 = terms.iter().sum();
    let f = |y: f64| doubly_exponential_quantile(dist, y);
    let integral = adaptive_simpson(&f, 1.0, QUADRATURE_UPPER, QUADRATURE_TOL);
    let tail_bound_estimate = if (k_max as f64) < QUADRATURE_UPPER {
        adaptive_simpson(&f, k_max as f64, QUADRATURE_UPPER, QUADRATURE_TOL)
    } else {
        0.0
    };

    let last = *terms.last().expect("k_max >= 1");
    let window = DECAY_WINDOW.min(terms.len() - 1);
    let decayed = window > 0
        && terms[terms.len() - 1 - window..]
            .windows(2)
            .all(|w| w[1] == 0.0 || w[1] <= 0.5 * w[0]);
    let min_term = terms.iter().copied().fold(f64::INFINITY, f64::min);
    let verdict = if last < VANISHING_TERM && decayed && tail_bound_estimate < TAIL_TOLERANCE {
        Verdict::Explosive
    } else if min_term >= CONSERVATIVE_FLOOR {
        Verdict::Conservative
    } else {
        Verdict::Inconclusive
    };

    let mut notes = Vec::new();
    let atom_at_zero = dist.has_atom_at_zero();
    if atom_at_zero {
        notes.push("law has an atom at zero".to_string());
    }
    if let Some(tau) = tau {
        if !(tau > 2.0 && tau < 3.0) {
            notes.push("criterion applies only for tau in (2,3)".to_string());
        }
    }
    Ok(CriterionReport {
        partial_sum,
        terms_used: k_max,
        terms,
        tail_bound_estimate,
        integral,
        verdict,
        atom_at_zero,
        notes,
    })
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    // split first so that narrow features near the left end are not missed
    let pieces = 8;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            recurse(f, lo, hi, fa, fm, fb, simpson(fa, fm, fb, lo, hi), tol / pieces as f64, 48)
        })
        .sum()
}

/// Slowly varying part of a vertex-weight law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowlyVarying {
    Constant,
    /// Weights `exp((R - r)/2)` induced by the radial law of a hyperbolic random graph.
    HrgInduced { alpha_h: f64, c_h: f64, n: usize },
}

/// Power-law vertex weights with support `[1, cap]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexWeightModel {
    pub tau: f64,
    pub slowly_varying: SlowlyVarying,
    /// Optional upper truncation; the law is conditioned on `W <= cap`.
    pub cap: Option<f64>,
}

impl VertexWeightModel {
    pub fn pareto(tau: f64) -> Result<Self> {
        if !(tau > 1.0 && tau.is_finite()) {
            return Err(parameter(format!("weight exponent must exceed 1, got {tau}")));
        }
        Ok(VertexWeightModel { tau, slowly_varying: SlowlyVarying::Constant, cap: None })
    }

    pub fn truncated_pareto(tau: f64, cap: f64) -> Result<Self> {
        let mut m = Self::pareto(tau)?;
        if !(cap > 1.0) {
            return Err(parameter(format!("weight cap must exceed 1, got {cap}")));
        }
        m.cap = Some(cap);
        Ok(m)
    }

    pub fn hrg(alpha_h: f64, c_h: f64, n: usize) -> Result<Self> {
        if !(alpha_h > 0.5 && alpha_h < 1.0) {
            return Err(parameter(format!("alpha_H must lie in (1/2, 1), got {alpha_h}")));
        }
        if n < 2 {
            return Err(parameter("HRG needs n >= 2"));
        }
        Ok(VertexWeightModel {
            tau: 2.0 * alpha_h + 1.0,
            slowly_varying: SlowlyVarying::HrgInduced { alpha_h, c_h, n },
            cap: None,
        })
    }

    /// Disk radius `R = 2 ln n + C` of the HRG-induced law.
    fn hrg_radius(&self) -> Option<(f64, f64)> {
        match self.slowly_varying {
            SlowlyVarying::HrgInduced { alpha_h, c_h, n } => Some((alpha_h, 2.0 * (n as f64).ln() + c_h)),
            SlowlyVarying::Constant => None,
        }
    }

    /// Largest attainable weight.
    pub fn max_weight(&self) -> f64 {
        match self.hrg_radius() {
            Some((_, r)) => (r / 2.0).exp(),
            None => self.cap.unwrap_or(f64::INFINITY),
        }
    }

    /// `P(W > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x < 1.0 {
            return 1.0;
        }
        match self.hrg_radius() {
            Some((alpha, big_r)) => {
                let rad = big_r - 2.0 * x.ln();
                if rad <= 0.0 {
                    0.0
                } else {
                    ((alpha * rad).cosh() - 1.0) / ((alpha * big_r).cosh() - 1.0)
                }
            }
            None => {
                let s = self.tau - 1.0;
                match self.cap {
                    Some(cap) if x >= cap => 0.0,
                    Some(cap) => (x.powf(-s) - cap.powf(-s)) / (1.0 - cap.powf(-s)),
                    None => x.powf(-s),
                }
            }
        }
    }

    /// Inverse-CDF transform of a uniform `u` in `(0, 1]`.
    pub fn from_uniform(&self, u: f64) -> f64 {
        match self.hrg_radius() {
            Some((alpha, big_r)) => {
                // radial CDF (cosh(alpha r) - 1)/(cosh(alpha R) - 1) evaluated at u
                let r = (1.0 + u * ((alpha * big_r).cosh() - 1.0)).acosh() / alpha;
                ((big_r - r) / 2.0).exp().max(1.0)
            }
            None => {
                let s = self.tau - 1.0;
                match self.cap {
                    Some(cap) => {
                        let tail = cap.powf(-s);
                        (tail + u * (1.0 - tail)).powf(-1.0 / s)
                    }
                    None => u.powf(-1.0 / s),
                }
            }
        }
    }

    pub fn sample_weight<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // (0, 1]
        let u = 1.0 - rng.random::<f64>();
        self.from_uniform(u)
    }

    /// `E[W^p]` for the untruncated Pareto law, infinite when `p >= tau - 1`.
    pub fn pareto_moment(&self, p: f64) -> f64 {
        let s = self.tau - 1.0;
        match self.cap {
            None if p >= s => f64::INFINITY,
            None => s / (s - p),
            Some(cap) => {
                let norm = 1.0 - cap.powf(-s);
                if (p - s).abs() < 1e-12 {
                    s * cap.ln() / norm
                } else {
                    s * (cap.powf(p - s) - 1.0) / ((p - s) * norm)
                }
            }
        }
    }
}

/// Draws `n` i.i.d. weights keyed per vertex.
pub fn keyed_weights(model: &VertexWeightModel, seed: u64, keys: impl Iterator<Item = u64>) -> Vec<f64> {
    keys.map(|k| {
        let u = 1.0 - crate::rng::unit(crate::rng::hash(seed, crate::rng::tag::WEIGHT, &[k]));
        model.from_uniform(u)
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> EdgeLengthDistribution {
        EdgeLengthDistribution::exponential(1.0).unwrap()
    }

    #[test]
    fn quantile_examples() {
        let det = EdgeLengthDistribution::deterministic(1.0).unwrap();
        assert_eq!(det.quantile(0.5).unwrap(), 1.0);
        let q = 1.0 - (-2.0f64).exp();
        assert!((exp1().quantile(q).unwrap() - 2.0).abs() < 1e-12);
        let unif = EdgeLengthDistribution::uniform(0.0, 2.0).unwrap();
        assert!((unif.quantile(0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_rejects_levels_outside_open_interval() {
        for q in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(exp1().quantile(q), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn table_is_step_right_continuous() {
        let t = QuantileTable::new(vec![(0.25, 1.0), (0.5, 2.0), (1.0, 5.0)]).unwrap();
        let law = EdgeLengthDistribution::Table(t);
        assert_eq!(law.cdf(0.99), 0.0);
        assert_eq!(law.cdf(1.0), 0.25);
        assert_eq!(law.cdf(4.0), 0.5);
        assert_eq!(law.cdf(5.0), 1.0);
        assert_eq!(law.quantile(0.25).unwrap(), 1.0);
        assert_eq!(law.quantile(0.2500001).unwrap(), 2.0);
        assert_eq!(law.quantile(0.75).unwrap(), 5.0);
    }

    #[test]
    fn table_requires_terminal_level_one() {
        assert!(QuantileTable::new(vec![(0.5, 1.0)]).is_err());
        assert!(QuantileTable::new(vec![(0.5, 1.0), (0.5, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn grammar_round_trips() {
        for s in ["det:1", "exp:2.5", "unif:0:2", "shift:1:exp:1", "shift:0.5:shift:1:unif:0:1"] {
            let law: EdgeLengthDistribution = s.parse().unwrap();
            assert_eq!(law.to_string(), s);
        }
        assert!("gamma:1".parse::<EdgeLengthDistribution>().is_err());
        assert!("exp:-1".parse::<EdgeLengthDistribution>().is_err());
    }

    #[test]
    fn deterministic_sum_is_conservative() {
        let r = explosion_sum(&EdgeLengthDistribution::deterministic(1.0).unwrap(), 10).unwrap();
        assert_eq!(r.partial_sum, 10.0);
        assert_eq!(r.verdict, Verdict::Conservative);
    }

    #[test]
    fn shifted_exponential_is_conservative() {
        let law = EdgeLengthDistribution::shifted(exp1(), 1.0).unwrap();
        let r = explosion_sum(&law, 10).unwrap();
        assert_eq!(r.verdict, Verdict::Conservative);
        assert!(r.terms.iter().all(|&t| t >= 1.0));
    }

    #[test]
    fn exponential_sum_matches_series_oracle() {
        // -ln(1 - x) = sum_j x^j / j, evaluated independently of ln_1p
        let oracle: f64 = (1..=10)
            .map(|k| {
                let x = (-(k as f64).exp()).exp();
                let mut s = 0.0;
                let mut p = x;
                for j in 1..60 {
                    s += p / j as f64;
                    p *= x;
                }
                s
            })
            .sum();
        let r = explosion_sum(&exp1(), 10).unwrap();
        assert!((r.partial_sum - oracle).abs() < 1e-15);
        assert!((r.partial_sum - 0.0689).abs() < 1e-3);
        assert_eq!(r.verdict, Verdict::Explosive);
    }

    #[test]
    fn small_k_max_is_inconclusive_for_exponential() {
        let r = explosion_sum(&exp1(), 2).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(explosion_sum(&exp1(), 0).is_err());
    }

    #[test]
    fn tau_flag_and_atom_flag() {
        let r = explosion_sum_for(&exp1(), 10, Some(3.5)).unwrap();
        assert!(r.notes.iter().any(|n| n.contains("tau in (2,3)")));
        let det0 = EdgeLengthDistribution::deterministic(0.0).unwrap();
        assert!(explosion_sum(&det0, 10).unwrap().atom_at_zero);
    }

    #[test]
    fn simpson_integrates_polynomial_and_exponential() {
        let v = adaptive_simpson(&|x: f64| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-10);
        let v = adaptive_simpson(&|x: f64| (-x).exp(), 0.0, 40.0, 1e-12);
        assert!((v - (1.0 - (-40.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn pareto_inverse_cdf_examples() {
        let m = VertexWeightModel::pareto(2.5).unwrap();
        assert_eq!(m.from_uniform(1.0), 1.0);
        // numeric root of x^{-1.5} = 0.25 by bisection
        let (mut lo, mut hi) = (1.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.powf(-1.5) > 0.25 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((m.from_uniform(0.25) - lo).abs() < 1e-10);
        assert!((m.from_uniform(0.25) - 2.5198).abs() < 1e-4);
        let m3 = VertexWeightModel::pareto(3.0).unwrap();
        assert!((m3.from_uniform(0.01) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_pareto_respects_cap() {
        let m = VertexWeightModel::truncated_pareto(2.5, 100.0).unwrap();
        assert!((m.from_uniform(1.0) - 1.0).abs() < 1e-12);
        assert!((m.from_uniform(1e-300) - 100.0).abs() < 1e-6);
        assert!((m.tail(m.from_uniform(0.3)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn hrg_weight_tail_inverts() {
        let m = VertexWeightModel::hrg(0.75, 0.0, 1000).unwrap();
        assert!((m.tau - 2.5).abs() < 1e-12);
        for u in [0.9, 0.5, 0.1, 1e-4] {
            let w = m.from_uniform(u);
            assert!(w >= 1.0);
            assert!((m.tail(w) - u).abs() < 1e-9, "u={u} tail={}", m.tail(w));
        }
    }
}
