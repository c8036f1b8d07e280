//! Tail exponents, empirical distribution functions and two-sample distances.

use serde::Serialize;

use crate::error::domain;
use crate::{Error, Result};

/// Hill estimate of the tail index from the `k_top` largest values:
/// the inverse mean of `ln(x_(i) / x_(k_top + 1))`.
pub fn hill_estimator(values: &[f64], k_top: usize) -> Result<f64> {
    if k_top < 2 {
        return Err(domain(format!("Hill estimator needs k_top >= 2, got {k_top}")));
    }
    if k_top >= values.len() {
        return Err(domain(format!("k_top = {k_top} must be below the sample size {}", values.len())));
    }
    if values.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(domain("Hill estimator needs positive finite values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(hill_sorted(&sorted, k_top)?)
}

fn hill_sorted(desc: &[f64], k: usize) -> Result<f64> {
    let base = desc[k].ln();
    let mean = desc[..k].iter().map(|x| x.ln() - base).sum::<f64>() / k as f64;
    if mean <= 0.0 {
        return Err(Error::Numeric(format!("degenerate sample: top {k} values are all equal")));
    }
    Ok(1.0 / mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plateau {
    /// Middle `k_top` of the stable window.
    pub k_top: usize,
    pub estimate: f64,
    /// Relative spread of the estimates in the window.
    pub spread: f64,
}

/// Smallest `k_top` on the plateau grid.
pub const PLATEAU_MIN_K: usize = 256;
/// Ratio between consecutive grid points.
pub const PLATEAU_RATIO: f64 = 1.5;
/// Number of consecutive estimates that must agree.
pub const PLATEAU_WINDOW: usize = 4;
/// Largest relative spread `(max - min)/median` accepted.
pub const PLATEAU_SPREAD: f64 = 0.1;

/// Hill estimates on the grid `k = 256 * 1.5^j` up to a tenth of the
/// sample; returns the window of four consecutive estimates with the
/// smallest relative spread, if that spread is at most 0.1.
pub fn hill_plateau(values: &[f64]) -> Result<Option<Plateau>> {
    if values.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(domain("Hill estimator needs positive finite values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut grid = Vec::new();
    let mut k = PLATEAU_MIN_K as f64;
    while (k as usize) <= values.len() / 10 {
        let kk = k as usize;
        if grid.last() != Some(&kk) {
            grid.push(kk);
        }
        k *= PLATEAU_RATIO;
    }
    let estimates: Vec<Option<f64>> = grid.iter().map(|&k| hill_sorted(&sorted, k).ok()).collect();
    let mut best: Option<Plateau> = None;
    for start in 0..grid.len().saturating_sub(PLATEAU_WINDOW - 1) {
        let window: Option<Vec<f64>> = estimates[start..start + PLATEAU_WINDOW].iter().copied().collect();
        let Some(mut w) = window else { continue };
        w.sort_by(f64::total_cmp);
        let med = (w[1] + w[2]) / 2.0;
        let spread = (w[3] - w[0]) / med;
        if spread <= PLATEAU_SPREAD && best.is_none_or(|b| spread < b.spread) {
            best = Some(Plateau { k_top: grid[start + PLATEAU_WINDOW / 2], estimate: med, spread });
        }
    }
    Ok(best)
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(domain("KS statistic needs two nonempty samples"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// Jump points `(x, F(x))` of the empirical distribution function.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = f,
            _ => out.push((*x, f)),
        }
    }
    out
}

/// CSV `sample,x,F` of several labelled empirical distribution functions.
pub fn ecdf_csv(samples: &[(String, Vec<f64>)]) -> String {
    let mut s = String::from("sample,x,F\n");
    for (label, values) in samples {
        for (x, f) in ecdf(values) {
            s.push_str(&format!("{label},{x},{f}\n"));
        }
    }
    s
}

/// Median, averaging the two middle values of an even sample.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// Least-squares slope of `ln P(X >= x)` against `x` over the distinct
/// observed values; `None` with fewer than two distinct values.
pub fn log_tail_slope(values: &[f64]) -> Option<f64> {
    let n = values.len() as f64;
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut pts = Vec::new();
    let mut i = 0;
    while i < v.len() {
        pts.push((v[i], ((v.len() - i) as f64 / n).ln()));
        let x = v[i];
        while i < v.len() && v[i] == x {
            i += 1;
        }
    }
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
