//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance` runs everything; numeric arguments select
//! criteria, e.g. `cargo test --test acceptance -- 1 5`.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use spatial_fpp::boxing::{boxing_constants, build_boxing, epsilon_k_bound, greedy_centre_path, verify_events};
use spatial_fpp::brw::{domination_check, simulate_coupled, DEFAULT_CAP};
use spatial_fpp::dist::{explosion_sum, EdgeLengthDistribution, Verdict, VertexWeightModel};
use spatial_fpp::fpp::{assign_edge_lengths, shortest_weighted, single_source};
use spatial_fpp::genmodel::{coupled_base_graph, generate_egirg_window, generate_girg, generate_hrg, GChoice, GirgParams, HrgParams, Provenance, SamplerOptions, SpatialGraph};
use spatial_fpp::harness::{hill_plateau, median, run_distance_experiment, ExperimentConfig};
use spatial_fpp::perc::{percolate, PercolationRule};
use spatial_fpp::rng::KeyedStream;
use spatial_fpp::spatial::{sample_coupled_ppp, xi, Metric, PointSet, Window};
use spatial_fpp::{Length, Result};

use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Result<Outcome>,
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria = [
        Criterion { id: 1, name: "explosion criterion", budget: Duration::from_secs(1), run: explosion_criterion },
        Criterion { id: 2, name: "coupling invariants", budget: Duration::from_secs(60), run: coupling_invariants },
        Criterion { id: 3, name: "degree tails", budget: Duration::from_secs(600), run: degree_tails },
        Criterion { id: 4, name: "percolation exponent", budget: Duration::from_secs(300), run: percolation_exponent },
        Criterion { id: 5, name: "distance engine exactness", budget: Duration::from_secs(60), run: distance_exactness },
        Criterion { id: 6, name: "explosive dichotomy", budget: Duration::from_secs(1800), run: explosive_dichotomy },
        Criterion { id: 7, name: "branching walk domination", budget: Duration::from_secs(120), run: brw_domination },
        Criterion { id: 8, name: "boxing", budget: Duration::from_secs(600), run: boxing },
        Criterion { id: 9, name: "determinism", budget: Duration::from_secs(60), run: determinism },
    ];
    let mut failed = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = if in_time { String::new() } else { format!(" over budget {:?}", c.budget) };
        println!(
            "criterion {} ({}): {} in {:.1}s{timing}; {}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn girg_params() -> GirgParams {
    GirgParams::new(2, 2.5, 1.95)
}

fn pareto() -> VertexWeightModel {
    VertexWeightModel::pareto(2.5).expect("valid exponent")
}

fn degrees(g: &SpatialGraph) -> Vec<f64> {
    (0..g.num_vertices()).map(|v| g.degree(v)).filter(|&k| k > 0).map(|k| k as f64).collect()
}

/// Plateau Hill estimate of the positive degrees.
fn degree_exponent(g: &SpatialGraph) -> Result<Option<f64>> {
    Ok(hill_plateau(&degrees(g))?.map(|p| p.estimate))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("none".into(), |v| format!("{v:.3}"))
}

// 1

/// `sum_{k=1}^{10} -ln(1 - exp(-e^k))` by the series of `-ln(1 - x)`.
fn exponential_series_oracle() -> f64 {
    (1..=10)
        .map(|k| {
            let x = (-(k as f64).exp()).exp();
            let mut sum = 0.0;
            let mut power = 1.0;
            for j in 1..200 {
                power *= x;
                sum += power / j as f64;
            }
            sum
        })
        .sum()
}

fn explosion_criterion() -> Result<Outcome> {
    let exp = EdgeLengthDistribution::exponential(1.0)?;
    let cases = [
        ("det(1)", EdgeLengthDistribution::deterministic(1.0)?, Verdict::Conservative),
        ("shift(exp,1)", EdgeLengthDistribution::shifted(exp.clone(), 1.0)?, Verdict::Conservative),
        ("exp(1)", exp.clone(), Verdict::Explosive),
        ("unif(0,1)", EdgeLengthDistribution::uniform(0.0, 1.0)?, Verdict::Explosive),
    ];
    let mut ok = true;
    let mut verdicts = Vec::new();
    for (name, law, expected) in &cases {
        let v = explosion_sum(law, 10)?.verdict;
        ok &= v == *expected;
        verdicts.push(format!("{name}={v:?}"));
    }
    let partial = explosion_sum(&exp, 10)?.partial_sum;
    let oracle = exponential_series_oracle();
    ok &= (partial - 0.0689).abs() <= 1e-3 && (partial - oracle).abs() <= 1e-3;
    Ok(Outcome::new(ok, format!("{}; exp partial sum {partial:.6}, series oracle {oracle:.6}", verdicts.join(" "))))
}

// 2

/// Whether every vertex and edge of `lower` appears in `upper`, matching
/// vertices by key.
fn nested_in(lower: &SpatialGraph, upper: &SpatialGraph) -> bool {
    let index = |k: u64| upper.keys.binary_search(&k).ok();
    let ids: Option<Vec<usize>> = lower.keys.iter().map(|&k| index(k)).collect();
    let Some(ids) = ids else { return false };
    lower.edges().all(|(u, v, _)| upper.has_edge(ids[u], ids[v]))
}

/// Failure flags `(vertex nesting, edge nesting, straddle)` for one seed.
fn coupling_seed(n: usize, seed: u64, params: &GirgParams) -> Result<(bool, bool, bool)> {
    let xi_n = xi(n)?;
    let ens = sample_coupled_ppp(n, 2, seed)?;
    let (low, mid, high) = (ens.retained(1.0 - xi_n), ens.retained(1.0), ens.retained(1.0 + xi_n));
    let contained = |a: &[usize], b: &[usize]| {
        let set: HashSet<usize> = b.iter().copied().collect();
        a.iter().all(|x| set.contains(x))
    };
    let mut nested = contained(&low, &mid) && contained(&mid, &high);
    if let Some(v) = &ens.bgirg {
        nested &= v.len() == n && contained(&low, v) && contained(v, &high);
    }
    // thinnings of one base graph share positions, weights and edge coins
    let base = coupled_base_graph(&ens, params, &pareto(), SamplerOptions::default())?;
    let mut layers = vec![base.induced(&low), base.induced(&mid)];
    if let Some(v) = &ens.bgirg {
        layers.push(base.induced(v));
    }
    layers.push(base.induced(&high));
    let last = layers.len() - 1;
    let mut edges_nested = nested_in(&layers[0], &layers[1]) && nested_in(&layers[1], &layers[last]);
    if ens.bgirg.is_some() {
        edges_nested &= nested_in(&layers[0], &layers[2]) && nested_in(&layers[2], &layers[last]);
    }
    Ok((!nested, !edges_nested, ens.bgirg.is_none()))
}

fn coupling_invariants() -> Result<Outcome> {
    let params = girg_params();
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [1_000usize, 10_000] {
        let flags = (0..100u64).into_par_iter().map(|seed| coupling_seed(n, seed, &params)).collect::<Result<Vec<_>>>()?;
        let count = |f: fn(&(bool, bool, bool)) -> bool| flags.iter().filter(|x| f(x)).count();
        let (nest_fail, edge_fail, straddle_fail) = (count(|x| x.0), count(|x| x.1), count(|x| x.2));
        ok &= nest_fail == 0 && edge_fail == 0 && straddle_fail as f64 / 100.0 <= 0.02;
        notes.push(format!("n={n}: nesting failures {nest_fail}, edge nesting failures {edge_fail}, straddle failures {straddle_fail}/100"));
    }
    Ok(Outcome::new(ok, notes.join("; ")))
}

// 3

/// `P(W > x) x^{2 alpha_H}` of the weights of `g`.
fn hrg_slowly_varying(weights: &[f64], x: f64, alpha_h: f64) -> f64 {
    let above = weights.iter().filter(|&&w| w > x).count() as f64;
    above / weights.len() as f64 * x.powf(2.0 * alpha_h)
}

fn degree_tails() -> Result<Outcome> {
    let n = 100_000;
    let girg = generate_girg(&girg_params(), n, &pareto(), 3, SamplerOptions::default())?;
    let girg_hill = degree_exponent(&girg)?;
    let (alpha_h, c_h) = (0.75, 0.0);
    let hrg = generate_hrg(&HrgParams { alpha_h, c_h, t_h: None, n }, 3, SamplerOptions::default())?;
    let hrg_hill = degree_exponent(&hrg)?;
    let upper = 2.0 + 6.0 * (-c_h * alpha_h / 2.0).exp();
    let x_max = (n as f64).powf(0.25);
    let grid: Vec<f64> = (0..=40).map(|i| 2.0 * (x_max / 2.0).powf(i as f64 / 40.0)).collect();
    let ell: Vec<f64> = grid.iter().map(|&x| hrg_slowly_varying(&hrg.weights, x, alpha_h)).collect();
    let (ell_min, ell_max) = ell.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let near = |h: Option<f64>| h.is_some_and(|h| (h - 1.5).abs() <= 0.2);
    let ok = near(girg_hill) && near(hrg_hill) && ell_min >= 0.5 && ell_max <= upper;
    Ok(Outcome::new(
        ok,
        format!(
            "GIRG Hill {}, HRG Hill {} (target 1.5 +- 0.2); HRG slowly varying part in [{ell_min:.3}, {ell_max:.3}] vs [0.5, {upper:.3}]",
            fmt_opt(girg_hill),
            fmt_opt(hrg_hill)
        ),
    ))
}

// 4

fn percolation_exponent() -> Result<Outcome> {
    let params = girg_params();
    let law = EdgeLengthDistribution::exponential(1.0)?;
    let g = generate_girg(&params, 100_000, &pareto(), 4, SamplerOptions::default())?;
    let g = assign_edge_lengths(&g, &law, 4, true)?;
    let rule = PercolationRule::new(0.5 * params.alpha, 0.5, params.alpha, law)?;
    let p = percolate(&g, &rule)?;
    let before = degree_exponent(&g)?;
    let after = degree_exponent(&p)?;
    let ok = matches!((before, after), (Some(a), Some(b)) if (a - b).abs() <= 0.25);
    Ok(Outcome::new(
        ok,
        format!("Hill {} before, {} after; kept {} of {} edges", fmt_opt(before), fmt_opt(after), p.num_edges(), g.num_edges()),
    ))
}

// 5

fn random_graph(n: usize, p: f64, stream: &mut KeyedStream) -> Result<SpatialGraph> {
    let coords = (0..n).map(|_| stream.random::<f64>() - 0.5).collect();
    let points = PointSet::new(1, Window::unit(), Metric::Torus, coords)?;
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if stream.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let mut g = SpatialGraph::from_edges(points, vec![1.0; n], (0..n as u64).collect(), &edges, Provenance::new("test", 0))?;
    // a coarse grid makes ties and zero lengths common
    let coarse = stream.random::<bool>();
    let mut lengths = KeyedStream::from_seed(stream.random());
    g.set_lengths_with(|_, _| if coarse { lengths.random_range(0..4) as f64 } else { lengths.random::<f64>() })?;
    Ok(g)
}

/// Minimum over all simple paths from `u`, by depth-first enumeration.
fn enumerate_paths(g: &SpatialGraph, u: usize) -> Vec<f64> {
    fn go(g: &SpatialGraph, x: usize, len: f64, on_path: &mut Vec<bool>, best: &mut Vec<f64>) {
        best[x] = best[x].min(len);
        for (y, l) in g.weighted_neighbors(x) {
            if !on_path[y] {
                on_path[y] = true;
                go(g, y, len + l, on_path, best);
                on_path[y] = false;
            }
        }
    }
    let mut best = vec![f64::INFINITY; g.num_vertices()];
    let mut on_path = vec![false; g.num_vertices()];
    on_path[u] = true;
    go(g, u, 0.0, &mut on_path, &mut best);
    best
}

/// Bellman-Ford relaxation to a fixed point.
fn relax(g: &SpatialGraph, u: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.num_vertices()];
    dist[u] = 0.0;
    loop {
        let mut changed = false;
        for (a, b, l) in g.edges() {
            let l = l.expect("lengths assigned");
            for (x, y) in [(a, b), (b, a)] {
                if dist[x] + l < dist[y] {
                    dist[y] = dist[x] + l;
                    changed = true;
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

fn close(a: Length, b: f64) -> bool {
    match a {
        Length::Finite(x) => b.is_finite() && (x - b).abs() <= 1e-9 * (1.0 + b),
        Length::Infinite => b.is_infinite(),
    }
}

/// Checks single-source distances and the path returned for every target.
fn agrees(g: &SpatialGraph, oracle: &[f64]) -> Result<bool> {
    let dist = single_source(g, 0)?;
    for v in 0..g.num_vertices() {
        if !close(dist[v], oracle[v]) {
            return Ok(false);
        }
        let (d, path) = shortest_weighted(g, 0, v)?;
        if !close(d, oracle[v]) {
            return Ok(false);
        }
        if d.is_finite() {
            let walked: f64 = path.windows(2).map(|w| g.edge_length(w[0], w[1]).unwrap_or(f64::NAN)).sum();
            if path.first() != Some(&0) || path.last() != Some(&v) || !close(d, walked) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn distance_exactness() -> Result<Outcome> {
    let mut stream = KeyedStream::from_seed(5);
    let mut small_bad = 0;
    for _ in 0..500 {
        let n = stream.random_range(1..=12);
        let p = stream.random_range(0.1..0.6);
        let g = random_graph(n, p, &mut stream)?;
        if !agrees(&g, &enumerate_paths(&g, 0))? {
            small_bad += 1;
        }
    }
    let mut large_bad = 0;
    for _ in 0..200 {
        let p = stream.random_range(0.02..0.2);
        let g = random_graph(50, p, &mut stream)?;
        if !agrees(&g, &relax(&g, 0))? {
            large_bad += 1;
        }
    }
    Ok(Outcome::new(
        small_bad == 0 && large_bad == 0,
        format!("{small_bad}/500 mismatches against enumeration, {large_bad}/200 against relaxation"),
    ))
}

// 6

/// 300 pairs per size, spread over ten independent graphs.
fn dichotomy_config(law: &str, grid: &str) -> Result<ExperimentConfig> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    ExperimentConfig::parse(&format!(
        "seed = 2024\nworkers = {workers}\npairs = 30\nreplicas = 10\nn_grid = {grid}\nlength_law = \"{law}\"\n\
         [model]\nkind = \"girg\"\nd = 2\ntau = 2.5\nalpha = 1.95\n"
    ))
}

fn explosive_dichotomy() -> Result<Outcome> {
    let explosive = run_distance_experiment(&dichotomy_config("exp:1", "[16384, 65536]")?)?;
    let ks = spatial_fpp::harness::ks_statistic(&explosive.weighted(16384), &explosive.weighted(65536))?;
    let unit = run_distance_experiment(&dichotomy_config("det:1", "[4096, 65536]")?)?;
    let (small, large) = (median(&unit.hops(4096)), median(&unit.hops(65536)));
    let gain = match (small, large) {
        (Some(a), Some(b)) => b - a,
        _ => f64::NEG_INFINITY,
    };
    let mean = |h: Vec<f64>| h.iter().sum::<f64>() / h.len().max(1) as f64;
    Ok(Outcome::new(
        ks <= 0.12 && gain >= 1.0,
        format!(
            "KS {ks:.4} (<= 0.12); unit-length median hops {} -> {} (gain {gain}, need >= 1), means {:.3} -> {:.3}",
            fmt_opt(small),
            fmt_opt(large),
            mean(unit.hops(4096)),
            mean(unit.hops(65536))
        ),
    ))
}

// 7

/// Every edge pattern on three collinear points, every root, several seeds.
fn three_point_patterns(params: &GirgParams) -> Result<usize> {
    let points = PointSet::new(1, Window::centred(10.0), Metric::Box, vec![-1.0, 0.0, 1.5])?;
    let weights = vec![1.0, 2.0, 1.5];
    let pairs = [(0u32, 1u32), (0, 2), (1, 2)];
    let mut failures = 0;
    for mask in 0..8u32 {
        let edges: Vec<(u32, u32)> = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| pairs[i]).collect();
        let g = SpatialGraph::from_edges(points.clone(), weights.clone(), vec![0, 1, 2], &edges, Provenance::new("line", 0))?;
        for root in 0..3 {
            for seed in 0..20 {
                let run = simulate_coupled(&g, root, 3, DEFAULT_CAP, params, seed)?;
                if !domination_check(&g, &run, 3)?.holds {
                    failures += 1;
                }
            }
        }
    }
    Ok(failures)
}

fn brw_domination() -> Result<Outcome> {
    let params = girg_params().with_choice(GChoice::UpperBound);
    let side = 1000f64.sqrt();
    let (mut held, mut truncated) = (0, 0);
    for seed in 0..200u64 {
        let g = generate_egirg_window(&params, 1.0, side, &pareto(), seed, SamplerOptions::default())?;
        let run = simulate_coupled(&g, 0, 3, DEFAULT_CAP, &params, seed)?;
        truncated += usize::from(run.truncated);
        if domination_check(&g, &run, 3)?.holds {
            held += 1;
        }
    }
    let exhaustive = three_point_patterns(&params)?;
    Ok(Outcome::new(
        held == 200 && exhaustive == 0,
        format!("containment held for {held}/200 seeds ({truncated} truncated runs); three-point patterns: {exhaustive} failures"),
    ))
}

// 8

fn boxing() -> Result<Outcome> {
    let cons = boxing_constants(0.1, 2.5)?;
    // delta = 1/60, C = 9/5, D = (59/60)(14/15)/(9/10) - 1/120 = 3277/3240
    let constants_ok = (cons.weight_slack - 1.0 / 60.0).abs() <= 1e-7
        && (cons.growth - 1.8).abs() <= 1e-12
        && (cons.box_exponent - 3277.0 / 3240.0).abs() <= 1e-5;

    let mu_band = 1e3;
    let side = cons.box_side(mu_band, 2, 2) * 1.001;
    let empty = SpatialGraph::from_edges(PointSet::empty(2, Window::centred(side), Metric::Box), vec![], vec![], &[], Provenance::new("empty", 0))?;
    let sys = build_boxing(&empty, &[0.0, 0.0], mu_band, cons)?;
    let band_counts: Vec<usize> = sys.annuli.iter().map(|a| a.count()).collect();
    let band_ok = sys.annuli.iter().all(|a| {
        let (lo, hi) = cons.subbox_count_band(mu_band, a.k);
        (a.count() as f64) >= lo && (a.count() as f64) <= hi
    });

    let params = girg_params();
    let law = EdgeLengthDistribution::exponential(1.0)?;
    // the strong rule matches the percolation criterion; the mild one lets paths complete
    let rules = [
        PercolationRule::new(0.5 * params.alpha, 0.5, params.alpha, law.clone())?,
        PercolationRule::new(0.1, 0.5, params.alpha, law.clone())?,
    ];
    let seeds = 30u64;
    let window = 20_000f64.sqrt();
    let graphs = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let g = generate_egirg_window(&params, 1.0, window, &pareto(), seed, SamplerOptions::default())?;
            let g = assign_edge_lengths(&g, &law, seed, true)?;
            let percolated = rules.iter().map(|r| percolate(&g, r)).collect::<Result<Vec<_>>>()?;
            Ok((g, percolated))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut truncation = Vec::new();
    let mut completed = [0usize; 2];
    let (mut certified, mut over_bound) = (0, 0);
    for mu in [10.0, 30.0, 100.0] {
        let mut truncated = 0;
        for (g, percolated) in &graphs {
            let sys = build_boxing(g, &[0.0, 0.0], mu, cons)?;
            verify_events(g, &sys, cons.weight_slack);
            truncated += usize::from(greedy_centre_path(g, &sys).truncated);
            for (i, (p, rule)) in percolated.iter().zip(&rules).enumerate() {
                let bound = epsilon_k_bound(&law, mu, &cons, rule.gamma_tilde, rule.c);
                let path = greedy_centre_path(p, &build_boxing(p, &[0.0, 0.0], mu, cons)?);
                if !path.truncated {
                    completed[i] += 1;
                    certified += usize::from(path.certified);
                    if Length::Finite(path.total_length) > bound {
                        over_bound += 1;
                    }
                }
            }
        }
        truncation.push(truncated as f64 / seeds as f64);
    }
    let monotone = truncation.windows(2).all(|w| w[1] <= w[0]);
    let informative = completed.iter().sum::<usize>() > 0;
    Ok(Outcome::new(
        constants_ok && band_ok && monotone && informative && over_bound == 0,
        format!(
            "delta {:.7}, C {}, D {:.6}; subbox counts at mu=1e3 {band_counts:?} in band: {band_ok}; \
             truncation over mu=10,30,100: {truncation:?}; completed percolated paths at c=0.5 alpha and c=0.1: {completed:?} \
             ({certified} certified), {over_bound} above the bound",
            cons.weight_slack, cons.growth, cons.box_exponent
        ),
    ))
}

// 9

fn determinism() -> Result<Outcome> {
    let models = [
        "kind = \"girg\"\nd = 2\ntau = 2.5\nalpha = 1.95",
        "kind = \"hrg\"\nalpha_h = 0.75\nt_h = 0.5",
        "kind = \"sfp\"\nd = 2\nalpha_tilde = 3.0\ntau_tilde = 2.0\nlambda = 1.0",
    ];
    let mut identical = Vec::new();
    for model in models {
        let grid = if model.contains("sfp") { "[4, 8]" } else { "[2000, 8000]" };
        let csv = |workers: usize| -> Result<String> {
            let cfg = ExperimentConfig::parse(&format!(
                "seed = 99\nworkers = {workers}\npairs = 40\nreplicas = 3\nn_grid = {grid}\nlength_law = \"exp:1\"\n[model]\n{model}\n"
            ))?;
            Ok(run_distance_experiment(&cfg)?.to_csv())
        };
        let (one, eight) = (csv(1)?, csv(8)?);
        identical.push(one == eight && one.lines().count() > 1);
    }
    Ok(Outcome::new(
        identical.iter().all(|&x| x),
        format!("girg/hrg/sfp CSVs identical at 1 and 8 workers: {identical:?}"),
    ))
}
