use std::fmt::Write as _;

use crate::optimizer::{solve, solve_global_baseline, OptimizerConfig, Trace};
use crate::scene::SceneSpec;

/// Smoothing factor for exported curves.
pub const EMA_ALPHA: f64 = 0.85;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkResult {
    pub scene: String,
    pub seed: u64,
    /// First iteration, over both stages, at which the normalized loss is at
    /// or below the threshold. `None` if it never gets there.
    pub iterations_mixed: Option<usize>,
    pub iterations_global: Option<usize>,
    /// Baseline iterations over re-parameterized iterations.
    pub speedup: Option<f64>,
    /// Solver error of either run.
    pub failure: Option<String>,
    pub mixed: Vec<f64>,
    pub global: Vec<f64>,
}

/// Loss curve divided by its first value.
pub fn normalized(trace: &Trace) -> Vec<f64> {
    let totals = trace.totals();
    match totals.first() {
        Some(&t0) if t0 != 0.0 => totals.iter().map(|t| t / t0).collect(),
        _ => vec![0.0; totals.len()],
    }
}

pub fn iterations_to_threshold(curve: &[f64], threshold: f64) -> Option<usize> {
    curve.iter().position(|&v| v <= threshold)
}

/// Exponential moving average, seeded with the first value.
pub fn ema(values: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = match values.first() {
        Some(&v) => v,
        None => return out,
    };
    for &v in values {
        acc = alpha * acc + (1.0 - alpha) * v;
        out.push(acc);
    }
    out
}

/// Runs both parameterizations per seed from the same initial geometry.
pub fn convergence_benchmark(
    scene: &str,
    spec: &SceneSpec,
    seeds: &[u64],
    threshold: f64,
    config: &OptimizerConfig,
) -> Vec<BenchmarkResult> {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "threshold must lie in (0, 1)"
    );
    seeds
        .iter()
        .map(|&seed| {
            let cfg = OptimizerConfig {
                seed,
                ..config.clone()
            };
            let mut r = BenchmarkResult {
                scene: scene.to_string(),
                seed,
                iterations_mixed: None,
                iterations_global: None,
                speedup: None,
                failure: None,
                mixed: Vec::new(),
                global: Vec::new(),
            };
            match (solve(spec, &cfg), solve_global_baseline(spec, &cfg)) {
                (Ok(a), Ok(b)) => {
                    r.mixed = normalized(&a.trace);
                    r.global = normalized(&b.trace);
                    r.iterations_mixed = iterations_to_threshold(&r.mixed, threshold);
                    r.iterations_global = iterations_to_threshold(&r.global, threshold);
                    if let (Some(m), Some(g)) = (r.iterations_mixed, r.iterations_global) {
                        r.speedup = Some(g.max(1) as f64 / m.max(1) as f64);
                    }
                }
                (Err(e), _) | (_, Err(e)) => r.failure = Some(e.to_string()),
            }
            r
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSummary {
    pub seeds: usize,
    /// Seeds where the re-parameterized run needs no more iterations.
    pub mixed_not_slower: usize,
    pub mean_speedup: Option<f64>,
}

pub fn summarize(results: &[BenchmarkResult]) -> BenchmarkSummary {
    let mixed_not_slower = results
        .iter()
        .filter(|r| match (r.iterations_mixed, r.iterations_global) {
            (Some(m), Some(g)) => m <= g,
            (Some(_), None) => true,
            _ => false,
        })
        .count();
    let speedups: Vec<f64> = results.iter().filter_map(|r| r.speedup).collect();
    let mean_speedup =
        (!speedups.is_empty()).then(|| speedups.iter().sum::<f64>() / speedups.len() as f64);
    BenchmarkSummary {
        seeds: results.len(),
        mixed_not_slower,
        mean_speedup,
    }
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn results_to_text(results: &[BenchmarkResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = match &r.failure {
            Some(f) => writeln!(s, "{} seed {}: failed: {f}", r.scene, r.seed),
            None => writeln!(
                s,
                "{} seed {}: global-to-local {} global {} speedup {}",
                r.scene,
                r.seed,
                opt(r.iterations_mixed),
                opt(r.iterations_global),
                r.speedup
                    .map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
            ),
        };
    }
    let sum = summarize(results);
    let _ = writeln!(
        s,
        "not slower on {}/{} seeds, mean speedup {}",
        sum.mixed_not_slower,
        sum.seeds,
        sum.mean_speedup
            .map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
    );
    s
}

/// Normalized and smoothed curves of every seed, one row per iteration.
pub fn curves_to_csv(results: &[BenchmarkResult], alpha: f64) -> String {
    let mut s =
        String::from("seed,iteration,global_to_local,global,global_to_local_ema,global_ema\n");
    for r in results {
        let (em, eg) = (ema(&r.mixed, alpha), ema(&r.global, alpha));
        for t in 0..r.mixed.len().min(r.global.len()) {
            let _ = writeln!(
                s,
                "{},{t},{:.9e},{:.9e},{:.9e},{:.9e}",
                r.seed, r.mixed[t], r.global[t], em[t], eg[t]
            );
        }
    }
    s
}
