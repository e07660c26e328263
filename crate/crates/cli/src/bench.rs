//! Benchmark runs and their CSV records.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use onemedian::{
    cost, distinct_pair_count, exact_median, find_median, generate, GenSpec, MetricKind,
};

use crate::CliError;

pub struct BenchConfig {
    pub kind: MetricKind,
    pub h: u32,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub dim: usize,
    pub density: f64,
    pub exact_max: usize,
}

/// One solver run. Optimum-dependent fields are present only when the
/// exact scan ran (`n <= exact_max`).
struct BenchRecord {
    kind: MetricKind,
    n: usize,
    h: u32,
    t: u64,
    queries: u64,
    distinct_pairs: u64,
    proxy_cost: f64,
    true_cost: f64,
    opt_cost: Option<f64>,
    ratio: Option<f64>,
    elapsed_ms: f64,
    seed: u64,
}

impl BenchRecord {
    fn csv_line(&self) -> String {
        let opt_cost = self.opt_cost.map_or(String::new(), |v| format!("{v}"));
        let ratio = self.ratio.map_or(String::new(), |v| format!("{v}"));
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.3},{}",
            self.kind,
            self.n,
            self.h,
            self.t,
            self.queries,
            self.distinct_pairs,
            self.proxy_cost,
            self.true_cost,
            opt_cost,
            ratio,
            self.elapsed_ms,
            self.seed
        )
    }
}

pub const CSV_HEADER: &str =
    "kind,n,h,t,queries,distinct_pairs,proxy_cost,true_cost,opt_cost,ratio,elapsed_ms,seed";

pub fn run(config: &BenchConfig, csv_path: &Path) -> Result<(), CliError> {
    let file = File::create(csv_path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{CSV_HEADER}")?;

    let mut points = Vec::new();
    for &n in &config.sizes {
        let spec = GenSpec::new(config.kind, n)
            .with_seed(config.seed)
            .with_dim(config.dim)
            .with_density(config.density);
        let instance = generate(&spec)?;

        let started = Instant::now();
        let result = find_median(&instance, config.h)?;
        let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

        let true_cost = cost(&instance, result.index);
        let (opt_cost, ratio) = if n <= config.exact_max {
            let exact = exact_median(&instance);
            let ratio = if exact.opt_cost == 0.0 {
                1.0
            } else {
                true_cost / exact.opt_cost
            };
            (Some(exact.opt_cost), Some(ratio))
        } else {
            (None, None)
        };

        let record = BenchRecord {
            kind: config.kind,
            n,
            h: config.h,
            t: result.params.base(),
            queries: result.queries,
            distinct_pairs: distinct_pair_count(n, config.h),
            proxy_cost: result.proxy_cost,
            true_cost,
            opt_cost,
            ratio,
            elapsed_ms,
            seed: config.seed,
        };
        writeln!(out, "{}", record.csv_line())?;
        eprintln!(
            "bench {} n={} h={}: queries={} elapsed={:.3}ms",
            config.kind, n, config.h, record.queries, elapsed_ms
        );
        points.push((n as f64, record.queries as f64));
    }

    // A single size gives nothing to fit.
    if points.len() > 1 {
        let xs: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|(_, q)| q.ln()).collect();
        writeln!(out, "# slope={:.4}", least_squares_slope(&xs, &ys))?;
    }
    out.flush()?;
    Ok(())
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - x_mean) * (y - y_mean);
        den += (x - x_mean) * (x - x_mean);
    }
    num / den
}
