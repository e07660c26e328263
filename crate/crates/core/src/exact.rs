//! Brute-force ground truth.
//!
//! Everything here scans the whole instance by definition — O(n^2) or
//! worse — and deliberately shares no code with the solver, so agreement
//! between the two is a genuine cross-check rather than a tautology.

use crate::dp::{find_median, pseudo_cost};
use crate::error::Result;
use crate::metric::{cost, Distance, MetricInstance, PointIndex};
use crate::tary::TaryParams;

/// Exact 1-median of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    /// Lowest index attaining the minimum distance sum.
    pub index: PointIndex,
    pub opt_cost: Distance,
}

/// Full O(n^2) scan: cost of every point, ascending accumulation,
/// lowest-index tie-break.
pub fn exact_median<M: MetricInstance + ?Sized>(metric: &M) -> ExactResult {
    let n = metric.len();
    assert!(n >= 1, "cannot take the median of an empty instance");
    let mut index = 0;
    let mut opt_cost = cost(metric, 0);
    for i in 1..n {
        let c = cost(metric, i);
        if c < opt_cost {
            index = i;
            opt_cost = c;
        }
    }
    ExactResult { index, opt_cost }
}

/// Lowest index minimizing the sum of pseudodistances, found by direct
/// enumeration (O(h*n^2) oracle calls). The solver must agree with this
/// on instances where sums are exact.
pub fn pseudo_median_bruteforce<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
) -> PointIndex {
    let n = metric.len();
    assert!(n >= 1, "cannot take the median of an empty instance");
    let mut index = 0;
    let mut best = pseudo_cost(metric, params, 0);
    for i in 1..n {
        let c = pseudo_cost(metric, params, i);
        if c < best {
            index = i;
            best = c;
        }
    }
    index
}

/// Side-by-side run of the solver and the exact scan.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub approx_index: PointIndex,
    /// True distance sum of the solver's pick (not its table value).
    pub approx_cost: Distance,
    pub opt_index: PointIndex,
    pub opt_cost: Distance,
    /// `approx_cost / opt_cost`, defined as 1 when the optimum is 0
    /// (possible only for a single point).
    pub ratio: f64,
    /// The guaranteed factor, `2h`.
    pub bound: f64,
    pub pass: bool,
}

/// Runs the solver at level count `h`, prices its pick by a full scan and
/// compares against the exact optimum. `pass` must hold on every valid
/// metric; a failure means a broken metric or a broken solver.
pub fn verify_ratio<M: MetricInstance + ?Sized>(metric: &M, h: u32) -> Result<VerifyReport> {
    let found = find_median(metric, h)?;
    let approx_cost = cost(metric, found.index);
    let exact = exact_median(metric);
    let ratio = if exact.opt_cost == 0.0 {
        1.0
    } else {
        approx_cost / exact.opt_cost
    };
    let bound = 2.0 * h as f64;
    Ok(VerifyReport {
        approx_index: found.index,
        approx_cost,
        opt_index: exact.index,
        opt_cost: exact.opt_cost,
        ratio,
        bound,
        pass: ratio <= bound * (1.0 + 1e-12),
    })
}
