//! The sublinear median solver.
//!
//! For a chosen level count `h >= 2` the solver walks from each candidate
//! point toward every other point by peeling the target offset's base-t
//! digits, most significant first. Summing the walk legs gives a
//! *pseudodistance*: an upper bound on the true distance (each leg detour
//! can only lengthen the path). Minimizing the sum of pseudodistances
//! instead of true distances is what makes the query schedule independent
//! of the data — every point probes the same `O(t)` strided offsets per
//! level — and costs at most a factor `2h` in solution quality.
//!
//! Two rolling tables drive the computation, level by level:
//!
//! * `bounded[i]` — walk sums restricted to offsets whose low digits stay
//!   within the matching digit prefix of `n-1` (so that after the last
//!   level exactly the `n` real offsets are counted, each once);
//! * `full[i]` — the same sums over all `t^(m+1)` digit combinations.
//!
//! After level `h-1`, `bounded[i]` equals the sum of pseudodistances from
//! `i` to the whole space, and the smallest entry names the output point.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use crate::error::{Error, Result};
use crate::metric::{self, distance, Distance, MetricInstance, PointIndex};
use crate::tary::{mul_mod, suffix_value, to_digits, TaryParams};

/// The ordered non-self `(i, j)` pairs a solver run queries; a pure
/// function of `(n, h)`.
pub type QueryTrace = Vec<(u32, u32)>;

/// Outcome of [`find_median`].
#[derive(Debug, Clone, PartialEq)]
pub struct MedianResult {
    /// Selected point: lowest index minimizing the final bounded table.
    pub index: PointIndex,
    /// Final bounded-table value at `index` (sum of pseudodistances).
    pub proxy_cost: Distance,
    /// Non-self oracle invocations issued, repeats included.
    pub queries: u64,
    pub params: TaryParams,
}

// ---------------------------------------------------------------------------
// Reference pseudodistance (definition-level, independent of the tables)

/// Pseudodistance from `i` to `(i + j) mod n`: the telescoping walk that
/// adds the digits of offset `j` from most significant down, summing the
/// distance of every leg. Evaluated directly from the definition; the
/// dynamic program below never calls this.
pub fn pseudo_distance<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
    i: PointIndex,
    j: u64,
) -> Distance {
    let n = metric.len();
    assert!(i < n, "point index out of range");
    assert!(j < n as u64, "offset out of range");
    let h = params.h() as usize;
    let digits = to_digits(j, params).expect("offset fits the digit span");
    let n64 = n as u64;
    let mut total = 0.0;
    let mut here = i;
    for k in 0..h {
        let suffix = suffix_value(&digits, h - 1 - k, params).expect("digit suffix in range");
        let next = ((i as u64 + suffix) % n64) as usize;
        total += distance(metric, here, next);
        here = next;
    }
    total
}

/// Sum of pseudodistances from `i` over all offsets, ascending. O(h*n)
/// oracle calls; a reference quantity for tests and cross-checks, not used
/// by the solver.
pub fn pseudo_cost<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
    i: PointIndex,
) -> Distance {
    let mut total = 0.0;
    for j in 0..metric.len() as u64 {
        total += pseudo_distance(metric, params, i, j);
    }
    total
}

// ---------------------------------------------------------------------------
// Per-level table steps

/// Offsets probed at level `m`: `s * t^m mod n` for each digit value `s`.
fn level_offsets(params: &TaryParams, m: usize) -> Vec<u64> {
    let n = params.n();
    let stride = params.stride(m);
    (0..params.base()).map(|s| mul_mod(s, stride, n)).collect()
}

#[inline]
fn offset_target(i: usize, offset: u64, n: usize) -> usize {
    let x = i + offset as usize;
    if x >= n {
        x - n
    } else {
        x
    }
}

fn base_values<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
    i: PointIndex,
    offsets: &[u64],
) -> (Distance, Distance) {
    let n = metric.len();
    let cap = params.cap_digit(0);
    let mut bounded = 0.0;
    let mut full = 0.0;
    // One query per offset feeds both tables; the bounded terms are a
    // prefix of the full ones.
    for (s, &offset) in offsets.iter().enumerate() {
        let d = distance(metric, i, offset_target(i, offset, n));
        if s as u64 <= cap {
            bounded += d;
        }
        full += d;
    }
    (bounded, full)
}

fn bounded_step<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
    m: usize,
    i: PointIndex,
    offsets: &[u64],
    bounded_prev: &[Distance],
    full_prev: &[Distance],
) -> Distance {
    let n = metric.len();
    let cap = params.cap_digit(m) as usize;
    // Walks whose level-m digit equals the cap keep their bounded status
    // from the previous level; each contributes one leading leg.
    let lead = offset_target(i, offsets[cap], n);
    let lead_weight = (1 + params.cap_prefix(m - 1)) as f64;
    let mut value = lead_weight * distance(metric, i, lead);
    // Walks with a smaller level-m digit are unconditionally in range:
    // t^m of them share each leading leg.
    let mut below = 0.0;
    for &offset in &offsets[..cap] {
        below += distance(metric, i, offset_target(i, offset, n));
    }
    value += params.weight(m) * below;
    value += bounded_prev[lead];
    let mut carried = 0.0;
    for &offset in &offsets[..cap] {
        carried += full_prev[offset_target(i, offset, n)];
    }
    value + carried
}

fn full_step<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
    m: usize,
    i: PointIndex,
    offsets: &[u64],
    full_prev: &[Distance],
) -> Distance {
    let n = metric.len();
    let mut legs = 0.0;
    for &offset in offsets {
        legs += distance(metric, i, offset_target(i, offset, n));
    }
    let mut carried = 0.0;
    for &offset in offsets {
        carried += full_prev[offset_target(i, offset, n)];
    }
    params.weight(m) * legs + carried
}

/// Level-0 table entries for point `i`: one strided pass that accumulates
/// both the bounded and the full sum in ascending digit order.
pub fn dp_base<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
    i: PointIndex,
) -> (Distance, Distance) {
    base_values(metric, params, i, &level_offsets(params, 0))
}

/// Bounded-table recurrence at level `m >= 1` for point `i`. Issues at
/// most `t` non-self queries, all contained in the level's full-step set.
pub fn dp_step_bounded<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
    m: usize,
    i: PointIndex,
    bounded_prev: &[Distance],
    full_prev: &[Distance],
) -> Distance {
    assert!(m >= 1, "level must be at least 1");
    bounded_step(
        metric,
        params,
        m,
        i,
        &level_offsets(params, m),
        bounded_prev,
        full_prev,
    )
}

/// Full-table recurrence at level `m >= 1` for point `i`. Exactly `t - 1`
/// non-self queries on instances where no stride wraps to zero.
pub fn dp_step_full<M: MetricInstance + ?Sized>(
    metric: &M,
    params: &TaryParams,
    m: usize,
    i: PointIndex,
    full_prev: &[Distance],
) -> Distance {
    assert!(m >= 1, "level must be at least 1");
    full_step(metric, params, m, i, &level_offsets(params, m), full_prev)
}

// ---------------------------------------------------------------------------
// Rolling tables

/// The two rolling tables across levels: four arrays of `n`, since level
/// `m` reads only level `m - 1`.
#[derive(Debug, Clone)]
pub struct DpTables {
    bounded: Vec<Distance>,
    full: Vec<Distance>,
    bounded_prev: Vec<Distance>,
    full_prev: Vec<Distance>,
    level: usize,
}

impl DpTables {
    /// Computes level 0 for every point.
    pub fn base<M: MetricInstance + ?Sized>(metric: &M, params: &TaryParams) -> DpTables {
        Self::base_with(metric, params, 1)
    }

    pub(crate) fn base_with<M: MetricInstance + ?Sized>(
        metric: &M,
        params: &TaryParams,
        workers: usize,
    ) -> DpTables {
        let n = metric.len();
        assert_eq!(n as u64, params.n(), "params built for a different n");
        let offsets = level_offsets(params, 0);
        let mut tables = DpTables {
            bounded: vec![0.0; n],
            full: vec![0.0; n],
            bounded_prev: vec![0.0; n],
            full_prev: vec![0.0; n],
            level: 0,
        };
        run_level(
            n,
            workers,
            0,
            &mut tables.bounded,
            &mut tables.full,
            &|i| base_values(metric, params, i, &offsets),
        );
        tables
    }

    /// Advances both tables one level. Queries for each point are issued
    /// bounded step first, then full step, matching the canonical schedule.
    pub fn advance<M: MetricInstance + ?Sized>(&mut self, metric: &M, params: &TaryParams) {
        self.advance_with(metric, params, 1);
    }

    pub(crate) fn advance_with<M: MetricInstance + ?Sized>(
        &mut self,
        metric: &M,
        params: &TaryParams,
        workers: usize,
    ) {
        let n = metric.len();
        let m = self.level + 1;
        assert!(m < params.h() as usize, "advanced past the last level");
        let offsets = level_offsets(params, m);
        std::mem::swap(&mut self.bounded, &mut self.bounded_prev);
        std::mem::swap(&mut self.full, &mut self.full_prev);
        let bounded_prev = &self.bounded_prev;
        let full_prev = &self.full_prev;
        run_level(
            n,
            workers,
            m as u64,
            &mut self.bounded,
            &mut self.full,
            &|i| {
                let b = bounded_step(metric, params, m, i, &offsets, bounded_prev, full_prev);
                let g = full_step(metric, params, m, i, &offsets, full_prev);
                (b, g)
            },
        );
        self.level = m;
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Bounded-table values at the current level.
    pub fn bounded(&self) -> &[Distance] {
        &self.bounded
    }

    /// Full-table values at the current level.
    pub fn full(&self) -> &[Distance] {
        &self.full
    }
}

/// Fills one level, either in place on this thread or chunked across
/// scoped workers. Per-point work is order-fixed, so chunking cannot
/// change any value; worker slots ascend with the chunks so a recording
/// oracle reassembles the canonical trace.
fn run_level<F>(
    n: usize,
    workers: usize,
    level_seq: u64,
    bounded_out: &mut [Distance],
    full_out: &mut [Distance],
    per_point: &F,
) where
    F: Fn(usize) -> (Distance, Distance) + Sync,
{
    if workers <= 1 || n < 2 {
        for i in 0..n {
            let (b, g) = per_point(i);
            bounded_out[i] = b;
            full_out[i] = g;
        }
        return;
    }
    let chunk = n.div_ceil(workers);
    let chunk_count = n.div_ceil(chunk) as u64;
    thread::scope(|scope| {
        for (w, (bs, fs)) in bounded_out
            .chunks_mut(chunk)
            .zip(full_out.chunks_mut(chunk))
            .enumerate()
        {
            let slot = level_seq * chunk_count + w as u64;
            let start = w * chunk;
            scope.spawn(move || {
                metric::with_worker_slot(slot, || {
                    for (k, (b, g)) in bs.iter_mut().zip(fs.iter_mut()).enumerate() {
                        let (bv, gv) = per_point(start + k);
                        *b = bv;
                        *g = gv;
                    }
                });
            });
        }
    });
}

// ---------------------------------------------------------------------------
// Driver

struct CountingOracle<'a, M: MetricInstance + ?Sized> {
    inner: &'a M,
    queries: AtomicU64,
}

impl<M: MetricInstance + ?Sized> MetricInstance for CountingOracle<'_, M> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    #[inline]
    fn dist(&self, i: PointIndex, j: PointIndex) -> Distance {
        if i == j {
            return 0.0;
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.inner.dist(i, j)
    }
}

/// Selects a point whose distance sum is at most `2h` times the optimum,
/// deterministically, using a query schedule that depends only on
/// `(n, h)` — never on observed distances. Ties in the final table are
/// broken toward the lowest index.
///
/// Issues at most `2*h*n*t` non-self oracle invocations where
/// `t = smallest_base(n, h)`.
pub fn find_median<M: MetricInstance + ?Sized>(metric: &M, h: u32) -> Result<MedianResult> {
    find_median_with_workers(metric, h, 1)
}

/// [`find_median`] with per-level work spread across all available CPUs.
/// The result is bit-identical to the single-threaded run.
pub fn find_median_parallel<M: MetricInstance + ?Sized>(metric: &M, h: u32) -> Result<MedianResult> {
    let workers = thread::available_parallelism().map_or(1, |p| p.get());
    find_median_with_workers(metric, h, workers)
}

/// [`find_median`] with an explicit worker count (1 = single-threaded).
pub fn find_median_with_workers<M: MetricInstance + ?Sized>(
    metric: &M,
    h: u32,
    workers: usize,
) -> Result<MedianResult> {
    if h < 2 {
        return Err(Error::usage(format!(
            "level count h must be at least 2, got {h}"
        )));
    }
    let n = metric.len();
    if n == 0 {
        return Err(Error::usage("cannot select a median of an empty instance"));
    }
    let params = TaryParams::new(n as u64, h)?;
    if n == 1 {
        return Ok(MedianResult {
            index: 0,
            proxy_cost: 0.0,
            queries: 0,
            params,
        });
    }
    let counting = CountingOracle {
        inner: metric,
        queries: AtomicU64::new(0),
    };
    let workers = workers.max(1);
    let mut tables = DpTables::base_with(&counting, &params, workers);
    for _ in 1..h {
        tables.advance_with(&counting, &params, workers);
    }
    let (index, proxy_cost) = lowest_argmin(tables.bounded());
    Ok(MedianResult {
        index,
        proxy_cost,
        queries: counting.queries.into_inner(),
        params,
    })
}

fn lowest_argmin(values: &[Distance]) -> (usize, Distance) {
    let mut best = 0;
    let mut best_value = values[0];
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best_value {
            best = i;
            best_value = v;
        }
    }
    (best, best_value)
}

// ---------------------------------------------------------------------------
// Canonical schedule

/// The exact ordered sequence of non-self `(i, j)` pairs a
/// [`find_median`] run issues, computed without any metric: the schedule
/// is a pure function of `(n, h)`. Equality with a recorded trace is the
/// nonadaptivity witness.
///
/// Panics if `h < 2`.
pub fn query_trace(n: usize, h: u32) -> QueryTrace {
    assert!(h >= 2, "level count h must be at least 2");
    if n <= 1 {
        return Vec::new();
    }
    assert!(n <= u32::MAX as usize, "trace supports at most 2^32 points");
    let params = TaryParams::new(n as u64, h).expect("valid (n, h)");
    let t = params.base();
    let n64 = n as u64;
    let mut out = Vec::new();
    for i in 0..n64 {
        for s in 0..t {
            let x = (i + s) % n64;
            if x != i {
                out.push((i as u32, x as u32));
            }
        }
    }
    for m in 1..h as usize {
        let stride = params.stride(m);
        let cap = params.cap_digit(m);
        for i in 0..n64 {
            let lead = (i + mul_mod(cap, stride, n64)) % n64;
            if lead != i {
                out.push((i as u32, lead as u32));
            }
            for s in 0..cap {
                let x = (i + mul_mod(s, stride, n64)) % n64;
                if x != i {
                    out.push((i as u32, x as u32));
                }
            }
            for s in 0..t {
                let x = (i + mul_mod(s, stride, n64)) % n64;
                if x != i {
                    out.push((i as u32, x as u32));
                }
            }
        }
    }
    out
}

/// Number of distinct unordered pairs the schedule touches, without
/// enumerating it: every point probes the same offset residues, so pairs
/// group into difference classes `{o, n-o}` of size `n` (or `n/2` when
/// `o == n/2`).
pub fn distinct_pair_count(n: usize, h: u32) -> u64 {
    assert!(h >= 2, "level count h must be at least 2");
    if n <= 1 {
        return 0;
    }
    let params = TaryParams::new(n as u64, h).expect("valid (n, h)");
    let n64 = n as u64;
    let mut classes = BTreeSet::new();
    for m in 0..params.h() as usize {
        let stride = params.stride(m);
        for s in 1..params.base() {
            let offset = mul_mod(s, stride, n64);
            if offset != 0 {
                classes.insert(offset.min(n64 - offset));
            }
        }
    }
    classes
        .iter()
        .map(|&r| if 2 * r == n64 { n64 / 2 } else { n64 })
        .sum()
}
