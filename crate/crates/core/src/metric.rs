//! Distance oracles and concrete metric backends.
//!
//! Everything downstream talks to a metric space through [`MetricInstance`]:
//! a point count plus a pairwise distance function over indices `0..n`.
//! This module provides the two storage backends ([`DenseMetric`],
//! [`EuclideanMetric`]), a wrapper that records every oracle invocation
//! ([`RecordingOracle`]), metric-axiom validation, and the shortest-path
//! closure used to repair arbitrary weight matrices into metrics.

use std::cell::Cell;
use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Index of a point; valid values are `0..n` of the owning instance.
pub type PointIndex = usize;

/// A distance value: finite, non-negative, binary64.
pub type Distance = f64;

/// Absolute slack allowed when checking the triangle inequality.
/// Euclidean backends accumulate rounding of about this size.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

/// A finite metric space over point indices `0..len()`.
///
/// Implementations must satisfy the metric axioms: `dist(i, i) == 0`,
/// `dist(i, j) == dist(j, i)`, and the triangle inequality. The axioms are
/// assumed, not checked, on every call; use [`validate_metric`] on a
/// materialized [`DenseMetric`] to check explicitly.
///
/// Implementations must be safe for concurrent read-only invocation.
pub trait MetricInstance: Sync {
    /// Number of points.
    fn len(&self) -> usize;

    /// Raw backend distance. Prefer the free function [`distance`], which
    /// answers self-queries as 0 without touching the backend.
    fn dist(&self, i: PointIndex, j: PointIndex) -> Distance;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<M: MetricInstance + ?Sized> MetricInstance for &M {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn dist(&self, i: PointIndex, j: PointIndex) -> Distance {
        (**self).dist(i, j)
    }
}

/// Distance between points `i` and `j`.
///
/// Self-queries return 0 immediately without consulting the backend, so
/// they are never counted or recorded by measuring wrappers.
///
/// Panics if an index is out of range.
#[inline]
pub fn distance<M: MetricInstance + ?Sized>(metric: &M, i: PointIndex, j: PointIndex) -> Distance {
    let n = metric.len();
    assert!(i < n && j < n, "point index out of range: ({i}, {j}) with n={n}");
    if i == j {
        0.0
    } else {
        metric.dist(i, j)
    }
}

/// Sum of distances from `i` to every point, accumulated in ascending
/// point order so repeated runs are bit-identical.
pub fn cost<M: MetricInstance + ?Sized>(metric: &M, i: PointIndex) -> Distance {
    let n = metric.len();
    assert!(i < n, "point index out of range: {i} with n={n}");
    let mut total = 0.0;
    for j in 0..n {
        total += distance(metric, i, j);
    }
    total
}

// ---------------------------------------------------------------------------
// Dense matrix backend

/// A metric stored as a full n x n matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMetric {
    n: usize,
    data: Vec<f64>,
}

impl DenseMetric {
    /// Builds a dense metric from row-major entries, checking shape,
    /// finiteness, non-negativity, symmetry and the zero diagonal.
    /// The triangle inequality is not checked here; see [`validate_metric`].
    pub fn new(n: usize, data: Vec<f64>) -> Result<DenseMetric> {
        if data.len() != n * n {
            return Err(Error::usage(format!(
                "matrix has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::usage(format!("nonzero diagonal at point {i}")));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::usage(format!("invalid distance {v} at ({i}, {j})")));
                }
                if data[j * n + i] != v {
                    return Err(Error::usage(format!("asymmetric entries at ({i}, {j})")));
                }
            }
        }
        Ok(DenseMetric { n, data })
    }

    /// Materializes any oracle into a dense matrix.
    pub fn from_oracle<M: MetricInstance + ?Sized>(metric: &M) -> DenseMetric {
        let n = metric.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = distance(metric, i, j);
            }
        }
        DenseMetric { n, data }
    }

    pub fn row(&self, i: PointIndex) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl MetricInstance for DenseMetric {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn dist(&self, i: PointIndex, j: PointIndex) -> Distance {
        self.data[i * self.n + j]
    }
}

// ---------------------------------------------------------------------------
// Euclidean backend

/// Points in `R^dim`; distances are Euclidean norms computed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanMetric {
    n: usize,
    dim: usize,
    coords: Vec<f64>,
}

impl EuclideanMetric {
    /// `coords` is point-major: point `i` occupies `coords[i*dim..(i+1)*dim]`.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<EuclideanMetric> {
        if dim == 0 {
            return Err(Error::usage("dimension must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::usage(format!(
                "coordinate count {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::usage(format!("non-finite coordinate {bad}")));
        }
        Ok(EuclideanMetric {
            n: coords.len() / dim,
            dim,
            coords,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: PointIndex) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

impl MetricInstance for EuclideanMetric {
    fn len(&self) -> usize {
        self.n
    }

    fn dist(&self, i: PointIndex, j: PointIndex) -> Distance {
        let a = self.point(i);
        let b = self.point(j);
        // Fixed ascending-coordinate accumulation keeps results
        // bit-deterministic; (a-b)^2 == (b-a)^2 keeps them symmetric.
        let mut sum = 0.0;
        for k in 0..self.dim {
            let d = a[k] - b[k];
            sum += d * d;
        }
        sum.sqrt()
    }
}

// ---------------------------------------------------------------------------
// Query recording

thread_local! {
    static WORKER_SLOT: Cell<u64> = const { Cell::new(0) };
}

/// Runs `f` with the calling thread's trace slot set to `slot`.
///
/// Parallel drivers give each worker a slot that ascends in canonical
/// point order; [`RecordingOracle::trace`] merges sub-traces by slot, so a
/// chunked run yields the same trace as a single-threaded one.
pub(crate) fn with_worker_slot<R>(slot: u64, f: impl FnOnce() -> R) -> R {
    WORKER_SLOT.with(|cell| {
        let previous = cell.get();
        cell.set(slot);
        let out = f();
        cell.set(previous);
        out
    })
}

fn current_worker_slot() -> u64 {
    WORKER_SLOT.with(Cell::get)
}

#[derive(Default)]
struct RecordState {
    /// (worker slot, i, j) per recorded invocation.
    entries: Vec<(u64, u32, u32)>,
    count: u64,
    /// Unordered-pair cache, allocated only in memoizing mode.
    cache: Option<HashMap<(u32, u32), f64>>,
}

/// Wraps an oracle and records every non-self invocation.
///
/// Self-queries (`i == j`) are answered as 0 without touching the inner
/// oracle and without being recorded. With memoization off (the default)
/// `count()` equals the number of non-self calls and `trace()` lists them
/// in invocation order, repeats included — the literal schedule. With
/// memoization on, repeated queries of an unordered pair are served from a
/// cache, so `count()` is the number of distinct pairs touched.
pub struct RecordingOracle<'a, M: MetricInstance + ?Sized> {
    inner: &'a M,
    memoize: bool,
    state: Mutex<RecordState>,
}

impl<'a, M: MetricInstance + ?Sized> RecordingOracle<'a, M> {
    pub fn new(inner: &'a M) -> Self {
        Self::with_memoize(inner, false)
    }

    pub fn with_memoize(inner: &'a M, memoize: bool) -> Self {
        assert!(
            inner.len() <= u32::MAX as usize,
            "recording supports at most 2^32 points"
        );
        let cache = memoize.then(HashMap::new);
        RecordingOracle {
            inner,
            memoize,
            state: Mutex::new(RecordState {
                entries: Vec::new(),
                count: 0,
                cache,
            }),
        }
    }

    /// Number of recorded invocations (distinct pairs when memoizing).
    pub fn count(&self) -> u64 {
        self.state.lock().unwrap().count
    }

    /// Recorded `(i, j)` pairs in canonical order: worker sub-traces are
    /// concatenated in ascending slot order, preserving per-worker order,
    /// which reproduces the single-threaded sequence.
    pub fn trace(&self) -> Vec<(u32, u32)> {
        let state = self.state.lock().unwrap();
        let mut entries = state.entries.clone();
        entries.sort_by_key(|&(slot, _, _)| slot);
        entries.into_iter().map(|(_, i, j)| (i, j)).collect()
    }

    pub fn reset(&self) {
        let mut state = self.state.lock().unwrap();
        state.entries.clear();
        state.count = 0;
        if let Some(cache) = state.cache.as_mut() {
            cache.clear();
        }
    }
}

impl<M: MetricInstance + ?Sized> MetricInstance for RecordingOracle<'_, M> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn dist(&self, i: PointIndex, j: PointIndex) -> Distance {
        if i == j {
            return 0.0;
        }
        let slot = current_worker_slot();
        let mut state = self.state.lock().unwrap();
        if self.memoize {
            let key = (i.min(j) as u32, i.max(j) as u32);
            if let Some(&cached) = state.cache.as_ref().unwrap().get(&key) {
                return cached;
            }
            let value = self.inner.dist(i, j);
            state.cache.as_mut().unwrap().insert(key, value);
            state.entries.push((slot, i as u32, j as u32));
            state.count += 1;
            value
        } else {
            state.entries.push((slot, i as u32, j as u32));
            state.count += 1;
            self.inner.dist(i, j)
        }
    }
}

// ---------------------------------------------------------------------------
// Validation

/// First metric-axiom violation found in a matrix, if any.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    NonzeroDiagonal {
        i: PointIndex,
        value: f64,
    },
    Negative {
        i: PointIndex,
        j: PointIndex,
        value: f64,
    },
    Asymmetry {
        i: PointIndex,
        j: PointIndex,
        forward: f64,
        backward: f64,
    },
    /// `d(x,y) + d(y,z) < d(x,z) - TRIANGLE_TOLERANCE`.
    Triangle {
        x: PointIndex,
        y: PointIndex,
        z: PointIndex,
        detour: f64,
        direct: f64,
    },
}

impl std::fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricViolation::NonzeroDiagonal { i, value } => {
                write!(f, "d({i},{i}) = {value}, expected 0")
            }
            MetricViolation::Negative { i, j, value } => {
                write!(f, "d({i},{j}) = {value} is negative")
            }
            MetricViolation::Asymmetry {
                i,
                j,
                forward,
                backward,
            } => write!(f, "d({i},{j}) = {forward} but d({j},{i}) = {backward}"),
            MetricViolation::Triangle {
                x,
                y,
                z,
                detour,
                direct,
            } => write!(
                f,
                "triangle inequality fails at ({x},{y},{z}): {detour} < {direct}"
            ),
        }
    }
}

/// Outcome of [`validate_metric`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violation: Option<MetricViolation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the metric axioms on a dense matrix and reports the first
/// violation found, or passes. Simple axioms (diagonal, sign, symmetry)
/// are scanned first in index order, then all triangles; O(n^3) total.
/// Violations are report contents, not errors.
pub fn validate_metric(metric: &DenseMetric) -> ValidationReport {
    let n = metric.len();
    for i in 0..n {
        let d = metric.dist(i, i);
        if d != 0.0 {
            return ValidationReport {
                violation: Some(MetricViolation::NonzeroDiagonal { i, value: d }),
            };
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let forward = metric.dist(i, j);
            if forward < 0.0 || !forward.is_finite() {
                return ValidationReport {
                    violation: Some(MetricViolation::Negative {
                        i,
                        j,
                        value: forward,
                    }),
                };
            }
            let backward = metric.dist(j, i);
            if forward != backward {
                return ValidationReport {
                    violation: Some(MetricViolation::Asymmetry {
                        i,
                        j,
                        forward,
                        backward,
                    }),
                };
            }
        }
    }
    for x in 0..n {
        for z in x + 1..n {
            let direct = metric.dist(x, z);
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                let detour = metric.dist(x, y) + metric.dist(y, z);
                if detour < direct - TRIANGLE_TOLERANCE {
                    return ValidationReport {
                        violation: Some(MetricViolation::Triangle {
                            x,
                            y,
                            z,
                            detour,
                            direct,
                        }),
                    };
                }
            }
        }
    }
    ValidationReport { violation: None }
}

// ---------------------------------------------------------------------------
// Shortest-path closure

/// Replaces each entry of a symmetric, zero-diagonal weight matrix with
/// the shortest-path distance over the complete weighted graph, yielding a
/// valid metric. Idempotent on inputs that already satisfy the triangle
/// inequality. `weights` is row-major n x n.
pub fn shortest_path_closure(weights: &[f64], n: usize) -> Result<DenseMetric> {
    if weights.len() != n * n {
        return Err(Error::usage(format!(
            "weight matrix has {} entries, expected {}",
            weights.len(),
            n * n
        )));
    }
    for i in 0..n {
        if weights[i * n + i] != 0.0 {
            return Err(Error::usage(format!("nonzero diagonal at point {i}")));
        }
        for j in 0..n {
            let w = weights[i * n + j];
            if !w.is_finite() || w < 0.0 {
                return Err(Error::usage(format!("invalid weight {w} at ({i}, {j})")));
            }
            if weights[j * n + i] != w {
                return Err(Error::usage(format!("asymmetric weights at ({i}, {j})")));
            }
        }
    }
    let mut d = weights.to_vec();
    // Floyd-Warshall; symmetry is preserved because both relaxations of a
    // pair add the same two operands.
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            for j in 0..n {
                let through = dik + d[k * n + j];
                if through < d[i * n + j] {
                    d[i * n + j] = through;
                }
            }
        }
    }
    DenseMetric::new(n, d)
}
