//! Deterministic sublinear-time medoid selection.
//!
//! Given an `n`-point metric space presented as a distance oracle and a
//! level count `h >= 2`, [`find_median`] selects a point whose sum of
//! distances to all points is at most `2h` times the optimum, spending
//! `O(h * n^(1+1/h))` time and oracle queries. The sequence of queried
//! pairs is a pure function of `(n, h)` — the algorithm never adapts to
//! observed distances — so [`query_trace`] can reproduce it with no metric
//! at all, and the whole schedule can be audited up front.
//!
//! The crate splits into:
//!
//! * [`metric`] — the oracle trait, dense/Euclidean backends, query
//!   recording, axiom validation, shortest-path repair;
//! * [`tary`] — base-t digit arithmetic behind the offset decomposition;
//! * [`dp`] — the solver: pseudodistance walks, the two rolling tables,
//!   the canonical query schedule;
//! * [`exact`] — brute-force ground truth and ratio verification;
//! * [`instance`] — seeded generators and the two instance file formats.
//!
//! ```
//! use onemedian::{find_median, verify_ratio, GenSpec, MetricKind, generate};
//!
//! let instance = generate(&GenSpec::new(MetricKind::Graph, 40).with_seed(7)).unwrap();
//! let result = find_median(&instance, 2).unwrap();
//! let report = verify_ratio(&instance, 2).unwrap();
//! assert_eq!(report.approx_index, result.index);
//! assert!(report.pass); // ratio <= 4 guaranteed at h = 2
//! ```

pub mod dp;
pub mod error;
pub mod exact;
pub mod instance;
pub mod metric;
pub mod tary;

pub use dp::{
    distinct_pair_count, dp_base, dp_step_bounded, dp_step_full, find_median,
    find_median_parallel, find_median_with_workers, pseudo_cost, pseudo_distance, query_trace,
    DpTables, MedianResult, QueryTrace,
};
pub use error::{Error, Result};
pub use exact::{exact_median, pseudo_median_bruteforce, verify_ratio, ExactResult, VerifyReport};
pub use instance::{generate, read_instance, write_instance, GenSpec, Instance, MetricKind, Rng64};
pub use metric::{
    cost, distance, shortest_path_closure, validate_metric, DenseMetric, Distance,
    EuclideanMetric, MetricInstance, MetricViolation, PointIndex, RecordingOracle,
    ValidationReport,
};
pub use tary::{from_digits, smallest_base, suffix_value, to_digits, DigitVector, TaryParams};
