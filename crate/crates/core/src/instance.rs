//! Seeded instance generation and instance file I/O.
//!
//! Generation is fully deterministic: the random source is splitmix64,
//! named by algorithm rather than pulled from a library so that any
//! reimplementation in any language reproduces instances byte for byte.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metric::{DenseMetric, Distance, EuclideanMetric, MetricInstance, PointIndex};
use crate::metric::shortest_path_closure;

/// splitmix64: one 64-bit word of state, one add, three xor-shifts.
#[derive(Debug, Clone)]
pub struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Rng64 {
        Rng64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// The generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Every off-diagonal distance is 1.
    Uniform,
    /// `d(i, j) = |i - j|`.
    Line,
    /// `d(i, j) = min(|i - j|, n - |i - j|)`.
    Cycle,
    /// Seeded points in the unit cube, distances on demand.
    Euclidean,
    /// Seeded integer edge weights repaired into a metric by
    /// shortest-path closure.
    Graph,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Uniform => "uniform",
            MetricKind::Line => "line",
            MetricKind::Cycle => "cycle",
            MetricKind::Euclidean => "euclidean",
            MetricKind::Graph => "graph",
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<MetricKind> {
        match s {
            "uniform" => Ok(MetricKind::Uniform),
            "line" => Ok(MetricKind::Line),
            "cycle" => Ok(MetricKind::Cycle),
            "euclidean" => Ok(MetricKind::Euclidean),
            "graph" => Ok(MetricKind::Graph),
            other => Err(Error::usage(format!("unknown metric kind '{other}'"))),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What to generate. The same spec always yields a byte-identical
/// instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: MetricKind,
    pub n: usize,
    /// Euclidean only.
    pub dim: usize,
    pub seed: u64,
    /// Graph only: probability that an edge keeps its drawn weight; the
    /// rest are stretched to a large finite weight before closure.
    pub density: f64,
}

impl GenSpec {
    pub fn new(kind: MetricKind, n: usize) -> GenSpec {
        GenSpec {
            kind,
            n,
            dim: 2,
            seed: 0,
            density: 1.0,
        }
    }

    pub fn with_dim(mut self, dim: usize) -> GenSpec {
        self.dim = dim;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> GenSpec {
        self.seed = seed;
        self
    }

    pub fn with_density(mut self, density: f64) -> GenSpec {
        self.density = density;
        self
    }
}

/// A generated or loaded instance. The structured families answer
/// distance queries from their formula in O(1) space, so large instances
/// never materialize a matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Dense(DenseMetric),
    Points(EuclideanMetric),
    Uniform { n: usize },
    Line { n: usize },
    Cycle { n: usize },
}

impl MetricInstance for Instance {
    fn len(&self) -> usize {
        match self {
            Instance::Dense(m) => m.len(),
            Instance::Points(m) => m.len(),
            Instance::Uniform { n } | Instance::Line { n } | Instance::Cycle { n } => *n,
        }
    }

    #[inline]
    fn dist(&self, i: PointIndex, j: PointIndex) -> Distance {
        match self {
            Instance::Dense(m) => m.dist(i, j),
            Instance::Points(m) => m.dist(i, j),
            Instance::Uniform { .. } => {
                if i == j {
                    0.0
                } else {
                    1.0
                }
            }
            Instance::Line { .. } => (i as f64 - j as f64).abs(),
            Instance::Cycle { n } => {
                let gap = i.abs_diff(j);
                gap.min(n - gap) as f64
            }
        }
    }
}

/// Builds the instance a spec describes.
pub fn generate(spec: &GenSpec) -> Result<Instance> {
    if spec.n == 0 {
        return Err(Error::usage("instance size must be at least 1"));
    }
    match spec.kind {
        MetricKind::Uniform => Ok(Instance::Uniform { n: spec.n }),
        MetricKind::Line => Ok(Instance::Line { n: spec.n }),
        MetricKind::Cycle => Ok(Instance::Cycle { n: spec.n }),
        MetricKind::Euclidean => {
            if spec.dim == 0 {
                return Err(Error::usage("euclidean dimension must be at least 1"));
            }
            let mut rng = Rng64::new(spec.seed);
            let mut coords = Vec::with_capacity(spec.n * spec.dim);
            for _ in 0..spec.n * spec.dim {
                coords.push(rng.next_f64());
            }
            Ok(Instance::Points(EuclideanMetric::new(spec.dim, coords)?))
        }
        MetricKind::Graph => {
            if !(spec.density > 0.0 && spec.density <= 1.0) {
                return Err(Error::usage(format!(
                    "graph density must lie in (0, 1], got {}",
                    spec.density
                )));
            }
            let n = spec.n;
            let mut rng = Rng64::new(spec.seed);
            let mut weights = vec![0.0; n * n];
            // Integer weights keep all downstream sums exact. Edges are
            // drawn in row-major upper-triangle order; dropped edges get a
            // large finite weight so the closure routes around them.
            let absent = (100 * n) as f64;
            for i in 0..n {
                for j in i + 1..n {
                    let w = (1 + rng.next_u64() % 100) as f64;
                    let w = if spec.density < 1.0 && rng.next_f64() >= spec.density {
                        absent
                    } else {
                        w
                    };
                    weights[i * n + j] = w;
                    weights[j * n + i] = w;
                }
            }
            Ok(Instance::Dense(shortest_path_closure(&weights, n)?))
        }
    }
}

// ---------------------------------------------------------------------------
// File formats

const MATRIX_HEADER: &str = "metric-matrix 1";
const POINTS_HEADER: &str = "euclidean-points 1";

/// Writes an instance to its text format: point sets to the
/// `euclidean-points` format, everything else to a full `metric-matrix`.
/// Decimals use the shortest representation that round-trips exactly.
pub fn write_instance(instance: &Instance, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    match instance {
        Instance::Points(points) => {
            writeln!(out, "{POINTS_HEADER}")?;
            writeln!(out, "n {} dim {}", points.len(), points.dim())?;
            for i in 0..points.len() {
                let row: Vec<String> = points.point(i).iter().map(|c| format!("{c}")).collect();
                writeln!(out, "{}", row.join(" "))?;
            }
        }
        other => {
            let n = other.len();
            writeln!(out, "{MATRIX_HEADER}")?;
            writeln!(out, "n {n}")?;
            let mut row = String::new();
            for i in 0..n {
                row.clear();
                for j in 0..n {
                    if j > 0 {
                        row.push(' ');
                    }
                    let d = crate::metric::distance(other, i, j);
                    row.push_str(&format!("{d}"));
                }
                writeln!(out, "{row}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let value: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, found '{token}'")))?;
    if !value.is_finite() {
        return Err(Error::parse(line, format!("non-finite value {value}")));
    }
    Ok(value)
}

fn parse_count(token: Option<&str>, line: usize, what: &str) -> Result<usize> {
    token
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| Error::parse(line, format!("expected {what}")))
}

/// Reads either instance format back. Distances and coordinates written
/// by [`write_instance`] are recovered exactly.
pub fn read_instance(path: &Path) -> Result<Instance> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty file"))?;
    let header = header?;
    match header.trim_end() {
        MATRIX_HEADER => {
            let (_, size_line) = lines
                .next()
                .ok_or_else(|| Error::parse(2, "missing size line"))?;
            let size_line = size_line?;
            let mut tokens = size_line.split_whitespace();
            if tokens.next() != Some("n") {
                return Err(Error::parse(2, "expected 'n <count>'"));
            }
            let n = parse_count(tokens.next(), 2, "a point count")?;
            if n == 0 {
                return Err(Error::parse(2, "point count must be at least 1"));
            }
            let mut data = Vec::with_capacity(n * n);
            let mut rows = 0;
            for (idx, row) in lines.by_ref() {
                let lineno = idx + 1;
                let row = row?;
                if row.trim().is_empty() {
                    continue;
                }
                if rows == n {
                    return Err(Error::parse(lineno, format!("more than {n} matrix rows")));
                }
                let mut entries = 0;
                for token in row.split_whitespace() {
                    let value = parse_value(token, lineno)?;
                    if value < 0.0 {
                        return Err(Error::parse(lineno, format!("negative distance {value}")));
                    }
                    data.push(value);
                    entries += 1;
                }
                if entries != n {
                    return Err(Error::parse(
                        lineno,
                        format!("row has {entries} entries, expected {n}"),
                    ));
                }
                rows += 1;
            }
            if rows != n {
                return Err(Error::parse(
                    rows + 3,
                    format!("found {rows} matrix rows, expected {n}"),
                ));
            }
            Ok(Instance::Dense(DenseMetric::new(n, data)?))
        }
        POINTS_HEADER => {
            let (_, size_line) = lines
                .next()
                .ok_or_else(|| Error::parse(2, "missing size line"))?;
            let size_line = size_line?;
            let mut tokens = size_line.split_whitespace();
            if tokens.next() != Some("n") {
                return Err(Error::parse(2, "expected 'n <count> dim <count>'"));
            }
            let n = parse_count(tokens.next(), 2, "a point count")?;
            if tokens.next() != Some("dim") {
                return Err(Error::parse(2, "expected 'n <count> dim <count>'"));
            }
            let dim = parse_count(tokens.next(), 2, "a dimension")?;
            if n == 0 || dim == 0 {
                return Err(Error::parse(2, "counts must be at least 1"));
            }
            let mut coords = Vec::with_capacity(n * dim);
            let mut rows = 0;
            for (idx, row) in lines.by_ref() {
                let lineno = idx + 1;
                let row = row?;
                if row.trim().is_empty() {
                    continue;
                }
                if rows == n {
                    return Err(Error::parse(lineno, format!("more than {n} point rows")));
                }
                let mut entries = 0;
                for token in row.split_whitespace() {
                    coords.push(parse_value(token, lineno)?);
                    entries += 1;
                }
                if entries != dim {
                    return Err(Error::parse(
                        lineno,
                        format!("point has {entries} coordinates, expected {dim}"),
                    ));
                }
                rows += 1;
            }
            if rows != n {
                return Err(Error::parse(
                    rows + 3,
                    format!("found {rows} point rows, expected {n}"),
                ));
            }
            Ok(Instance::Points(EuclideanMetric::new(dim, coords)?))
        }
        other => Err(Error::parse(1, format!("unrecognized header '{other}'"))),
    }
}
