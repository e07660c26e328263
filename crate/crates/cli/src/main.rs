//! Command-line front end: generate instances, solve them, verify the
//! approximation ratio, dump query traces, and benchmark query scaling.
//!
//! Exit codes: 0 success (and verification pass), 1 runtime or
//! verification failure, 2 usage error.

mod bench;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use onemedian::{
    find_median, find_median_parallel, generate, read_instance, validate_metric, verify_ratio,
    write_instance, DenseMetric, Error, GenSpec, Instance, MetricKind, RecordingOracle,
};

const USAGE: &str = "\
usage: onemedian <command> [flags]

commands:
  gen     --kind K --n N [--dim D] [--density P] [--seed S] --out FILE
          write a generated instance file
          kinds: uniform | line | cycle | euclidean | graph
  solve   --input FILE --h H [--validate] [--trace FILE] [--parallel]
          run the solver; prints index, proxy cost, query count, base t
  verify  --input FILE --h H
          solve, then compare against the exact median (exit 0 iff the
          ratio is within the 2h bound)
  bench   --kind K --h H --n-list N1,N2,... [--dim D] [--density P]
          [--seed S] [--exact-max N0] --csv FILE
          time the solver per n and write one CSV row each; a final
          '# slope=...' comment fits log(queries) against log(n)

exit codes: 0 success/pass, 1 runtime or verification failure, 2 usage error";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match args.first().map(String::as_str) {
        Some("gen") => run(cmd_gen(&args[1..])),
        Some("solve") => run(cmd_solve(&args[1..])),
        Some("verify") => run(cmd_verify(&args[1..])),
        Some("bench") => run(cmd_bench(&args[1..])),
        Some("--help") | Some("-h") | Some("help") => {
            println!("{USAGE}");
            0
        }
        Some(other) => {
            eprintln!("unknown command '{other}'\n{USAGE}");
            2
        }
        None => {
            eprintln!("{USAGE}");
            2
        }
    };
    ExitCode::from(code)
}

fn run(outcome: Result<u8, CliError>) -> u8 {
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}\n{USAGE}");
            2
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            1
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(err: Error) -> CliError {
        if err.is_usage() {
            CliError::Usage(err.to_string())
        } else {
            CliError::Runtime(err.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> CliError {
        CliError::Runtime(err.to_string())
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

// ---------------------------------------------------------------------------
// Flag parsing

struct Flags {
    values: Vec<(String, Option<String>)>,
}

impl Flags {
    /// `switches` take no value; everything else does.
    fn parse(args: &[String], switches: &[&str]) -> Result<Flags, CliError> {
        let mut values = Vec::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let Some(name) = arg.strip_prefix("--") else {
                return Err(usage(format!("unexpected argument '{arg}'")));
            };
            if switches.contains(&name) {
                values.push((name.to_string(), None));
            } else {
                let value = it
                    .next()
                    .ok_or_else(|| usage(format!("flag --{name} needs a value")))?;
                values.push((name.to_string(), Some(value.clone())));
            }
        }
        Ok(Flags { values })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, v)| v.as_deref())
    }

    fn has(&self, name: &str) -> bool {
        self.values.iter().any(|(n, _)| n == name)
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .ok_or_else(|| usage(format!("missing required flag --{name}")))
    }

    fn parse_number<T: FromStr>(&self, name: &str, what: &str) -> Result<Option<T>, CliError> {
        match self.get(name) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| usage(format!("--{name} expects {what}, got '{raw}'"))),
        }
    }

    fn reject_unknown(&self, known: &[&str]) -> Result<(), CliError> {
        for (name, _) in &self.values {
            if !known.contains(&name.as_str()) {
                return Err(usage(format!("unknown flag --{name}")));
            }
        }
        Ok(())
    }
}

fn spec_from_flags(flags: &Flags) -> Result<GenSpec, CliError> {
    let kind: MetricKind = flags.require("kind")?.parse()?;
    let n: usize = flags
        .parse_number("n", "a point count")?
        .ok_or_else(|| usage("missing required flag --n"))?;
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let mut spec = GenSpec::new(kind, n);
    if let Some(dim) = flags.parse_number("dim", "a dimension")? {
        spec = spec.with_dim(dim);
    }
    if let Some(seed) = flags.parse_number("seed", "a 64-bit seed")? {
        spec = spec.with_seed(seed);
    }
    if let Some(density) = flags.parse_number("density", "a density in (0, 1]")? {
        spec = spec.with_density(density);
    }
    Ok(spec)
}

fn parse_h(flags: &Flags) -> Result<u32, CliError> {
    let h: u32 = flags
        .parse_number("h", "an integer level count")?
        .ok_or_else(|| usage("missing required flag --h"))?;
    if h < 2 {
        return Err(usage(format!("--h must be at least 2, got {h}")));
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_gen(args: &[String]) -> Result<u8, CliError> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&["kind", "n", "dim", "density", "seed", "out"])?;
    let spec = spec_from_flags(&flags)?;
    let out = PathBuf::from(flags.require("out")?);
    let instance = generate(&spec)?;
    write_instance(&instance, &out)?;
    Ok(0)
}

fn cmd_solve(args: &[String]) -> Result<u8, CliError> {
    let flags = Flags::parse(args, &["validate", "parallel"])?;
    flags.reject_unknown(&["input", "h", "validate", "trace", "parallel"])?;
    let h = parse_h(&flags)?;
    let input = PathBuf::from(flags.require("input")?);
    let instance = read_instance(&input)?;

    if flags.has("validate") {
        let dense = match &instance {
            Instance::Dense(m) => m.clone(),
            other => DenseMetric::from_oracle(other),
        };
        let report = validate_metric(&dense);
        if let Some(violation) = report.violation {
            return Err(CliError::Runtime(format!(
                "input is not a metric: {violation}"
            )));
        }
    }

    let trace_path = flags.get("trace").map(PathBuf::from);
    let parallel = flags.has("parallel");

    let (result, recorded) = if let Some(path) = &trace_path {
        let recorder = RecordingOracle::new(&instance);
        let result = if parallel {
            find_median_parallel(&recorder, h)?
        } else {
            find_median(&recorder, h)?
        };
        write_trace(path, &recorder.trace())?;
        let count = recorder.count();
        (result, Some(count))
    } else {
        let result = if parallel {
            find_median_parallel(&instance, h)?
        } else {
            find_median(&instance, h)?
        };
        (result, None)
    };

    if let Some(recorded) = recorded {
        debug_assert_eq!(recorded, result.queries);
    }
    println!(
        "index={} proxy={} queries={} t={}",
        result.index,
        result.proxy_cost,
        result.queries,
        result.params.base()
    );
    Ok(0)
}

fn write_trace(path: &Path, trace: &[(u32, u32)]) -> Result<(), CliError> {
    use std::io::Write;
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    for &(i, j) in trace {
        writeln!(out, "{i} {j}")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_verify(args: &[String]) -> Result<u8, CliError> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&["input", "h"])?;
    let h = parse_h(&flags)?;
    let input = PathBuf::from(flags.require("input")?);
    let instance = read_instance(&input)?;
    let report = verify_ratio(&instance, h)?;
    println!(
        "ratio={:?} bound={} {}",
        report.ratio,
        report.bound,
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(if report.pass { 0 } else { 1 })
}

fn cmd_bench(args: &[String]) -> Result<u8, CliError> {
    let flags = Flags::parse(args, &[])?;
    flags.reject_unknown(&[
        "kind",
        "n",
        "dim",
        "density",
        "seed",
        "h",
        "n-list",
        "exact-max",
        "csv",
    ])?;
    let h = parse_h(&flags)?;
    let kind: MetricKind = flags.require("kind")?.parse()?;
    let list = flags.require("n-list")?;
    let mut sizes = Vec::new();
    for token in list.split(',').filter(|t| !t.is_empty()) {
        let n: usize = token
            .parse()
            .map_err(|_| usage(format!("--n-list expects integers, got '{token}'")))?;
        if n == 0 {
            return Err(usage("--n-list entries must be at least 1"));
        }
        sizes.push(n);
    }
    if sizes.is_empty() {
        return Err(usage("--n-list must name at least one size"));
    }
    let seed: u64 = flags.parse_number("seed", "a 64-bit seed")?.unwrap_or(0);
    let dim: usize = flags.parse_number("dim", "a dimension")?.unwrap_or(2);
    let density: f64 = flags
        .parse_number("density", "a density in (0, 1]")?
        .unwrap_or(1.0);
    let exact_max: usize = flags
        .parse_number("exact-max", "a point count")?
        .unwrap_or(4096);
    let csv = PathBuf::from(flags.require("csv")?);

    let config = bench::BenchConfig {
        kind,
        h,
        sizes,
        seed,
        dim,
        density,
        exact_max,
    };
    bench::run(&config, &csv)?;
    Ok(0)
}
