//! End-to-end runs of the binary: output formats, exit codes, file
//! contracts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_onemedian"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("onemedian_cli_{name}"))
}

#[test]
fn solve_prints_the_worked_example() {
    let file = temp_path("line4.txt");
    let gen = run(&["gen", "--kind", "line", "--n", "4", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&gen), 0);
    let solve = run(&["solve", "--input", file.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&solve), 0);
    assert_eq!(stdout(&solve), "index=0 proxy=6 queries=12 t=2\n");
    std::fs::remove_file(&file).ok();
}

#[test]
fn verify_reports_ratio_and_passes() {
    let file = temp_path("verify_line4.txt");
    run(&["gen", "--kind", "line", "--n", "4", "--out", file.to_str().unwrap()]);
    let verify = run(&["verify", "--input", file.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&verify), 0);
    assert_eq!(stdout(&verify), "ratio=1.5 bound=4 PASS\n");
    std::fs::remove_file(&file).ok();
}

#[test]
fn verify_on_uniform_instance() {
    let file = temp_path("verify_uniform16.txt");
    run(&["gen", "--kind", "uniform", "--n", "16", "--out", file.to_str().unwrap()]);
    let verify = run(&["verify", "--input", file.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&verify), 0);
    assert_eq!(stdout(&verify), "ratio=1.0 bound=4 PASS\n");
    std::fs::remove_file(&file).ok();
}

#[test]
fn single_point_instance_solves_trivially() {
    let file = temp_path("single.txt");
    run(&["gen", "--kind", "uniform", "--n", "1", "--out", file.to_str().unwrap()]);
    let solve = run(&["solve", "--input", file.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&solve), 0);
    assert_eq!(stdout(&solve), "index=0 proxy=0 queries=0 t=1\n");
    let verify = run(&["verify", "--input", file.to_str().unwrap(), "--h", "3"]);
    assert_eq!(code(&verify), 0);
    assert_eq!(stdout(&verify), "ratio=1.0 bound=6 PASS\n");
    std::fs::remove_file(&file).ok();
}

#[test]
fn usage_errors_exit_with_code_two() {
    let file = temp_path("usage_line4.txt");
    run(&["gen", "--kind", "line", "--n", "4", "--out", file.to_str().unwrap()]);
    // h below 2 is rejected before any work happens.
    assert_eq!(code(&run(&["solve", "--input", file.to_str().unwrap(), "--h", "1"])), 2);
    // n = 0 is not an instance.
    assert_eq!(code(&run(&["gen", "--kind", "graph", "--n", "0", "--out", "/dev/null"])), 2);
    // empty n-list
    assert_eq!(
        code(&run(&[
            "bench", "--kind", "cycle", "--h", "2", "--n-list", "", "--csv", "/dev/null"
        ])),
        2
    );
    // unknown flag and unknown kind
    assert_eq!(code(&run(&["solve", "--inptu", "x", "--h", "2"])), 2);
    assert_eq!(code(&run(&["gen", "--kind", "torus", "--n", "4", "--out", "/dev/null"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    std::fs::remove_file(&file).ok();
}

#[test]
fn runtime_errors_exit_with_code_one() {
    assert_eq!(
        code(&run(&["solve", "--input", "/nonexistent/instance.txt", "--h", "2"])),
        1
    );
    // Well-formed file whose entries break the triangle inequality:
    // loading succeeds, --validate rejects it.
    let file = temp_path("broken_triangle.txt");
    std::fs::write(&file, "metric-matrix 1\nn 3\n0 5 10\n5 0 1\n10 1 0\n").unwrap();
    let bare = run(&["solve", "--input", file.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&bare), 0);
    let checked = run(&[
        "solve",
        "--input",
        file.to_str().unwrap(),
        "--h",
        "2",
        "--validate",
    ]);
    assert_eq!(code(&checked), 1);
    std::fs::remove_file(&file).ok();
}

#[test]
fn generation_is_reproducible_byte_for_byte() {
    let a = temp_path("repro_a.txt");
    let b = temp_path("repro_b.txt");
    for file in [&a, &b] {
        let gen = run(&[
            "gen", "--kind", "euclidean", "--n", "10", "--dim", "2", "--seed", "7", "--out",
            file.to_str().unwrap(),
        ]);
        assert_eq!(code(&gen), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let header = std::fs::read_to_string(&a).unwrap();
    assert!(header.starts_with("euclidean-points 1\nn 10 dim 2\n"));
    std::fs::remove_file(&a).ok();
    std::fs::remove_file(&b).ok();
}

#[test]
fn trace_file_matches_schedule_and_parallel_mode_agrees() {
    let file = temp_path("trace_input.txt");
    run(&["gen", "--kind", "cycle", "--n", "16", "--out", file.to_str().unwrap()]);

    let serial_trace = temp_path("trace_serial.txt");
    let serial = run(&[
        "solve",
        "--input",
        file.to_str().unwrap(),
        "--h",
        "2",
        "--trace",
        serial_trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&serial), 0);

    let parallel_trace = temp_path("trace_parallel.txt");
    let parallel = run(&[
        "solve",
        "--input",
        file.to_str().unwrap(),
        "--h",
        "2",
        "--trace",
        parallel_trace.to_str().unwrap(),
        "--parallel",
    ]);
    assert_eq!(code(&parallel), 0);
    assert_eq!(stdout(&serial), stdout(&parallel));

    let expected: String = onemedian::query_trace(16, 2)
        .iter()
        .map(|(i, j)| format!("{i} {j}\n"))
        .collect();
    assert_eq!(std::fs::read_to_string(&serial_trace).unwrap(), expected);
    assert_eq!(
        std::fs::read(&serial_trace).unwrap(),
        std::fs::read(&parallel_trace).unwrap()
    );
    for path in [&file, &serial_trace, &parallel_trace] {
        std::fs::remove_file(path).ok();
    }
}

#[test]
fn bench_writes_csv_with_slope() {
    let csv = temp_path("bench.csv");
    let bench = run(&[
        "bench", "--kind", "cycle", "--h", "2", "--n-list", "256,1024,4096", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&bench), 0);
    let content = std::fs::read_to_string(&csv).unwrap();
    let mut lines = content.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,n,h,t,queries,distinct_pairs,proxy_cost,true_cost,opt_cost,ratio,elapsed_ms,seed"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4); // 3 records + slope comment
    for row in &rows[..3] {
        assert!(row.starts_with("cycle,"));
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 12);
        assert!(!fields[8].is_empty(), "opt_cost present below exact-max");
        assert!(!fields[9].is_empty(), "ratio present below exact-max");
    }
    let slope_line = rows[3];
    assert!(slope_line.starts_with("# slope="));
    let slope: f64 = slope_line.trim_start_matches("# slope=").parse().unwrap();
    assert!((1.4..=1.6).contains(&slope), "slope {slope}");
    std::fs::remove_file(&csv).ok();
}

#[test]
fn bench_skips_exact_fields_above_threshold_and_slope_for_single_size() {
    let csv = temp_path("bench_single.csv");
    let bench = run(&[
        "bench", "--kind", "cycle", "--h", "2", "--n-list", "512", "--exact-max", "100", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&bench), 0);
    let content = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = content.lines().collect();
    assert_eq!(lines.len(), 2); // header + one record, no slope line
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 12);
    assert!(fields[8].is_empty(), "opt_cost skipped above exact-max");
    assert!(fields[9].is_empty(), "ratio skipped above exact-max");
    std::fs::remove_file(&csv).ok();
}

#[test]
fn help_text_is_available() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("usage: onemedian"));
}

#[test]
fn uniform_instance_resolves_ties_to_index_zero() {
    let file = temp_path("uniform16.txt");
    run(&["gen", "--kind", "uniform", "--n", "16", "--out", file.to_str().unwrap()]);
    let solve = run(&["solve", "--input", file.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&solve), 0);
    assert!(stdout(&solve).starts_with("index=0 "));
    std::fs::remove_file(&file).ok();
}

#[test]
fn euclidean_points_files_solve_and_verify() {
    let file = temp_path("points10.txt");
    let gen = run(&[
        "gen", "--kind", "euclidean", "--n", "10", "--dim", "3", "--seed", "42", "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(code(&gen), 0);
    let first = run(&[
        "solve",
        "--input",
        file.to_str().unwrap(),
        "--h",
        "2",
        "--validate",
    ]);
    assert_eq!(code(&first), 0);
    // Distances recompute identically from the round-tripped coordinates.
    let second = run(&["solve", "--input", file.to_str().unwrap(), "--h", "2"]);
    assert_eq!(stdout(&first), stdout(&second));
    let verify = run(&["verify", "--input", file.to_str().unwrap(), "--h", "2"]);
    assert_eq!(code(&verify), 0);
    assert!(stdout(&verify).ends_with("bound=4 PASS\n"));
    std::fs::remove_file(&file).ok();
}

#[test]
fn sparse_graph_generation_verifies() {
    let file = temp_path("sparse_graph.txt");
    let gen = run(&[
        "gen", "--kind", "graph", "--n", "24", "--density", "0.4", "--seed", "9", "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(code(&gen), 0);
    let verify = run(&["verify", "--input", file.to_str().unwrap(), "--h", "3"]);
    assert_eq!(code(&verify), 0);
    assert!(stdout(&verify).ends_with("bound=6 PASS\n"));
    std::fs::remove_file(&file).ok();
}

#[test]
fn bench_slope_at_three_levels() {
    let csv = temp_path("bench_h3.csv");
    let bench = run(&[
        "bench", "--kind", "cycle", "--h", "3", "--n-list", "512,4096,32768", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&bench), 0);
    let content = std::fs::read_to_string(&csv).unwrap();
    let slope_line = content.lines().last().unwrap();
    let slope: f64 = slope_line.trim_start_matches("# slope=").parse().unwrap();
    assert!((1.26..=1.42).contains(&slope), "slope {slope}");
    std::fs::remove_file(&csv).ok();
}
