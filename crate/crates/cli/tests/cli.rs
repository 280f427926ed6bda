use std::process::Command as Process;

use areamean_cli::*;
use areamean_core::{Cell, Table};
use clap::Parser;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_areamean"))
}

fn config(args: &[&str]) -> CliConfig {
    let mut argv = vec!["areamean"];
    argv.extend_from_slice(args);
    CliConfig::try_parse_from(argv).unwrap()
}

fn number(table: &Table, row: usize, column: &str) -> f64 {
    let j = table.columns().iter().position(|c| c == column).unwrap();
    match table.rows()[row][j] {
        Cell::Number(v) => v,
        ref other => panic!("{column}: {other:?}"),
    }
}

#[test]
fn means_of_z_at_half_radius() {
    // M_2(z, r) = x, so the unweighted area mean is x/2 = 0.125 at r = 0.5.
    let t = cmd_means(&config(&["--coeffs", "0,1", "--p", "2", "--alpha", "0", "--grid-points", "5"]))
        .unwrap();
    assert_eq!(t.rows().len(), 5);
    assert_eq!(number(&t, 2, "r"), 0.5);
    assert!((number(&t, 2, "M_p_alpha") - 0.125).abs() < 1e-14);
    assert!((number(&t, 2, "M_p") - 0.25).abs() < 1e-15);
}

#[test]
fn means_with_weight_one() {
    // (x^2/2 - x^3/3) / (x - x^2/2) at x = 1/2.
    let t = cmd_means(&config(&["--coeffs", "0,1", "--alpha", "1", "--x-values", "0.5"])).unwrap();
    assert!((number(&t, 0, "M_p_alpha") - 2.0 / 9.0).abs() < 1e-14);
}

#[test]
fn means_of_a_constant_are_constant() {
    let t = cmd_means(&config(&["--coeffs", "3", "--p", "1.5", "--alpha", "-0.7"])).unwrap();
    let want = 3f64.powf(1.5);
    for i in 0..t.rows().len() {
        assert!((number(&t, i, "M_p") - want).abs() <= 1e-14 * want);
        assert!((number(&t, i, "M_p_alpha") - want).abs() <= 1e-14 * want);
    }
}

#[test]
fn csv_round_trips_bit_for_bit() {
    let t = cmd_means(&config(&["--coeffs", "1,0.5-0.25i,0.1", "--p", "0.7", "--grid-points", "9"]))
        .unwrap();
    let text = t.to_csv();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(header, t.columns());
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.unwrap();
        for (j, field) in record.iter().enumerate() {
            let Cell::Number(v) = t.rows()[i][j] else { unreachable!() };
            assert_eq!(field.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        rows += 1;
    }
    assert_eq!(rows, 9);
}

#[test]
fn bad_coefficients_report_the_column() {
    let err = cmd_means(&config(&["--coeffs", "0,1,2x"])).unwrap_err();
    assert_eq!(err.code, EXIT_INPUT);
    assert!(err.message.contains("line 1, column 5"), "{}", err.message);
}

#[test]
fn domain_errors_exit_with_input_code() {
    let err = cmd_means(&config(&["--p", "-1"])).unwrap_err();
    assert_eq!(err.code, EXIT_INPUT);
    let err = cmd_convexity(&config(&["--x-min", "0.5", "--x-max", "0.4"])).unwrap_err();
    assert_eq!(err.code, EXIT_INPUT);
}

#[test]
fn convexity_verdicts() {
    let r = cmd_convexity(&config(&["--coeffs", "0,0,1", "--alpha", "-1", "--grid-points", "64"]))
        .unwrap();
    assert_eq!(r.code, EXIT_OK);
    assert!(r.notes[0].starts_with("verdict convex"), "{:?}", r.notes);

    let r = cmd_convexity(&config(&[
        "--coeffs", "0,1", "--alpha", "1", "--grid-points", "64", "--format", "json",
    ]))
    .unwrap();
    // Outside -2 <= alpha <= 0 a violation is a finding, not a failure.
    assert_eq!(r.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&r.body).unwrap();
    assert_eq!(v["verdict"], "violated");

    let r = cmd_convexity(&config(&["--coeffs", "2", "--grid-points", "32", "--format", "json"]))
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.body).unwrap();
    assert!(v["min_delta"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn lemmas_minima() {
    let r = cmd_lemmas(&config(&["--alpha", "-1", "--grid-points", "64", "--format", "json"]))
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.body).unwrap();
    let minima = v["minima"].as_object().unwrap();
    for (name, min) in minima {
        assert!(min.as_f64().unwrap() >= -1e-9, "{name} = {min}");
    }
    assert!(v["e_at_0_negative_from"].is_null());

    let r = cmd_lemmas(&config(&["--alpha", "0", "--grid-points", "32", "--format", "json"]))
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.body).unwrap();
    for row in v["rows"].as_array().unwrap() {
        for g in ["g1", "g2", "g3"] {
            assert!(row[g].as_f64().unwrap().abs() <= 1e-13, "{row}");
        }
    }

    let r = cmd_lemmas(&config(&["--alpha", "-2.5", "--grid-points", "64", "--x-max", "0.9999"]))
        .unwrap();
    assert!(r.notes.iter().any(|n| n.starts_with("E(0) < 0")), "{:?}", r.notes);
}

#[test]
fn identity_is_deterministic_and_passes() {
    let c = config(&["--samples", "500", "--seed", "7"]);
    let a = cmd_identity(&c).unwrap();
    let b = cmd_identity(&c).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.code, EXIT_OK);

    let r = cmd_identity(&config(&["--samples", "0"])).unwrap();
    assert_eq!(r.code, EXIT_OK);
    assert!(r.notes[0].starts_with("warning"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "# defaults for this run\np = 0.5\nalpha=-2\ngrid_points = 3\n").unwrap();
    let args = [
        "areamean",
        "means",
        "--config",
        path.to_str().unwrap(),
        "--alpha",
        "0",
    ]
    .map(Into::into)
    .to_vec();
    let args = expand_config(args).unwrap();
    let cli = Cli::try_parse_from(args).unwrap();
    let c = cli.command.config();
    assert_eq!((c.p, c.alpha, c.grid_points), (0.5, 0.0, 3));
}

#[test]
fn config_file_can_name_the_command() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "command = identity\nsamples = 12\n").unwrap();
    let args = ["areamean", "--config", path.to_str().unwrap()].map(Into::into).to_vec();
    let cli = Cli::try_parse_from(expand_config(args).unwrap()).unwrap();
    assert!(matches!(cli.command, Command::Identity(ref c) if c.samples == 12));
}

#[test]
fn config_file_syntax_errors_name_the_line() {
    let err = parse_config("p = 1\nalpha\n", std::path::Path::new("x.cfg")).unwrap_err();
    assert_eq!(err.code, EXIT_INPUT);
    assert!(err.message.contains("line 2"), "{}", err.message);
}

#[test]
fn binary_exit_codes() {
    let out = bin().args(["means", "--coeffs", "1,?"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["means", "--grid-points", "many"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["identity", "--samples", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn sweep_output_is_independent_of_jobs() {
    let args = [
        "sweep", "--p-list", "2", "--alpha-list=-1,1", "--degrees", "1", "--random-count", "1",
        "--grid-points", "48",
    ];
    let one = bin().args(args).args(["--jobs", "1"]).output().unwrap();
    let many = bin().args(args).args(["--jobs", "3"]).output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let lines: Vec<serde_json::Value> = String::from_utf8(one.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[..3].iter().all(|l| l["verdict"] == "convex"));
    assert_eq!(lines[3]["verdict"], "violated");
}

#[test]
fn sweep_writes_summary_and_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let corpus = dir.path().join("corpus.json");
    let out = dir.path().join("cells.jsonl");
    let status = bin()
        .args(["sweep", "--p-list", "1", "--alpha-list", "0", "--degrees", "2", "--random-count", "0"])
        .args(["--grid-points", "16", "--summary", summary.to_str().unwrap()])
        .args(["--corpus-out", corpus.to_str().unwrap(), "--output", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(summary).unwrap();
    assert!(text.starts_with("p,alpha,function,verdict"));
    assert_eq!(text.lines().count(), 3);
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 2);
    let entries: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(corpus).unwrap()).unwrap();
    assert_eq!(entries[0]["id"], "z^2");
    assert_eq!(entries[1]["id"], "1+z");
}
