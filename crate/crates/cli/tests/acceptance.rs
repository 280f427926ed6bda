//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are fixed here and never adjusted to make a run pass.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

use std::process::{Command as Process, ExitCode};
use std::time::Instant;

use areamean_core::auxiliary::{
    abc_at, aux_seven, case_analysis_signs, discriminant, discriminant_dual_path, g_functions,
    identity_check, lemma4a_residual, sandwich_check, y_of,
};
use areamean_core::convexity::{log_grid, raw_report, three_point_check};
use areamean_core::means::default_angular_nodes;
use areamean_core::{
    area_mean, circle_mean, convexity_report, corpus_generate, CorpusEntry, CorpusSpec, GridSpec,
    Params, PowerSeries, SeriesMean, Verdict,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const P_SET: [f64; 4] = [0.5, 1.0, 2.0, 3.5];
const ALPHA_SET: [f64; 5] = [-2.0, -1.5, -1.0, -0.5, 0.0];
/// The sandwich needs alpha < 0.
const SANDWICH_ALPHAS: [f64; 5] = [-2.0, -1.5, -1.0, -0.5, -0.05];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn corpus() -> Vec<CorpusEntry> {
    corpus_generate(&CorpusSpec::default())
}

/// `n` points from `lo` to `hi` inclusive.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `n` points strictly inside `(lo, hi)`.
fn interior(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

fn theorem1() -> Outcome {
    let corpus = corpus();
    let grid = GridSpec::new(512, 1e-4, 0.999).unwrap();
    let cells: Vec<(f64, f64, &CorpusEntry)> = P_SET
        .iter()
        .flat_map(|&p| ALPHA_SET.iter().map(move |&a| (p, a)))
        .flat_map(|(p, a)| corpus.iter().map(move |e| (p, a, e)))
        .collect();
    let start = Instant::now();
    let results: Vec<Result<(f64, f64), String>> = cells
        .par_iter()
        .map(|&(p, alpha, e)| {
            let mean = SeriesMean::new(&e.series, p).map_err(|err| err.to_string())?;
            let report =
                raw_report(&mean, Params { p, alpha }, &grid).map_err(|err| err.to_string())?;
            Ok((report.worst_ratio, report.min_delta))
        })
        .collect();
    let elapsed = start.elapsed();
    let mut worst = (f64::INFINITY, String::new());
    let mut failures = Vec::new();
    for ((p, alpha, e), r) in cells.iter().zip(&results) {
        match r {
            // worst_ratio = min over the grid of Delta / (1e-8 scale).
            Ok((ratio, _)) => {
                if *ratio < worst.0 {
                    worst = (*ratio, format!("p={p} alpha={alpha} f={}", e.id));
                }
                if !(*ratio >= -1.0) {
                    failures.push(format!("p={p} alpha={alpha} f={} ratio {ratio:e}", e.id));
                }
            }
            Err(err) => failures.push(format!("p={p} alpha={alpha} f={}: {err}", e.id)),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} cells x 512 points, worst Delta/(1e-8 scale) = {:.3e} ({}), {:.1}s{}",
            cells.len(),
            worst.0,
            worst.1,
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; failing: {failures:?}") }
        ),
    )
}

fn counterexample() -> Outcome {
    let z = PowerSeries::monomial(1);
    let report = convexity_report(&z, 2.0, 1.0, &GridSpec::default());
    let verdict_ok = report.verdict == Verdict::Violated && report.min_delta < -1e-3;
    let mut worst = 0.0f64;
    for x in log_grid(64, 1e-4, 0.999) {
        let closed = x * (3.0 - 2.0 * x) / (3.0 * (2.0 - x));
        let got = area_mean(&z, 2.0, 1.0, x.sqrt()).unwrap_or(f64::NAN);
        worst = worst.max(((got - closed) / closed).abs());
    }
    let ok = verdict_ok && worst <= 1e-10;
    outcome(
        ok,
        format!(
            "verdict {}, min Delta {:.4e}; quotient vs closed form max rel err {worst:.2e} (limit 1e-10)",
            report.verdict, report.min_delta
        ),
    )
}

fn parseval() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let degree = rng.gen_range(0..=12);
        let coeffs: Vec<Complex64> = (0..=degree)
            .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let x: f64 = rng.gen_range(0.0..1.0);
        let f = PowerSeries::new(coeffs.clone()).unwrap();
        let got = circle_mean(&f, 2.0, x.sqrt(), default_angular_nodes(&f));
        // sum |a_k|^2 x^k, summed directly.
        let want: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (c.re * c.re + c.im * c.im) * x.powi(k as i32))
            .sum();
        worst = worst.max((got - want).abs() / (1.0 + want));
    }
    outcome(worst <= 1e-12, format!("1000 random (f, x): max |err|/(1+value) = {worst:.2e} (limit 1e-12)"))
}

fn lemma4() -> Outcome {
    let alphas = linspace(-2.0, 0.0, 64);
    let xs = linspace(0.0, 0.999, 513)[1..].to_vec();
    let (mut min_g, mut max_res) = (f64::INFINITY, 0.0f64);
    let mut errors = 0;
    for &alpha in &alphas {
        for &x in &xs {
            match (g_functions(alpha, x), lemma4a_residual(alpha, x)) {
                (Ok(g), Ok(r)) => {
                    min_g = min_g.min(g.g1).min(g.g2).min(g.g3);
                    max_res = max_res.max(r.abs());
                }
                _ => errors += 1,
            }
        }
    }
    outcome(
        errors == 0 && min_g >= -1e-12 && max_res <= 1e-13,
        format!(
            "64x512 grid: min g = {min_g:.3e} (limit -1e-12), max identity residual {max_res:.2e} (limit 1e-13), {errors} errors"
        ),
    )
}

fn lemma5() -> Outcome {
    let corpus = corpus();
    let xs = log_grid(128, 1e-4, 0.999);
    let cells: Vec<(&CorpusEntry, f64)> =
        corpus.iter().flat_map(|e| P_SET.iter().map(move |&p| (e, p))).collect();
    let per_cell: Vec<(usize, usize, f64, usize)> = cells
        .par_iter()
        .map(|&(e, p)| {
            let (mut checked, mut nonpositive, mut worst, mut errors) = (0, 0, 0.0f64, 0);
            for &x in &xs {
                let Ok(y) = y_of(&e.series, p, x) else {
                    errors += 1;
                    continue;
                };
                for alpha in ALPHA_SET {
                    let (Ok(abc), Ok(dual)) = (abc_at(x, y, alpha), discriminant_dual_path(x, y, alpha))
                    else {
                        errors += 1;
                        continue;
                    };
                    let disc = discriminant(abc.a, abc.b, abc.c);
                    worst = worst.max(dual);
                    if y > 0.0 {
                        checked += 1;
                        if !(disc > 0.0) {
                            nonpositive += 1;
                        }
                    }
                }
            }
            (checked, nonpositive, worst, errors)
        })
        .collect();
    let checked: usize = per_cell.iter().map(|c| c.0).sum();
    let nonpositive: usize = per_cell.iter().map(|c| c.1).sum();
    let worst = per_cell.iter().map(|c| c.2).fold(0.0, f64::max);
    let errors: usize = per_cell.iter().map(|c| c.3).sum();
    outcome(
        nonpositive == 0 && worst <= 1e-10 && errors == 0 && checked > 0,
        format!(
            "{checked} points with y > 0: {nonpositive} with B^2-4AC <= 0; dual-path max rel diff {worst:.2e} (limit 1e-10); {errors} errors"
        ),
    )
}

fn eq5_identity() -> Outcome {
    match identity_check(10_000, 42) {
        Ok(s) => outcome(
            s.max_eq5() <= 1e-8 && s.max_dual() <= 1e-10 && s.samples == 10_000,
            format!(
                "10^4 samples: max residual {:.2e} (limit 1e-8), dual-path E/F {:.2e} (limit 1e-10)",
                s.max_eq5(),
                s.max_dual()
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn case_analysis() -> Outcome {
    let mut sign_fail = Vec::new();
    let mut degenerate = 0;
    for alpha in interior(-2.0, 0.0, 32) {
        for x in interior(0.0, 0.999, 128) {
            match case_analysis_signs(x, alpha) {
                Ok(s) if s.holds(1e-9) => {}
                Ok(s) => sign_fail.push(format!("({alpha}, {x}): {s:?}")),
                Err(_) => degenerate += 1,
            }
        }
    }
    // delta and d on corpus grids inside the theorem range.
    let corpus = corpus();
    let xs = log_grid(32, 1e-4, 0.999);
    let cells: Vec<(&CorpusEntry, f64, f64)> = corpus
        .iter()
        .flat_map(|e| P_SET.iter().flat_map(move |&p| SANDWICH_ALPHAS.iter().map(move |&a| (e, p, a))))
        .collect();
    let per_cell: Vec<(f64, f64, Vec<String>)> = cells
        .par_iter()
        .map(|&(e, p, alpha)| {
            let (mut worst_delta, mut worst_d, mut errors) = (f64::INFINITY, f64::INFINITY, vec![]);
            for &x in &xs {
                match sandwich_check(&e.series, p, alpha, x) {
                    // delta = h - 2CM/(B+S), both terms of size at most h.
                    Ok(s) => worst_delta = worst_delta.min(s.m * s.lower / (1.0 + s.h.abs())),
                    Err(err) => errors.push(format!("{} p={p} a={alpha} x={x}: {err}", e.id)),
                }
                let bundle = y_of(&e.series, p, x).and_then(|y| aux_seven(x, y, alpha));
                match bundle {
                    Ok(b) => {
                        let scale = 1.0 + (b.e * b.s).abs() + b.f.abs();
                        worst_d = worst_d.min(b.d() / scale);
                    }
                    Err(err) => errors.push(format!("{} p={p} a={alpha} x={x}: {err}", e.id)),
                }
            }
            (worst_delta, worst_d, errors)
        })
        .collect();
    let worst_delta = per_cell.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let worst_d = per_cell.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let errors: Vec<&String> = per_cell.iter().flat_map(|c| &c.2).collect();
    outcome(
        sign_fail.is_empty()
            && degenerate == 0
            && worst_delta >= -1e-9
            && worst_d >= -1e-8
            && errors.is_empty(),
        format!(
            "32x128 signs: {} failures, {degenerate} degenerate; corpus min delta/scale {worst_delta:.3e} (limit -1e-9), min d/scale {worst_d:.3e} (limit -1e-8); {} errors{}",
            sign_fail.len(),
            errors.len(),
            sign_fail.first().map(|s| format!("; first {s}")).unwrap_or_default()
        ),
    )
}

fn breakdown() -> Outcome {
    let alpha = -2.5;
    let mut negative = None;
    let mut consistent = true;
    for x in linspace(0.99, 0.9999, 100) {
        let (Ok(signs), Ok(bundle)) = (case_analysis_signs(x, alpha), aux_seven(x, 0.0, alpha))
        else {
            consistent = false;
            continue;
        };
        // The closed form of E(0) and the general E at y = 0 must agree in sign.
        consistent &= (signs.e_at_0 < 0.0) == (bundle.e < 0.0);
        if signs.e_at_0 < 0.0 && negative.is_none() {
            negative = Some((x, signs.e_at_0));
        }
    }
    match negative {
        Some((x, e)) => outcome(
            consistent,
            format!("alpha = -2.5: E(0) = {e:.3e} < 0 at x = {x}; closed form and general E agree: {consistent}"),
        ),
        None => outcome(false, "alpha = -2.5: E(0) >= 0 on all of [0.99, 0.9999]"),
    }
}

fn three_point() -> Outcome {
    let (r1, r2, theta) = (0.3, 0.8, 0.4);
    let z = PowerSeries::monomial(1);
    let one_z = PowerSeries::from_real(&[1.0, 1.0]).unwrap();
    let affine = three_point_check(&z, 2.0, 0.0, r1, r2, theta);
    let convex = three_point_check(&one_z, 2.0, 0.0, r1, r2, theta);
    let concave = three_point_check(&z, 2.0, 1.0, r1, r2, theta);
    match (affine, convex, concave) {
        (Ok(a), Ok(b), Ok(c)) => outcome(
            a.abs() <= 1e-12 && b > 0.0 && c < 0.0,
            format!("slack z,alpha=0: {a:.2e} (|.| <= 1e-12); 1+z,alpha=0: {b:.3e} (> 0); z,alpha=1: {c:.3e} (< 0)"),
        ),
        (a, b, c) => outcome(false, format!("evaluation failed: {a:?} {b:?} {c:?}")),
    }
}

fn determinism() -> Outcome {
    let args = [
        "sweep",
        "--p-list",
        "0.5,2",
        "--alpha-list=-1,1",
        "--grid-points",
        "64",
        "--seed",
        "42",
    ];
    let run = || Process::new(env!("CARGO_BIN_EXE_areamean")).args(args).output();
    match (run(), run()) {
        (Ok(a), Ok(b)) => {
            let lines = a.stdout.iter().filter(|&&c| c == b'\n').count();
            outcome(
                a.status.success() && b.status.success() && a.stdout == b.stdout && lines == 36,
                format!(
                    "two sweeps, {lines} JSON lines each: byte-identical = {}, exit codes {:?}/{:?}",
                    a.stdout == b.stdout,
                    a.status.code(),
                    b.status.code()
                ),
            )
        }
        (a, b) => outcome(false, format!("could not run the binary: {:?} {:?}", a.err(), b.err())),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("log-convexity on the theorem range", theorem1),
        ("concave example at alpha = 1", counterexample),
        ("Parseval oracle for p = 2", parseval),
        ("g-functions and the phi identity", lemma4),
        ("discriminant positivity", lemma5),
        ("factorization identity", eq5_identity),
        ("case analysis signs, delta and d", case_analysis),
        ("E(0) < 0 at alpha = -2.5", breakdown),
        ("three-point inequality", three_point),
        ("sweep determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
