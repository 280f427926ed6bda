//! The `areamean` command line: integral means, convexity reports, the
//! lemma and identity checks, and parameter sweeps.
//!
//! Every command is a plain function of a [`CliConfig`] returning a
//! [`Report`]; `main` only parses arguments and writes the report out. All
//! output is deterministic for fixed flags and seed, whatever `--jobs` is.

// `!(v > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use areamean_core::auxiliary::{
    abc_at, case_analysis_signs, d_value, discriminant, g_functions, identity_check,
    lemma4a_residual, sandwich_check, y_of,
};
use areamean_core::convexity::log_grid;
use areamean_core::means::{deficit_tolerance, phi, piece_integrals, relative_h_tolerance};
use areamean_core::sweep::{summary_table, to_json_lines, P_SCAN, ALPHA_SCAN};
use areamean_core::{
    convexity_report, corpus_generate, sweep, Cell, CorpusSpec, Error, GridSpec, Params,
    PowerSeries, RadialMean, SeriesMean, Table, Verdict,
};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;

/// Largest relative residual of the factorization accepted by `identity`.
pub const IDENTITY_RTOL: f64 = 1e-8;
/// Largest disagreement of the two evaluations of `E` and `F`.
pub const DUAL_PATH_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "areamean",
    version,
    about = "Integral means of analytic functions on the unit disk and checks of their log-convexity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Circle mean M_p(f, r) and area mean M_{p,alpha}(f, r) on a radius grid.
    Means(CliConfig),
    /// Log-convexity report of the area mean on a log grid in x = r^2.
    Convexity(CliConfig),
    /// The lemma-level inequalities and sign checks on a log grid.
    Lemmas(CliConfig),
    /// Randomized test of the factorization identity.
    Identity(CliConfig),
    /// Convexity verdicts over (p, alpha, f) cells, as JSON lines.
    Sweep(CliConfig),
}

impl Command {
    pub const NAMES: [&'static str; 5] = ["means", "convexity", "lemmas", "identity", "sweep"];

    pub fn config(&self) -> &CliConfig {
        match self {
            Command::Means(c)
            | Command::Convexity(c)
            | Command::Lemmas(c)
            | Command::Identity(c)
            | Command::Sweep(c) => c,
        }
    }
}

/// Flags shared by all commands; a config file may set any of them.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(args_override_self = true)]
pub struct CliConfig {
    /// Power series coefficients a0,a1,...; complex entries as `1.5-2i`.
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub coeffs: String,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Grid size: radii i/(n+1) for `means`, log-spaced x otherwise.
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub x_min: f64,
    #[arg(long, default_value_t = 0.999)]
    pub x_max: f64,
    /// Relative quadrature tolerance for the area integrals.
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// File of `key = value` lines using the flag names; flags given on the
    /// command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Explicit x values for `means`, overriding the radius grid.
    #[arg(long, value_delimiter = ',')]
    pub x_values: Option<Vec<f64>>,
    /// Sample count for `identity`.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Exponents p for `sweep`.
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
    /// Weights alpha for `sweep`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha_list: Option<Vec<f64>>,
    /// Monomial degrees of the sweep corpus.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,5")]
    pub degrees: Vec<usize>,
    /// Random polynomials in the sweep corpus.
    #[arg(long, default_value_t = 3)]
    pub random_count: usize,
    #[arg(long, default_value_t = 8)]
    pub random_degree: usize,
    /// Radius of the disk the random coefficients are drawn from.
    #[arg(long, default_value_t = 1.0)]
    pub coefficient_scale: f64,
    /// Where `sweep` writes its CSV summary.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Where `sweep` writes the generated corpus as JSON.
    #[arg(long)]
    pub corpus_out: Option<PathBuf>,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self::parse_from(["areamean"])
    }
}

impl CliConfig {
    pub fn series(&self) -> Result<PowerSeries, CliError> {
        self.coeffs.parse().map_err(|e| match e {
            Error::Parse { column, message } => CliError::input(format!(
                "--coeffs: line 1, column {column}: {message}"
            )),
            other => CliError::from(other),
        })
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Ok(Params::new(self.p, self.alpha)?)
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec::new(self.grid_points, self.x_min, self.x_max)?.with_quad_tol(self.tol))
    }

    pub fn corpus_spec(&self) -> CorpusSpec {
        CorpusSpec {
            seed: self.seed,
            monomial_degrees: self.degrees.clone(),
            random_count: self.random_count,
            random_degree: self.random_degree,
            coefficient_scale: self.coefficient_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::Parse { .. } => EXIT_INPUT,
            Error::NonFinite { .. } | Error::MaxDepth { .. } | Error::Degenerate(_) => {
                EXIT_NUMERICAL
            }
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Output of a command: the document to write, notes for stderr, and the
/// exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub notes: Vec<String>,
    pub code: u8,
}

impl Report {
    fn ok(body: String) -> Self {
        Self {
            body,
            notes: Vec::new(),
            code: EXIT_OK,
        }
    }
}

/// Splices the `key = value` lines of every `--config FILE` into `args`,
/// right after the subcommand, so that later command-line flags override
/// them. A `command = NAME` line supplies the subcommand when absent.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut files = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        match arg.to_str() {
            Some("--config") => match it.next() {
                Some(path) => files.push(PathBuf::from(path)),
                None => return Err(CliError::input("--config needs a file")),
            },
            Some(s) if s.starts_with("--config=") => files.push(PathBuf::from(&s[9..])),
            _ => rest.push(arg),
        }
    }
    if files.is_empty() {
        return Ok(rest);
    }
    let mut command = None;
    let mut injected = Vec::new();
    for path in &files {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        for (key, value) in parse_config(&text, path)? {
            if key == "command" {
                command = Some(value);
            } else {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(value));
            }
        }
    }
    let position = rest
        .iter()
        .skip(1)
        .position(|a| a.to_str().is_some_and(|s| Command::NAMES.contains(&s)))
        .map(|i| i + 1);
    let at = match (position, command) {
        (Some(i), _) => i + 1,
        (None, Some(name)) => {
            rest.insert(1.min(rest.len()), OsString::from(name));
            2.min(rest.len())
        }
        (None, None) => return Ok(rest),
    };
    rest.splice(at..at, injected);
    Ok(rest)
}

/// `key = value` pairs; `#` starts a comment, keys use `-` or `_`.
pub fn parse_config(text: &str, path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::input(format!(
                "{}: line {}, column 1: expected `key = value`",
                path.display(),
                n + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::input(format!(
                "{}: line {}, column 1: invalid key `{key}`",
                path.display(),
                n + 1
            )));
        }
        out.push((key, value.trim().trim_matches('"').to_owned()));
    }
    Ok(out)
}

pub fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Means(c) => cmd_means(c).map(|t| Report::ok(render(&t, c.format))),
        Command::Convexity(c) => cmd_convexity(c),
        Command::Lemmas(c) => cmd_lemmas(c),
        Command::Identity(c) => cmd_identity(c),
        Command::Sweep(c) => cmd_sweep(c),
    }
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json() + "\n",
    }
}

/// Rows `r, x, M_p, M_p_alpha` at `r_i = i/(n+1)`, or at `--x-values`.
pub fn cmd_means(config: &CliConfig) -> Result<Table, CliError> {
    let f = config.series()?;
    let params = config.params()?;
    if !(config.tol > 0.0) {
        return Err(CliError::input("--tol must be positive"));
    }
    let xs: Vec<f64> = match &config.x_values {
        Some(xs) => {
            if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
                return Err(CliError::input(format!("x values must lie in (0, 1), got {x}")));
            }
            xs.clone()
        }
        None => {
            let n = config.grid_points;
            (1..=n).map(|i| (i as f64 / (n + 1) as f64).powi(2)).collect()
        }
    };
    let mean = SeriesMean::new(&f, params.p)?;
    let rows: Vec<Result<[f64; 4], Error>> = xs
        .par_iter()
        .map(|&x| {
            let m = mean.value(x);
            let phi_x = phi(params.alpha, x)?;
            let tol_h = relative_h_tolerance(config.tol, m, phi_x);
            let tol_deficit = deficit_tolerance(config.tol, mean.value(0.0), m, phi_x);
            let (h, deficit) =
                piece_integrals(&mean, params.alpha, 0.0, x, m, tol_h, tol_deficit)?;
            // M - deficit/phi is exact for constant f and loses nothing while
            // the deficit is the smaller part of M phi.
            let area = if deficit.value <= 0.5 * m * phi_x {
                m - deficit.value / phi_x
            } else {
                h.value / phi_x
            };
            Ok([x.sqrt(), x, m, area])
        })
        .collect();
    let mut table = Table::new(&["r", "x", "M_p", "M_p_alpha"]);
    for row in rows {
        table.push_numbers(&row?);
    }
    Ok(table)
}

/// Exit code of a convexity verdict: violations are fatal only where
/// log-convexity is a theorem.
fn verdict_code(params: Params, verdict: Verdict) -> u8 {
    if verdict == Verdict::Violated && params.is_theorem_range() {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

pub fn cmd_convexity(config: &CliConfig) -> Result<Report, CliError> {
    let f = config.series()?;
    let params = config.params()?;
    if f.is_zero() {
        return Err(CliError::input("the zero function has no log-convexity"));
    }
    let grid = config.grid()?;
    let report = convexity_report(&f, params.p, params.alpha, &grid);
    let mut notes = vec![format!(
        "verdict {} (min delta {:e} at x = {}, worst delta/tolerance {:e})",
        report.verdict, report.min_delta, report.argmin_x, report.worst_ratio
    )];
    if let Some(why) = &report.diagnostic {
        return Err(CliError {
            code: EXIT_NUMERICAL,
            message: format!("convexity evaluation failed: {why}"),
        });
    }
    let code = verdict_code(params, report.verdict);
    if code == EXIT_VIOLATION {
        notes.push("log-convexity violated inside -2 <= alpha <= 0".into());
    }
    let body = match config.format {
        Format::Csv => report.to_table().to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    Ok(Report { body, notes, code })
}

pub const LEMMA_COLUMNS: [&str; 15] = [
    "x",
    "g1",
    "g2",
    "g3",
    "lemma4a_residual",
    "y",
    "discriminant",
    "sandwich_lower",
    "sandwich_upper",
    "delta_proxy",
    "e_at_0",
    "e_at_y0",
    "f_at_y0",
    "y0",
    "d",
];

/// Columns whose minima are reported.
const LEMMA_MINIMA: [&str; 11] = [
    "g1",
    "g2",
    "g3",
    "discriminant",
    "sandwich_lower",
    "sandwich_upper",
    "delta_proxy",
    "e_at_0",
    "e_at_y0",
    "f_at_y0",
    "d",
];

fn lemma_row(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<Vec<Cell>, Error> {
    let missing_if_degenerate = |r: Result<f64, Error>| match r {
        Ok(v) => Ok(Cell::Number(v)),
        Err(Error::Degenerate(_)) => Ok(Cell::Missing),
        Err(e) => Err(e),
    };
    let g = g_functions(alpha, x)?;
    let y = y_of(f, p, x)?;
    let abc = abc_at(x, y, alpha)?;
    let (lower, upper, proxy) = if alpha < 0.0 {
        let s = sandwich_check(f, p, alpha, x)?;
        (s.lower.into(), s.upper.into(), (s.m * s.lower).into())
    } else {
        (Cell::Missing, Cell::Missing, Cell::Missing)
    };
    let signs = match case_analysis_signs(x, alpha) {
        Ok(s) => [s.e_at_0, s.e_at_y0, s.f_at_y0, s.y0].map(Cell::Number),
        Err(Error::Degenerate(_)) => [const { Cell::Missing }; 4],
        Err(e) => return Err(e),
    };
    let [e0, ey0, fy0, y0] = signs;
    Ok(vec![
        x.into(),
        g.g1.into(),
        g.g2.into(),
        g.g3.into(),
        lemma4a_residual(alpha, x)?.into(),
        y.into(),
        discriminant(abc.a, abc.b, abc.c).into(),
        lower,
        upper,
        proxy,
        e0,
        ey0,
        fy0,
        y0,
        missing_if_degenerate(d_value(f, p, alpha, x))?,
    ])
}

/// Column minima over the rows, skipping missing cells.
pub fn column_minima(table: &Table, columns: &[&str]) -> Vec<(String, Option<f64>)> {
    columns
        .iter()
        .map(|name| {
            let j = table.columns().iter().position(|c| c == name);
            let min = j.and_then(|j| {
                table
                    .rows()
                    .iter()
                    .filter_map(|row| match row[j] {
                        Cell::Number(v) => Some(v),
                        _ => None,
                    })
                    .reduce(f64::min)
            });
            ((*name).to_owned(), min)
        })
        .collect()
}

/// First grid point where `E(0)` is negative.
fn e0_negative_from(table: &Table) -> Option<f64> {
    let j = table.columns().iter().position(|c| c == "e_at_0")?;
    table.rows().iter().find_map(|row| match (&row[0], &row[j]) {
        (Cell::Number(x), Cell::Number(e)) if *e < 0.0 => Some(*x),
        _ => None,
    })
}

pub fn cmd_lemmas(config: &CliConfig) -> Result<Report, CliError> {
    let f = config.series()?;
    let params = config.params()?;
    config.grid()?;
    let xs = log_grid(config.grid_points, config.x_min, config.x_max);
    let rows: Vec<Result<Vec<Cell>, Error>> = xs
        .par_iter()
        .map(|&x| lemma_row(&f, params.p, params.alpha, x))
        .collect();
    let mut table = Table::new(&LEMMA_COLUMNS);
    for row in rows {
        table.push(row?);
    }
    let minima = column_minima(&table, &LEMMA_MINIMA);
    let mut notes: Vec<String> = minima
        .iter()
        .map(|(name, v)| match v {
            Some(v) => format!("min {name} = {v:e}"),
            None => format!("min {name} = n/a"),
        })
        .collect();
    let change = e0_negative_from(&table);
    if let Some(x) = change {
        notes.push(format!("E(0) < 0 first at x = {x}"));
    }
    let body = match config.format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let rows: Value = serde_json::from_str(&table.to_json()).expect("valid table JSON");
            let minima: serde_json::Map<String, Value> =
                minima.into_iter().map(|(k, v)| (k, json!(v))).collect();
            json!({ "rows": rows, "minima": minima, "e_at_0_negative_from": change }).to_string()
                + "\n"
        }
    };
    Ok(Report {
        body,
        notes,
        code: EXIT_OK,
    })
}

pub fn cmd_identity(config: &CliConfig) -> Result<Report, CliError> {
    let summary = identity_check(config.samples, config.seed)?;
    let mut notes = Vec::new();
    if config.samples == 0 {
        notes.push("warning: no samples requested, nothing was checked".into());
    }
    let worst = summary.eq5;
    let mut table = Table::new(&[
        "samples",
        "seed",
        "max_eq5_residual",
        "max_dual_path_e",
        "max_dual_path_f",
        "worst_x",
        "worst_y",
        "worst_alpha",
    ]);
    table.push(vec![
        Cell::Integer(summary.samples as i64),
        Cell::Text(summary.seed.to_string()),
        summary.eq5.map(|w| w.value).into(),
        summary.e_dual.map(|w| w.value).into(),
        summary.f_dual.map(|w| w.value).into(),
        worst.map(|w| w.x).into(),
        worst.map(|w| w.y).into(),
        worst.map(|w| w.alpha).into(),
    ]);
    let mut code = EXIT_OK;
    if summary.max_eq5() > IDENTITY_RTOL || summary.max_dual() > DUAL_PATH_RTOL {
        code = EXIT_NUMERICAL;
        notes.push(format!(
            "identity check failed: residual {:e} (limit {IDENTITY_RTOL:e}), dual path {:e} (limit {DUAL_PATH_RTOL:e})",
            summary.max_eq5(),
            summary.max_dual()
        ));
    }
    let body = match config.format {
        Format::Csv => table.to_csv(),
        Format::Json => serde_json::to_string(&summary).expect("summary serializes") + "\n",
    };
    Ok(Report { body, notes, code })
}

/// JSON lines, one record per cell; exits with [`EXIT_VIOLATION`] if any
/// cell with `-2 <= alpha <= 0` ends violated.
pub fn cmd_sweep(config: &CliConfig) -> Result<Report, CliError> {
    let p_list = config.p_list.clone().unwrap_or_else(|| P_SCAN.to_vec());
    let alpha_list = config.alpha_list.clone().unwrap_or_else(|| ALPHA_SCAN.to_vec());
    if p_list.is_empty() || alpha_list.is_empty() {
        return Err(CliError::input("--p-list and --alpha-list must be nonempty"));
    }
    for &p in &p_list {
        for &alpha in &alpha_list {
            Params::new(p, alpha)?;
        }
    }
    if !(config.coefficient_scale >= 0.0 && config.coefficient_scale.is_finite()) {
        return Err(CliError::input("--coefficient-scale must be finite and nonnegative"));
    }
    let grid = config.grid()?;
    let corpus = corpus_generate(&config.corpus_spec());
    if let Some(path) = &config.corpus_out {
        let entries: Vec<String> = corpus
            .iter()
            .map(|e| serde_json::to_string(e).expect("corpus serializes"))
            .collect();
        let text = format!("[\n{}\n]\n", entries.join(",\n"));
        write_file(path, &text)?;
    }
    let records = sweep(&p_list, &alpha_list, &corpus, &grid);
    if let Some(path) = &config.summary {
        write_file(path, &summary_table(&records).to_csv())?;
    }
    let violations: Vec<String> = records
        .iter()
        .filter(|r| r.is_theorem_range_violation())
        .map(|r| format!("violation: p = {}, alpha = {}, f = {}", r.params.p, r.params.alpha, r.function_id))
        .collect();
    let code = if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    Ok(Report {
        body: to_json_lines(&records),
        notes: violations,
        code,
    })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Sets the global rayon pool width; a no-op when `jobs` is `None`.
pub fn configure_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    let Some(jobs) = jobs else { return Ok(()) };
    if jobs == 0 {
        return Err(CliError::input("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::input(format!("--jobs: {e}")))
}
