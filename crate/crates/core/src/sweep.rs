//! Parameter sweeps over `(p, alpha, f)` with a refinement pipeline that
//! separates numerical noise from persistent violations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexity::{
    evaluate_grid, failed_report, log_grid, raw_report, ConvexityReport, GridSpec, Verdict,
    CONFIRM_FACTOR,
};
use crate::error::Result;
use crate::means::{Params, SeriesMean};
use crate::series::PowerSeries;
use crate::table::{Cell, Table};

/// Default `alpha` values of a boundary scan.
pub const ALPHA_SCAN: [f64; 13] = [
    -4.0, -3.5, -3.0, -2.5, -2.1, -2.0, -1.5, -1.0, -0.5, 0.0, 0.25, 0.5, 1.0,
];
/// Default `p` values of a boundary scan.
pub const P_SCAN: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0];
/// Refinement rounds a candidate violation has to survive.
pub const REFINE_ROUNDS: usize = 2;
/// Half-width, in base grid steps, of the window refined around a witness.
const WINDOW_STEPS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub monomial_degrees: Vec<usize>,
    pub random_count: usize,
    pub random_degree: usize,
    pub coefficient_scale: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            monomial_degrees: vec![0, 1, 2, 3, 5],
            random_count: 3,
            random_degree: 8,
            coefficient_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub series: PowerSeries,
}

fn monomial_id(k: usize) -> String {
    match k {
        0 => "1".into(),
        1 => "z".into(),
        _ => format!("z^{k}"),
    }
}

/// Monomials `z^k`, then `1 + z`, then `random_count` polynomials of degree
/// `random_degree` with coefficients uniform in the disk of radius
/// `coefficient_scale`. ChaCha8 keeps the stream identical across platforms.
pub fn corpus_generate(spec: &CorpusSpec) -> Vec<CorpusEntry> {
    let mut out: Vec<CorpusEntry> = spec
        .monomial_degrees
        .iter()
        .map(|&k| CorpusEntry {
            id: monomial_id(k),
            series: PowerSeries::monomial(k),
        })
        .collect();
    out.push(CorpusEntry {
        id: "1+z".into(),
        series: PowerSeries::from_real(&[1.0, 1.0]).expect("finite coefficients"),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in 0..spec.random_count {
        let coeffs = (0..=spec.random_degree)
            .map(|_| {
                let radius = spec.coefficient_scale * rng.gen::<f64>().sqrt();
                let angle = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
                num_complex::Complex64::from_polar(radius, angle)
            })
            .collect();
        out.push(CorpusEntry {
            id: format!("rand{}-{i}", spec.seed),
            series: PowerSeries::new(coeffs).expect("finite coefficients"),
        });
    }
    out
}

/// One `(p, alpha, f)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub params: Params,
    pub function_id: String,
    pub coeffs: PowerSeries,
    pub verdict: Verdict,
    pub min_delta: f64,
    pub argmin_x: f64,
    pub tolerance: f64,
    pub worst_ratio: f64,
    pub worst_x: f64,
    pub refinement_rounds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl SweepRecord {
    fn from_report(entry: &CorpusEntry, report: &ConvexityReport, rounds: usize) -> Self {
        Self {
            params: report.params,
            function_id: entry.id.clone(),
            coeffs: entry.series.clone(),
            verdict: report.verdict,
            min_delta: report.min_delta,
            argmin_x: report.argmin_x,
            tolerance: report.tolerance_used,
            worst_ratio: report.worst_ratio,
            worst_x: report.worst_x,
            refinement_rounds: rounds,
            diagnostic: report.diagnostic.clone(),
        }
    }

    /// A violated verdict inside `-2 <= alpha <= 0`.
    pub fn is_theorem_range_violation(&self) -> bool {
        self.verdict == Verdict::Violated && self.params.is_theorem_range()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Evaluates one cell: a grid report, then [`refine_witness`] if any point
/// fails its tolerance.
pub fn sweep_cell(entry: &CorpusEntry, params: Params, grid: &GridSpec) -> SweepRecord {
    let attempt = || -> Result<SweepRecord> {
        let params = Params::new(params.p, params.alpha)?;
        let mean = SeriesMean::new(&entry.series, params.p)?;
        let report = raw_report(&mean, params, grid)?;
        let record = SweepRecord::from_report(entry, &report, 0);
        if report.is_candidate_violation() {
            Ok(refine_witness(&record, grid, REFINE_ROUNDS))
        } else {
            Ok(record)
        }
    };
    attempt().unwrap_or_else(|e| {
        let report = failed_report(params, entry.id.clone(), e.to_string());
        SweepRecord::from_report(entry, &report, 0)
    })
}

/// All `(p, alpha, f)` cells, ordered by `p`, then `alpha`, then corpus
/// order. Cells run in parallel; the output order is fixed.
pub fn sweep(
    p_list: &[f64],
    alpha_list: &[f64],
    corpus: &[CorpusEntry],
    grid: &GridSpec,
) -> Vec<SweepRecord> {
    let cells: Vec<(Params, &CorpusEntry)> = p_list
        .iter()
        .flat_map(|&p| {
            alpha_list
                .iter()
                .flat_map(move |&alpha| corpus.iter().map(move |e| (Params { p, alpha }, e)))
        })
        .collect();
    cells
        .par_iter()
        .map(|(params, entry)| sweep_cell(entry, *params, grid))
        .collect()
}

/// Re-evaluates a candidate violation on a window around its worst point.
///
/// Each round doubles the density (starting from 33 points), divides the
/// quadrature tolerance by 100 and re-centres on the current worst point,
/// which is always part of the window. A round with every point within
/// tolerance downgrades the record to `convex`; the record ends `violated`
/// only if every round keeps a point below `-10 * tolerance`.
pub fn refine_witness(record: &SweepRecord, grid: &GridSpec, rounds: usize) -> SweepRecord {
    let mut out = record.clone();
    let mean = match SeriesMean::new(&record.coeffs, record.params.p) {
        Ok(m) => m,
        Err(e) => {
            out.verdict = Verdict::Inconclusive;
            out.diagnostic = Some(e.to_string());
            return out;
        }
    };
    let step = (grid.x_max / grid.x_min).ln() / (grid.points.max(2) - 1) as f64;
    let mut center = record.worst_x;
    let mut persisted = rounds > 0;
    let mut quad_tol = grid.quad_tol;
    let mut verdict = Verdict::Inconclusive;

    for round in 1..=rounds {
        quad_tol /= 100.0;
        let lo = grid.x_min.max(center * (-WINDOW_STEPS * step).exp());
        let hi = grid.x_max.min(center * (WINDOW_STEPS * step).exp());
        let mut xs = log_grid((16 << round) + 1, lo, hi);
        xs.push(center);
        xs.sort_by(f64::total_cmp);
        xs.dedup();

        let points = match evaluate_grid(&mean, record.params.alpha, &xs, quad_tol) {
            Ok(p) => p,
            Err(e) => {
                out.verdict = Verdict::Inconclusive;
                out.diagnostic = Some(e.to_string());
                out.refinement_rounds = round;
                return out;
            }
        };
        let report = ConvexityReport::from_points(record.params, record.function_id.clone(), points);
        out.min_delta = report.min_delta;
        out.argmin_x = report.argmin_x;
        out.tolerance = report.tolerance_used;
        out.worst_ratio = report.worst_ratio;
        out.worst_x = report.worst_x;
        out.refinement_rounds = round;
        center = report.worst_x;

        if report.worst_ratio >= -1.0 {
            verdict = Verdict::Convex;
            persisted = false;
            break;
        }
        if report.worst_ratio >= -CONFIRM_FACTOR {
            persisted = false;
        }
    }
    out.verdict = if persisted && out.refinement_rounds >= REFINE_ROUNDS.min(rounds) {
        Verdict::Violated
    } else {
        verdict
    };
    out
}

/// One row per record: `p, alpha, function, verdict, min_delta, argmin_x,
/// tolerance, refinement_rounds`.
pub fn summary_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new(&[
        "p",
        "alpha",
        "function",
        "verdict",
        "min_delta",
        "argmin_x",
        "tolerance",
        "refinement_rounds",
    ]);
    for r in records {
        t.push(vec![
            r.params.p.into(),
            r.params.alpha.into(),
            Cell::Text(r.function_id.clone()),
            Cell::Text(r.verdict.to_string()),
            r.min_delta.into(),
            r.argmin_x.into(),
            r.tolerance.into(),
            Cell::Integer(r.refinement_rounds as i64),
        ]);
    }
    t
}

pub fn to_json_lines(records: &[SweepRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    out
}
