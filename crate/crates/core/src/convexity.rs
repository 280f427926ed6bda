//! The `D`-operator calculus and grid verdicts for logarithmic convexity.
//!
//! `log g` is convex in `log x` iff `D(g) = g'/g + x g''/g - x (g'/g)^2 >= 0`,
//! and `D(g1/g2) = D(g1) - D(g2)`. The area mean is `h/phi` in `x = r^2`, so its
//! log-convexity reduces to `Delta(x) = D(h) - D(phi) >= 0` on `(0, 1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::means::{
    deficit_tolerance, piece_integrals, phi, phi_minus_x, phi_prime, relative_h_tolerance,
    MeansPoint, Params,
    RadialMean, SeriesMean, H_REL_TOL, X_MAX, X_MIN,
};
use crate::quad::{richardson_derivative, CompensatedSum, QuadResult};
use crate::series::PowerSeries;

/// Relative factor of the pointwise verdict tolerance.
pub const VERDICT_RTOL: f64 = 1e-8;
/// Confirmed violations must fall below `-CONFIRM_FACTOR * tolerance`.
pub const CONFIRM_FACTOR: f64 = 10.0;

/// `D(g)` from `g`, `g'`, `g''` at `x`.
pub fn d_operator(g: f64, g1: f64, g2: f64, x: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(domain(format!("D-operator needs g > 0, got {g}")));
    }
    let q = g1 / g;
    Ok(q + x * g2 / g - x * q * q)
}

/// `D(phi) = (phi - x) / phi^2 * (1-x)^(alpha-1)`.
pub fn d_phi(alpha: f64, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(domain(format!("x must lie in (0, 1), got {x}")));
    }
    let ph = phi(alpha, x)?;
    let psi = phi_minus_x(alpha, x)?;
    Ok(psi / ph / ph * ((alpha - 1.0) * (-x).ln_1p()).exp())
}

/// `D(h) = (1-x)^(alpha-1) M (h B - C M) / h^2`, evaluated through `q = h / M`.
pub fn d_h_reduced(point: &MeansPoint, alpha: f64) -> f64 {
    let x = point.x;
    let b = (1.0 - x - alpha * x) + x * (1.0 - x) * point.m_prime / point.m;
    let c = x * ((alpha + 1.0) * (-x).ln_1p()).exp();
    let q = point.h / point.m;
    ((alpha - 1.0) * (-x).ln_1p()).exp() * (q * b - c) / (q * q)
}

/// `D(h)` for `h` built from `f`.
pub fn d_h(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<f64> {
    if f.is_zero() {
        return Err(domain("D(h) is undefined for the zero function"));
    }
    let mean = SeriesMean::new(f, p)?;
    let point = crate::means::means_point(&mean, alpha, x, H_REL_TOL)?;
    Ok(d_h_reduced(&point, alpha))
}

/// Pointwise tolerance `1e-8 (1 + |D(h)| + |D(phi)|)`.
pub fn delta_tolerance(d_h: f64, d_phi: f64) -> f64 {
    VERDICT_RTOL * (1.0 + d_h.abs() + d_phi.abs())
}

/// All quantities of the `Delta >= 0` test at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub x: f64,
    pub m: f64,
    pub m_prime: f64,
    pub h: f64,
    pub phi: f64,
    pub d_h: f64,
    pub d_phi: f64,
    pub delta: f64,
    /// `-A h^2 + M B h - C M^2`, which has the sign of `delta`.
    pub quadratic_form: f64,
    pub tolerance: f64,
}

impl DeltaPoint {
    /// `Delta` in the form
    /// `(1-x)^(alpha-1) [ y/q - rho (C (phi + q) - L q phi) / (q^2 phi^2) ]`
    /// with `q = h/M`, `rho = (M phi - h)/M`, `y = x(1-x) M'/M`,
    /// `L = 1 - x - alpha x` and `C = x (1-x)^(alpha+1)`. It equals
    /// `D(h) - D(phi)` but never subtracts the two nearly equal `D` values,
    /// and vanishes exactly for constant `f` (`y = rho = 0`).
    pub fn from_means(point: &MeansPoint, alpha: f64) -> Result<Self> {
        let x = point.x;
        let d_h = d_h_reduced(point, alpha);
        let d_phi = d_phi(alpha, x)?;
        let (h, m, ph) = (point.h, point.m, point.phi);
        let a = phi_minus_x(alpha, x)? / (ph * ph);
        let y = x * (1.0 - x) * point.m_prime / m;
        let l = 1.0 - x - alpha * x;
        let b = l + y;
        let c = x * ((alpha + 1.0) * (-x).ln_1p()).exp();
        let q = h / m;
        let rho = point.deficit / m;
        let bracket = y / q - rho * (c * (ph + q) - l * q * ph) / (q * q * ph * ph);
        let delta = ((alpha - 1.0) * (-x).ln_1p()).exp() * bracket;
        Ok(Self {
            x,
            m,
            m_prime: point.m_prime,
            h,
            phi: ph,
            d_h,
            d_phi,
            delta,
            quadratic_form: -a * h * h + m * b * h - c * m * m,
            tolerance: delta_tolerance(d_h, d_phi),
        })
    }

    /// `delta / tolerance`; below `-1` the point fails the test.
    pub fn normalized(&self) -> f64 {
        self.delta / self.tolerance
    }
}

/// `Delta(x) = D(h) - D(phi)` at a single point.
pub fn delta(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<DeltaPoint> {
    if f.is_zero() {
        return Err(domain("Delta is undefined for the zero function"));
    }
    let mean = SeriesMean::new(f, p)?;
    let point = crate::means::means_point(&mean, alpha, x, H_REL_TOL)?;
    DeltaPoint::from_means(&point, alpha)
}

/// A logarithmically spaced grid on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// Quadrature tolerance for `h`, relative to the bound `M phi`.
    pub quad_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 512,
            x_min: X_MIN,
            x_max: X_MAX,
            quad_tol: 1e-13,
        }
    }
}

impl GridSpec {
    pub fn new(points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        let spec = Self {
            points,
            x_min,
            x_max,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_quad_tol(mut self, quad_tol: f64) -> Self {
        self.quad_tol = quad_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(domain("grid needs at least 2 points"));
        }
        if !(self.x_min > 0.0 && self.x_min < self.x_max && self.x_max < 1.0) {
            return Err(domain(format!(
                "grid bounds must satisfy 0 < x_min < x_max < 1, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if !(self.quad_tol > 0.0) {
            return Err(domain("quadrature tolerance must be positive"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.points, self.x_min, self.x_max)
    }

    /// Twice the density and a 100x tighter quadrature tolerance.
    pub fn refined(&self) -> Self {
        Self {
            points: 2 * self.points,
            quad_tol: self.quad_tol / 100.0,
            ..*self
        }
    }
}

/// `n` points `x_min * (x_max/x_min)^(i/(n-1))`, endpoints exact.
pub fn log_grid(n: usize, x_min: f64, x_max: f64) -> Vec<f64> {
    if n == 1 {
        return vec![x_min];
    }
    let (la, lb) = (x_min.ln(), x_max.ln());
    let step = (lb - la) / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => x_min,
            _ if i == n - 1 => x_max,
            _ => (la + step * i as f64).exp(),
        })
        .collect()
}

/// Evaluates `Delta` on an increasing grid. `h` is accumulated piecewise
/// between consecutive grid points; pieces are integrated in parallel and
/// summed in grid order.
pub fn evaluate_grid<M: RadialMean + ?Sized>(
    mean: &M,
    alpha: f64,
    grid: &[f64],
    rel_tol: f64,
) -> Result<Vec<DeltaPoint>> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain("grid must be strictly increasing"));
    }
    struct Piece {
        point: MeansPoint,
        m_lo: f64,
        phi_lo: f64,
        h: QuadResult,
        deficit: f64,
    }
    let pieces: Vec<Result<Piece>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = if i == 0 { 0.0 } else { grid[i - 1] };
            let m = mean.value(x);
            let m_lo = mean.value(lo);
            let phi_x = phi(alpha, x)?;
            let phi_lo = phi(alpha, lo)?;
            let tol_h = relative_h_tolerance(rel_tol, m, phi_x - phi_lo);
            let tol_deficit = deficit_tolerance(rel_tol, m_lo, m, phi_x - phi_lo);
            let (h, deficit) = piece_integrals(mean, alpha, lo, x, m, tol_h, tol_deficit)?;
            let point = MeansPoint {
                x,
                m,
                m_prime: mean.derivative(x)?,
                h: 0.0,
                h_err: 0.0,
                deficit: 0.0,
                phi: phi_x,
                phi_prime: phi_prime(alpha, x)?,
            };
            Ok(Piece {
                point,
                m_lo,
                phi_lo,
                h,
                deficit: deficit.value,
            })
        })
        .collect();

    // h(x_i) = h(x_{i-1}) + int M w, and the deficit
    // R(x_i) = R(x_{i-1}) + (M(x_i) - M(x_{i-1})) phi(x_{i-1}) + int (M(x_i) - M) w,
    // accumulated in grid order.
    let mut h = CompensatedSum::new();
    let mut deficit = CompensatedSum::new();
    let mut err = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for piece in pieces {
        let Piece { mut point, m_lo, phi_lo, h: h_piece, deficit: d_piece } = piece?;
        h.add(h_piece.value);
        err += h_piece.error_estimate;
        deficit.add((point.m - m_lo) * phi_lo);
        deficit.add(d_piece);
        point.h = h.value();
        point.h_err = err;
        point.deficit = deficit.value();
        out.push(DeltaPoint::from_means(&point, alpha)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convex,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Convex => "convex",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Summary of a grid evaluation of `Delta`.
///
/// `min_delta` is the smallest raw `Delta` and `tolerance_used` the pointwise
/// tolerance there. The verdict is pointwise: `convex` iff every point has
/// `Delta >= -tolerance`; `violated` iff a refined re-evaluation still has a
/// point below `-10 * tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub params: Params,
    #[serde(rename = "function")]
    pub function_id: String,
    pub grid: Vec<f64>,
    #[serde(rename = "delta")]
    pub delta_values: Vec<f64>,
    pub min_delta: f64,
    pub argmin_x: f64,
    pub verdict: Verdict,
    #[serde(rename = "tolerance")]
    pub tolerance_used: f64,
    /// `min Delta / tolerance` over the grid and where it occurs.
    pub worst_ratio: f64,
    pub worst_x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub points: Vec<DeltaPoint>,
}

impl ConvexityReport {
    /// Builds a report from evaluated points; `verdict` is `Convex` if
    /// every point passes and `Inconclusive` otherwise (unconfirmed).
    pub fn from_points(params: Params, function_id: String, points: Vec<DeltaPoint>) -> Self {
        let (mut min_i, mut worst_i) = (0, 0);
        for (i, pt) in points.iter().enumerate() {
            if pt.delta < points[min_i].delta {
                min_i = i;
            }
            if pt.normalized() < points[worst_i].normalized() {
                worst_i = i;
            }
        }
        let worst_ratio = points.get(worst_i).map_or(0.0, DeltaPoint::normalized);
        let verdict = if worst_ratio >= -1.0 {
            Verdict::Convex
        } else {
            Verdict::Inconclusive
        };
        Self {
            params,
            function_id,
            grid: points.iter().map(|p| p.x).collect(),
            delta_values: points.iter().map(|p| p.delta).collect(),
            min_delta: points.get(min_i).map_or(0.0, |p| p.delta),
            argmin_x: points.get(min_i).map_or(f64::NAN, |p| p.x),
            verdict,
            tolerance_used: points.get(min_i).map_or(0.0, |p| p.tolerance),
            worst_ratio,
            worst_x: points.get(worst_i).map_or(f64::NAN, |p| p.x),
            diagnostic: None,
            points,
        }
    }

    pub fn is_candidate_violation(&self) -> bool {
        self.worst_ratio < -1.0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// Rows `x, M, h, phi, D_h, D_phi, delta`.
    pub fn to_table(&self) -> crate::table::Table {
        let mut table =
            crate::table::Table::new(&["x", "M", "h", "phi", "D_h", "D_phi", "delta"]);
        for p in &self.points {
            table.push_numbers(&[p.x, p.m, p.h, p.phi, p.d_h, p.d_phi, p.delta]);
        }
        table
    }
}

/// Evaluates `Delta` on the grid without the confirmation step.
pub fn raw_report<M: RadialMean + ?Sized>(
    mean: &M,
    params: Params,
    grid: &GridSpec,
) -> Result<ConvexityReport> {
    grid.validate()?;
    let points = evaluate_grid(mean, params.alpha, &grid.grid(), grid.quad_tol)?;
    Ok(ConvexityReport::from_points(params, mean.label(), points))
}

/// Classifies a refined report against the persistence policy.
pub fn confirm_verdict(refined: &ConvexityReport) -> Verdict {
    if refined.worst_ratio >= -1.0 {
        Verdict::Convex
    } else if refined.worst_ratio < -CONFIRM_FACTOR {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

fn checked_report<M: RadialMean + ?Sized>(
    mean: &M,
    params: Params,
    grid: &GridSpec,
) -> Result<ConvexityReport> {
    let report = raw_report(mean, params, grid)?;
    if !report.is_candidate_violation() {
        return Ok(report);
    }
    let mut refined = raw_report(mean, params, &grid.refined())?;
    refined.verdict = confirm_verdict(&refined);
    Ok(refined)
}

/// Log-convexity report for `M_{p,alpha}(f, r)`.
///
/// On a candidate violation the grid is re-evaluated at double density with
/// a 100x tighter quadrature tolerance, and the refined report is returned.
/// Numerical failures yield an `inconclusive` report with a diagnostic.
pub fn convexity_report(
    f: &PowerSeries,
    p: f64,
    alpha: f64,
    grid: &GridSpec,
) -> ConvexityReport {
    let params = Params { p, alpha };
    let attempt = || -> Result<ConvexityReport> {
        let params = Params::new(p, alpha)?;
        if f.is_zero() {
            return Err(domain("the zero function has no log-convexity"));
        }
        checked_report(&SeriesMean::new(f, p)?, params, grid)
    };
    attempt().unwrap_or_else(|e| failed_report(params, f.to_string(), e.to_string()))
}

pub(crate) fn failed_report(params: Params, function_id: String, why: String) -> ConvexityReport {
    ConvexityReport {
        params,
        function_id,
        grid: Vec::new(),
        delta_values: Vec::new(),
        min_delta: f64::NAN,
        argmin_x: f64::NAN,
        verdict: Verdict::Inconclusive,
        tolerance_used: f64::NAN,
        worst_ratio: f64::NAN,
        worst_x: f64::NAN,
        diagnostic: Some(why),
        points: Vec::new(),
    }
}

/// Slack `theta log M(r1) + (1-theta) log M(r2) - log M(r)` at
/// `r = r1^theta r2^(1-theta)`, with `M = M_{p,alpha}(f, .)`. Nonnegative
/// slack means the three-point form of log-convexity holds at this triple.
pub fn three_point_check(
    f: &PowerSeries,
    p: f64,
    alpha: f64,
    r1: f64,
    r2: f64,
    theta: f64,
) -> Result<f64> {
    if !(0.0 < r1 && r1 < r2 && r2 < 1.0) {
        return Err(domain(format!("need 0 < r1 < r2 < 1, got r1 = {r1}, r2 = {r2}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    let r = r1.powf(theta) * r2.powf(1.0 - theta);
    let m = |r: f64| crate::means::area_mean(f, p, alpha, r).map(f64::ln);
    Ok(theta * m(r1)? + (1.0 - theta) * m(r2)? - m(r)?)
}

/// `D(M)` at `x` computed as the derivative of `x M'(x) / M(x)`.
pub fn d_of_mean<M: RadialMean + ?Sized>(mean: &M, x: f64) -> Result<f64> {
    let h0 = x.min(1.0 - x) / 8.0;
    let log_slope = |t: f64| match mean.derivative(t) {
        Ok(d) => t * d / mean.value(t),
        Err(_) => f64::NAN,
    };
    richardson_derivative(log_slope, x, h0)
}

/// Log-convexity of `x -> int_0^x M(1-t)^alpha / int_0^x (1-t)^alpha` for an
/// abstract `M` that is nondecreasing and log-convex in `log x`.
///
/// Those two hypotheses are scanned on the grid first; if either fails the
/// report is `inconclusive` with a diagnostic and no `Delta` values.
pub fn theorem6_check<M: RadialMean + ?Sized>(
    mean: &M,
    alpha: f64,
    grid: &GridSpec,
) -> ConvexityReport {
    // `p` carries no meaning for an abstract mean.
    let params = Params { p: f64::NAN, alpha };
    let attempt = || -> Result<ConvexityReport> {
        grid.validate()?;
        if !alpha.is_finite() {
            return Err(domain("alpha must be finite"));
        }
        if let Some(why) = precondition_scan(mean, &grid.grid())? {
            return Ok(ConvexityReport {
                diagnostic: Some(why),
                ..failed_report(params, mean.label(), String::new())
            });
        }
        checked_report(mean, params, grid)
    };
    attempt().unwrap_or_else(|e| failed_report(params, mean.label(), e.to_string()))
}

fn precondition_scan<M: RadialMean + ?Sized>(mean: &M, grid: &[f64]) -> Result<Option<String>> {
    let values: Vec<f64> = grid.iter().map(|&x| mean.value(x)).collect();
    if let Some(i) = values.iter().position(|&v| !(v > 0.0)) {
        return Ok(Some(format!("M is not positive at x = {}", grid[i])));
    }
    for (w, x) in values.windows(2).zip(&grid[1..]) {
        if w[1] < w[0] * (1.0 - 1e-12) {
            return Ok(Some(format!("M decreases at x = {x}")));
        }
    }
    for &x in grid {
        let dm = d_of_mean(mean, x)?;
        let scale = 1.0 + (x * mean.derivative(x)? / mean.value(x)).abs();
        if dm < -1e-6 * scale {
            return Ok(Some(format!("log M is not convex in log x at x = {x} (D(M) = {dm:e})")));
        }
    }
    Ok(None)
}
