//! Scalar quadrature and numerical differentiation.
//!
//! Everything here works in `f64` and accumulates node sums with
//! Neumaier-compensated summation, since several downstream identity checks
//! subtract nearly equal quadrature results.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Node counts used per panel by [`adaptive_integrate`]; the difference of
/// the two estimates is the panel error estimate.
pub const ADAPTIVE_NODES: (usize, usize) = (16, 32);

/// Maximum bisection depth of [`adaptive_integrate`].
pub const MAX_DEPTH: usize = 40;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute error estimate, always `>= 0`.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Neumaier variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Computes the `n`-point rule by Newton iteration on `P_n`.
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi's initial guess for the i-th root (descending order).
            let theta = PI * (4.0 * i as f64 + 3.0) / (4.0 * n as f64 + 2.0);
            let mut t = theta.cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, t);
                dp = d;
                let step = p / d;
                t -= step;
                if step.abs() <= 1e-16 * t.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, t);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            nodes[i] = -t;
            nodes[n - 1 - i] = t;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }
}

/// Returns `(P_n(t), P_n'(t))` via the three-term recurrence.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

static RULES: OnceLock<RwLock<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();

/// Returns the cached `n`-point Gauss-Legendre rule, computing it on first use.
pub fn gauss_rule(n: usize) -> Arc<GaussRule> {
    let cache = RULES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(GaussRule::compute(n));
    let mut guard = cache.write().expect("rule cache poisoned");
    Arc::clone(guard.entry(n).or_insert(rule))
}

/// `n`-node Gauss-Legendre approximation of the integral of `f` over `[a, b]`.
///
/// Exact (up to rounding) for polynomials of degree `<= 2n - 1`.
pub fn gauss_legendre<F>(f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if n == 0 {
        return Err(crate::error::domain("Gauss-Legendre needs at least one node"));
    }
    if !(a <= b) {
        return Err(crate::error::domain(format!("invalid interval [{a}, {b}]")));
    }
    let rule = gauss_rule(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = CompensatedSum::new();
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let at = mid + half * t;
        let value = f(at);
        if !value.is_finite() {
            return Err(Error::NonFinite { at, value });
        }
        acc.add(w * value);
    }
    Ok(half * acc.value())
}

/// One panel of [`adaptive_integrate_many`], ordered by `key`, the largest
/// component error relative to its tolerance.
#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    lo: f64,
    hi: f64,
    depth: usize,
    value: [f64; N],
    error: [f64; N],
    key: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl<const N: usize> Eq for Panel<N> {}

impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<const N: usize> Ord for Panel<N> {
    // Larger error first; ties go to the leftmost panel for determinism.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// Panels beyond which [`adaptive_integrate`] gives up.
const MAX_PANELS: usize = 1 << 16;

/// Globally adaptive bisection with a `(16, 32)`-node Gauss-Legendre pair per
/// panel.
///
/// The panel with the largest estimate `|I32 - I16|` is split until the summed
/// estimate is `<= tol`, or until it reaches the rounding level
/// `64 eps sum |I_panel|`. Panels whose own estimate is at their rounding
/// level are not split further. The final sum runs left to right, so the
/// result is deterministic.
pub fn adaptive_integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    let [r] = adaptive_integrate_many(|t| [f(t)], a, b, [tol])?;
    Ok(r)
}

/// [`adaptive_integrate`] for several integrands sharing one set of samples,
/// each with its own tolerance. A panel is split while any component misses
/// its tolerance, so every component meets the guarantees of the scalar
/// routine. On failure the error reports the first component that missed.
pub fn adaptive_integrate_many<F, const N: usize>(
    f: F,
    a: f64,
    b: f64,
    tol: [f64; N],
) -> Result<[QuadResult; N]>
where
    F: Fn(f64) -> [f64; N],
{
    if let Some(t) = tol.iter().find(|t| !(**t > 0.0)) {
        return Err(crate::error::domain(format!("tolerance must be positive, got {t}")));
    }
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(crate::error::domain(format!("invalid interval [{a}, {b}]")));
    }
    if a == b {
        for value in f(a) {
            if !value.is_finite() {
                return Err(Error::NonFinite { at: a, value });
            }
        }
        return Ok([QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 1,
        }; N]);
    }

    let (coarse, fine) = ADAPTIVE_NODES;
    let (coarse, fine) = (gauss_rule(coarse), gauss_rule(fine));
    let rule_sum = |rule: &GaussRule, lo: f64, hi: f64| -> Result<[f64; N]> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = [CompensatedSum::new(); N];
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let at = mid + half * t;
            for (k, value) in f(at).into_iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFinite { at, value });
                }
                acc[k].add(w * value);
            }
        }
        Ok(acc.map(|c| half * c.value()))
    };
    let rounding = |v: f64| 64.0 * f64::EPSILON * v.abs();
    let mut evaluations = 0;
    let mut panel = |lo: f64, hi: f64, depth: usize| -> Result<Panel<N>> {
        let i_coarse = rule_sum(&coarse, lo, hi)?;
        let value = rule_sum(&fine, lo, hi)?;
        evaluations += coarse.nodes.len() + fine.nodes.len();
        let error: [f64; N] = std::array::from_fn(|k| (value[k] - i_coarse[k]).abs());
        // Components at their rounding level do not drive refinement.
        let key = (0..N)
            .map(|k| if error[k] <= rounding(value[k]) { 0.0 } else { error[k] / tol[k] })
            .fold(0.0, f64::max);
        Ok(Panel { lo, hi, depth, value, error, key })
    };

    let mut open = std::collections::BinaryHeap::new();
    let mut done: Vec<Panel<N>> = Vec::new();
    let first = panel(a, b, 0)?;
    let mut error = first.error;
    let mut magnitude = first.value.map(f64::abs);
    open.push(first);
    let mut too_deep = false;
    let unmet = |error: &[f64; N], magnitude: &[f64; N]| {
        (0..N).any(|k| error[k] > tol[k].max(64.0 * f64::EPSILON * magnitude[k]))
    };

    while unmet(&error, &magnitude) {
        let Some(worst) = open.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if worst.key == 0.0 || mid <= worst.lo || mid >= worst.hi {
            done.push(worst);
            continue;
        }
        if worst.depth >= MAX_DEPTH || open.len() + done.len() >= MAX_PANELS {
            too_deep = true;
            done.push(worst);
            continue;
        }
        let left = panel(worst.lo, mid, worst.depth + 1)?;
        let right = panel(mid, worst.hi, worst.depth + 1)?;
        for k in 0..N {
            error[k] += left.error[k] + right.error[k] - worst.error[k];
            magnitude[k] += left.value[k].abs() + right.value[k].abs() - worst.value[k].abs();
        }
        open.push(left);
        open.push(right);
    }

    done.extend(open);
    done.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    let mut out = [QuadResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations,
    }; N];
    for k in 0..N {
        let value: CompensatedSum = done.iter().map(|p| p.value[k]).collect();
        let error_estimate: CompensatedSum = done.iter().map(|p| p.error[k]).collect();
        let (value, error_estimate) = (value.value(), error_estimate.value().max(0.0));
        if too_deep && error_estimate > tol[k].max(64.0 * f64::EPSILON * value.abs()) {
            return Err(Error::MaxDepth {
                depth: MAX_DEPTH,
                value,
                error_estimate,
            });
        }
        out[k].value = value;
        out[k].error_estimate = error_estimate;
    }
    Ok(out)
}

/// Circle average `(1/n) sum g(2 pi j / n)` of a `2 pi`-periodic function.
pub fn periodic_trapezoid<G>(g: G, n: usize) -> f64
where
    G: Fn(f64) -> f64,
{
    let step = 2.0 * PI / n as f64;
    let acc: CompensatedSum = (0..n).map(|j| g(step * j as f64)).collect();
    acc.value() / n as f64
}

const RICHARDSON_STAGES: usize = 10;
const RICHARDSON_RTOL: f64 = 1e-13;

/// Derivative of `f` at `x` by Richardson extrapolation of central
/// differences over the steps `h0, h0/2, h0/4, ...`.
///
/// Stops once successive extrapolants agree to a relative `1e-13`, once the
/// tableau error starts growing (rounding dominates), or after a fixed
/// number of stages; returns the estimate with the smallest error.
pub fn richardson_derivative<F>(f: F, x: f64, h0: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(h0 > 0.0) {
        return Err(crate::error::domain(format!("step must be positive, got {h0}")));
    }
    let central = |h: f64| -> Result<f64> {
        let hi = f(x + h);
        if !hi.is_finite() {
            return Err(Error::NonFinite { at: x + h, value: hi });
        }
        let lo = f(x - h);
        if !lo.is_finite() {
            return Err(Error::NonFinite { at: x - h, value: lo });
        }
        Ok((hi - lo) / (2.0 * h))
    };

    let mut prev_row: Vec<f64> = vec![central(h0)?];
    let mut best = prev_row[0];
    let mut best_err = f64::INFINITY;
    let mut h = h0;
    for _ in 1..RICHARDSON_STAGES {
        h *= 0.5;
        let mut row = Vec::with_capacity(prev_row.len() + 1);
        row.push(central(h)?);
        let mut factor = 1.0;
        for j in 1..=prev_row.len() {
            factor *= 4.0;
            let value = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            let err = (value - row[j - 1]).abs().max((value - prev_row[j - 1]).abs());
            if err <= best_err {
                best_err = err;
                best = value;
            }
            row.push(value);
        }
        let last = row.len() - 1;
        if (row[last] - prev_row[last - 1]).abs() >= 2.0 * best_err {
            break;
        }
        if best_err <= RICHARDSON_RTOL * best.abs() {
            break;
        }
        prev_row = row;
    }
    Ok(best)
}
