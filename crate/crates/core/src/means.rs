//! Classical circle means `M_p(f, r)`, the weight integral `phi`, the
//! weighted numerator `h` and the area integral mean `M_{p,alpha}(f, r)`.
//!
//! Everything is expressed in the variable `x = r^2`, where
//! `M(x) = M_p(f, sqrt x)`, `phi(x) = int_0^x (1-t)^alpha dt`,
//! `h(x) = int_0^x M(t) (1-t)^alpha dt` and `M_{p,alpha}(f, sqrt x) = h(x) / phi(x)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{adaptive_integrate, adaptive_integrate_many, periodic_trapezoid, richardson_derivative, CompensatedSum, QuadResult};
use crate::series::{modulus_pow, PowerSeries};

/// Below this `|alpha + 1|` the logarithmic form of `phi` is used.
pub const BRANCH_EPS: f64 = 1e-8;
/// Default absolute tolerance of [`h_of_x`].
pub const H_TOL: f64 = 1e-11;
/// Relative tolerance (against the bound `h <= M phi`) used by [`area_mean`].
pub const H_REL_TOL: f64 = 1e-13;
/// Relative agreement at which [`SeriesMean`] stops doubling its nodes.
pub const ANGULAR_RTOL: f64 = 1e-10;
/// Trapezoid node count past which [`SeriesMean`] switches to adaptive
/// quadrature in `theta`.
pub const MAX_TRAPEZOID_NODES: usize = 1024;
/// Relative tolerance of that adaptive fallback.
pub const ANGULAR_ADAPTIVE_RTOL: f64 = 1e-13;
pub const X_MIN: f64 = 1e-4;
pub const X_MAX: f64 = 0.999;

/// The exponent pair `(p, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub alpha: f64,
}

impl Params {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(domain(format!("p must be positive and finite, got {p}")));
        }
        if !alpha.is_finite() {
            return Err(domain(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self { p, alpha })
    }

    /// Whether `-2 <= alpha <= 0`, the range where log-convexity is a theorem.
    pub fn is_theorem_range(&self) -> bool {
        (-2.0..=0.0).contains(&self.alpha)
    }
}

/// `max(64, 8 (deg + 1))` trapezoid nodes on the circle.
pub fn default_angular_nodes(f: &PowerSeries) -> usize {
    64.max(8 * (f.degree() + 1))
}

/// `M_p(f, r)`, the average of `|f|^p` over the circle of radius `r`.
pub fn circle_mean(f: &PowerSeries, p: f64, r: f64, nodes: usize) -> f64 {
    if r == 0.0 {
        return modulus_pow(f.coeffs()[0], p);
    }
    periodic_trapezoid(|theta| f.modulus_p(r, theta, p), nodes)
}

/// Parseval form of `M_2(f, sqrt x)`: `sum |a_k|^2 x^k`.
pub fn circle_mean_exact_p2(f: &PowerSeries, x: f64) -> f64 {
    f.coeffs()
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * x + c.norm_sqr())
}

/// A positive radial mean `x -> M(x)` together with its derivative.
///
/// [`SeriesMean`] is the concrete case `M(x) = M_p(f, sqrt x)`; other
/// implementations let the convexity machinery run on abstract `M`.
pub trait RadialMean: Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> Result<f64>;
    fn label(&self) -> String;
}

/// How `M'(x)` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    /// Differentiation under the integral sign.
    UnderIntegral,
    /// Richardson extrapolation of `M(x)` (used for `p <= 1`).
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MPrime {
    pub value: f64,
    pub method: DerivativeMethod,
    /// `f` vanished at one of the sampled circle nodes.
    pub vanishes_on_circle: bool,
}

/// `M(x) = M_p(f, sqrt x)` with the angular nodes fixed at construction.
#[derive(Debug, Clone)]
pub struct SeriesMean {
    f: PowerSeries,
    p: f64,
    roots: Vec<Complex64>,
}

impl SeriesMean {
    pub fn new(f: &PowerSeries, p: f64) -> Result<Self> {
        Self::with_nodes(f, p, default_angular_nodes(f))
    }

    pub fn with_nodes(f: &PowerSeries, p: f64, nodes: usize) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(domain(format!("p must be positive and finite, got {p}")));
        }
        if nodes < 4 || !nodes.is_multiple_of(2) {
            return Err(domain("an even number of at least 4 angular nodes is required"));
        }
        let step = 2.0 * std::f64::consts::PI / nodes as f64;
        let roots = (0..nodes)
            .map(|j| Complex64::from_polar(1.0, step * j as f64))
            .collect();
        Ok(Self {
            f: f.clone(),
            p,
            roots,
        })
    }

    pub fn series(&self) -> &PowerSeries {
        &self.f
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn nodes(&self) -> usize {
        self.roots.len()
    }

    /// Average of `term` over the unit circle.
    ///
    /// The trapezoid rule doubles its node count until the even-indexed half
    /// of the nodes agrees with all of them to [`ANGULAR_RTOL`]. The base
    /// nodes suffice unless `f` has a zero close to the circle, where `|f|^p`
    /// develops a narrow feature (a cusp when `p` is not an even integer and
    /// the zero lies on the circle). Past [`MAX_TRAPEZOID_NODES`] the average
    /// switches to adaptive Gauss-Legendre quadrature in `theta`, which
    /// isolates such features by bisection.
    fn average(&self, term: impl Fn(Complex64) -> f64) -> f64 {
        let mut even = CompensatedSum::new();
        let mut odd = CompensatedSum::new();
        for (j, &u) in self.roots.iter().enumerate() {
            if j % 2 == 0 {
                even.add(term(u))
            } else {
                odd.add(term(u))
            }
        }
        let mut n = self.roots.len();
        loop {
            let half = even.value() / (n / 2) as f64;
            let full = (even.value() + odd.value()) / n as f64;
            if (full - half).abs() <= ANGULAR_RTOL * full.abs() {
                return full;
            }
            if n >= MAX_TRAPEZOID_NODES {
                let tau = 2.0 * std::f64::consts::PI;
                let g = |theta: f64| term(Complex64::from_polar(1.0, theta));
                let tol = ANGULAR_ADAPTIVE_RTOL * tau * full.abs();
                return match adaptive_integrate(g, 0.0, tau, tol) {
                    Ok(r) => r.value / tau,
                    Err(Error::MaxDepth { value, .. }) => value / tau,
                    Err(_) => full,
                };
            }
            // The new nodes sit at the odd multiples of pi / n.
            even = [even.value(), odd.value()].into_iter().collect();
            let step = std::f64::consts::PI / n as f64;
            odd = (0..n)
                .map(|j| term(Complex64::from_polar(1.0, step * (2 * j + 1) as f64)))
                .collect();
            n *= 2;
        }
    }

    /// `M'(x)`, with provenance. For `p > 1`:
    /// `dM/dx = (1/(2r)) avg( p |f|^{p-2} Re(conj(f) f'(z) e^{i theta}) )`, `r = sqrt x`,
    /// with the integrand set to 0 where `f` vanishes. For `p <= 1` the
    /// Richardson fallback is used unconditionally.
    pub fn m_prime(&self, x: f64) -> Result<MPrime> {
        if !(x > 0.0 && x < 1.0) {
            return Err(domain(format!("M'(x) needs x in (0, 1), got {x}")));
        }
        let r = x.sqrt();
        let vanishes_on_circle = self.roots.iter().any(|&u| self.f.eval(u * r).norm_sqr() == 0.0);
        if self.f.is_constant() {
            return Ok(MPrime {
                value: 0.0,
                method: DerivativeMethod::UnderIntegral,
                vanishes_on_circle,
            });
        }
        if self.p > 1.0 {
            let p = self.p;
            let avg = self.average(|u| {
                let (w, dw) = self.f.eval_with_derivative(u * r);
                let n2 = w.norm_sqr();
                if n2 == 0.0 {
                    return 0.0;
                }
                let radial = (w.conj() * dw * u).re;
                let weight = if p == 2.0 { 1.0 } else { n2.powf(0.5 * p - 1.0) };
                p * weight * radial
            });
            return Ok(MPrime {
                value: avg / (2.0 * r),
                method: DerivativeMethod::UnderIntegral,
                vanishes_on_circle,
            });
        }
        let h0 = x.min(1.0 - x) / 8.0;
        let value = richardson_derivative(|t| self.value(t), x, h0)?;
        Ok(MPrime {
            value,
            method: DerivativeMethod::Richardson,
            vanishes_on_circle,
        })
    }
}

impl RadialMean for SeriesMean {
    fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return modulus_pow(self.f.coeffs()[0], self.p);
        }
        let r = x.sqrt();
        let p = self.p;
        self.average(|u| modulus_pow(self.f.eval(u * r), p))
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        self.m_prime(x).map(|d| d.value)
    }

    fn label(&self) -> String {
        self.f.to_string()
    }
}

/// An abstract radial mean given by closures.
pub struct FnMean<F, G> {
    value: F,
    derivative: G,
    label: String,
}

impl<F, G> FnMean<F, G>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    pub fn new(label: impl Into<String>, value: F, derivative: G) -> Self {
        Self {
            value,
            derivative,
            label: label.into(),
        }
    }
}

impl<F, G> RadialMean for FnMean<F, G>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        let d = (self.derivative)(x);
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::NonFinite { at: x, value: d })
        }
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `M(x) = M_p(f, sqrt x)`.
pub fn m_of_x(f: &PowerSeries, p: f64, x: f64) -> Result<f64> {
    Ok(SeriesMean::new(f, p)?.value(x))
}

/// `M'(x)`; see [`SeriesMean::m_prime`].
pub fn m_prime(f: &PowerSeries, p: f64, x: f64) -> Result<MPrime> {
    SeriesMean::new(f, p)?.m_prime(x)
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain(format!("x must lie in [0, 1), got {x}")))
    }
}

/// `phi(x) = int_0^x (1-t)^alpha dt`.
pub fn phi(alpha: f64, x: f64) -> Result<f64> {
    check_unit(x)?;
    if alpha == 0.0 {
        return Ok(x);
    }
    let beta = alpha + 1.0;
    let l = (-x).ln_1p();
    if beta.abs() <= BRANCH_EPS {
        Ok(-l - 0.5 * beta * l * l)
    } else {
        Ok(-(beta * l).exp_m1() / beta)
    }
}

/// `phi(x) - x`, accurate for small `x` where the subtraction cancels.
pub fn phi_minus_x(alpha: f64, x: f64) -> Result<f64> {
    check_unit(x)?;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    if x >= 0.1 {
        return Ok(phi(alpha, x)? - x);
    }
    // phi(x) - x = sum_{k>=1} c_k x^{k+1} / (k+1), c_k = prod_{j<k} (j - alpha)/(j + 1).
    let mut c = 1.0;
    let mut power = x;
    let mut acc = CompensatedSum::new();
    for k in 1..200 {
        let j = (k - 1) as f64;
        c *= (j - alpha) / (j + 1.0);
        power *= x;
        let term = c * power / (k as f64 + 1.0);
        acc.add(term);
        if term.abs() <= 1e-18 * acc.value().abs() {
            break;
        }
    }
    Ok(acc.value())
}

/// `phi'(x) = (1-x)^alpha`.
pub fn phi_prime(alpha: f64, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok((alpha * (-x).ln_1p()).exp())
}

/// `phi''(x) = -alpha (1-x)^(alpha-1)`.
pub fn phi_second(alpha: f64, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(-alpha * ((alpha - 1.0) * (-x).ln_1p()).exp())
}

/// `(1-x)^(alpha+1)`, which equals `1 - (alpha+1) phi(x)`.
pub fn weight_tail(alpha: f64, x: f64) -> f64 {
    ((alpha + 1.0) * (-x).ln_1p()).exp()
}

/// `int_a^b M(t) (1-t)^alpha dt` by adaptive quadrature.
pub fn weighted_integral<M: RadialMean + ?Sized>(
    mean: &M,
    alpha: f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult> {
    adaptive_integrate(|t| mean.value(t) * (alpha * (-t).ln_1p()).exp(), a, b, tol)
}

/// `h(x)` with an absolute quadrature tolerance.
pub fn h_of_x(f: &PowerSeries, p: f64, alpha: f64, x: f64, tol: f64) -> Result<QuadResult> {
    check_open(x)?;
    weighted_integral(&SeriesMean::new(f, p)?, alpha, 0.0, x, tol)
}

/// `h'(x) = M(x) (1-x)^alpha`.
pub fn h_prime(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<f64> {
    check_open(x)?;
    Ok(m_of_x(f, p, x)? * phi_prime(alpha, x)?)
}

/// `h''(x) = [(1-x) M'(x) - alpha M(x)] (1-x)^(alpha-1)`.
pub fn h_second(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<f64> {
    check_open(x)?;
    let mean = SeriesMean::new(f, p)?;
    let m = mean.value(x);
    let mp = mean.m_prime(x)?.value;
    Ok(((1.0 - x) * mp - alpha * m) * ((alpha - 1.0) * (-x).ln_1p()).exp())
}

fn check_open(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("x must lie in (0, 1), got {x}")))
    }
}

/// Tolerance for `int_a^b M(t)(1-t)^alpha dt` relative to the bound
/// `M(b) (phi(b) - phi(a))`, which holds because `M` is nondecreasing.
pub fn relative_h_tolerance(rel: f64, m_at_b: f64, phi_increment: f64) -> f64 {
    (rel * m_at_b.abs() * phi_increment.abs()).max(f64::MIN_POSITIVE)
}

/// `int_a^b M(t) (1-t)^alpha dt` and `int_a^b (m_b - M(t)) (1-t)^alpha dt`
/// with `m_b = M(b)`, from one set of samples of `M`.
///
/// For nondecreasing `M` the second integrand is nonnegative, so the deficit
/// `M(x) phi(x) - h(x)` can be accumulated from such pieces without the
/// cancellation of the subtraction.
pub fn piece_integrals<M: RadialMean + ?Sized>(
    mean: &M,
    alpha: f64,
    a: f64,
    b: f64,
    m_b: f64,
    tol_h: f64,
    tol_deficit: f64,
) -> Result<(QuadResult, QuadResult)> {
    let [h, deficit] = adaptive_integrate_many(
        |t| {
            let w = (alpha * (-t).ln_1p()).exp();
            let m = mean.value(t);
            [m * w, (m_b - m) * w]
        },
        a,
        b,
        [tol_h, tol_deficit],
    )?;
    Ok((h, deficit))
}

/// Tolerance for a deficit piece on `[a, b]`: `rel` times the bound
/// `(M(b) - M(a)) (phi(b) - phi(a))`, floored at the rounding level
/// `64 eps M(b) (phi(b) - phi(a))` of the integrand.
pub fn deficit_tolerance(rel: f64, m_a: f64, m_b: f64, phi_increment: f64) -> f64 {
    let bound = (m_b - m_a).abs() * phi_increment.abs();
    let floor = 64.0 * f64::EPSILON * m_b.abs() * phi_increment.abs();
    (rel * bound).max(floor).max(f64::MIN_POSITIVE)
}

/// `h` and `M, M'` at one point, the raw inputs of the convexity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeansPoint {
    pub x: f64,
    pub m: f64,
    pub m_prime: f64,
    pub h: f64,
    pub h_err: f64,
    /// `M(x) phi(x) - h(x) = int_0^x (M(x) - M(t)) (1-t)^alpha dt`.
    pub deficit: f64,
    pub phi: f64,
    pub phi_prime: f64,
}

/// Evaluates a [`MeansPoint`] at `x`, integrating `h` from 0 with
/// relative tolerance `rel_tol` against the bound `h <= M phi`, and the
/// deficit against its bound `(M(x) - M(0)) phi(x)`.
pub fn means_point<M: RadialMean + ?Sized>(
    mean: &M,
    alpha: f64,
    x: f64,
    rel_tol: f64,
) -> Result<MeansPoint> {
    check_open(x)?;
    let m = mean.value(x);
    let phi_x = phi(alpha, x)?;
    let tol_h = relative_h_tolerance(rel_tol, m, phi_x);
    let tol_deficit = deficit_tolerance(rel_tol, mean.value(0.0), m, phi_x);
    let (h, deficit) = piece_integrals(mean, alpha, 0.0, x, m, tol_h, tol_deficit)?;
    Ok(MeansPoint {
        x,
        m,
        m_prime: mean.derivative(x)?,
        h: h.value,
        h_err: h.error_estimate,
        deficit: deficit.value,
        phi: phi_x,
        phi_prime: phi_prime(alpha, x)?,
    })
}

/// `M_{p,alpha}(f, r) = h(r^2) / phi(r^2)`.
pub fn area_mean(f: &PowerSeries, p: f64, alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(domain(format!("r must lie in (0, 1), got {r}")));
    }
    let x = r * r;
    let mean = SeriesMean::new(f, p)?;
    let phi_x = phi(alpha, x)?;
    let tol = relative_h_tolerance(H_REL_TOL, mean.value(x), phi_x);
    let h = weighted_integral(&mean, alpha, 0.0, x, tol)?;
    Ok(h.value / phi_x)
}
