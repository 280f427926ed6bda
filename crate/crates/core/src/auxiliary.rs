//! Auxiliary quantities of the `Delta >= 0` argument, each evaluated so it
//! can be checked numerically.
//!
//! Notation, all at a point `x in (0, 1)` with `psi = phi - x`,
//! `k = (1-x)^(alpha+1) = 1 - (alpha+1) phi` and `L = 1 - x - alpha x`:
//!
//! * `g1 = x L - (1-x) phi`, `g2 = (alpha+2) phi^2 - 2(1+x+alpha x) phi + 2x`,
//!   `g3 = phi^2 - (1+x+alpha x) phi + x`;
//! * `A = psi / phi^2`, `B = L + y`, `C = x k`, with `y = x(1-x) M'/M`;
//! * `A1 = x(1-x) A'`, `B1 = x(1-x)(B M'/M + B0)`, `C1 = x(1-x)(2C M'/M + C')`,
//!   `B0 = -(alpha+1) - x M'/M`;
//! * `E = 2A^2 C - A B1 + A1 B`, `F = A B B1 - A1 B^2 + 2 A A1 C - 2 A^2 C1`,
//!   `S = sqrt(B^2 - 4AC)`, `d = E S + F`;
//! * `y0 = g1 g2 / (psi g3)`, the root of `F^2 - E^2 S^2` in `y`.
//!
//! `E`, `F`, `S`, `y0` are treated as functions of a free variable `y >= 0`,
//! so identities can be tested far beyond the values of `y` any `f` realizes.
//! `E` and `F` are computed twice: from the definitions above and from their
//! expanded polynomial forms in `(x, y, phi)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::{Dd, Real};
use crate::error::{domain, Error, Result};
use crate::means::{means_point, phi, phi_minus_x, weight_tail, SeriesMean, H_REL_TOL};
use crate::series::PowerSeries;

/// Floor of the relative-residual denominators.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

fn check_open(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("x must lie in (0, 1), got {x}")))
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(RESIDUAL_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GValues {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

/// `g1, g2, g3` written in `psi = phi - x`, which removes the leading-order
/// cancellation at small `x`.
pub fn g_functions(alpha: f64, x: f64) -> Result<GValues> {
    let psi = phi_minus_x(alpha, x)?;
    Ok(g_from_psi(alpha, x, psi))
}

fn g_from_psi(alpha: f64, x: f64, psi: f64) -> GValues {
    let ax2 = alpha * x * x;
    GValues {
        g1: -ax2 - (1.0 - x) * psi,
        g2: -ax2 - 2.0 * (1.0 - x) * psi + (alpha + 2.0) * psi * psi,
        g3: -ax2 - psi + (1.0 - alpha) * x * psi + psi * psi,
    }
}

/// `1 - (alpha+1) phi(x) - (1-x) phi'(x)`, identically zero.
///
/// `phi` reaches `~1/(1-x)^(|alpha|-1)` for `alpha < -1`, where one `f64` ulp
/// of it already exceeds any useful absolute tolerance, so the check is
/// carried out in double-double arithmetic.
pub fn lemma4a_residual(alpha: f64, x: f64) -> Result<f64> {
    // Validates the arguments with the same rules as the f64 path.
    phi(alpha, x)?;
    let (ph, dphi) = phi_dd(alpha, x);
    let one = Dd::from(1.0);
    let beta = Dd::from(alpha) + one;
    Ok((one - beta * ph - (one - Dd::from(x)) * dphi).to_f64())
}

/// `phi` and `phi' = (1-x)^alpha` in double-double arithmetic.
pub fn phi_dd(alpha: f64, x: f64) -> (Dd, Dd) {
    let one = Dd::from(1.0);
    let log = (one - Dd::from(x)).ln();
    let beta = Dd::from(alpha) + one;
    let ph = if beta.to_f64() == 0.0 { -log } else { (one - (beta * log).exp()) / beta };
    (ph, (Dd::from(alpha) * log).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abc {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `A, B, C` for a free `y = x(1-x) M'/M`.
pub fn abc_at(x: f64, y: f64, alpha: f64) -> Result<Abc> {
    check_open(x)?;
    let ph = phi(alpha, x)?;
    Ok(Abc {
        a: phi_minus_x(alpha, x)? / (ph * ph),
        b: (1.0 - x - alpha * x) + y,
        c: x * weight_tail(alpha, x),
    })
}

/// `y = x(1-x) M'(x)/M(x)` for `M = M_p(f, sqrt x)`.
pub fn y_of(f: &PowerSeries, p: f64, x: f64) -> Result<f64> {
    check_open(x)?;
    let mean = SeriesMean::new(f, p)?;
    let m = crate::means::RadialMean::value(&mean, x);
    if !(m > 0.0) {
        return Err(domain(format!("M(x) must be positive, got {m}")));
    }
    Ok(x * (1.0 - x) * mean.m_prime(x)?.value / m)
}

pub fn abc(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<Abc> {
    abc_at(x, y_of(f, p, x)?, alpha)
}

/// `B^2 - 4AC`.
pub fn discriminant(a: f64, b: f64, c: f64) -> f64 {
    b * b - 4.0 * a * c
}

/// `B^2 - 4AC` as `(L - 2 psi/phi)^2 + y^2 + 2 L y`, `L = 1 - x - alpha x`.
pub fn discriminant_expanded(x: f64, y: f64, alpha: f64, phi: f64) -> f64 {
    let l = 1.0 - x - alpha * x;
    let head = ((1.0 + x + alpha * x) * phi - 2.0 * x) / phi;
    head * head + y * y + 2.0 * l * y
}

/// Slacks of `-S/(2A) <= h/M - B/(2A) <= S/(2A)`; nonnegative means the
/// side holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichSlack {
    /// `h/M - 2C/(B + S)`.
    pub lower: f64,
    /// `(B + S)/(2A) - h/M`.
    pub upper: f64,
    /// `(B + S)/(2A) - phi`, the first link of the upper bound chain.
    pub upper_via_phi: f64,
    /// `phi - h/M`, the second link (`h <= M phi`).
    pub bound_gap: f64,
    /// `h` and `M` at the point, for scaling.
    pub h: f64,
    pub m: f64,
}

pub fn sandwich_check(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<SandwichSlack> {
    if !(alpha < 0.0) {
        return Err(domain(format!("the sandwich needs alpha < 0 (A > 0), got {alpha}")));
    }
    check_open(x)?;
    let mean = SeriesMean::new(f, p)?;
    let point = means_point(&mean, alpha, x, H_REL_TOL)?;
    if !(point.m > 0.0) {
        return Err(domain("M(x) must be positive"));
    }
    let y = x * (1.0 - x) * point.m_prime / point.m;
    let Abc { a, b, c } = abc_at(x, y, alpha)?;
    let s = discriminant(a, b, c).max(0.0).sqrt();
    let q = point.h / point.m;
    let top = (b + s) / (2.0 * a);
    Ok(SandwichSlack {
        lower: q - 2.0 * c / (b + s),
        upper: top - q,
        upper_via_phi: top - point.phi,
        bound_gap: point.phi - q,
        h: point.h,
        m: point.m,
    })
}

/// `delta(x) = h - M (B - S)/(2A)`, evaluated as `h - 2CM/(B + S)`.
pub fn delta_lower_proxy(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<f64> {
    let s = sandwich_check(f, p, alpha, x)?;
    Ok(s.m * s.lower)
}

/// Every auxiliary quantity at `(x, y, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxBundle {
    pub x: f64,
    pub alpha: f64,
    pub y: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub psi: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub b0: f64,
    /// `A1` from `x(1-x) A'`.
    pub a1: f64,
    /// `A1` from its displayed closed form.
    pub a1_display: f64,
    pub b1: f64,
    pub b1_display: f64,
    pub c1: f64,
    pub c1_display: f64,
    pub e: f64,
    pub f: f64,
    pub e_expanded: f64,
    pub f_expanded: f64,
    pub s: f64,
    pub disc: f64,
    pub g: GValues,
    /// `None` at degenerate points (`psi = 0` or `g3 = 0`).
    pub y0: Option<f64>,
}

impl AuxBundle {
    pub fn d(&self) -> f64 {
        self.e * self.s + self.f
    }

    /// Magnitudes of the terms of `E`, for relative comparisons.
    pub fn e_scale(&self) -> f64 {
        (2.0 * self.a * self.a * self.c).abs()
            + (self.a * self.b1).abs()
            + (self.a1 * self.b).abs()
    }

    pub fn f_scale(&self) -> f64 {
        (self.a * self.b * self.b1).abs()
            + (self.a1 * self.b * self.b).abs()
            + (2.0 * self.a * self.a1 * self.c).abs()
            + (2.0 * self.a * self.a * self.c1).abs()
    }
}

pub fn aux_seven(x: f64, y: f64, alpha: f64) -> Result<AuxBundle> {
    check_open(x)?;
    if !(y >= 0.0) {
        return Err(domain(format!("y must be nonnegative, got {y}")));
    }
    let ph = phi(alpha, x)?;
    let psi = phi_minus_x(alpha, x)?;
    let one_x = 1.0 - x;
    let dphi = crate::means::phi_prime(alpha, x)?;
    let tail = weight_tail(alpha, x);
    let g = g_from_psi(alpha, x, psi);

    // Definitional path.
    let a = psi / (ph * ph);
    let l = 1.0 - x - alpha * x;
    let b = l + y;
    let c = x * tail;
    let a_prime = ((dphi - 1.0) * ph - 2.0 * psi * dphi) / (ph * ph * ph);
    let a1 = x * one_x * a_prime;
    let b0 = -(alpha + 1.0) - y / one_x;
    let b1 = y * b + x * one_x * b0;
    let c_prime = tail - (alpha + 1.0) * x * dphi;
    let c1 = 2.0 * c * y + x * one_x * c_prime;
    let e = 2.0 * a * a * c - a * b1 + a1 * b;
    let f = a * b * b1 - a1 * b * b + 2.0 * a * a1 * c - 2.0 * a * a * c1;
    let disc = discriminant(a, b, c);
    let s = disc.max(0.0).sqrt();

    // Displayed closed forms.
    let ax = alpha * x;
    let k = 1.0 - (alpha + 1.0) * ph;
    let a1_display = x * ((alpha + 1.0) * ph * ph - (2.0 + x + 2.0 * ax) * ph + 2.0 * x) / (ph * ph * ph);
    let b1_display = -(alpha + 1.0) * x * one_x + (1.0 - 2.0 * x - ax) * y + y * y;
    let c1_display = x * k * (1.0 - 2.0 * x - ax + 2.0 * y);
    let (e_expanded, f_expanded) = expanded_e_f(x, y, alpha, ph);

    let y0 = if psi == 0.0 || g.g3 == 0.0 {
        None
    } else {
        Some(g.g1 * g.g2 / (psi * g.g3))
    };

    Ok(AuxBundle {
        x,
        alpha,
        y,
        phi: ph,
        phi_prime: dphi,
        psi,
        a,
        b,
        c,
        b0,
        a1,
        a1_display,
        b1,
        b1_display,
        c1,
        c1_display,
        e,
        f,
        e_expanded,
        f_expanded,
        s,
        disc,
        g,
        y0,
    })
}

/// `E` and `F` from their expanded forms as polynomials in `y` with
/// coefficients in `(x, phi)`; numerators first, `phi` powers last.
fn expanded_e_f<T: Real>(x: f64, y: f64, alpha: f64, ph: T) -> (T, T) {
    let c = |v: f64| T::from(v);
    let (xt, yt, at) = (c(x), c(y), c(alpha));
    let ax = at * xt;
    let x2 = xt * xt;
    let k = c(1.0) - (at + c(1.0)) * ph;
    let g2 = (at + c(2.0)) * ph * ph - c(2.0) * (c(1.0) + xt + ax) * ph + c(2.0) * xt;
    let psi = ph - xt;
    let head = x2 * k * g2;
    let (ph2, ph3) = (ph * ph, ph * ph * ph);

    let e_y1 = (c(3.0) * xt + c(2.0) * ax - c(1.0)) * ph2
        - xt * (c(1.0) + c(3.0) * xt + c(3.0) * ax) * ph
        + c(2.0) * x2;
    let e_num = head + ph * e_y1 * yt - ph2 * psi * yt * yt;
    let ph4 = ph2 * ph2;

    let a2x2 = at * at * x2;
    let f_y1 = (c(1.0) - c(2.0) * xt + c(5.0) * x2 - ax + c(8.0) * at * x2 + c(3.0) * a2x2) * ph3
        - xt * (c(1.0) + c(6.0) * xt + c(5.0) * x2 + c(5.0) * ax + c(10.0) * at * x2 + c(5.0) * a2x2)
            * ph2
        + c(4.0) * x2 * (c(1.0) + c(2.0) * xt + c(2.0) * ax) * ph
        - c(4.0) * x2 * xt;
    let f_y2 = (c(2.0) - c(4.0) * xt - c(3.0) * ax) * ph2 + c(4.0) * (at + c(1.0)) * x2 * ph
        - c(2.0) * x2;
    let f_num = head * ((c(1.0) + xt + ax) * ph - c(2.0) * xt)
        + ph * f_y1 * yt
        + ph2 * f_y2 * yt * yt
        + ph3 * psi * yt * yt * yt;

    (e_num / ph4, f_num / (ph4 * ph))
}

/// Every term of the `F^2 - E^2 S^2` factorization, from `(x, y, alpha)` and
/// one value of `phi`. `psi`, `k` and `phi'` are derived from that `phi`
/// (`k = 1 - (alpha+1) phi`, `phi' = k / (1-x)`), so the identity holds
/// exactly in `T` up to rounding.
struct Identity<T> {
    e: T,
    f: T,
    e_expanded: T,
    f_expanded: T,
    disc: T,
    disc_expanded: T,
    lhs: T,
    rhs: T,
}

fn identity_terms<T: Real>(x: f64, y: f64, alpha: f64, ph: f64) -> Identity<T> {
    let c = |v: f64| T::from(v);
    let (xt, yt, at, ph) = (c(x), c(y), c(alpha), c(ph));
    let one = c(1.0);
    let psi = ph - xt;
    let k = one - (at + one) * ph;
    let one_x = one - xt;
    let dphi = k / one_x;
    let ph2 = ph * ph;

    let a = psi / ph2;
    let l = one - xt - at * xt;
    let b = l + yt;
    let cc = xt * k;
    let a1 = xt * one_x * (((dphi - one) * ph - c(2.0) * psi * dphi) / (ph2 * ph));
    let b1 = yt * b + xt * one_x * (-(at + one) - yt / one_x);
    let c1 = c(2.0) * cc * yt + xt * one_x * (k - (at + one) * xt * dphi);
    let e = c(2.0) * a * a * cc - a * b1 + a1 * b;
    let f = a * b * b1 - a1 * b * b + c(2.0) * a * a1 * cc - c(2.0) * a * a * c1;
    let disc = b * b - c(4.0) * a * cc;
    let (e_expanded, f_expanded) = expanded_e_f(x, y, alpha, ph);
    let head = ((one + xt + at * xt) * ph - c(2.0) * xt) / ph;
    let disc_expanded = head * head + yt * yt + c(2.0) * l * yt;

    let m = one + xt + at * xt;
    let g1 = xt * l - one_x * ph;
    let g2 = (at + c(2.0)) * ph2 - c(2.0) * m * ph + c(2.0) * xt;
    let g3 = ph2 - m * ph + xt;
    let ph4 = ph2 * ph2;
    let rhs = c(4.0) * yt * xt * xt * psi * psi * k * (psi * g3 * yt - g1 * g2) / (ph4 * ph4);

    Identity {
        e,
        f,
        e_expanded,
        f_expanded,
        disc,
        disc_expanded,
        lhs: f * f - e * e * disc,
        rhs,
    }
}

fn dd_relative(a: Dd, b: Dd) -> f64 {
    let scale = a.abs().to_f64().max(b.abs().to_f64()).max(RESIDUAL_FLOOR);
    (a - b).abs().to_f64() / scale
}

/// Both sides of `F^2 - E^2 S^2 = 4 y x^2 psi^3 k g3 (y - y0) / phi^8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eq5Residual {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|, 1e-300)`.
    pub relative: f64,
    pub degenerate: bool,
}

/// Checks the factorization of `F^2 - E^2 S^2`.
///
/// The left side combines the definitional `E, F` and `S^2 = B^2 - 4AC`; the
/// right side is the closed product, with `psi g3 (y - y0)` expanded to
/// `psi g3 y - g1 g2` so that degenerate points need no division. Near
/// `y = y0` the left side cancels to many digits, so both sides are evaluated
/// in double-double arithmetic at `phi(alpha, x)`; the identity is polynomial
/// in `(x, y, phi)`, so only arithmetic rounding separates them.
pub fn eq5_residual(x: f64, y: f64, alpha: f64) -> Result<Eq5Residual> {
    check_open(x)?;
    if !(y >= 0.0) {
        return Err(domain(format!("y must be nonnegative, got {y}")));
    }
    let ph = phi(alpha, x)?;
    let psi = phi_minus_x(alpha, x)?;
    let t = identity_terms::<Dd>(x, y, alpha, ph);
    Ok(Eq5Residual {
        lhs: t.lhs.to_f64(),
        rhs: t.rhs.to_f64(),
        relative: dd_relative(t.lhs, t.rhs),
        degenerate: psi == 0.0 || g_from_psi(alpha, x, psi).g3 == 0.0,
    })
}

/// Relative disagreement of the definitional and expanded `E` and `F`,
/// evaluated in double-double arithmetic.
pub fn dual_path_residuals(x: f64, y: f64, alpha: f64) -> Result<(f64, f64)> {
    check_open(x)?;
    let t = identity_terms::<Dd>(x, y, alpha, phi(alpha, x)?);
    Ok((dd_relative(t.e, t.e_expanded), dd_relative(t.f, t.f_expanded)))
}

/// Relative disagreement of `B^2 - 4AC` and its expanded square form,
/// evaluated in double-double arithmetic.
pub fn discriminant_dual_path(x: f64, y: f64, alpha: f64) -> Result<f64> {
    check_open(x)?;
    let t = identity_terms::<Dd>(x, y, alpha, phi(alpha, x)?);
    Ok(dd_relative(t.disc, t.disc_expanded))
}

/// `d = E S + F` for a free `y`.
pub fn d_abstract(x: f64, y: f64, alpha: f64) -> Result<f64> {
    Ok(aux_seven(x, y, alpha)?.d())
}

/// `d = E S + F` at the `y` realized by `f`.
pub fn d_value(f: &PowerSeries, p: f64, alpha: f64, x: f64) -> Result<f64> {
    d_abstract(x, y_of(f, p, x)?, alpha)
}

/// Sampling box of [`identity_check`]: `x`, `y` and `alpha` ranges.
pub const IDENTITY_X: (f64, f64) = (0.05, 0.95);
pub const IDENTITY_Y: (f64, f64) = (0.0, 5.0);
pub const IDENTITY_ALPHA: (f64, f64) = (-1.9, -0.1);

/// A sample `(x, y, alpha)` together with the residual observed there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Worst {
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    pub value: f64,
}

/// Maxima of the randomized identity test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub samples: usize,
    pub seed: u64,
    /// Worst relative residual of the `F^2 - E^2 S^2` factorization.
    pub eq5: Option<Worst>,
    /// Worst relative disagreement of the two evaluations of `E`.
    pub e_dual: Option<Worst>,
    pub f_dual: Option<Worst>,
}

impl IdentitySummary {
    pub fn max_eq5(&self) -> f64 {
        self.eq5.map_or(0.0, |w| w.value)
    }

    pub fn max_dual(&self) -> f64 {
        let e = self.e_dual.map_or(0.0, |w| w.value);
        let f = self.f_dual.map_or(0.0, |w| w.value);
        e.max(f)
    }
}

/// Uniform samples from the identity box; the stream depends only on `seed`.
pub fn identity_samples(samples: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let x = rng.gen_range(IDENTITY_X.0..IDENTITY_X.1);
            let y = rng.gen_range(IDENTITY_Y.0..=IDENTITY_Y.1);
            let alpha = rng.gen_range(IDENTITY_ALPHA.0..IDENTITY_ALPHA.1);
            (x, y, alpha)
        })
        .collect()
}

/// Randomized test of the factorization of `F^2 - E^2 S^2` and of the
/// expanded forms of `E` and `F`. Samples are evaluated in parallel; ties in
/// the maxima go to the earliest sample.
pub fn identity_check(samples: usize, seed: u64) -> Result<IdentitySummary> {
    let points = identity_samples(samples, seed);
    let rows: Vec<[Worst; 3]> = points
        .par_iter()
        .map(|&(x, y, alpha)| {
            let at = |value| Worst { x, y, alpha, value };
            let r = eq5_residual(x, y, alpha)?;
            let (e, f) = dual_path_residuals(x, y, alpha)?;
            Ok([at(r.relative), at(e), at(f)])
        })
        .collect::<Result<_>>()?;
    let worst = |i: usize| {
        rows.iter()
            .map(|r| r[i])
            .reduce(|a, b| if b.value > a.value { b } else { a })
    };
    Ok(IdentitySummary {
        samples,
        seed,
        eq5: worst(0),
        e_dual: worst(1),
        f_dual: worst(2),
    })
}

/// `E(0)`, `E(y0)`, `F(y0)` from their closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseSigns {
    pub e_at_0: f64,
    pub e_at_y0: f64,
    pub f_at_y0: f64,
    pub y0: f64,
}

impl CaseSigns {
    /// `E(0) >= 0`, `E(y0) >= 0` and `F(y0) > 0`, each up to
    /// `tol * (1 + |value|)` (strict for `F(y0)`).
    pub fn holds(&self, tol: f64) -> bool {
        self.e_at_0 >= -tol * (1.0 + self.e_at_0.abs())
            && self.e_at_y0 >= -tol * (1.0 + self.e_at_y0.abs())
            && self.f_at_y0 > -tol * (1.0 + self.f_at_y0.abs())
    }
}

pub fn case_analysis_signs(x: f64, alpha: f64) -> Result<CaseSigns> {
    check_open(x)?;
    let ph = phi(alpha, x)?;
    let psi = phi_minus_x(alpha, x)?;
    let g = g_from_psi(alpha, x, psi);
    if psi == 0.0 || g.g3 == 0.0 {
        return Err(Error::Degenerate(format!(
            "y0 is undefined at x = {x}, alpha = {alpha} (phi - x = {psi:e}, g3 = {:e})",
            g.g3
        )));
    }
    let k = weight_tail(alpha, x);
    let ph2 = ph * ph;
    let ph4 = ph2 * ph2;
    let psi3 = psi * psi * psi;
    Ok(CaseSigns {
        e_at_0: x * x * k * g.g2 / ph4,
        e_at_y0: k * psi3 * psi * g.g2 / (ph4 * g.g3 * g.g3),
        f_at_y0: k * psi3 * g.g2 / (ph4 * ph * g.g3 * g.g3 * g.g3) * (x * g.g3 * g.g3 - k * psi3),
        y0: g.g1 * g.g2 / (psi * g.g3),
    })
}
