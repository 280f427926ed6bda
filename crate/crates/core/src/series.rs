//! Finite power series `f(z) = sum a_k z^k` on the unit disk.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A polynomial with complex coefficients, `a_0` first.
///
/// Trailing zero coefficients are allowed; [`PowerSeries::normalized`]
/// strips them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(crate::error::domain("power series needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(crate::error::domain("power series coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Index of the highest nonzero coefficient (0 for the zero series).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.re != 0.0 || c.im != 0.0)
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn normalized(&self) -> Self {
        Self {
            coeffs: self.coeffs[..=self.degree()].to_vec(),
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Evaluates `f(z)` and `f'(z)` in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut value = zero;
        let mut deriv = zero;
        for &c in self.coeffs.iter().rev() {
            deriv = deriv * z + value;
            value = value * z + c;
        }
        (value, deriv)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(Complex64::new(0.0, 0.0));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Self { coeffs }
    }

    /// `|f(r e^{i theta})|^p` with `0^p = 0`.
    pub fn modulus_p(&self, r: f64, theta: f64, p: f64) -> f64 {
        let w = self.eval(Complex64::from_polar(r, theta));
        modulus_pow(w, p)
    }

    /// `sum |a_k|^2`; the squared `H^2` norm of the polynomial.
    pub fn coefficient_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `|w|^p` computed as `(|w|^2)^{p/2}`; exact zero stays zero.
pub(crate) fn modulus_pow(w: Complex64, p: f64) -> f64 {
    let n2 = w.norm_sqr();
    if n2 == 0.0 {
        0.0
    } else if p == 2.0 {
        n2
    } else {
        n2.powf(0.5 * p)
    }
}

impl TryFrom<Vec<Complex64>> for PowerSeries {
    type Error = Error;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs)
    }
}

impl From<PowerSeries> for Vec<Complex64> {
    fn from(f: PowerSeries) -> Self {
        f.coeffs
    }
}

impl fmt::Display for PowerSeries {
    /// Writes the comma-separated coefficient format accepted by [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            if c.im == 0.0 {
                write!(f, "{:?}", c.re)?;
            } else if c.im.is_sign_negative() {
                write!(f, "{:?}-{:?}i", c.re, -c.im)?;
            } else {
                write!(f, "{:?}+{:?}i", c.re, c.im)?;
            }
        }
        Ok(())
    }
}

impl FromStr for PowerSeries {
    type Err = Error;

    /// Parses `a0,a1,...` where each entry is `a`, `a+bi`, `a-bi` or `bi`.
    fn from_str(s: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        let mut offset = 0;
        for entry in s.split(',') {
            let lead = entry.len() - entry.trim_start().len();
            coeffs.push(parse_complex(entry.trim(), offset + lead + 1)?);
            offset += entry.len() + 1;
        }
        Self::new(coeffs)
    }
}

fn parse_complex(s: &str, column: usize) -> Result<Complex64> {
    let parse_err = |message: String| Error::Parse { column, message };
    if s.is_empty() {
        return Err(parse_err("empty coefficient".into()));
    }
    let real = |t: &str| -> Result<f64> {
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(format!("invalid number '{t}'")))
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(real(s)?, 0.0));
    };
    // Split at the last sign that is not the sign of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| matches!(bytes[j], b'+' | b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(j) => (&body[..j], &body[j..]),
        None => ("", body),
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t.strip_prefix('+').unwrap_or(t))?,
    };
    let re = if re_part.is_empty() { 0.0 } else { real(re_part)? };
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let id = PowerSeries::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(id.eval(c(0.3, 0.4)), c(0.3, 0.4));
        let f = PowerSeries::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(f.eval(c(0.5, 0.0)), c(1.5, 0.0));
        let f = PowerSeries::from_real(&[1.0, 0.0, 2.0]).unwrap();
        let v = f.eval(c(0.0, 0.5));
        assert!((v - c(0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn derivative_examples() {
        let d = PowerSeries::from_real(&[1.0, 1.0, 1.0]).unwrap().derivative();
        assert_eq!(d, PowerSeries::from_real(&[1.0, 2.0]).unwrap());
        let d = PowerSeries::from_real(&[5.0]).unwrap().derivative();
        assert_eq!(d, PowerSeries::from_real(&[0.0]).unwrap());
        let d = PowerSeries::monomial(3).derivative();
        assert_eq!(d, PowerSeries::from_real(&[0.0, 0.0, 3.0]).unwrap());
    }

    #[test]
    fn modulus_examples() {
        let z = PowerSeries::monomial(1);
        assert!((z.modulus_p(0.5, 1.234, 3.0) - 0.125).abs() < 1e-16);
        let one = PowerSeries::from_real(&[1.0]).unwrap();
        assert_eq!(one.modulus_p(0.7, 2.0, 0.3), 1.0);
        let f = PowerSeries::from_real(&[1.0, 1.0]).unwrap();
        assert!((f.modulus_p(0.5, std::f64::consts::PI, 2.0) - 0.25).abs() < 1e-15);
        assert_eq!(z.modulus_p(0.0, 0.0, 0.5), 0.0);
    }

    #[test]
    fn constant_detection_ignores_trailing_zeros() {
        let f = PowerSeries::from_real(&[3.0, 0.0, 0.0]).unwrap();
        assert!(f.is_constant());
        assert_eq!(f.normalized().coeffs().len(), 1);
        assert!(!PowerSeries::monomial(2).is_constant());
        assert!(PowerSeries::new(vec![]).is_err());
    }

    #[test]
    fn parse_entries() {
        let f: PowerSeries = "1, 2+3i, -1.5-2e-3i, 4i, -i, 1e-3+1E+2i".parse().unwrap();
        assert_eq!(
            f.coeffs(),
            &[
                c(1.0, 0.0),
                c(2.0, 3.0),
                c(-1.5, -2e-3),
                c(0.0, 4.0),
                c(0.0, -1.0),
                c(1e-3, 100.0)
            ]
        );
    }

    #[test]
    fn parse_reports_column() {
        let err = "1,2,x+1i".parse::<PowerSeries>().unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                column: 5,
                message: "invalid number 'x'".into()
            }
        );
        let err = "1,,2".parse::<PowerSeries>().unwrap_err();
        assert!(matches!(err, Error::Parse { column: 3, .. }));
    }

    #[test]
    fn display_round_trips() {
        let f = PowerSeries::new(vec![c(0.1, -0.2), c(-3.0, 0.0), c(1e-300, 7.5)]).unwrap();
        let back: PowerSeries = f.to_string().parse().unwrap();
        assert_eq!(back, f);
    }

    fn arb_series() -> impl Strategy<Value = PowerSeries> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..9).prop_map(|v| {
            PowerSeries::new(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn radial_derivative_matches_finite_differences(
            f in arb_series(), r in 0.05f64..0.9, theta in 0.0f64..std::f64::consts::TAU
        ) {
            let u = Complex64::from_polar(1.0, theta);
            let df = f.derivative();
            let analytic = df.eval(u * r) * u;
            let h = 0.02 * r.min(0.95 - r).max(0.01);
            let re = crate::quad::richardson_derivative(|t| f.eval(u * t).re, r, h).unwrap();
            let im = crate::quad::richardson_derivative(|t| f.eval(u * t).im, r, h).unwrap();
            let scale = 1.0 + analytic.norm();
            prop_assert!((re - analytic.re).abs() <= 1e-7 * scale);
            prop_assert!((im - analytic.im).abs() <= 1e-7 * scale);
        }

        #[test]
        fn modulus_obeys_exponent_laws(
            f in arb_series(), r in 0.0f64..0.99, theta in 0.0f64..std::f64::consts::TAU,
            p in 0.1f64..4.0, q in 0.1f64..4.0
        ) {
            let base = f.modulus_p(r, theta, p);
            prop_assert!(base >= 0.0);
            let lhs = f.modulus_p(r, theta, p * q);
            let rhs = base.powf(q);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(rhs.abs()) + 1e-300);
        }

        #[test]
        fn horner_pair_matches_separate_derivative(f in arb_series(), re in -0.7f64..0.7, im in -0.7f64..0.7) {
            let z = c(re, im);
            let (v, d) = f.eval_with_derivative(z);
            prop_assert!((v - f.eval(z)).norm() <= 1e-14);
            prop_assert!((d - f.derivative().eval(z)).norm() <= 1e-13);
        }
    }
}
