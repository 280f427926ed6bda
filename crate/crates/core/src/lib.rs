//! Numerics for the log-convexity of weighted area integral means.
//!
//! For `f` analytic in the unit disk, `0 < p < inf` and `alpha > -1`, the
//! circle mean `M_p(f, r)` and the weighted area mean
//! `int_0^x M(t)(1-t)^alpha dt / int_0^x (1-t)^alpha dt` (with `x = r^2`) are
//! evaluated by quadrature, and log-convexity in `log x` is tested through the
//! operator `D(g) = g'/g + x g''/g - x (g'/g)^2`.
//!
//! Module map:
//! - [`quad`]: Gauss-Legendre, adaptive and periodic quadrature, Richardson
//!   differentiation.
//! - [`series`]: truncated power series with complex coefficients.
//! - [`means`]: `M`, `phi`, `h` and their derivatives.
//! - [`convexity`]: `D`, `Delta`, grid scans and verdicts.
//! - [`auxiliary`]: the quantities `A, B, C, y, A1, B1, C1, E, F, S` and the
//!   sign identities behind the convexity argument.
//! - [`sweep`]: parameter sweeps with witness refinement.

// `!(v > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auxiliary;
pub mod convexity;
mod dd;
pub mod error;
pub mod means;
pub mod quad;
pub mod series;
pub mod sweep;
pub mod table;

pub use convexity::{
    convexity_report, delta, ConvexityReport, DeltaPoint, GridSpec, Verdict,
};
pub use error::{Error, Result};
pub use means::{area_mean, circle_mean, FnMean, Params, RadialMean, SeriesMean};
pub use quad::QuadResult;
pub use series::PowerSeries;
pub use sweep::{corpus_generate, sweep, CorpusEntry, CorpusSpec, SweepRecord};
pub use table::{Cell, Table};
