//! Benchmarks for `areamean-core`; see `benches/`.

use areamean_core::PowerSeries;

/// A degree-8 polynomial with no zeros near the circle, used by every bench.
pub fn sample_series() -> PowerSeries {
    "1,0.5-0.25i,0.1,0,-0.3i,0.05,0,0.02,0.01".parse().expect("valid coefficients")
}
