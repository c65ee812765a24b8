//! Fixtures shared by the benchmarks.

use curvecap_core::exactnum::BigRational;
use curvecap_core::sampler::{build_set, rational_circle};
use curvecap_core::{CompactSet, Ideal, SampleConfig};

pub fn hyperbola() -> Ideal {
    Ideal::parse(2, &["z2^2 - z1^2 - 1"]).expect("hyperbola parses")
}

pub fn worked_example() -> Ideal {
    Ideal::parse(3, &["z2^2 + z3^2 - z1^2 - 1", "z3^2 + z2*z3 - 2*z2^2 + z1*z3 - z1*z2 + 1"])
        .expect("worked example parses")
}

/// Fibers over `m` exact points of the circle `|z_1| = r`.
pub fn circle_fibers(ideal: &Ideal, m: usize, r: i64) -> CompactSet {
    build_set(ideal, &rational_circle(m, &BigRational::from_integer(r.into())), 1e3, &SampleConfig::default())
        .expect("fibers over the circle")
}
