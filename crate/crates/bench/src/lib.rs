//! Shared fixtures for the benchmarks.

use bml_core::genmat::{self, TestCase};
use bml_core::{CVector, Rng};

/// A preset with a fixed seed and its normalized starting vector.
pub fn fixture(name: &str, n: usize) -> (TestCase, CVector) {
    let case = genmat::preset(name, Some(n), 1).expect("preset exists");
    let mut b = genmat::start_vector(n, &mut Rng::new(2)).expect("n is positive");
    b.normalize();
    (case, b)
}
