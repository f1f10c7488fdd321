//! Fixtures shared by the benchmarks.

use landdiv::dirichlet::{self, DirichletParams};
use landdiv::Composition;

/// `count` points from Dirichlet(2, 3, 4), seeded.
pub fn face_points(count: usize, seed: u64) -> Vec<Composition> {
    let params = DirichletParams::new(vec![2.0, 3.0, 4.0]).expect("valid parameters");
    dirichlet::sample(&params, count, seed)
}
