//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use dconvex::{build_lattice, BoundaryMode, ConvexDomain, Lattice, MeshFunction};

/// Projected lattice on the unit square.
pub fn unit_lattice(h: f64) -> Arc<Lattice> {
    Arc::new(build_lattice(&ConvexDomain::unit_box(), h, BoundaryMode::Projected).expect("valid lattice"))
}

/// Samples of `exp(|x|²/2)`, a smooth strictly convex function.
pub fn exp_samples(lat: &Arc<Lattice>) -> MeshFunction {
    MeshFunction::from_fn(lat, |p| (0.5 * (p[0] * p[0] + p[1] * p[1])).exp()).expect("finite samples")
}
