//! Discrete convex mesh functions on uniform lattices over convex planar
//! domains.
//!
//! The crate is organised bottom-up:
//!
//! - [`domain`]: convex domains and the lattice `Ω̄_h = Ω_h ∪ ∂Ω_h`.
//! - [`meshfn`]: mesh functions, directional second differences, `λ_{1,h}`,
//!   the discrete Laplacian and the discrete convexity predicate.
//! - [`interp`]: the piecewise linear interpolant on a lattice-aligned
//!   triangulation.
//! - [`measure`]: discrete subdifferential polygons and the discrete
//!   Monge-Ampère measure.
//! - [`principle`]: the discrete Aleksandrov-Bakelman-Pucci check, the
//!   discrete Laplacian maximum principle and the harmonic barrier.
//! - [`scheme`]: the monotone wide-stencil Monge-Ampère operator, its
//!   solvers and the convex envelope of boundary data.
//! - [`harness`]: configuration, refinement studies and report output.

pub mod domain;
pub mod error;
pub mod geom;
pub mod harness;
pub mod interp;
pub mod linsolve;
pub mod measure;
pub mod meshfn;
pub mod principle;
pub mod scheme;

pub use domain::{build_lattice, BoundaryMode, ConvexDomain, Lattice, NodeId};
pub use error::{Error, Result};
pub use interp::{interpolate, PLFunction, Triangulation};
pub use measure::{ma_measure, subdifferential, ConstraintSet, MAMeasure, SubdiffPolytope};
pub use meshfn::{DirectionStencil, MeshFunction, StepPolicy};
pub use scheme::{solve, MAProblem, SchemeConfig, SolveReport};

/// A point of the plane.
pub type Point = [f64; 2];

/// Scalar field on the plane (source densities, boundary data, exact solutions).
pub type ScalarField = std::sync::Arc<dyn Fn(Point) -> f64 + Send + Sync>;
