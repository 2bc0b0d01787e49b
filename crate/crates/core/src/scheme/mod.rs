//! The discrete Monge-Ampère problem `F_h(u_h) = −MA_h[u_h] + f = 0` on
//! `Ω_h`, `u_h = g` on `∂Ω_h`, its solvers and property testers.

mod envelope;
mod operator;
mod props;
mod solver;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use envelope::{convex_envelope, envelope_samples, ConvexEnvelope, EnvelopeMethod, Minorant};
pub use operator::{lone_term, ma_operator, pair_root, pair_term, OperatorPlan};
pub use props::{
    consistency_test, monotonicity_test, stability_report, ConsistencyReport, MonotonicityReport, Quadratic,
    StabilityReport, StabilityRow,
};
pub use solver::{residual, solve};

use crate::domain::ConvexDomain;
use crate::{Point, ScalarField};

/// `det D²u = f` in `Ω`, `u = g` on `∂Ω`.
#[derive(Clone)]
pub struct MAProblem {
    pub name: String,
    pub domain: ConvexDomain,
    pub f: ScalarField,
    pub g: ScalarField,
    pub exact: Option<ScalarField>,
}

impl std::fmt::Debug for MAProblem {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("MAProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl MAProblem {
    pub fn new(
        name: impl Into<String>,
        domain: ConvexDomain,
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        MAProblem { name: name.into(), domain, f: Arc::new(f), g: Arc::new(g), exact: None }
    }

    pub fn with_exact(mut self, u: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(u));
        self
    }

    /// `f = 1`, `g = u = ‖x‖²/2`.
    pub fn quadratic(domain: ConvexDomain) -> Self {
        let q = |p: Point| 0.5 * (p[0] * p[0] + p[1] * p[1]);
        MAProblem::new("quadratic", domain, |_| 1.0, q).with_exact(q)
    }

    /// `u = exp(‖x‖²/2)`, `f = (1 + ‖x‖²)·exp(‖x‖²)`.
    pub fn exp(domain: ConvexDomain) -> Self {
        let u = |p: Point| (0.5 * (p[0] * p[0] + p[1] * p[1])).exp();
        let f = |p: Point| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            (1.0 + r2) * r2.exp()
        };
        MAProblem::new("exp", domain, f, u).with_exact(u)
    }

    /// `f = 0`, `g = u = 1 + 2x − y`.
    pub fn affine(domain: ConvexDomain) -> Self {
        let a = |p: Point| 1.0 + 2.0 * p[0] - p[1];
        MAProblem::new("affine", domain, |_| 0.0, a).with_exact(a)
    }

    pub fn builtin(name: &str, domain: ConvexDomain) -> Option<Self> {
        match name {
            "quadratic" => Some(Self::quadratic(domain)),
            "exp" => Some(Self::exp(domain)),
            "affine" => Some(Self::affine(domain)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Nonlinear Gauss-Seidel with the closed-form local root.
    #[default]
    GaussSeidel,
    /// Nonlinear Gauss-Seidel with the local root found by bisection.
    GaussSeidelBisection,
    /// Jacobi-style pseudo time stepping `u ← u + dt·(MA_h[u] − f)`.
    ExplicitEuler,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Discrete harmonic extension of `g`; a supersolution.
    #[default]
    Harmonic,
    /// `min g` at every interior node.
    BoundaryMin,
    /// Values from [`SchemeConfig::init_values`].
    Custom,
}

/// How the stencil width depends on `h`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WidthRule {
    /// Always `stencil_width`.
    #[default]
    Fixed,
    /// `max(stencil_width, ceil(scale · h^(−exponent)))`, capped at `max`.
    Refining { scale: f64, exponent: f64, max: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub stencil_width: u32,
    pub width_rule: WidthRule,
    pub solver: SolverKind,
    /// Time step for `explicit_euler`; `None` picks the monotone bound adaptively.
    pub dt: Option<f64>,
    /// Bisection steps per local solve for `gauss_seidel_bisection`.
    pub max_inner: usize,
    pub tol_residual: f64,
    /// Maximum number of sweeps (or time steps).
    pub max_iters: usize,
    pub init: InitKind,
    /// Sweeps between residual evaluations.
    pub check_every: usize,
    #[serde(skip)]
    pub init_values: Option<Vec<f64>>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            stencil_width: 2,
            width_rule: WidthRule::Fixed,
            solver: SolverKind::GaussSeidel,
            dt: None,
            max_inner: 60,
            tol_residual: 1e-9,
            max_iters: 200_000,
            init: InitKind::Harmonic,
            check_every: 10,
            init_values: None,
        }
    }
}

impl SchemeConfig {
    /// Stencil width used at mesh length `h`.
    pub fn width_for(&self, h: f64) -> u32 {
        match self.width_rule {
            WidthRule::Fixed => self.stencil_width,
            WidthRule::Refining { scale, exponent, max } => {
                let w = (scale * h.powf(-exponent) - 1e-9).ceil().max(1.0) as u32;
                w.max(self.stencil_width).min(max.max(self.stencil_width))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub solver: SolverKind,
    pub stencil_width: u32,
    pub iterations: usize,
    /// `‖F_h(u_h)‖∞` at termination.
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub ma_total_mass: f64,
    pub sup_norm: f64,
    /// Smallest `λ_{1,h}[u_h]` over interior nodes.
    pub min_lambda: f64,
    pub discrete_convex: bool,
}
