//! Randomised and analytic checks of the scheme's structural properties.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{solve, MAProblem, OperatorPlan, SchemeConfig};
use crate::domain::{build_lattice, BoundaryMode, ConvexDomain, Lattice};
use crate::meshfn::DirectionStencil;
use crate::{Point, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityWitness {
    pub lattice: String,
    pub node: usize,
    pub perturbation: String,
    pub before: f64,
    pub after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub trials: usize,
    pub counterexamples: usize,
    pub pass: bool,
    pub witness: Option<MonotonicityWitness>,
}

fn test_lattices() -> Vec<(String, Arc<Lattice>)> {
    let cases = [
        ("box [0,1]^2, h=1/6", ConvexDomain::unit_box(), 1.0 / 6.0),
        ("box [-1,1]^2, h=1/3", ConvexDomain::new_box([-1.0, -1.0], [1.0, 1.0]).unwrap(), 1.0 / 3.0),
        ("disk r=1, h=0.3", ConvexDomain::disk([0.05, -0.02], 1.0).unwrap(), 0.3),
        (
            "triangle, h=0.15",
            ConvexDomain::polygon(vec![[0.0, 0.0], [1.0, 0.1], [0.45, 0.95]]).unwrap(),
            0.15,
        ),
    ];
    cases
        .into_iter()
        .map(|(name, d, h)| (name.to_string(), Arc::new(build_lattice(&d, h, BoundaryMode::Projected).unwrap())))
        .collect()
}

/// Randomised check that raising off-centre values never lowers `MA_h`
/// (so `F_h = −MA_h + f` never rises), that `λ_{1,h}` behaves the same
/// way, and that values outside the stencil of a node do not affect it.
pub fn monotonicity_test(stencil: &DirectionStencil, trials: usize, seed: u64) -> Result<MonotonicityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lattices = test_lattices();
    let plans: Vec<OperatorPlan> = lattices.iter().map(|(_, l)| OperatorPlan::new(l, stencil)).collect::<Result<_>>()?;
    let mut counterexamples = 0;
    let mut witness = None;
    let lambda = |plan: &OperatorPlan, x: usize, u: &[f64]| {
        plan.diffs(x).iter().map(|d| d.eval(u, u[x])).fold(f64::INFINITY, f64::min)
    };
    for _ in 0..trials {
        let li = rng.gen_range(0..lattices.len());
        let (name, lat) = &lattices[li];
        let plan = &plans[li];
        let n = lat.len();
        let w: Vec<f64> = if rng.gen_bool(0.5) {
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        } else {
            let c = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            (0..n)
                .map(|i| {
                    let p = lat.point(i);
                    0.5 * ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) + 0.05 * rng.gen_range(-1.0..1.0)
                })
                .collect()
        };
        let x = rng.gen_range(0..lat.num_interior());
        let nbrs: Vec<usize> = plan.neighbours(x).collect();
        let mut z = w.clone();
        let kind = rng.gen_range(0..3);
        let label = match kind {
            0 => {
                let y = nbrs[rng.gen_range(0..nbrs.len())];
                z[y] += rng.gen_range(0.0..1.0);
                format!("raise neighbour {y}")
            }
            1 => {
                for (i, v) in z.iter_mut().enumerate() {
                    if i != x {
                        *v += rng.gen_range(0.0..1.0);
                    }
                }
                "raise all off-centre values".to_string()
            }
            _ => {
                let far: Vec<usize> = (0..n).filter(|&i| i != x && !nbrs.contains(&i)).collect();
                if far.is_empty() {
                    continue;
                }
                let y = far[rng.gen_range(0..far.len())];
                z[y] += rng.gen_range(-1.0..1.0);
                format!("perturb non-stencil node {y}")
            }
        };
        let (mw, mz) = (plan.ma(x, &w), plan.ma(x, &z));
        let (lw, lz) = (lambda(plan, x, &w), lambda(plan, x, &z));
        let ok = if kind == 2 { mw == mz && lw == lz } else { mz >= mw && lz >= lw };
        if !ok {
            counterexamples += 1;
            witness.get_or_insert(MonotonicityWitness {
                lattice: name.clone(),
                node: x,
                perturbation: label,
                before: mw,
                after: mz,
            });
        }
    }
    Ok(MonotonicityReport { trials, counterexamples, pass: counterexamples == 0, witness })
}

/// The quadratic `½ xᵀAx` with `A = [[a11, a12], [a12, a22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadratic {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Quadratic {
    /// Hessian with eigenvalues `l1` along angle `theta` and `l2` across it.
    pub fn rotated(l1: f64, l2: f64, theta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        Quadratic { a11: l1 * c * c + l2 * s * s, a12: (l1 - l2) * c * s, a22: l1 * s * s + l2 * c * c }
    }

    pub fn eval(&self, p: Point) -> f64 {
        0.5 * (self.a11 * p[0] * p[0] + 2.0 * self.a12 * p[0] * p[1] + self.a22 * p[1] * p[1])
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub h: f64,
    pub stencil_width: u32,
    /// `max_x |MA_h[q](x) − det D²q|` per quadratic.
    pub errors: Vec<(Quadratic, f64)>,
    pub max_error: f64,
}

/// `|MA_h[q] − det D²q|` on `[−1,1]²` at nodes where the whole stencil fits.
pub fn consistency_test(stencil: &DirectionStencil, quadratics: &[Quadratic], h: f64) -> Result<ConsistencyReport> {
    let dom = ConvexDomain::new_box([-1.0, -1.0], [1.0, 1.0])?;
    let lat = Arc::new(build_lattice(&dom, h, BoundaryMode::Projected)?);
    let plan = OperatorPlan::new(&lat, stencil)?;
    let full: Vec<usize> = lat.interior_ids().filter(|&x| plan.pairs(x).len() == stencil.pairs().len()).collect();
    let nodes: Vec<usize> = if full.is_empty() { lat.interior_ids().collect() } else { full };
    let mut errors = Vec::new();
    for q in quadratics {
        let u: Vec<f64> = (0..lat.len()).map(|i| q.eval(lat.point(i))).collect();
        let e = nodes.iter().map(|&x| (plan.ma(x, &u) - q.det()).abs()).fold(0.0, f64::max);
        errors.push((*q, e));
    }
    let max_error = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(ConsistencyReport { h, stencil_width: stencil.width(), errors, max_error })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    pub problem: String,
    pub h: f64,
    pub sup_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// Problems whose sup norm grows by more than 50% between the coarsest and finest `h`.
    pub growth: Vec<String>,
}

/// `‖u_h‖∞` across mesh lengths for each problem.
pub fn stability_report(problems: &[MAProblem], h_values: &[f64], cfg: &SchemeConfig) -> Result<StabilityReport> {
    let mut rows = Vec::new();
    let mut growth = Vec::new();
    for p in problems {
        let mut norms = Vec::new();
        for &h in h_values {
            let lat = Arc::new(build_lattice(&p.domain, h, BoundaryMode::Projected)?);
            let (u, _) = solve(p, &lat, cfg)?;
            norms.push(u.sup_norm());
            rows.push(StabilityRow { problem: p.name.clone(), h, sup_norm: u.sup_norm() });
        }
        if let (Some(first), Some(last)) = (norms.first(), norms.last()) {
            if *last > 1.5 * first.max(f64::MIN_POSITIVE) {
                growth.push(p.name.clone());
            }
        }
    }
    Ok(StabilityReport { rows, growth })
}
