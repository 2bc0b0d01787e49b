use std::sync::Arc;

use rayon::prelude::*;

use super::{InitKind, MAProblem, OperatorPlan, SchemeConfig, SolveReport, SolverKind};
use crate::domain::Lattice;
use crate::measure::{ma_measure_with, ConvexityPolicy, MeasureOptions};
use crate::meshfn::{convexity_tolerance, is_discrete_convex_tol, DirectionStencil, MeshFunction, TOL_CONVEX};
use crate::principle::harmonic_solve_values;
use crate::{Error, Result};

/// `‖F_h(u)‖∞ = max_x |f(x) − MA_h[u](x)|` over interior nodes.
pub fn residual(plan: &OperatorPlan, u: &[f64], f: &[f64]) -> f64 {
    (0..plan.num_nodes())
        .into_par_iter()
        .map(|x| (f[x] - plan.ma(x, u)).abs())
        .reduce(|| 0.0, f64::max)
}

fn validate(cfg: &SchemeConfig) -> Result<()> {
    if !(cfg.tol_residual > 0.0 && cfg.tol_residual.is_finite()) {
        return Err(Error::Config(format!("tol_residual must be positive, got {}", cfg.tol_residual)));
    }
    if cfg.max_iters == 0 || cfg.check_every == 0 {
        return Err(Error::Config("max_iters and check_every must be positive".into()));
    }
    if let Some(dt) = cfg.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
    }
    if cfg.solver == SolverKind::GaussSeidelBisection && cfg.max_inner == 0 {
        return Err(Error::Config("max_inner must be positive".into()));
    }
    Ok(())
}

/// Solves `F_h(u_h) = 0` on `Ω_h` with `u_h = g` on `∂Ω_h`.
pub fn solve(problem: &MAProblem, lattice: &Arc<Lattice>, cfg: &SchemeConfig) -> Result<(MeshFunction, SolveReport)> {
    validate(cfg)?;
    let lat = lattice.as_ref();
    let ni = lat.num_interior();
    let mut f = Vec::with_capacity(ni);
    for x in lat.interior_ids() {
        let p = lat.point(x);
        let v = (problem.f)(p);
        if !v.is_finite() {
            return Err(Error::NonFinite { node: x });
        }
        if v < 0.0 {
            return Err(Error::NegativeSource { node: x, point: p, value: v });
        }
        f.push(v);
    }
    let g: Vec<f64> = lat.boundary_ids().map(|b| (problem.g)(lat.point(b))).collect();
    if let Some(k) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: ni + k });
    }

    let mut u = match cfg.init {
        InitKind::Harmonic => harmonic_solve_values(lattice, &g)?.into_values(),
        InitKind::BoundaryMin => {
            let m = g.iter().copied().fold(f64::INFINITY, f64::min);
            let mut v = vec![m; ni];
            v.extend_from_slice(&g);
            v
        }
        InitKind::Custom => {
            let init = cfg.init_values.as_ref().ok_or_else(|| Error::Config("init = custom needs init_values".into()))?;
            if init.len() != lat.len() {
                return Err(Error::SizeMismatch { expected: lat.len(), got: init.len() });
            }
            let mut v = init[..ni].to_vec();
            v.extend_from_slice(&g);
            v
        }
    };

    let width = cfg.width_for(lat.h());
    let stencil = DirectionStencil::new(width)?;
    let plan = OperatorPlan::new(lat, &stencil)?;
    let (iterations, history) = match cfg.solver {
        SolverKind::GaussSeidel => gauss_seidel(&plan, &mut u, &f, cfg, |plan, u, x, fx| plan.local_root(x, u, fx))?,
        SolverKind::GaussSeidelBisection => {
            let inner = cfg.max_inner;
            gauss_seidel(&plan, &mut u, &f, cfg, move |plan, u, x, fx| bisect(plan, u, x, fx, inner))?
        }
        SolverKind::ExplicitEuler => explicit_euler(&plan, &mut u, &f, cfg)?,
    };

    let sol = MeshFunction::new(lattice.clone(), u)?;
    let conv = is_discrete_convex_tol(&sol, &stencil, convexity_tolerance(&sol, TOL_CONVEX))?;
    if !conv.convex {
        log::warn!("solution is not discrete convex: min λ_1,h = {:e}", conv.min_lambda);
    }
    let mass = ma_measure_with(&sol, &MeasureOptions { convexity: ConvexityPolicy::Skip, ..Default::default() })?;
    let report = SolveReport {
        solver: cfg.solver,
        stencil_width: width,
        iterations,
        residual: *history.last().unwrap_or(&f64::NAN),
        residual_history: history,
        ma_total_mass: mass.total,
        sup_norm: sol.sup_norm(),
        min_lambda: conv.min_lambda,
        discrete_convex: conv.convex,
    };
    log::info!(
        "solved {} at h = {}: {} iterations, residual {:e}",
        problem.name,
        lat.h(),
        report.iterations,
        report.residual
    );
    Ok((sol, report))
}

fn gauss_seidel(
    plan: &OperatorPlan,
    u: &mut [f64],
    f: &[f64],
    cfg: &SchemeConfig,
    local: impl Fn(&OperatorPlan, &[f64], usize, f64) -> f64,
) -> Result<(usize, Vec<f64>)> {
    let n = plan.num_nodes();
    let mut history = Vec::new();
    let r = residual(plan, u, f);
    history.push(r);
    if r <= cfg.tol_residual {
        return Ok((0, history));
    }
    for sweep in 1..=cfg.max_iters {
        for x in 0..n {
            let t = local(plan, u, x, f[x]);
            u[x] += t;
        }
        if sweep % cfg.check_every == 0 || sweep == cfg.max_iters {
            let r = residual(plan, u, f);
            history.push(r);
            if !r.is_finite() {
                break;
            }
            if r <= cfg.tol_residual {
                return Ok((sweep, history));
            }
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iters,
        last_residual: *history.last().unwrap(),
        residual_history: history,
    })
}

/// Local root by bisection on `[t_lo, t_hi]` with `MA_h(t_lo) ≥ f ≥ MA_h(t_hi)`;
/// returns the end of the final bracket on the `MA_h ≥ f` side.
fn bisect(plan: &OperatorPlan, u: &[f64], x: usize, f: f64, steps: usize) -> f64 {
    let u0 = u[x];
    let mut lo = plan.lower_bracket(x, u, f);
    // Making an axis difference vanish drives the axis pair term to at most 0 ≤ f.
    let mut hi = plan
        .diffs(x)
        .iter()
        .take(2)
        .map(|d| d.eval(u, u0) / d.center_weight())
        .fold(f64::INFINITY, f64::min);
    if hi < lo {
        hi = lo;
    }
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if plan.ma_at(x, u, u0 + mid) >= f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn explicit_euler(plan: &OperatorPlan, u: &mut Vec<f64>, f: &[f64], cfg: &SchemeConfig) -> Result<(usize, Vec<f64>)> {
    let n = plan.num_nodes();
    let mut history = Vec::new();
    let mut safety = 1.0;
    let mut last_checked = f64::INFINITY;
    for step in 0..=cfg.max_iters {
        let ma: Vec<f64> = (0..n).into_par_iter().map(|x| plan.ma(x, u)).collect();
        let r = ma.iter().zip(f).map(|(m, fx)| (fx - m).abs()).fold(0.0, f64::max);
        if step % cfg.check_every == 0 || r <= cfg.tol_residual || step == cfg.max_iters {
            history.push(r);
            if r <= cfg.tol_residual {
                return Ok((step, history));
            }
            if !r.is_finite() {
                break;
            }
            if r > 1.5 * last_checked {
                safety *= 0.5;
                log::debug!("explicit euler: residual grew to {r:e}, halving the step");
            }
            last_checked = r;
        }
        if step == cfg.max_iters {
            break;
        }
        let slope = (0..n).into_par_iter().map(|x| plan.center_slope(x, u)).reduce(|| 0.0, f64::max);
        let bound = 0.9 / slope.max(f64::MIN_POSITIVE);
        let dt = safety * cfg.dt.map_or(bound, |d| d.min(bound));
        let next: Vec<f64> = (0..n).into_par_iter().map(|x| u[x] + dt * (ma[x] - f[x])).collect();
        u[..n].copy_from_slice(&next);
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iters,
        last_residual: history.last().copied().unwrap_or(f64::NAN),
        residual_history: history,
    })
}
