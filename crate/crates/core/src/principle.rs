//! Maximum principles: the discrete Aleksandrov-Bakelman-Pucci estimate,
//! the discrete Laplacian maximum principle and the harmonic barrier.

use std::sync::Arc;

use serde::Serialize;

use crate::domain::{Lattice, NodeId};
use crate::linsolve::{inf_norm, solve_mmatrix, CsrMatrix};
use crate::measure::{ma_measure_with, ConvexityPolicy, MeasureOptions};
use crate::meshfn::{convexity_tolerance, direction_diff, is_discrete_convex, DirectionStencil, MeshFunction, StepPolicy, TOL_CONVEX};
use crate::{Error, Point, Result};

/// Default tolerance for `u ≤ w` in [`barrier_compare`].
pub const BARRIER_TOL: f64 = 1e-8;

/// Default ABP constant for the plane; an empirical envelope, not a sharp constant.
pub const DEFAULT_ABP_C: f64 = 5.0;

/// Solves `Δ_h w = 0` on `Ω_h` with `w = g` on `∂Ω_h`.
pub fn harmonic_solve(lattice: &Arc<Lattice>, g: impl Fn(Point) -> f64) -> Result<MeshFunction> {
    let boundary: Vec<f64> = lattice.boundary_ids().map(|b| g(lattice.point(b))).collect();
    harmonic_solve_values(lattice, &boundary)
}

/// As [`harmonic_solve`], with boundary values given in boundary-node order.
pub fn harmonic_solve_values(lattice: &Arc<Lattice>, boundary: &[f64]) -> Result<MeshFunction> {
    let lat = lattice.as_ref();
    let ni = lat.num_interior();
    if boundary.len() != lat.num_boundary() {
        return Err(Error::SizeMismatch { expected: lat.num_boundary(), got: boundary.len() });
    }
    if let Some(k) = boundary.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: ni + k });
    }
    let (gmin, gmax) = boundary.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let osc = gmax - gmin;

    // Rows normalised to unit diagonal.
    let mut rows = Vec::with_capacity(ni);
    let mut rhs = vec![0.0; ni];
    for x in lat.interior_ids() {
        let mut row = vec![(x, 1.0)];
        let diffs = [[1, 0], [0, 1]].map(|e| direction_diff(lat, x, e, StepPolicy::Clipped).expect("axis arms exist"));
        let diag: f64 = diffs.iter().map(|d| d.center_weight()).sum();
        for d in &diffs {
            for (nb, w) in [(d.plus, d.wp), (d.minus, d.wm)] {
                if lat.is_interior(nb) {
                    row.push((nb, -w / diag));
                } else {
                    rhs[x] += w / diag * boundary[nb - ni];
                }
            }
        }
        rows.push(row);
    }
    let a = CsrMatrix::from_rows(rows);
    let scale = osc.max(1e-3 * gmax.abs().max(gmin.abs()));
    let tol = if scale > 0.0 { 1e-12 * scale } else { 1e-300 };
    let x0 = vec![0.5 * (gmin + gmax); ni];
    let w = solve_mmatrix(&a, &rhs, &x0, tol)?;
    let residual = inf_norm(&a.residual(&w, &rhs));
    log::debug!("harmonic solve: {ni} unknowns, residual {residual:e}");
    let mut values = w;
    values.extend_from_slice(boundary);
    MeshFunction::new(lattice.clone(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierReport {
    pub holds: bool,
    /// `max(u − w)` over all nodes.
    pub max_violation: f64,
    pub node: NodeId,
    pub point: Point,
    pub tolerance: f64,
}

/// Checks `u ≤ w + tol` on every node.
pub fn barrier_compare(u: &MeshFunction, w: &MeshFunction) -> Result<BarrierReport> {
    barrier_compare_tol(u, w, BARRIER_TOL)
}

pub fn barrier_compare_tol(u: &MeshFunction, w: &MeshFunction, tol: f64) -> Result<BarrierReport> {
    if !u.same_lattice(w) {
        return Err(Error::LatticeMismatch);
    }
    let (node, max_violation) = u
        .values()
        .iter()
        .zip(w.values())
        .map(|(a, b)| a - b)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    Ok(BarrierReport {
        holds: max_violation <= tol,
        max_violation,
        node,
        point: u.lattice().point(node),
        tolerance: tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub holds: bool,
    pub max_interior: f64,
    pub node: NodeId,
    pub point: Point,
}

/// For `z` with `Δ_h z ≥ 0` on `Ω_h` and `z ≤ 0` on `∂Ω_h`, checks `z ≤ 0` on `Ω_h`.
pub fn laplace_max_principle_check(z: &MeshFunction) -> Result<MaxPrincipleReport> {
    let lat = z.lattice();
    let lap_tol = convexity_tolerance(z, TOL_CONVEX);
    let val_tol = 1e-12 * z.sup_norm().max(1.0);
    for x in lat.interior_ids() {
        let lap = crate::meshfn::discrete_laplacian(z, x);
        if lap < -lap_tol {
            return Err(Error::Precondition {
                node: x,
                point: lat.point(x),
                what: format!("discrete Laplacian {lap:e} < 0"),
            });
        }
    }
    for b in lat.boundary_ids() {
        if z.value(b) > val_tol {
            return Err(Error::Precondition {
                node: b,
                point: lat.point(b),
                what: format!("boundary value {} > 0", z.value(b)),
            });
        }
    }
    let (node, max_interior) = lat
        .interior_ids()
        .map(|x| (x, z.value(x)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(MaxPrincipleReport { holds: max_interior <= val_tol, max_interior, node, point: lat.point(node) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbpNode {
    pub point: Point,
    pub z: f64,
    pub dist: f64,
    /// `[diam · d(x, ∂Ω) · M_h(Ω)]^{1/2}`.
    pub bound_core: f64,
    /// `−z / bound_core`, present only where `z < 0`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ABPReport {
    pub nodes: Vec<AbpNode>,
    pub total_mass: f64,
    pub diameter: f64,
    pub empirical_c: f64,
    pub c: f64,
    pub pass: bool,
}

/// Evaluates `−z(x) ≤ C [diam · d(x, ∂Ω) · M_h[z](Ω)]^{1/2}` at every interior node.
pub fn abp_check(z: &MeshFunction, c: f64) -> Result<ABPReport> {
    let lat = z.lattice();
    let conv = is_discrete_convex(z, &DirectionStencil::default())?;
    if let Some(w) = conv.witness {
        return Err(Error::Precondition {
            node: w.node,
            point: w.point,
            what: format!("not discrete convex: second difference {:e} along {:?}", w.value, w.direction),
        });
    }
    let tol = 1e-12 * z.sup_norm().max(1.0);
    for b in lat.boundary_ids() {
        if z.value(b) < -tol {
            return Err(Error::Precondition {
                node: b,
                point: lat.point(b),
                what: format!("boundary value {} < 0", z.value(b)),
            });
        }
    }
    let mass = ma_measure_with(z, &MeasureOptions { convexity: ConvexityPolicy::Skip, ..Default::default() })?;
    let diameter = lat.domain().diameter();
    let mut empirical_c = 0.0f64;
    let nodes = lat
        .interior_ids()
        .map(|x| {
            let dist = lat.distance_to_boundary(x);
            let bound_core = (diameter * dist * mass.total).sqrt();
            let zx = z.value(x);
            let ratio = (zx < 0.0).then(|| if bound_core > 0.0 { -zx / bound_core } else { f64::INFINITY });
            if let Some(r) = ratio {
                empirical_c = empirical_c.max(r);
            }
            AbpNode { point: lat.point(x), z: zx, dist, bound_core, ratio }
        })
        .collect();
    Ok(ABPReport { nodes, total_mass: mass.total, diameter, empirical_c, c, pass: empirical_c <= c })
}
