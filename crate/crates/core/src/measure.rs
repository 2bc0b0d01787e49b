//! Discrete subdifferentials and the discrete Monge-Ampère measure in the plane.
//!
//! The discrete subdifferential of `v` at an interior node `x₀` is the
//! polygon `{p : p·(x − x₀) ≤ v(x) − v(x₀) for all nodes x}`. The four axis
//! constraints alone cut out a rectangle, which is then clipped by the
//! remaining constraints one at a time.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Lattice, NodeId};
use crate::geom::{clip_halfplane, dot, signed_area};
use crate::meshfn::{is_discrete_convex, DirectionStencil, MeshFunction};
use crate::{Error, Point, Result, ScalarField};

/// Which nodes contribute constraints to a subdifferential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet {
    #[default]
    AllNodes,
    /// Only nodes within Euclidean distance `radius` of the base node
    /// (the axis neighbours are always kept).
    RadiusLimited { radius: f64 },
}

/// The constraint `n·p ≤ c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfPlane {
    pub n: Point,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubdiffPolytope {
    pub node: NodeId,
    pub point: Point,
    pub halfplanes: Vec<HalfPlane>,
    /// Counterclockwise vertices; empty when the constraints are infeasible.
    pub vertices: Vec<Point>,
    pub area: f64,
}

/// What to do when the input is not discrete convex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityPolicy {
    /// Log a warning and evaluate anyway.
    #[default]
    Warn,
    /// Fail with [`Error::Precondition`].
    Strict,
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeasureOptions {
    pub constraints: ConstraintSet,
    pub convexity: ConvexityPolicy,
}

/// Node masses of the discrete Monge-Ampère measure.
#[derive(Clone, Debug)]
pub struct MAMeasure {
    lattice: Arc<Lattice>,
    pub node_masses: Vec<f64>,
    pub total: f64,
}

impl MAMeasure {
    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// Mass of a set of interior nodes.
    pub fn mass_of(&self, nodes: impl IntoIterator<Item = NodeId>) -> f64 {
        nodes.into_iter().map(|n| self.node_masses[n]).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,mass\n");
        for (id, m) in self.node_masses.iter().enumerate() {
            let p = self.lattice.point(id);
            s.push_str(&format!("{},{},{}\n", p[0], p[1], m));
        }
        s
    }
}

/// Areas below this are reported as zero.
fn degenerate_area(v: &MeshFunction) -> f64 {
    let h = v.lattice().h();
    let slope = v.oscillation() / h;
    1e-14 * slope * slope
}

fn check_convexity(v: &MeshFunction, policy: ConvexityPolicy) -> Result<()> {
    if policy == ConvexityPolicy::Skip {
        return Ok(());
    }
    let report = is_discrete_convex(v, &DirectionStencil::default())?;
    if let Some(w) = report.witness {
        match policy {
            ConvexityPolicy::Strict => {
                return Err(Error::Precondition {
                    node: w.node,
                    point: w.point,
                    what: format!("not discrete convex: second difference {} along {:?}", w.value, w.direction),
                })
            }
            _ => log::warn!(
                "mesh function is not discrete convex at ({}, {}) (second difference {:e}); evaluating anyway",
                w.point[0],
                w.point[1],
                w.value
            ),
        }
    }
    Ok(())
}

/// The discrete subdifferential at interior node `x0`.
pub fn subdifferential(v: &MeshFunction, x0: NodeId, constraints: ConstraintSet) -> Result<SubdiffPolytope> {
    if !v.lattice().is_interior(x0) {
        return Err(Error::Precondition {
            node: x0,
            point: v.lattice().point(x0),
            what: "subdifferentials are taken at interior nodes".into(),
        });
    }
    check_convexity(v, ConvexityPolicy::Warn)?;
    let mut halfplanes = Vec::new();
    let (vertices, area) = polygon(v, x0, constraints, degenerate_area(v), Some(&mut halfplanes))?;
    Ok(SubdiffPolytope { node: x0, point: v.lattice().point(x0), halfplanes, vertices, area })
}

fn polygon(
    v: &MeshFunction,
    x0: NodeId,
    constraints: ConstraintSet,
    degenerate: f64,
    mut record: Option<&mut Vec<HalfPlane>>,
) -> Result<(Vec<Point>, f64)> {
    let lat = v.lattice();
    let vals = v.values();
    let p0 = lat.point(x0);
    let v0 = vals[x0];
    let arms = lat.arms(x0);

    // Axis rectangle: arms are ordered +x, -x, +y, -y.
    let hi_x = (vals[arms[0].node] - v0) / arms[0].len;
    let lo_x = (v0 - vals[arms[1].node]) / arms[1].len;
    let hi_y = (vals[arms[2].node] - v0) / arms[2].len;
    let lo_y = (v0 - vals[arms[3].node]) / arms[3].len;
    if let Some(rec) = record.as_deref_mut() {
        for a in arms {
            let q = lat.point(a.node);
            rec.push(HalfPlane { n: [q[0] - p0[0], q[1] - p0[1]], c: vals[a.node] - v0 });
        }
    }
    let slack = 1e-12 * (hi_x.abs() + lo_x.abs() + hi_y.abs() + lo_y.abs()).max(1.0);
    if lo_x > hi_x + slack || lo_y > hi_y + slack {
        return Ok((Vec::new(), 0.0));
    }
    let (lo_x, hi_x) = (lo_x.min(hi_x), hi_x.max(lo_x));
    let (lo_y, hi_y) = (lo_y.min(hi_y), hi_y.max(lo_y));
    let mut poly = vec![[lo_x, lo_y], [hi_x, lo_y], [hi_x, hi_y], [lo_x, hi_y]];
    let mut scratch = Vec::with_capacity(16);

    let radius2 = match constraints {
        ConstraintSet::AllNodes => f64::INFINITY,
        ConstraintSet::RadiusLimited { radius } => radius * radius,
    };
    let skip = [x0, arms[0].node, arms[1].node, arms[2].node, arms[3].node];
    let mut active: Vec<HalfPlane> = Vec::new();
    for y in 0..lat.len() {
        if skip.contains(&y) {
            continue;
        }
        let q = lat.point(y);
        let n = [q[0] - p0[0], q[1] - p0[1]];
        if dot(n, n) > radius2 {
            continue;
        }
        let c = vals[y] - v0;
        let hp = HalfPlane { n, c };
        if let Some(rec) = record.as_deref_mut() {
            rec.push(hp);
        }
        active.push(hp);
        if poly.is_empty() {
            continue;
        }
        if poly.iter().all(|&p| dot(n, p) <= c) {
            continue;
        }
        clip_halfplane(&poly, n, c, 0.0, &mut scratch);
        std::mem::swap(&mut poly, &mut scratch);
    }

    // Re-validate against every constraint, axis ones included.
    for a in arms {
        let q = lat.point(a.node);
        active.push(HalfPlane { n: [q[0] - p0[0], q[1] - p0[1]], c: vals[a.node] - v0 });
    }
    for p in &poly {
        for hp in &active {
            let scale = hp.c.abs() + hp.n[0].abs() * p[0].abs() + hp.n[1].abs() * p[1].abs();
            if dot(hp.n, *p) - hp.c > 1e-9 * scale.max(1e-300) {
                return Err(Error::Internal(format!(
                    "subdifferential vertex ({}, {}) violates constraint at node {x0}",
                    p[0], p[1]
                )));
            }
        }
    }
    let area = signed_area(&poly).max(0.0);
    let area = if area < degenerate { 0.0 } else { area };
    Ok((poly, area))
}

/// The discrete Monge-Ampère measure with default options.
pub fn ma_measure(v: &MeshFunction) -> Result<MAMeasure> {
    ma_measure_with(v, &MeasureOptions::default())
}

pub fn ma_measure_with(v: &MeshFunction, opts: &MeasureOptions) -> Result<MAMeasure> {
    check_convexity(v, opts.convexity)?;
    let lat = v.lattice();
    let degenerate = degenerate_area(v);
    let node_masses: Vec<f64> = lat
        .interior_ids()
        .into_par_iter()
        .map(|x| polygon(v, x, opts.constraints, degenerate, None).map(|(_, a)| a))
        .collect::<Result<_>>()?;
    let total = node_masses.iter().sum();
    Ok(MAMeasure { lattice: lat.clone(), node_masses, total })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassReport {
    pub total_mass: f64,
    /// `Σ_{x ∈ Ω_h} h² f(x)`.
    pub discrete_source: f64,
    /// Midpoint-rule approximation of `∫_Ω f`.
    pub integral_f: f64,
    /// `total_mass / integral_f` (infinite when the integral vanishes and the mass does not).
    pub ratio: f64,
    pub bound: f64,
    pub exceeds: bool,
}

/// Compares the Monge-Ampère mass of `u` to the mass of `f` and flags ratios above `bound`.
pub fn mass_bound_check(u: &MeshFunction, f: &ScalarField, bound: f64) -> Result<MassReport> {
    let m = ma_measure_with(u, &MeasureOptions { convexity: ConvexityPolicy::Skip, ..Default::default() })?;
    let lat = u.lattice();
    let h = lat.h();
    let discrete_source = lat.interior_ids().map(|x| h * h * f(lat.point(x))).sum();
    let integral_f = integrate(lat.domain(), f, 400);
    let ratio = if integral_f.abs() > 0.0 {
        m.total / integral_f
    } else if m.total.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(MassReport {
        total_mass: m.total,
        discrete_source,
        integral_f,
        ratio,
        bound,
        exceeds: ratio > bound,
    })
}

/// Midpoint rule on an `n×n` grid over the bounding box, restricted to the domain.
pub fn integrate(domain: &crate::domain::ConvexDomain, f: &ScalarField, n: usize) -> f64 {
    let (lo, hi) = domain.bounding_box();
    let dx = (hi[0] - lo[0]) / n as f64;
    let dy = (hi[1] - lo[1]) / n as f64;
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let p = [lo[0] + (i as f64 + 0.5) * dx, lo[1] + (j as f64 + 0.5) * dy];
            if domain.contains(p) {
                acc += f(p);
            }
        }
    }
    acc * dx * dy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_lattice, BoundaryMode, ConvexDomain};

    fn box_lattice(h: f64) -> Arc<Lattice> {
        let d = ConvexDomain::new_box([-1.0, -1.0], [1.0, 1.0]).unwrap();
        Arc::new(build_lattice(&d, h, BoundaryMode::Projected).unwrap())
    }

    fn origin(lat: &Lattice) -> NodeId {
        lat.interior_ids().find(|&i| lat.point(i) == [0.0, 0.0]).unwrap()
    }

    #[test]
    fn affine_has_point_subdifferential() {
        let lat = box_lattice(0.25);
        let v = MeshFunction::from_fn(&lat, |p| 0.7 * p[0] - 0.2 * p[1] + 1.0).unwrap();
        let s = subdifferential(&v, origin(&lat), ConstraintSet::AllNodes).unwrap();
        assert_eq!(s.area, 0.0);
        for p in &s.vertices {
            assert!((p[0] - 0.7).abs() < 1e-12 && (p[1] + 0.2).abs() < 1e-12);
        }
        assert_eq!(ma_measure(&v).unwrap().total, 0.0);
    }

    #[test]
    fn quadratic_origin_square() {
        let lat = box_lattice(0.5);
        let v = MeshFunction::from_fn(&lat, |p| (p[0] * p[0] + p[1] * p[1]) / 2.0).unwrap();
        let s = subdifferential(&v, origin(&lat), ConstraintSet::AllNodes).unwrap();
        assert!((s.area - 0.25).abs() < 1e-15);
        assert_eq!(s.halfplanes.len(), lat.len() - 1);
        for p in &s.vertices {
            assert!((p[0].abs() - 0.25).abs() < 1e-15 && (p[1].abs() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn l1_norm_origin() {
        let lat = box_lattice(0.5);
        let v = MeshFunction::from_fn(&lat, |p| p[0].abs() + p[1].abs()).unwrap();
        let s = subdifferential(&v, origin(&lat), ConstraintSet::AllNodes).unwrap();
        assert!((s.area - 4.0).abs() < 1e-14);
        let m = ma_measure(&v).unwrap();
        for x in lat.interior_ids() {
            let p = lat.point(x);
            if p[0] != 0.0 && p[1] != 0.0 {
                assert_eq!(m.node_masses[x], 0.0, "{p:?}");
            }
        }
    }

    #[test]
    fn scaling_and_affine_invariance() {
        let lat = box_lattice(0.25);
        let v = MeshFunction::from_fn(&lat, |p| (p[0] - 0.1).hypot(p[1]) + p[0] * p[0]).unwrap();
        let w = MeshFunction::from_fn(&lat, |p| 3.0 * ((p[0] - 0.1).hypot(p[1]) + p[0] * p[0])).unwrap();
        let t = MeshFunction::from_fn(&lat, |p| (p[0] - 0.1).hypot(p[1]) + p[0] * p[0] + 0.5 * p[0] - p[1]).unwrap();
        let (mv, mw, mt) = (ma_measure(&v).unwrap(), ma_measure(&w).unwrap(), ma_measure(&t).unwrap());
        for x in lat.interior_ids() {
            assert!((mw.node_masses[x] - 9.0 * mv.node_masses[x]).abs() < 1e-10);
            assert!((mt.node_masses[x] - mv.node_masses[x]).abs() < 1e-10);
        }
    }

    #[test]
    fn strict_policy_rejects_concave() {
        let lat = box_lattice(0.25);
        let v = MeshFunction::from_fn(&lat, |p| -(p[0] * p[0])).unwrap();
        let opts = MeasureOptions { convexity: ConvexityPolicy::Strict, ..Default::default() };
        assert!(matches!(ma_measure_with(&v, &opts), Err(Error::Precondition { .. })));
        // Warn mode still evaluates; concave functions have empty subdifferentials.
        assert_eq!(ma_measure(&v).unwrap().total, 0.0);
    }

    #[test]
    fn radius_limited_contains_full_set() {
        let lat = box_lattice(0.25);
        let v = MeshFunction::from_fn(&lat, |p| (p[0] * p[0] + 2.0 * p[1] * p[1]).sqrt()).unwrap();
        let full = ma_measure(&v).unwrap();
        let opts = MeasureOptions { constraints: ConstraintSet::RadiusLimited { radius: 0.3 }, ..Default::default() };
        let near = ma_measure_with(&v, &opts).unwrap();
        for x in lat.interior_ids() {
            assert!(near.node_masses[x] >= full.node_masses[x] - 1e-12);
        }
    }

    #[test]
    fn integrate_constant_over_disk() {
        let d = ConvexDomain::disk([0.0, 0.0], 1.0).unwrap();
        let one: ScalarField = Arc::new(|_| 1.0);
        assert!((integrate(&d, &one, 400) - std::f64::consts::PI).abs() < 1e-3);
    }
}
