//! Diagnostics across refinement levels: how the discrete solutions attach
//! to the boundary data and whether their interpolants become convex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::StudyOptions;
use crate::interp::{interpolate, CompactSet};
use crate::meshfn::MeshFunction;
use crate::principle::harmonic_solve_values;
use crate::scheme::{ConvexEnvelope, EnvelopeMethod};
use crate::{Error, Point, Result, ScalarField};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellRow {
    pub h: f64,
    /// Shell distance in multiples of `h`.
    pub multiple: f64,
    pub distance: f64,
    pub nodes: usize,
    /// `max(0, U − u_h)` with `U` the convex envelope of the boundary samples.
    pub deficit: f64,
    /// `max(0, u_h − w_h)` with `w_h` the harmonic barrier.
    pub excess: f64,
    /// `max |u_h − u|` when the exact solution is known.
    pub abs_err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdherenceReport {
    pub rows: Vec<ShellRow>,
    /// Least-squares slope of `ln deficit` against `ln distance`.
    pub alpha: Option<f64>,
    /// The exponent `1/d` of the continuous boundary estimate.
    pub predicted_alpha: f64,
    pub fit_points: usize,
}

/// Deficit below the boundary envelope and excess over the harmonic barrier
/// on node shells at distances `m·h` from `∂Ω`, for every solution in `levels`.
pub fn boundary_adherence_probe(
    levels: &[&MeshFunction],
    g: &ScalarField,
    exact: Option<&ScalarField>,
    opts: &StudyOptions,
) -> Result<AdherenceReport> {
    let Some(first) = levels.first() else {
        return Err(Error::Config("boundary adherence needs at least one solution".into()));
    };
    let domain = first.lattice().domain().clone();
    let env = ConvexEnvelope::from_boundary(&domain, |p| g(p), opts.boundary_samples, EnvelopeMethod::Auto)?;
    let mut rows = Vec::new();
    for u in levels {
        let lat = u.lattice();
        let h = lat.h();
        let boundary: Vec<f64> = lat.boundary_ids().map(|b| u.value(b)).collect();
        let w = harmonic_solve_values(lat, &boundary)?;
        for &m in &opts.shells {
            let s = m * h;
            let nodes: Vec<usize> = lat
                .interior_ids()
                .filter(|&x| {
                    let d = lat.distance_to_boundary(x);
                    d > s - 0.5 * h && d <= s + 0.5 * h
                })
                .collect();
            let envelope: Vec<f64> = nodes.par_iter().map(|&x| env.eval(lat.point(x))).collect::<Result<_>>()?;
            let mut row = ShellRow {
                h,
                multiple: m,
                distance: s,
                nodes: nodes.len(),
                deficit: 0.0,
                excess: 0.0,
                abs_err: exact.map(|_| 0.0),
            };
            for (&x, &big_u) in nodes.iter().zip(&envelope) {
                let v = u.value(x);
                row.deficit = row.deficit.max(big_u - v);
                row.excess = row.excess.max(v - w.value(x));
                if let (Some(e), Some(ex)) = (row.abs_err.as_mut(), exact) {
                    *e = e.max((v - ex(lat.point(x))).abs());
                }
            }
            rows.push(row);
        }
    }
    let scale = levels.iter().map(|u| u.sup_norm()).fold(1.0, f64::max);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.nodes > 0 && r.deficit > 1e-10 * scale)
        .map(|r| (r.distance.ln(), r.deficit.ln()))
        .collect();
    let alpha = slope(&pts);
    Ok(AdherenceReport { rows, alpha, predicted_alpha: 0.5, fit_points: pts.len() })
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 1e-12).then(|| sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityLevel {
    pub h: f64,
    /// `max(0, I(ta + (1−t)b) − t·I(a) − (1−t)·I(b))` over the samples.
    pub max_violation: f64,
    /// Allowed slack `C·h`.
    pub epsilon: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityProbeReport {
    pub levels: Vec<ConvexityLevel>,
    pub within_slack: bool,
    /// Violations do not grow from one level to the next.
    pub shrinking: bool,
    pub pass: bool,
}

fn sample_in(k: &CompactSet, u: &MeshFunction, rng: &mut ChaCha8Rng) -> Result<Point> {
    let lat = u.lattice();
    let (lo, hi) = match *k {
        CompactSet::Box { min, max } => (min, max),
        CompactSet::Inset { .. } => lat.domain().bounding_box(),
    };
    for _ in 0..10_000 {
        let p = [rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1])];
        if k.contains(lat, p) {
            return Ok(p);
        }
    }
    Err(Error::Config(format!("could not sample a point of {k:?}")))
}

/// Midpoint-type convexity of `I(u_h)` on random segments in `k`. The same
/// segments are used at every level.
pub fn convexity_of_limit_probe(
    levels: &[&MeshFunction],
    k: &CompactSet,
    segments: usize,
    c: f64,
    seed: u64,
) -> Result<ConvexityProbeReport> {
    let Some(first) = levels.first() else {
        return Err(Error::Config("convexity probe needs at least one solution".into()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(segments);
    for _ in 0..segments {
        let a = sample_in(k, first, &mut rng)?;
        let b = sample_in(k, first, &mut rng)?;
        samples.push((a, b, rng.gen_range(0.0..1.0)));
    }
    let mut out = Vec::new();
    for u in levels {
        let pl = interpolate(u)?;
        let mut worst = 0.0f64;
        for &(a, b, t) in &samples {
            let m = [t * a[0] + (1.0 - t) * b[0], t * a[1] + (1.0 - t) * b[1]];
            worst = worst.max(pl.eval(m)? - t * pl.eval(a)? - (1.0 - t) * pl.eval(b)?);
        }
        let h = u.lattice().h();
        out.push(ConvexityLevel { h, max_violation: worst, epsilon: c * h, samples: segments });
    }
    let scale = levels.iter().map(|u| u.sup_norm()).fold(1.0, f64::max);
    let within_slack = out.iter().all(|l| l.max_violation <= l.epsilon);
    let shrinking = out.windows(2).all(|w| w[1].max_violation <= w[0].max_violation.max(1e-12 * scale));
    Ok(ConvexityProbeReport { levels: out, within_slack, shrinking, pass: within_slack && shrinking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_lattice, BoundaryMode, ConvexDomain};
    use std::sync::Arc;

    fn samples(h: f64, f: impl Fn(Point) -> f64) -> MeshFunction {
        let lat = Arc::new(build_lattice(&ConvexDomain::unit_box(), h, BoundaryMode::Projected).unwrap());
        MeshFunction::from_fn(&lat, f).unwrap()
    }

    #[test]
    fn affine_data_adheres_exactly() {
        let a = |p: Point| 1.0 + 2.0 * p[0] - p[1];
        let g: ScalarField = Arc::new(a);
        let us = [samples(0.25, a), samples(0.125, a)];
        let refs: Vec<&MeshFunction> = us.iter().collect();
        let r = boundary_adherence_probe(&refs, &g, Some(&g), &StudyOptions::default()).unwrap();
        for row in &r.rows {
            assert!(row.deficit < 1e-10 && row.excess < 1e-10 && row.abs_err.unwrap() < 1e-12, "{row:?}");
        }
        assert_eq!(r.alpha, None);
        let c = convexity_of_limit_probe(&refs, &CompactSet::Inset { delta: 0.2 }, 200, 1.0, 3).unwrap();
        assert!(c.pass && c.levels.iter().all(|l| l.max_violation < 1e-12));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.1f64, 0.2, 0.4].iter().map(|d| (d.ln(), (3.0 * d.sqrt()).ln())).collect();
        assert!((slope(&pts).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quadratic_violation_shrinks() {
        let q = |p: Point| 0.5 * (p[0] * p[0] + p[1] * p[1]);
        let us = [samples(0.25, q), samples(0.125, q)];
        let refs: Vec<&MeshFunction> = us.iter().collect();
        let r = convexity_of_limit_probe(&refs, &CompactSet::Inset { delta: 0.2 }, 500, 1.0, 11).unwrap();
        assert!(r.pass, "{r:?}");
        for l in &r.levels {
            assert!(l.max_violation <= l.h * l.h / 4.0 + 1e-12);
        }
    }
}
