//! Quick property suites run by `dconvex selftest`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{build_lattice, BoundaryMode, ConvexDomain, Lattice};
use crate::interp::interpolate;
use crate::measure::ma_measure;
use crate::meshfn::{is_discrete_convex, DirectionStencil, MeshFunction};
use crate::principle::{barrier_compare, harmonic_solve, harmonic_solve_values, laplace_max_principle_check};
use crate::scheme::{consistency_test, monotonicity_test, solve, ConvexEnvelope, EnvelopeMethod, MAProblem, Quadratic, SchemeConfig};
use crate::{Point, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn check(name: &str, run: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match run() {
        Ok((pass, detail)) => Check { name: name.into(), pass, detail },
        Err(e) => Check { name: name.into(), pass: false, detail: format!("error: {e}") },
    }
}

fn lattices() -> Result<Vec<Arc<Lattice>>> {
    let cases = [
        (ConvexDomain::unit_box(), 0.125),
        (ConvexDomain::disk([0.1, 0.0], 1.0)?, 0.2),
        (ConvexDomain::polygon(vec![[0.0, 0.0], [1.0, 0.1], [0.45, 0.95]])?, 0.1),
    ];
    cases.iter().map(|(d, h)| Ok(Arc::new(build_lattice(d, *h, BoundaryMode::Projected)?))).collect()
}

/// `max_k (a_k·x + b_k)` for random affine pieces.
fn max_affine(lat: &Arc<Lattice>, rng: &mut ChaCha8Rng, pieces: usize) -> Result<MeshFunction> {
    let planes: Vec<[f64; 3]> =
        (0..pieces).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5)]).collect();
    MeshFunction::from_fn(lat, |p| planes.iter().map(|a| a[0] * p[0] + a[1] * p[1] + a[2]).fold(f64::MIN, f64::max))
}

/// Runs every suite with randomness drawn from `seed`.
pub fn selftest(seed: u64) -> SelftestReport {
    let mut checks = Vec::new();
    let st2 = DirectionStencil::default();

    for w in [1, 2, 3] {
        checks.push(check(&format!("monotonicity W={w}"), || {
            let r = monotonicity_test(&DirectionStencil::new(w)?, 10_000, seed)?;
            Ok((r.pass, format!("{} trials, {} counterexamples", r.trials, r.counterexamples)))
        }));
    }

    checks.push(check("consistency", || {
        let s1 = DirectionStencil::new(1)?;
        let s3 = DirectionStencil::new(3)?;
        let exact = consistency_test(&s1, &[Quadratic::rotated(1.0, 1.0, 0.0), Quadratic { a11: 1.0, a12: 0.0, a22: 4.0 }], 0.125)?;
        let rot = [Quadratic::rotated(1.0, 4.0, std::f64::consts::PI / 6.0)];
        let (e1, e3) = (consistency_test(&s1, &rot, 0.125)?.max_error, consistency_test(&s3, &rot, 0.125)?.max_error);
        Ok((exact.max_error < 1e-10 && e3 < e1, format!("aligned {:e}, rotated W=1 {e1:e}, W=3 {e3:e}", exact.max_error)))
    }));

    checks.push(check("laplace maximum principle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let lats = lattices()?;
        let mut failed = 0;
        for i in 0..100 {
            let lat = &lats[i % lats.len()];
            let pieces = rng.gen_range(1..6);
            let v = max_affine(lat, &mut rng, pieces)?;
            let top = lat.boundary_ids().map(|b| v.value(b)).fold(f64::MIN, f64::max);
            let z = MeshFunction::new(lat.clone(), v.values().iter().map(|x| x - top).collect())?;
            if !laplace_max_principle_check(&z)?.holds {
                failed += 1;
            }
        }
        Ok((failed == 0, format!("{failed} of 100 instances failed")))
    }));

    checks.push(check("harmonic barrier", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let mut worst = f64::MIN;
        for lat in lattices()? {
            for _ in 0..10 {
                let v = max_affine(&lat, &mut rng, 4)?;
                let g: Vec<f64> = lat.boundary_ids().map(|b| v.value(b)).collect();
                let r = barrier_compare(&v, &harmonic_solve_values(&lat, &g)?)?;
                worst = worst.max(r.max_violation);
                if !r.holds {
                    return Ok((false, format!("violation {:e}", r.max_violation)));
                }
            }
        }
        Ok((true, format!("max(u − w) = {worst:e}")))
    }));

    checks.push(check("quadratic mass law", || {
        let lat = Arc::new(build_lattice(&ConvexDomain::new_box([-1.0, -1.0], [1.0, 1.0])?, 0.25, BoundaryMode::Projected)?);
        let v = MeshFunction::from_fn(&lat, |p| 0.5 * (p[0] * p[0] + p[1] * p[1]))?;
        let m = ma_measure(&v)?;
        let err = m.node_masses.iter().map(|a| (a - 0.0625).abs()).fold(0.0, f64::max);
        Ok((err <= 1e-12, format!("max |mass − h²| = {err:e}")))
    }));

    checks.push(check("convex envelope", || {
        let d = ConvexDomain::unit_box();
        let gt = |p: Point| 0.5 * (p[0] * p[0] + p[1] * p[1]);
        let env = ConvexEnvelope::from_boundary(&d, gt, 64, EnvelopeMethod::Auto)?;
        let mut err = 0.0f64;
        for (&s, &g) in env.samples().iter().zip(env.values()) {
            err = err.max((env.eval(s)? - g).abs());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let mut gap = f64::MIN;
        for _ in 0..200 {
            let a = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let b = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            gap = gap.max(env.eval(m)? - 0.5 * (env.eval(a)? + env.eval(b)?));
        }
        Ok((err <= 1e-8 && gap <= 1e-9, format!("boundary error {err:e}, midpoint gap {gap:e}")))
    }));

    checks.push(check("interpolant axis linearity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let mut worst = 0.0f64;
        for lat in lattices()? {
            let v = MeshFunction::new(lat.clone(), (0..lat.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
            let pl = interpolate(&v)?;
            for _ in 0..300 {
                let x = rng.gen_range(0..lat.num_interior());
                let arm = lat.arms(x)[rng.gen_range(0..4)];
                let t = rng.gen_range(0.0..1.0);
                let (a, b) = (lat.point(x), lat.point(arm.node));
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                worst = worst.max((pl.eval(p)? - ((1.0 - t) * v.value(x) + t * v.value(arm.node))).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max deviation {worst:e}")))
    }));

    checks.push(check("quadratic solve", || {
        let d = ConvexDomain::unit_box();
        let lat = Arc::new(build_lattice(&d, 0.125, BoundaryMode::Projected)?);
        let (u, rep) = solve(&MAProblem::quadratic(d), &lat, &SchemeConfig::default())?;
        let err = lat
            .interior_ids()
            .map(|x| {
                let p = lat.point(x);
                (u.value(x) - 0.5 * (p[0] * p[0] + p[1] * p[1])).abs()
            })
            .fold(0.0, f64::max);
        let convex = is_discrete_convex(&u, &st2)?.convex;
        Ok((err <= 1e-8 && convex, format!("nodal error {err:e}, {} sweeps", rep.iterations)))
    }));

    checks.push(check("harmonic affine reproduction", || {
        let lat = Arc::new(build_lattice(&ConvexDomain::disk([0.0, 0.0], 1.0)?, 0.1, BoundaryMode::Projected)?);
        let w = harmonic_solve(&lat, |p| 0.3 - p[0] + 2.0 * p[1])?;
        let err = lat
            .interior_ids()
            .map(|x| {
                let p = lat.point(x);
                (w.value(x) - (0.3 - p[0] + 2.0 * p[1])).abs()
            })
            .fold(0.0, f64::max);
        Ok((err <= 1e-10, format!("max error {err:e}")))
    }));

    let pass = checks.iter().all(|c| c.pass);
    SelftestReport { checks, pass }
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        let r = super::selftest(5);
        assert!(r.pass, "{:#?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }
}
