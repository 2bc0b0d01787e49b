mod common;

use dconvex::measure::{ma_measure_with, ConvexityPolicy, MeasureOptions};
use dconvex::{ma_measure, subdifferential, ConstraintSet, ConvexDomain, MeshFunction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_lattice(n: usize, m: usize, h: f64) -> std::sync::Arc<dconvex::Lattice> {
    let d = ConvexDomain::new_box([0.0, 0.0], [(n - 1) as f64 * h, (m - 1) as f64 * h]).unwrap();
    common::lattice(&d, h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn masses_scale_quadratically(seed in any::<u64>(), lambda in 0.1..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = common::random_convex(&mut rng);
        let lat = small_lattice(7, 6, 0.2);
        let v = MeshFunction::from_fn(&lat, &f).unwrap();
        let lv = MeshFunction::from_fn(&lat, |p| lambda * f(p)).unwrap();
        let (a, b) = (ma_measure(&v).unwrap(), ma_measure(&lv).unwrap());
        for (x, y) in a.node_masses.iter().zip(&b.node_masses) {
            prop_assert!((y - lambda * lambda * x).abs() <= 1e-9 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn affine_shift_translates_polygons(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64, c in -1.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = common::random_convex(&mut rng);
        let lat = small_lattice(6, 7, 0.25);
        let v = MeshFunction::from_fn(&lat, &f).unwrap();
        let w = MeshFunction::from_fn(&lat, |p| f(p) + a * p[0] + b * p[1] + c).unwrap();
        for x in lat.interior_ids() {
            let (p, q) = (subdifferential(&v, x, ConstraintSet::AllNodes).unwrap(), subdifferential(&w, x, ConstraintSet::AllNodes).unwrap());
            prop_assert!((p.area - q.area).abs() <= 1e-9);
            if p.area > 1e-6 {
                let cp = centroid(&p.vertices);
                let cq = centroid(&q.vertices);
                prop_assert!((cq[0] - cp[0] - a).abs() < 1e-7 && (cq[1] - cp[1] - b).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn total_is_additive_over_partitions(seed in any::<u64>(), cut in 0usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = common::random_convex(&mut rng);
        let lat = small_lattice(7, 7, 1.0 / 6.0);
        let m = ma_measure(&MeshFunction::from_fn(&lat, &f).unwrap()).unwrap();
        let cut = cut.min(lat.num_interior());
        let parts = m.mass_of(0..cut) + m.mass_of(cut..lat.num_interior());
        prop_assert!((parts - m.total).abs() <= 1e-12 * (1.0 + m.total));
        prop_assert!(m.node_masses.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn clipping_matches_vertex_enumeration(seed in any::<u64>(), n in 4usize..8, m in 4usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = common::random_convex(&mut rng);
        let lat = small_lattice(n, m, 0.2);
        let v = MeshFunction::from_fn(&lat, &f).unwrap();
        for x in lat.interior_ids() {
            let poly = subdifferential(&v, x, ConstraintSet::AllNodes).unwrap();
            let oracle = common::vertex_enumeration_area(&common::constraints(&v, x));
            prop_assert!((poly.area - oracle).abs() <= 1e-9, "node {x}: {} vs {oracle}", poly.area);
        }
    }
}

/// Area centroid; insensitive to repeated or collinear vertices.
fn centroid(poly: &[[f64; 2]]) -> [f64; 2] {
    let n = poly.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let w = p[0] * q[1] - q[0] * p[1];
        a += w;
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

#[test]
fn quadratic_masses_on_centered_box() {
    let d = ConvexDomain::new_box([-1.0, -1.0], [1.0, 1.0]).unwrap();
    let h = 0.25;
    let lat = common::lattice(&d, h);
    let v = MeshFunction::from_fn(&lat, |p| 0.5 * (p[0] * p[0] + p[1] * p[1])).unwrap();
    let m = ma_measure(&v).unwrap();
    for x in lat.interior_ids() {
        let oracle = common::vertex_enumeration_area(&common::constraints(&v, x));
        assert!((oracle - h * h).abs() < 1e-12);
        assert!((m.node_masses[x] - h * h).abs() < 1e-12);
    }
    assert!((m.total - lat.num_interior() as f64 * h * h).abs() < 1e-12);
}

#[test]
fn l1_norm_mass_sits_on_the_axes() {
    let d = ConvexDomain::new_box([-1.0, -1.0], [1.0, 1.0]).unwrap();
    let lat = common::lattice(&d, 0.5);
    let v = MeshFunction::from_fn(&lat, |p| p[0].abs() + p[1].abs()).unwrap();
    let m = ma_measure(&v).unwrap();
    for x in lat.interior_ids() {
        let p = lat.point(x);
        let oracle = common::vertex_enumeration_area(&common::constraints(&v, x));
        assert!((m.node_masses[x] - oracle).abs() < 1e-12);
        if p[0] == 0.0 && p[1] == 0.0 {
            assert!((m.node_masses[x] - 4.0).abs() < 1e-12);
        } else if p[0] != 0.0 && p[1] != 0.0 {
            assert_eq!(m.node_masses[x], 0.0);
        }
    }
}

#[test]
fn radius_limited_is_a_superset() {
    let lat = common::unit(0.125);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = MeshFunction::from_fn(&lat, common::random_convex(&mut rng)).unwrap();
    let full = ma_measure(&v).unwrap();
    let near = ma_measure_with(
        &v,
        &MeasureOptions { constraints: ConstraintSet::RadiusLimited { radius: 0.26 }, convexity: ConvexityPolicy::Warn },
    )
    .unwrap();
    for (a, b) in full.node_masses.iter().zip(&near.node_masses) {
        assert!(*b >= a - 1e-12);
    }
}
