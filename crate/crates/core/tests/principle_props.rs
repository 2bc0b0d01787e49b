mod common;

use dconvex::principle::{abp_check, barrier_compare, harmonic_solve, laplace_max_principle_check};
use dconvex::{ConvexDomain, MeshFunction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn harmonic_solve_is_monotone_in_data(seed in any::<u64>(), kind in 0u8..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = if kind == 0 { ConvexDomain::unit_box() } else { ConvexDomain::disk([0.0, 0.0], 1.0).unwrap() };
        let lat = common::lattice(&d, 0.1);
        let planes = common::random_planes(&mut rng, 3);
        let bump: Vec<f64> = (0..lat.num_boundary()).map(|_| rng.gen_range(0.0..0.3)).collect();
        let g1 = |p: [f64; 2]| common::max_affine(&planes, p) + (3.0 * p[0]).sin();
        let w1 = harmonic_solve(&lat, g1).unwrap();
        let mut data: Vec<f64> = lat.boundary_ids().map(|b| g1(lat.point(b))).collect();
        data.iter_mut().zip(&bump).for_each(|(v, b)| *v += b);
        let w2 = dconvex::principle::harmonic_solve_values(&lat, &data).unwrap();
        for x in lat.interior_ids() {
            prop_assert!(w2.value(x) >= w1.value(x) - 1e-12);
        }
    }

    #[test]
    fn convex_functions_lie_below_the_barrier(seed in any::<u64>(), kind in 0u8..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = match kind {
            0 => ConvexDomain::unit_box(),
            1 => ConvexDomain::disk([0.2, 0.0], 0.8).unwrap(),
            _ => ConvexDomain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]]).unwrap(),
        };
        let lat = common::lattice(&d, 0.07);
        let k = rng.gen_range(2..8);
        let planes = common::random_planes(&mut rng, k);
        let u = MeshFunction::from_fn(&lat, |p| common::max_affine(&planes, p)).unwrap();
        let w = harmonic_solve(&lat, |p| common::max_affine(&planes, p)).unwrap();
        let r = barrier_compare(&u, &w).unwrap();
        prop_assert!(r.holds, "{r:?}");
    }

    #[test]
    fn subharmonic_data_obeys_max_principle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = common::lattice(&ConvexDomain::disk([0.0, 0.0], 1.0).unwrap(), 0.12);
        let f = common::random_convex(&mut rng);
        let top = lat.boundary_ids().map(|b| f(lat.point(b))).fold(f64::MIN, f64::max);
        let z = MeshFunction::from_fn(&lat, |p| f(p) - top).unwrap();
        let r = laplace_max_principle_check(&z).unwrap();
        prop_assert!(r.holds && r.max_interior <= 1e-12);
    }
}

#[test]
fn one_hot_side_against_dense_solve() {
    let lat = common::unit(0.25);
    let g = |p: [f64; 2]| if (p[1] - 1.0).abs() < 1e-12 && p[0] > 0.0 && p[0] < 1.0 { 1.0 } else { 0.0 };
    let w = harmonic_solve(&lat, g).unwrap();
    let oracle = common::dense_box_harmonic(&lat, g);
    for x in lat.interior_ids() {
        let p = lat.point(x);
        assert!((w.value(x) - oracle[x]).abs() < 1e-12);
        assert!(w.value(x) > 0.0 && w.value(x) < 1.0);
        // mirror across x = 1/2
        let m = lat.interior_ids().find(|&y| {
            let q = lat.point(y);
            (q[0] - (1.0 - p[0])).abs() < 1e-12 && (q[1] - p[1]).abs() < 1e-12
        });
        assert!((w.value(x) - w.value(m.unwrap())).abs() < 1e-12);
    }
}

#[test]
fn saddle_shifted_below_zero() {
    let lat = common::unit(0.1);
    let q = |p: [f64; 2]| p[0] * p[0] - p[1] * p[1];
    let top = lat.boundary_ids().map(|b| q(lat.point(b))).fold(f64::MIN, f64::max);
    let z = MeshFunction::from_fn(&lat, |p| q(p) - top).unwrap();
    assert!(laplace_max_principle_check(&z).unwrap().holds);
}

#[test]
fn abp_ratios_from_first_principles() {
    // centred quadratic vanishing at the edge midpoints of [0,1]²
    let lat = common::unit(0.125);
    let z = MeshFunction::from_fn(&lat, |p| 0.5 * ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)) - 0.125).unwrap();
    let r = abp_check(&z, 5.0).unwrap();
    let mass = dconvex::ma_measure(&z).unwrap().total;
    let diam = 2f64.sqrt();
    let mut c = 0.0f64;
    for x in lat.interior_ids() {
        let p = lat.point(x);
        let d = p[0].min(p[1]).min(1.0 - p[0]).min(1.0 - p[1]);
        if z.value(x) < 0.0 {
            c = c.max(-z.value(x) / (diam * d * mass).sqrt());
        }
    }
    assert!((r.empirical_c - c).abs() < 1e-12 && r.pass);
    assert!((r.total_mass - mass).abs() < 1e-12);
}
