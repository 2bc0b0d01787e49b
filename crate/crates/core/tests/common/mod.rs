//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use dconvex::{build_lattice, BoundaryMode, ConvexDomain, Lattice, MeshFunction, Point};
use rand::Rng;

pub fn lattice(d: &ConvexDomain, h: f64) -> Arc<Lattice> {
    Arc::new(build_lattice(d, h, BoundaryMode::Projected).unwrap())
}

pub fn unit(h: f64) -> Arc<Lattice> {
    lattice(&ConvexDomain::unit_box(), h)
}

/// Half-planes `p·n ≤ c` of the subdifferential at `x0`, one per other node.
pub fn constraints(v: &MeshFunction, x0: usize) -> Vec<(Point, f64)> {
    let lat = v.lattice();
    let p0 = lat.point(x0);
    (0..lat.len())
        .filter(|&y| y != x0)
        .map(|y| {
            let p = lat.point(y);
            ([p[0] - p0[0], p[1] - p0[1]], v.value(y) - v.value(x0))
        })
        .collect()
}

/// Andrew's monotone chain; drops collinear points.
pub fn hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n).map(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        a[0] * b[1] - a[1] * b[0]
    })
    .sum::<f64>()
}

/// Area of `{p : p·n ≤ c}` by intersecting every pair of constraint lines,
/// keeping the feasible intersections and taking their hull.
pub fn vertex_enumeration_area(cons: &[(Point, f64)]) -> f64 {
    shoelace(&vertex_enumeration(cons)).abs()
}

/// Vertices of `{p : p·n ≤ c}`, assumed bounded.
pub fn vertex_enumeration(cons: &[(Point, f64)]) -> Vec<Point> {
    let scale = cons.iter().map(|(n, c)| n[0].abs().max(n[1].abs()).max(c.abs())).fold(1.0, f64::max);
    let mut pts = Vec::new();
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let ((a, c1), (b, c2)) = (cons[i], cons[j]);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-14 * scale * scale {
                continue;
            }
            let p = [(c1 * b[1] - c2 * a[1]) / det, (a[0] * c2 - b[0] * c1) / det];
            if cons.iter().all(|(n, c)| n[0] * p[0] + n[1] * p[1] <= c + 1e-10 * scale) {
                pts.push(p);
            }
        }
    }
    hull(pts)
}

pub fn bounding_box(pts: &[Point]) -> (Point, Point) {
    pts.iter().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), p| {
        ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
    })
}

/// Monte-Carlo area of the constraint set inside the box `[lo, hi]`.
pub fn monte_carlo_area(cons: &[(Point, f64)], lo: Point, hi: Point, samples: usize, rng: &mut impl Rng) -> f64 {
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        if cons.iter().all(|(n, c)| n[0] * p[0] + n[1] * p[1] <= *c) {
            hits += 1;
        }
    }
    hits as f64 / samples as f64 * (hi[0] - lo[0]) * (hi[1] - lo[1])
}

/// Bounding box of the subdifferential from the four axis constraints.
pub fn axis_box(cons: &[(Point, f64)]) -> (Point, Point) {
    let (mut lo, mut hi) = ([f64::NEG_INFINITY; 2], [f64::INFINITY; 2]);
    for (n, c) in cons {
        for k in 0..2 {
            if n[1 - k] == 0.0 && n[k] != 0.0 {
                let b = c / n[k];
                if n[k] > 0.0 {
                    hi[k] = hi[k].min(b);
                } else {
                    lo[k] = lo[k].max(b);
                }
            }
        }
    }
    (lo, hi)
}

/// Random affine pieces `(a1, a2, b)`.
pub fn random_planes(rng: &mut impl Rng, k: usize) -> Vec<[f64; 3]> {
    (0..k).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5)]).collect()
}

pub fn max_affine(planes: &[[f64; 3]], p: Point) -> f64 {
    planes.iter().map(|a| a[0] * p[0] + a[1] * p[1] + a[2]).fold(f64::NEG_INFINITY, f64::max)
}

/// Convex quadratic `½ xᵀAx` with random positive definite `A` plus a max of affines.
pub fn random_convex(rng: &mut impl Rng) -> impl Fn(Point) -> f64 {
    let k = rng.gen_range(1..7);
    let planes = random_planes(rng, k);
    let quad = rng.gen_bool(0.5);
    let (l1, l2, th) = (rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0), rng.gen_range(0.0..std::f64::consts::PI));
    let (c, s) = (th.cos(), th.sin());
    let a = [l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c];
    move |p| {
        let q = if quad { 0.5 * (a[0] * p[0] * p[0] + 2.0 * a[1] * p[0] * p[1] + a[2] * p[1] * p[1]) } else { 0.0 };
        q + max_affine(&planes, p)
    }
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= m * a[k][j];
            }
            b[i] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Harmonic extension on a uniform box lattice with the plain five-point
/// Laplacian, assembled densely from lattice coordinates.
pub fn dense_box_harmonic(lat: &Lattice, g: impl Fn(Point) -> f64) -> Vec<f64> {
    let ni = lat.num_interior();
    let h = lat.h();
    let mut a = vec![vec![0.0; ni]; ni];
    let mut b = vec![0.0; ni];
    for x in 0..ni {
        let p = lat.point(x);
        a[x][x] = 4.0;
        for d in [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]] {
            let q = [p[0] + d[0], p[1] + d[1]];
            match (0..ni).find(|&y| {
                let r = lat.point(y);
                (r[0] - q[0]).abs() < 1e-9 && (r[1] - q[1]).abs() < 1e-9
            }) {
                Some(y) => a[x][y] -= 1.0,
                None => b[x] += g(q),
            }
        }
    }
    dense_solve(a, b)
}
