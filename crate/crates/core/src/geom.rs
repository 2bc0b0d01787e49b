//! Small planar geometry kernel: shoelace areas, half-plane clipping and
//! barycentric coordinates.

use crate::Point;

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Twice the signed area of triangle `abc`; positive when counterclockwise.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Signed shoelace area; positive for counterclockwise vertex order.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        acc += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * acc
}

/// Euclidean distance from `p` to the segment `ab`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return norm(sub(p, a));
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Clip a convex polygon against the half-plane `{p : n·p ≤ c}`.
///
/// Vertices are kept in input order, so a counterclockwise polygon stays
/// counterclockwise. `tol` is the slack below which a vertex counts as inside.
pub fn clip_halfplane(poly: &[Point], n: Point, c: f64, tol: f64, out: &mut Vec<Point>) {
    out.clear();
    let len = poly.len();
    if len == 0 {
        return;
    }
    for i in 0..len {
        let s = poly[i];
        let e = poly[(i + 1) % len];
        let ds = dot(n, s) - c;
        let de = dot(n, e) - c;
        let s_in = ds <= tol;
        let e_in = de <= tol;
        if s_in {
            out.push(s);
        }
        if s_in != e_in {
            let t = ds / (ds - de);
            if t.is_finite() {
                out.push([s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])]);
            }
        }
    }
    dedup_ring(out, tol.max(0.0));
}

/// Remove consecutive duplicates (including the wrap-around pair).
fn dedup_ring(poly: &mut Vec<Point>, tol: f64) {
    let eq = |a: Point, b: Point| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol;
    poly.dedup_by(|a, b| eq(*a, *b));
    while poly.len() > 1 && eq(poly[0], poly[poly.len() - 1]) {
        poly.pop();
    }
}

/// Barycentric coordinates of `p` with respect to triangle `abc`.
///
/// Returns `None` for degenerate triangles.
pub fn barycentric(p: Point, a: Point, b: Point, c: Point) -> Option<[f64; 3]> {
    let det = orient(a, b, c);
    if det.abs() <= f64::EPSILON * (norm(sub(b, a)) * norm(sub(c, a))).max(f64::MIN_POSITIVE) {
        return None;
    }
    let l1 = orient(p, b, c) / det;
    let l2 = orient(a, p, c) / det;
    Some([l1, l2, 1.0 - l1 - l2])
}

/// Convex hull by Andrew's monotone chain; counterclockwise, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}
