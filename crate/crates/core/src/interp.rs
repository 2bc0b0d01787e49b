//! Piecewise linear interpolation of mesh functions.
//!
//! Each lattice square is intersected with `Ω̄_h`: the nodes on its
//! perimeter form a convex polygon that is fanned into triangles from its
//! first vertex, so a full square is split by its lower-left to upper-right
//! diagonal. The pockets between these cells and the convex hull of all
//! nodes are then triangulated by ear clipping. Every lattice segment
//! between adjacent nodes is an edge of the result, so the interpolant is
//! piecewise linear along lattice lines with breaks only at nodes.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{Lattice, NodeId, SegmentKey};
use crate::geom::{barycentric, orient, signed_area, sub};
use crate::meshfn::MeshFunction;
use crate::{Error, Point, Result};

/// Slack on barycentric coordinates when locating points.
const LOCATE_TOL: f64 = 1e-9;

/// A triangulation of the convex hull of the lattice nodes.
#[derive(Clone, Debug)]
pub struct Triangulation {
    lattice: Arc<Lattice>,
    triangles: Vec<[NodeId; 3]>,
    num_cell: usize,
    sq_lo: [i64; 2],
    sq_dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

impl Triangulation {
    pub fn new(lattice: &Arc<Lattice>) -> Result<Self> {
        let lat = lattice.as_ref();
        let h = lat.h();
        let pts = lat.points();
        let (mut lo, mut hi) = ([i64::MAX; 2], [i64::MIN; 2]);
        for p in &pts {
            for k in 0..2 {
                let c = (p[k] / h).floor() as i64;
                lo[k] = lo[k].min(c - 1);
                hi[k] = hi[k].max(c + 1);
            }
        }
        let sq_dims = [(hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize];

        let mut triangles: Vec<[NodeId; 3]> = Vec::new();
        let mut owner: Vec<usize> = Vec::new();
        let min_area = 1e-12 * h * h;
        let mut ring: Vec<NodeId> = Vec::with_capacity(8);
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                ring.clear();
                let seg = |axis: u8, line: i64, start: i64| lat.segment_node(SegmentKey { axis, line, start });
                let candidates = [
                    lat.node_at([i, j]),
                    seg(0, j, i),
                    lat.node_at([i + 1, j]),
                    seg(1, i + 1, j),
                    lat.node_at([i + 1, j + 1]),
                    seg(0, j + 1, i),
                    lat.node_at([i, j + 1]),
                    seg(1, i, j),
                ];
                ring.extend(candidates.iter().flatten());
                if ring.len() < 3 {
                    continue;
                }
                let slot = (j - lo[1]) as usize * sq_dims[0] + (i - lo[0]) as usize;
                for k in 1..ring.len() - 1 {
                    let t = [ring[0], ring[k], ring[k + 1]];
                    if orient(pts[t[0]], pts[t[1]], pts[t[2]]) > 2.0 * min_area {
                        triangles.push(t);
                        owner.push(slot);
                    }
                }
            }
        }
        let num_cell = triangles.len();
        let fringe = fringe_triangles(&pts, lat, &triangles, min_area)?;

        let mut buckets = vec![Vec::new(); sq_dims[0] * sq_dims[1]];
        for (t, &slot) in owner.iter().enumerate() {
            buckets[slot].push(t as u32);
        }
        for (k, t) in fringe.iter().enumerate() {
            let id = (num_cell + k) as u32;
            let (mut bmin, mut bmax) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for &v in t {
                for c in 0..2 {
                    bmin[c] = bmin[c].min(pts[v][c]);
                    bmax[c] = bmax[c].max(pts[v][c]);
                }
            }
            let i0 = ((bmin[0] / h).floor() as i64).max(lo[0]);
            let i1 = ((bmax[0] / h).floor() as i64).min(hi[0]);
            let j0 = ((bmin[1] / h).floor() as i64).max(lo[1]);
            let j1 = ((bmax[1] / h).floor() as i64).min(hi[1]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[(j - lo[1]) as usize * sq_dims[0] + (i - lo[0]) as usize].push(id);
                }
            }
        }
        triangles.extend(fringe);
        Ok(Triangulation { lattice: lattice.clone(), triangles, num_cell, sq_lo: lo, sq_dims, buckets })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// All triangles, counterclockwise; lattice-square cells first, then fringe cells.
    pub fn triangles(&self) -> &[[NodeId; 3]] {
        &self.triangles
    }

    pub fn num_cells(&self) -> usize {
        self.num_cell
    }

    pub fn fringe(&self) -> &[[NodeId; 3]] {
        &self.triangles[self.num_cell..]
    }

    pub fn area(&self) -> f64 {
        let lat = &self.lattice;
        self.triangles
            .iter()
            .map(|t| 0.5 * orient(lat.point(t[0]), lat.point(t[1]), lat.point(t[2])))
            .sum()
    }

    /// The triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: Point) -> Result<(usize, [f64; 3])> {
        let h = self.lattice.h();
        let ci = (p[0] / h).floor() as i64;
        let cj = (p[1] / h).floor() as i64;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        let scan = |i: i64, j: i64, best: &mut Option<(usize, [f64; 3], f64)>| {
            let (di, dj) = (i - self.sq_lo[0], j - self.sq_lo[1]);
            if di < 0 || dj < 0 || di as usize >= self.sq_dims[0] || dj as usize >= self.sq_dims[1] {
                return;
            }
            for &t in &self.buckets[dj as usize * self.sq_dims[0] + di as usize] {
                let tri = self.triangles[t as usize];
                let [a, b, c] = tri.map(|v| self.lattice.point(v));
                if let Some(l) = barycentric(p, a, b, c) {
                    let m = l[0].min(l[1]).min(l[2]);
                    if best.as_ref().map_or(true, |bb| m > bb.2) {
                        *best = Some((t as usize, l, m));
                    }
                }
            }
        };
        scan(ci, cj, &mut best);
        if best.as_ref().map_or(true, |b| b.2 < -1e-12) {
            for dj in -1..=1 {
                for di in -1..=1 {
                    if di != 0 || dj != 0 {
                        scan(ci + di, cj + dj, &mut best);
                    }
                }
            }
        }
        match best {
            Some((t, l, m)) if m >= -LOCATE_TOL => Ok((t, l)),
            _ => Err(Error::OutsideHull(p)),
        }
    }
}

/// Triangulates the region between the lattice cells and the convex hull
/// of all nodes.
fn fringe_triangles(pts: &[Point], lat: &Lattice, cells: &[[NodeId; 3]], min_area: f64) -> Result<Vec<[NodeId; 3]>> {
    let mut directed: HashSet<(NodeId, NodeId)> = HashSet::new();
    for t in cells {
        for k in 0..3 {
            directed.insert((t[k], t[(k + 1) % 3]));
        }
    }
    // Edges with the uncovered region on their left: reversed outer edges
    // of the cell union, plus hull edges not already covered.
    let mut edges: HashSet<(NodeId, NodeId)> =
        directed.iter().filter(|(a, b)| !directed.contains(&(*b, *a))).map(|&(a, b)| (b, a)).collect();

    let hull = hull_cycle(pts, lat);
    for k in 0..hull.len() {
        let (p, q) = (hull[k], hull[(k + 1) % hull.len()]);
        if !edges.remove(&(q, p)) {
            edges.insert((p, q));
        }
    }
    let mut out: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    let mut sorted: Vec<(NodeId, NodeId)> = edges.iter().copied().collect();
    sorted.sort_unstable();
    for &(a, b) in &sorted {
        out.entry(a).or_default().push(b);
    }

    let mut used: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut result = Vec::new();
    for &start in &sorted {
        if used.contains(&start) {
            continue;
        }
        let mut cycle = vec![start.0];
        let (mut a, mut b) = start;
        loop {
            used.insert((a, b));
            if b == start.0 {
                break;
            }
            cycle.push(b);
            let back = sub(pts[a], pts[b]);
            let back_ang = back[1].atan2(back[0]);
            let next = out
                .get(&b)
                .into_iter()
                .flatten()
                .copied()
                .filter(|c| !used.contains(&(b, *c)))
                .min_by(|&c, &d| {
                    let cw = |n: NodeId| {
                        let v = sub(pts[n], pts[b]);
                        let mut ang = back_ang - v[1].atan2(v[0]);
                        if ang <= 0.0 {
                            ang += std::f64::consts::TAU;
                        }
                        ang
                    };
                    cw(c).total_cmp(&cw(d))
                })
                .ok_or_else(|| Error::Internal("open pocket boundary in fringe triangulation".into()))?;
            a = b;
            b = next;
            if cycle.len() > pts.len() + 1 {
                return Err(Error::Internal("pocket walk did not close".into()));
            }
        }
        let poly: Vec<Point> = cycle.iter().map(|&v| pts[v]).collect();
        if signed_area(&poly) <= min_area {
            continue;
        }
        ear_clip(pts, cycle, min_area, &mut result);
    }
    Ok(result)
}

/// Boundary nodes in counterclockwise order. They all lie on the boundary of
/// the convex domain, so this cycle bounds the convex hull of the lattice.
fn hull_cycle(pts: &[Point], lat: &Lattice) -> Vec<NodeId> {
    let ids: Vec<NodeId> = lat.boundary_ids().collect();
    let n = ids.len() as f64;
    let c = ids.iter().fold([0.0, 0.0], |acc, &i| [acc[0] + pts[i][0] / n, acc[1] + pts[i][1] / n]);
    let mut keyed: Vec<(f64, NodeId)> = ids.iter().map(|&i| ((pts[i][1] - c[1]).atan2(pts[i][0] - c[0]), i)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn ear_clip(pts: &[Point], mut poly: Vec<NodeId>, min_area: f64, out: &mut Vec<[NodeId; 3]>) {
    while poly.len() >= 3 {
        let area: f64 = {
            let p: Vec<Point> = poly.iter().map(|&v| pts[v]).collect();
            signed_area(&p)
        };
        if area <= min_area {
            return;
        }
        let n = poly.len();
        let mut chosen = None;
        let mut fallback = (f64::NEG_INFINITY, 0usize);
        for k in 0..n {
            let (p, v, q) = (poly[(k + n - 1) % n], poly[k], poly[(k + 1) % n]);
            let o = orient(pts[p], pts[v], pts[q]);
            if o > fallback.0 {
                fallback = (o, k);
            }
            if o <= 2.0 * min_area {
                continue;
            }
            let blocked = poly.iter().any(|&w| {
                w != p
                    && w != v
                    && w != q
                    && pts[w] != pts[p]
                    && pts[w] != pts[v]
                    && pts[w] != pts[q]
                    && orient(pts[p], pts[v], pts[w]) >= -min_area
                    && orient(pts[v], pts[q], pts[w]) >= -min_area
                    && orient(pts[q], pts[p], pts[w]) >= -min_area
            });
            if !blocked {
                chosen = Some(k);
                break;
            }
        }
        let k = match chosen {
            Some(k) => k,
            None => {
                log::warn!("ear clipping found no clean ear; clipping the most convex vertex");
                fallback.1
            }
        };
        let (p, v, q) = (poly[(k + n - 1) % n], poly[k], poly[(k + 1) % n]);
        if orient(pts[p], pts[v], pts[q]) > 2.0 * min_area {
            out.push([p, v, q]);
        }
        poly.remove(k);
    }
}

/// The piecewise linear interpolant `I(v)`.
#[derive(Clone, Debug)]
pub struct PLFunction {
    tri: Arc<Triangulation>,
    values: Vec<f64>,
}

/// Builds the triangulation of `v`'s lattice and interpolates `v` on it.
pub fn interpolate(v: &MeshFunction) -> Result<PLFunction> {
    let tri = Arc::new(Triangulation::new(v.lattice())?);
    PLFunction::new(tri, v)
}

impl PLFunction {
    pub fn new(tri: Arc<Triangulation>, v: &MeshFunction) -> Result<Self> {
        if !Arc::ptr_eq(tri.lattice(), v.lattice()) {
            return Err(Error::LatticeMismatch);
        }
        Ok(PLFunction { tri, values: v.values().to_vec() })
    }

    pub fn triangulation(&self) -> &Arc<Triangulation> {
        &self.tri
    }

    pub fn eval(&self, p: Point) -> Result<f64> {
        let (t, l) = self.tri.locate(p)?;
        let tri = self.tri.triangles[t];
        Ok(l[0] * self.values[tri[0]] + l[1] * self.values[tri[1]] + l[2] * self.values[tri[2]])
    }

    /// Samples on an `(n+1)×(n+1)` grid over `[min, max]`, skipping points
    /// outside the hull, as `x,y,value` CSV.
    pub fn to_csv_grid(&self, min: Point, max: Point, n: usize) -> String {
        let mut s = String::from("x,y,value\n");
        for p in grid_points(min, max, n) {
            if let Ok(v) = self.eval(p) {
                s.push_str(&format!("{},{},{}\n", p[0], p[1], v));
            }
        }
        s
    }
}

/// Regular `(n+1)×(n+1)` grid over the box `[min, max]`.
pub fn grid_points(min: Point, max: Point, n: usize) -> impl Iterator<Item = Point> {
    let n = n.max(1);
    (0..=n).flat_map(move |j| {
        (0..=n).map(move |i| {
            let tx = i as f64 / n as f64;
            let ty = j as f64 / n as f64;
            [min[0] + tx * (max[0] - min[0]), min[1] + ty * (max[1] - min[1])]
        })
    })
}

/// A compact subset of the domain on which interior estimates are taken.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompactSet {
    /// The box `[min, max]`.
    Box { min: Point, max: Point },
    /// `{x ∈ Ω : d(x, ∂Ω) ≥ delta}`.
    Inset { delta: f64 },
}

impl CompactSet {
    pub fn contains(&self, lat: &Lattice, p: Point) -> bool {
        self.contains_with_margin(lat, p, 0.0)
    }

    /// Membership in the set enlarged by `margin`.
    pub fn contains_with_margin(&self, lat: &Lattice, p: Point, margin: f64) -> bool {
        let tie = 1e-12 * lat.h();
        match *self {
            CompactSet::Box { min, max } => {
                p[0] >= min[0] - margin - tie
                    && p[0] <= max[0] + margin + tie
                    && p[1] >= min[1] - margin - tie
                    && p[1] <= max[1] + margin + tie
            }
            CompactSet::Inset { delta } => lat.domain().inset(p) >= delta - margin - tie,
        }
    }

    fn bounding_box(&self, lat: &Lattice) -> (Point, Point) {
        match *self {
            CompactSet::Box { min, max } => (min, max),
            CompactSet::Inset { .. } => lat.domain().bounding_box(),
        }
    }

    fn validate(&self, lat: &Lattice) -> Result<()> {
        let ok = match *self {
            CompactSet::Box { min, max } => {
                min[0] <= max[0]
                    && min[1] <= max[1]
                    && [min, max, [min[0], max[1]], [max[0], min[1]]].iter().all(|&c| lat.domain().inset(c) > 0.0)
            }
            CompactSet::Inset { delta } => delta > 0.0 && delta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::CompactTooCoarse(format!("{self:?} is not a compact subset of the open domain")))
        }
    }
}

/// Directional Lipschitz estimate `max |v(x+he_i) − v(x)|/h` over nodes
/// `x ∈ k` and both orientations of each axis.
pub fn lipschitz_modulus(v: &MeshFunction, k: &CompactSet) -> Result<f64> {
    let lat = v.lattice();
    k.validate(lat)?;
    let h = lat.h();
    let mut best = 0.0f64;
    let mut any = false;
    for id in 0..lat.len() {
        let p = lat.point(id);
        if !k.contains(lat, p) {
            continue;
        }
        if !lat.is_interior(id) || lat.arms(id).iter().any(|a| (a.len - h).abs() > 1e-9 * h) {
            return Err(Error::CompactTooCoarse(format!(
                "h = {h}: node ({}, {}) near the compact set has a shortened or missing arm",
                p[0], p[1]
            )));
        }
        any = true;
        for arm in lat.arms(id) {
            best = best.max((v.value(arm.node) - v.value(id)).abs() / h);
        }
    }
    if !any {
        return Err(Error::CompactTooCoarse(format!("h = {h}: no nodes near the compact set")));
    }
    Ok(best)
}

/// `max |I(v)(s) − exact(s)|` over a regular grid of `density+1` points per
/// axis on the bounding box of `k`, restricted to `k`.
pub fn sup_error_on_compact(pl: &PLFunction, exact: impl Fn(Point) -> f64, k: &CompactSet, density: usize) -> Result<f64> {
    let lat = pl.triangulation().lattice().clone();
    let (min, max) = k.bounding_box(&lat);
    let mut err = 0.0f64;
    for s in grid_points(min, max, density) {
        if !k.contains(&lat, s) {
            continue;
        }
        err = err.max((pl.eval(s)? - exact(s)).abs());
    }
    Ok(err)
}
