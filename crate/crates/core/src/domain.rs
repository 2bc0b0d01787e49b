//! Convex domains and the lattice `Ω̄_h = Ω_h ∪ ∂Ω_h`.
//!
//! Interior nodes are the points of `h·Z²` strictly inside the domain. Their
//! coordinates are stored as integer multi-indices, so membership never
//! depends on accumulated floating-point error. Boundary nodes come in two
//! flavours: lattice points lying on `∂Ω`, and (in [`BoundaryMode::Projected`])
//! the intersections of lattice lines with `∂Ω` next to an interior node
//! whose axis neighbour falls outside the closed domain. The latter carry
//! exact real coordinates that are generally off the lattice.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geom::{cross, dot, norm, segment_distance, signed_area, sub};
use crate::{Error, Point, Result};

pub type NodeId = usize;

/// The four axis directions, in the order used by [`Lattice::arms`].
pub const AXIS_DIRS: [[i64; 2]; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexDomain {
    /// Axis-aligned box `[min.0, max.0] × [min.1, max.1]`.
    Box { min: Point, max: Point },
    /// Convex polygon with counterclockwise vertices. Collinear runs are allowed.
    Polygon { vertices: Vec<Point> },
    Disk { center: Point, radius: f64 },
}

impl ConvexDomain {
    pub fn new_box(min: Point, max: Point) -> Result<Self> {
        let d = ConvexDomain::Box { min, max };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_box() -> Self {
        ConvexDomain::Box { min: [0.0, 0.0], max: [1.0, 1.0] }
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        let d = ConvexDomain::Polygon { vertices };
        d.validate()?;
        Ok(d)
    }

    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        let d = ConvexDomain::Disk { center, radius };
        d.validate()?;
        Ok(d)
    }

    /// Checks non-degeneracy, and convexity plus counterclockwise order for polygons.
    pub fn validate(&self) -> Result<()> {
        let finite = |p: &Point| p[0].is_finite() && p[1].is_finite();
        match self {
            ConvexDomain::Box { min, max } => {
                if !(finite(min) && finite(max)) || !(min[0] < max[0] && min[1] < max[1]) {
                    return Err(Error::InvalidDomain(format!("degenerate box {min:?} .. {max:?}")));
                }
            }
            ConvexDomain::Disk { center, radius } => {
                if !finite(center) || !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidDomain(format!("bad disk radius {radius}")));
                }
            }
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 || !vertices.iter().all(finite) {
                    return Err(Error::InvalidDomain("polygon needs at least 3 finite vertices".into()));
                }
                let area = signed_area(vertices);
                if area <= 0.0 {
                    return Err(Error::InvalidDomain(
                        "polygon must be counterclockwise with positive area".into(),
                    ));
                }
                let scale = self.diameter();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    if norm(sub(b, a)) == 0.0 {
                        return Err(Error::InvalidDomain(format!("repeated vertex {a:?}")));
                    }
                    if cross(sub(b, a), sub(c, b)) < -1e-12 * scale * scale {
                        return Err(Error::InvalidDomain(format!("polygon is not convex at vertex {b:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexDomain::Box { min, max } => norm(sub(*max, *min)),
            ConvexDomain::Disk { radius, .. } => 2.0 * radius,
            ConvexDomain::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        d = d.max(norm(sub(*a, *b)));
                    }
                }
                d
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            ConvexDomain::Box { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
            ConvexDomain::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            ConvexDomain::Polygon { vertices } => signed_area(vertices),
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            ConvexDomain::Box { min, max } => (*min, *max),
            ConvexDomain::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            ConvexDomain::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Positive inside (and then equal to `d(x, ∂Ω)`), zero on `∂Ω`, negative outside.
    pub fn inset(&self, x: Point) -> f64 {
        match self {
            ConvexDomain::Box { min, max } => (x[0] - min[0])
                .min(max[0] - x[0])
                .min(x[1] - min[1])
                .min(max[1] - x[1]),
            ConvexDomain::Disk { center, radius } => radius - norm(sub(x, *center)),
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                let mut d = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let e = sub(b, a);
                    d = d.min(cross(e, sub(x, a)) / norm(e));
                }
                d
            }
        }
    }

    /// Strict membership in the open domain.
    pub fn contains(&self, x: Point) -> bool {
        self.inset(x) > 0.0
    }

    /// Exact Euclidean distance from `x ∈ Ω̄` to `∂Ω`.
    pub fn distance_to_boundary(&self, x: Point) -> Result<f64> {
        let inset = self.inset(x);
        let tol = 1e-12 * self.diameter().max(1.0);
        if inset < -tol || !inset.is_finite() {
            return Err(Error::OutsideDomain(x));
        }
        let d = match self {
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance(x, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
            _ => inset,
        };
        Ok(d.max(0.0))
    }

    /// Distance `t > 0` at which the ray `x + t·dir` (unit `dir`) leaves `Ω̄`, for `x` inside.
    pub fn ray_exit(&self, x: Point, dir: Point) -> f64 {
        match self {
            ConvexDomain::Box { min, max } => {
                let mut t = f64::INFINITY;
                for k in 0..2 {
                    if dir[k] > 0.0 {
                        t = t.min((max[k] - x[k]) / dir[k]);
                    } else if dir[k] < 0.0 {
                        t = t.min((min[k] - x[k]) / dir[k]);
                    }
                }
                t
            }
            ConvexDomain::Disk { center, radius } => {
                let p = sub(x, *center);
                let b = dot(p, dir);
                let c = dot(p, p) - radius * radius;
                let disc = (b * b - c).max(0.0);
                // Larger root of t² + 2bt + c = 0, written to avoid cancellation.
                if b <= 0.0 {
                    -b + disc.sqrt()
                } else {
                    let s = b + disc.sqrt();
                    if s == 0.0 {
                        0.0
                    } else {
                        -c / s
                    }
                }
            }
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                let mut t = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let e = sub(vertices[(i + 1) % n], a);
                    // Outward normal of a counterclockwise edge.
                    let nrm = [e[1], -e[0]];
                    let rate = dot(nrm, dir);
                    if rate > 0.0 {
                        t = t.min(dot(nrm, sub(a, x)) / rate);
                    }
                }
                t
            }
        }
    }

    /// Perimeter length of `∂Ω`.
    pub fn perimeter(&self) -> f64 {
        match self {
            ConvexDomain::Box { min, max } => 2.0 * ((max[0] - min[0]) + (max[1] - min[1])),
            ConvexDomain::Disk { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| norm(sub(vertices[(i + 1) % n], vertices[i]))).sum()
            }
        }
    }

    /// `n` points on `∂Ω`, equispaced in arc length, counterclockwise from a
    /// fixed starting point (the lower-left corner for boxes, the first vertex
    /// for polygons, angle zero for disks).
    pub fn boundary_samples(&self, n: usize) -> Vec<Point> {
        let corners: Vec<Point> = match self {
            ConvexDomain::Box { min, max } => {
                vec![*min, [max[0], min[1]], *max, [min[0], max[1]]]
            }
            ConvexDomain::Polygon { vertices } => vertices.clone(),
            ConvexDomain::Disk { center, radius } => {
                return (0..n)
                    .map(|k| {
                        let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                        [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
                    })
                    .collect();
            }
        };
        let total = self.perimeter();
        let m = corners.len();
        let mut out = Vec::with_capacity(n);
        let mut edge = 0;
        let mut edge_start = 0.0;
        for k in 0..n {
            let s = total * k as f64 / n as f64;
            loop {
                let len = norm(sub(corners[(edge + 1) % m], corners[edge]));
                if s <= edge_start + len || edge + 1 == m {
                    let a = corners[edge];
                    let b = corners[(edge + 1) % m];
                    let t = if len > 0.0 { ((s - edge_start) / len).clamp(0.0, 1.0) } else { 0.0 };
                    out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    break;
                }
                edge_start += len;
                edge += 1;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// `∂Ω_h = ∂Ω ∩ h·Z²`. Only meaningful for grid-aligned boxes.
    Exact,
    /// Lattice points on `∂Ω` plus intersections of lattice lines with `∂Ω`.
    #[default]
    Projected,
}

/// A boundary node: a point of `∂Ω`, with its lattice index when it is a lattice point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryNode {
    pub point: Point,
    pub index: Option<[i64; 2]>,
}

/// Axis neighbour of an interior node, possibly at a shortened distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arm {
    pub node: NodeId,
    pub len: f64,
}

/// Identifies an open lattice segment: `axis` 0 is the horizontal line
/// `y = line·h` between `x = start·h` and `(start+1)·h`, `axis` 1 the
/// vertical line `x = line·h` between `y = start·h` and `(start+1)·h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SegmentKey {
    pub axis: u8,
    pub line: i64,
    pub start: i64,
}

const NONE: u32 = u32::MAX;

/// Nodes of `Ω̄_h`. Node ids run over interior nodes first (row-major
/// lattice order), then boundary nodes (sorted by `y`, then `x`).
#[derive(Clone, Debug)]
pub struct Lattice {
    domain: ConvexDomain,
    h: f64,
    mode: BoundaryMode,
    interior: Vec<[i64; 2]>,
    boundary: Vec<BoundaryNode>,
    lo: [i64; 2],
    dims: [usize; 2],
    grid: Vec<u32>,
    arms: Vec<[Arm; 4]>,
    segments: HashMap<SegmentKey, NodeId>,
}

/// Builds the lattice of mesh length `h` on `domain`.
pub fn build_lattice(domain: &ConvexDomain, h: f64, mode: BoundaryMode) -> Result<Lattice> {
    Lattice::new(domain.clone(), h, mode)
}

impl Lattice {
    pub fn new(domain: ConvexDomain, h: f64, mode: BoundaryMode) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidMeshLength(h));
        }
        domain.validate()?;
        let tie = 1e-9 * h;
        let (bmin, bmax) = domain.bounding_box();
        let lo = [(bmin[0] / h).floor() as i64 - 1, (bmin[1] / h).floor() as i64 - 1];
        let hi = [(bmax[0] / h).ceil() as i64 + 1, (bmax[1] / h).ceil() as i64 + 1];
        let dims = [(hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize];

        let mut interior = Vec::new();
        let mut on_boundary = Vec::new();
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                let x = [i as f64 * h, j as f64 * h];
                let d = domain.inset(x);
                if d > tie {
                    interior.push([i, j]);
                } else if d >= -tie {
                    on_boundary.push([i, j]);
                }
            }
        }
        if interior.is_empty() {
            return Err(Error::EmptyInterior { h });
        }
        if mode == BoundaryMode::Exact && on_boundary.is_empty() {
            return Err(Error::NoBoundaryLatticePoints);
        }

        let mut lat = Lattice {
            domain,
            h,
            mode,
            interior,
            boundary: Vec::new(),
            lo,
            dims,
            grid: vec![NONE; dims[0] * dims[1]],
            arms: Vec::new(),
            segments: HashMap::new(),
        };
        for (id, m) in lat.interior.iter().enumerate() {
            let slot = lat.slot(*m).expect("interior inside grid");
            lat.grid[slot] = id as u32;
        }

        // Boundary candidates: lattice points on ∂Ω, then projected crossings.
        let mut bnodes: Vec<(BoundaryNode, Option<SegmentKey>)> = on_boundary
            .iter()
            .map(|m| (BoundaryNode { point: [m[0] as f64 * h, m[1] as f64 * h], index: Some(*m) }, None))
            .collect();
        let is_lattice_node = |lat: &Lattice, m: [i64; 2], on_b: &std::collections::HashSet<[i64; 2]>| {
            lat.slot(m).map(|s| lat.grid[s] != NONE).unwrap_or(false) || on_b.contains(&m)
        };
        let on_b: std::collections::HashSet<[i64; 2]> = on_boundary.iter().copied().collect();
        for m in &lat.interior {
            for dir in AXIS_DIRS {
                let nb = [m[0] + dir[0], m[1] + dir[1]];
                if is_lattice_node(&lat, nb, &on_b) {
                    continue;
                }
                if mode == BoundaryMode::Exact {
                    return Err(Error::MissingNeighbor { point: [m[0] as f64 * h, m[1] as f64 * h], dir });
                }
                let x = [m[0] as f64 * h, m[1] as f64 * h];
                let t = lat.domain.ray_exit(x, [dir[0] as f64, dir[1] as f64]).clamp(0.0, h);
                let key = segment_key(*m, dir);
                let p = [x[0] + t * dir[0] as f64, x[1] + t * dir[1] as f64];
                bnodes.push((BoundaryNode { point: p, index: None }, Some(key)));
            }
        }
        bnodes.sort_by(|a, b| {
            a.0.point[1]
                .total_cmp(&b.0.point[1])
                .then(a.0.point[0].total_cmp(&b.0.point[0]))
        });
        let ni = lat.interior.len();
        for (node, key) in bnodes {
            let id = ni + lat.boundary.len();
            match (node.index, key) {
                (Some(m), _) => {
                    let slot = lat.slot(m).expect("boundary inside grid");
                    lat.grid[slot] = id as u32;
                }
                (None, Some(k)) => {
                    lat.segments.insert(k, id);
                }
                (None, None) => unreachable!(),
            }
            lat.boundary.push(node);
        }

        lat.arms = lat
            .interior
            .iter()
            .map(|m| {
                let x = [m[0] as f64 * h, m[1] as f64 * h];
                AXIS_DIRS.map(|dir| {
                    let nb = [m[0] + dir[0], m[1] + dir[1]];
                    if let Some(node) = lat.node_at(nb) {
                        Arm { node, len: h }
                    } else {
                        let node = lat.segments[&segment_key(*m, dir)];
                        let p = lat.point(node);
                        Arm { node, len: norm(sub(p, x)) }
                    }
                })
            })
            .collect();
        Ok(lat)
    }

    fn slot(&self, m: [i64; 2]) -> Option<usize> {
        let i = m[0] - self.lo[0];
        let j = m[1] - self.lo[1];
        if i < 0 || j < 0 || i as usize >= self.dims[0] || j as usize >= self.dims[1] {
            None
        } else {
            Some(j as usize * self.dims[0] + i as usize)
        }
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn num_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary.len()
    }

    /// Total node count `|Ω_h| + |∂Ω_h|`.
    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_interior(&self, id: NodeId) -> bool {
        id < self.interior.len()
    }

    pub fn interior_ids(&self) -> std::ops::Range<NodeId> {
        0..self.interior.len()
    }

    pub fn boundary_ids(&self) -> std::ops::Range<NodeId> {
        self.interior.len()..self.len()
    }

    pub fn point(&self, id: NodeId) -> Point {
        let ni = self.interior.len();
        if id < ni {
            let m = self.interior[id];
            [m[0] as f64 * self.h, m[1] as f64 * self.h]
        } else {
            self.boundary[id - ni].point
        }
    }

    /// Lattice multi-index of a node, `None` for off-lattice boundary nodes.
    pub fn index(&self, id: NodeId) -> Option<[i64; 2]> {
        let ni = self.interior.len();
        if id < ni {
            Some(self.interior[id])
        } else {
            self.boundary[id - ni].index
        }
    }

    /// The node sitting at lattice index `m`, if any.
    pub fn node_at(&self, m: [i64; 2]) -> Option<NodeId> {
        self.slot(m).and_then(|s| {
            let v = self.grid[s];
            (v != NONE).then_some(v as usize)
        })
    }

    /// Axis arms of an interior node in [`AXIS_DIRS`] order.
    pub fn arms(&self, id: NodeId) -> &[Arm; 4] {
        &self.arms[id]
    }

    /// The projected boundary node on a lattice segment, if one exists.
    pub fn segment_node(&self, key: SegmentKey) -> Option<NodeId> {
        self.segments.get(&key).copied()
    }

    /// Points of `Ω̄_h` in node order.
    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|id| self.point(id)).collect()
    }

    /// `d(x, ∂Ω)` for a node.
    pub fn distance_to_boundary(&self, id: NodeId) -> f64 {
        if self.is_interior(id) {
            self.domain.distance_to_boundary(self.point(id)).unwrap_or(0.0)
        } else {
            0.0
        }
    }

    /// CSV dump with header `x,y,role`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,role\n");
        for id in 0..self.len() {
            let p = self.point(id);
            let role = if self.is_interior(id) { "interior" } else { "boundary" };
            let _ = writeln!(s, "{},{},{}", p[0], p[1], role);
        }
        s
    }
}

/// Segment between interior node `m` and its axis neighbour in direction `dir`.
pub fn segment_key(m: [i64; 2], dir: [i64; 2]) -> SegmentKey {
    match dir {
        [1, 0] => SegmentKey { axis: 0, line: m[1], start: m[0] },
        [-1, 0] => SegmentKey { axis: 0, line: m[1], start: m[0] - 1 },
        [0, 1] => SegmentKey { axis: 1, line: m[0], start: m[1] },
        [0, -1] => SegmentKey { axis: 1, line: m[0], start: m[1] - 1 },
        _ => panic!("segment_key: {dir:?} is not an axis direction"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn unit_disk() -> ConvexDomain {
        ConvexDomain::disk([0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn unit_box_half_step_exact() {
        let lat = build_lattice(&ConvexDomain::unit_box(), 0.5, BoundaryMode::Exact).unwrap();
        assert_eq!(lat.num_interior(), 1);
        assert_eq!(lat.point(0), [0.5, 0.5]);
        assert_eq!(lat.num_boundary(), 8);
        for id in lat.boundary_ids() {
            let p = lat.point(id);
            assert_eq!(ConvexDomain::unit_box().inset(p), 0.0);
            assert_eq!((p[0] * 2.0).fract(), 0.0);
            assert_eq!((p[1] * 2.0).fract(), 0.0);
        }
    }

    #[test]
    fn unit_box_quarter_step_counts() {
        // Enumerate the 5×5 grid by hand: 3×3 strictly inside, 16 on the sides.
        let mut inner = 0;
        let mut on = 0;
        for j in 0..=4 {
            for i in 0..=4 {
                if (1..=3).contains(&i) && (1..=3).contains(&j) {
                    inner += 1;
                } else {
                    on += 1;
                }
            }
        }
        for mode in [BoundaryMode::Exact, BoundaryMode::Projected] {
            let lat = build_lattice(&ConvexDomain::unit_box(), 0.25, mode).unwrap();
            assert_eq!(lat.num_interior(), inner);
            assert_eq!(lat.num_boundary(), on);
        }
    }

    #[test]
    fn disk_half_step_projected() {
        let lat = build_lattice(&unit_disk(), 0.5, BoundaryMode::Projected).unwrap();
        let expect: HashSet<[i64; 2]> = (-1..=1).flat_map(|i| (-1..=1).map(move |j| [i, j])).collect();
        let got: HashSet<[i64; 2]> = lat.interior_ids().map(|id| lat.index(id).unwrap()).collect();
        assert_eq!(got, expect);

        // Four lattice points on the circle, plus two crossings for each of the
        // diagonal nodes (±0.5, ±0.5): x = √(1 - 0.25) on the line y = ±0.5, etc.
        let s = (0.75f64).sqrt();
        let mut expected: Vec<Point> = vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                expected.push([sx * s, sy * 0.5]);
                expected.push([sx * 0.5, sy * s]);
            }
        }
        assert_eq!(lat.num_boundary(), expected.len());
        for e in expected {
            let found = lat.boundary_ids().any(|id| norm(sub(lat.point(id), e)) < 1e-14);
            assert!(found, "missing boundary node {e:?}");
        }
    }

    #[test]
    fn distance_examples() {
        let b = ConvexDomain::unit_box();
        assert_eq!(b.distance_to_boundary([0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(b.distance_to_boundary([0.25, 0.5]).unwrap(), 0.25);
        assert!((unit_disk().distance_to_boundary([0.6, 0.0]).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(b.distance_to_boundary([1.5, 0.5]), Err(Error::OutsideDomain(_))));
        assert_eq!(b.distance_to_boundary([1.0, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn polygon_distance_uses_segments() {
        let tri = ConvexDomain::polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).unwrap();
        let d = tri.distance_to_boundary([0.5, 0.25]).unwrap();
        // Hypotenuse x + 2y = 2: distance (2 - 0.5 - 0.5)/√5.
        let expect = (0.25f64).min(0.5).min(1.0 / 5f64.sqrt());
        assert!((d - expect).abs() < 1e-15);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(ConvexDomain::unit_box().diameter(), 2f64.sqrt());
        assert_eq!(unit_disk().diameter(), 2.0);
        let tri = ConvexDomain::polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(tri.diameter(), 5f64.sqrt());
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(ConvexDomain::new_box([0.0, 0.0], [0.0, 1.0]).is_err());
        assert!(ConvexDomain::disk([0.0, 0.0], -1.0).is_err());
        // clockwise
        assert!(ConvexDomain::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        // non-convex
        assert!(ConvexDomain::polygon(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, 2.0]]).is_err());
        // collinear boundary run is fine
        assert!(ConvexDomain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).is_ok());
    }

    #[test]
    fn lattice_errors() {
        let b = ConvexDomain::unit_box();
        assert!(matches!(build_lattice(&b, 2.0, BoundaryMode::Projected), Err(Error::EmptyInterior { .. })));
        assert!(matches!(build_lattice(&b, -1.0, BoundaryMode::Projected), Err(Error::InvalidMeshLength(_))));
        let shifted = ConvexDomain::new_box([0.05, 0.05], [0.95, 0.95]).unwrap();
        assert!(matches!(
            build_lattice(&shifted, 0.2, BoundaryMode::Exact),
            Err(Error::NoBoundaryLatticePoints)
        ));
    }

    #[test]
    fn boundary_samples_on_boundary() {
        for d in [ConvexDomain::unit_box(), unit_disk()] {
            for p in d.boundary_samples(64) {
                assert!(d.inset(p).abs() < 1e-12);
            }
        }
        let s = ConvexDomain::unit_box().boundary_samples(64);
        assert_eq!(s[0], [0.0, 0.0]);
        assert_eq!(s[16], [1.0, 0.0]);
    }
}
