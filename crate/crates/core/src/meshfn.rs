//! Mesh functions and the directional difference operators built on them.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::{Lattice, NodeId, AXIS_DIRS};
use crate::{Error, Point, Result};

/// Default convexity tolerance, relative to `max(1, ‖v‖∞)/h²`.
pub const TOL_CONVEX: f64 = 1e-10;

/// Real values on `Ω̄_h`, indexed by node id (interior first, then boundary).
#[derive(Clone, Debug)]
pub struct MeshFunction {
    lattice: Arc<Lattice>,
    values: Vec<f64>,
}

impl MeshFunction {
    pub fn new(lattice: Arc<Lattice>, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::SizeMismatch { expected: lattice.len(), got: values.len() });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(MeshFunction { lattice, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(lattice: &Arc<Lattice>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..lattice.len()).map(|id| f(lattice.point(id))).collect();
        Self::new(lattice.clone(), values)
    }

    pub fn zeros(lattice: &Arc<Lattice>) -> Self {
        MeshFunction { lattice: lattice.clone(), values: vec![0.0; lattice.len()] }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn value(&self, id: NodeId) -> f64 {
        self.values[id]
    }

    pub fn same_lattice(&self, other: &MeshFunction) -> bool {
        Arc::ptr_eq(&self.lattice, &other.lattice)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max v - min v`.
    pub fn oscillation(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &MeshFunction) -> Result<MeshFunction> {
        if !self.same_lattice(other) {
            return Err(Error::LatticeMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(MeshFunction { lattice: self.lattice.clone(), values })
    }

    /// CSV dump with header `x,y,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,value\n");
        for (id, v) in self.values.iter().enumerate() {
            let p = self.lattice.point(id);
            let _ = writeln!(s, "{},{},{}", p[0], p[1], v);
        }
        s
    }

    /// Reads `x,y,value` rows back onto `lattice`. Every node must appear
    /// exactly once; rows are matched by coordinates to within `1e-9·h`.
    pub fn from_csv(lattice: &Arc<Lattice>, text: &str) -> Result<Self> {
        let h = lattice.h();
        let mut lookup: std::collections::HashMap<(i64, i64), NodeId> = std::collections::HashMap::new();
        let key = |p: Point| ((p[0] / (1e-9 * h)).round() as i64, (p[1] / (1e-9 * h)).round() as i64);
        for id in 0..lattice.len() {
            lookup.insert(key(lattice.point(id)), id);
        }
        let mut values = vec![f64::NAN; lattice.len()];
        let mut seen = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Csv { line: lineno + 1, msg: "expected 3 fields x,y,value".into() });
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::Csv { line: lineno + 1, msg: e.to_string() })
            };
            let p = [parse(fields[0])?, parse(fields[1])?];
            let v = parse(fields[2])?;
            let id = *lookup.get(&key(p)).ok_or_else(|| Error::Csv {
                line: lineno + 1,
                msg: format!("({}, {}) is not a lattice node", p[0], p[1]),
            })?;
            if values[id].is_nan() {
                seen += 1;
            }
            values[id] = v;
        }
        if seen != lattice.len() {
            return Err(Error::SizeMismatch { expected: lattice.len(), got: seen });
        }
        Self::new(lattice.clone(), values)
    }
}

/// How a direction is realised when `x ± h·e` leaves the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepPolicy {
    /// Both endpoints must be lattice nodes, otherwise the direction is unavailable.
    Exact,
    /// Axis directions use the projected boundary node with an unequal-arm
    /// three-point formula; other directions behave as [`StepPolicy::Exact`].
    #[default]
    Clipped,
}

/// A three-point second difference `wp·(v₊ − v₀) + wm·(v₋ − v₀)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diff {
    pub plus: NodeId,
    pub minus: NodeId,
    pub wp: f64,
    pub wm: f64,
}

impl Diff {
    #[inline]
    pub fn eval(&self, values: &[f64], center: f64) -> f64 {
        self.wp * (values[self.plus] - center) + self.wm * (values[self.minus] - center)
    }

    /// Weight on the centre value; the difference is `off(values) − center_weight·v₀`.
    #[inline]
    pub fn center_weight(&self) -> f64 {
        self.wp + self.wm
    }

    /// The neighbour part `wp·v₊ + wm·v₋`.
    #[inline]
    pub fn off(&self, values: &[f64]) -> f64 {
        self.wp * values[self.plus] + self.wm * values[self.minus]
    }
}

/// Realises direction `e` at interior node `x`, or `None` when unavailable.
pub fn direction_diff(lat: &Lattice, x: NodeId, e: [i64; 2], policy: StepPolicy) -> Option<Diff> {
    debug_assert!(lat.is_interior(x));
    let h = lat.h();
    let axis = match e {
        [1, 0] | [-1, 0] => Some(0),
        [0, 1] | [0, -1] => Some(2),
        _ => None,
    };
    if let (Some(k), StepPolicy::Clipped) = (axis, policy) {
        let arms = lat.arms(x);
        let (mut p, mut m) = (arms[k], arms[k + 1]);
        if e[0] < 0 || e[1] < 0 {
            std::mem::swap(&mut p, &mut m);
        }
        let (a, b) = (p.len, m.len);
        return Some(Diff { plus: p.node, minus: m.node, wp: 2.0 / (a * (a + b)), wm: 2.0 / (b * (a + b)) });
    }
    let m = lat.index(x)?;
    let plus = lat.node_at([m[0] + e[0], m[1] + e[1]])?;
    let minus = lat.node_at([m[0] - e[0], m[1] - e[1]])?;
    let w = 1.0 / (h * h * (e[0] * e[0] + e[1] * e[1]) as f64);
    Some(Diff { plus, minus, wp: w, wm: w })
}

/// `Δ_e v(x) = (v(x+he) − 2v(x) + v(x−he)) / (h²‖e‖²)`; `None` when `x ± he ∉ Ω̄_h`.
pub fn second_difference(v: &MeshFunction, x: NodeId, e: [i64; 2], policy: StepPolicy) -> Option<f64> {
    if e == [0, 0] {
        return None;
    }
    direction_diff(v.lattice(), x, e, policy).map(|d| d.eval(v.values(), v.value(x)))
}

/// Integer directions of max-norm at most `width`, one representative per
/// antipodal pair, all coprime, together with their orthogonal pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionStencil {
    width: u32,
    directions: Vec<[i64; 2]>,
    pairs: Vec<[usize; 2]>,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Antipodal representative: first non-zero component positive.
pub fn canonical(e: [i64; 2]) -> [i64; 2] {
    if e[0] < 0 || (e[0] == 0 && e[1] < 0) {
        [-e[0], -e[1]]
    } else {
        e
    }
}

impl DirectionStencil {
    pub fn new(width: u32) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidStencil("width must be at least 1".into()));
        }
        let w = width as i64;
        let mut directions = Vec::new();
        for a in 0..=w {
            for b in -w..=w {
                let e = [a, b];
                if e == [0, 0] || canonical(e) != e || gcd(a, b) != 1 {
                    continue;
                }
                directions.push(e);
            }
        }
        // Axes first, then by length, then by angle.
        directions.sort_by(|p, q| {
            let lp = p[0] * p[0] + p[1] * p[1];
            let lq = q[0] * q[0] + q[1] * q[1];
            lp.cmp(&lq).then((p[1] as f64).atan2(p[0] as f64).total_cmp(&(q[1] as f64).atan2(q[0] as f64)))
        });
        let pos = |e: [i64; 2]| directions.iter().position(|d| *d == canonical(e));
        let mut pairs = Vec::new();
        for (i, e) in directions.iter().enumerate() {
            let j = pos([-e[1], e[0]]).expect("orthogonal direction has the same max-norm");
            if i < j {
                pairs.push([i, j]);
            }
        }
        Ok(DirectionStencil { width, directions, pairs })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn directions(&self) -> &[[i64; 2]] {
        &self.directions
    }

    /// Orthogonal pairs `(e, e⊥)` as indices into [`Self::directions`].
    pub fn pairs(&self) -> &[[usize; 2]] {
        &self.pairs
    }

    pub fn contains(&self, e: [i64; 2]) -> bool {
        self.directions.contains(&canonical(e))
    }
}

impl Default for DirectionStencil {
    fn default() -> Self {
        DirectionStencil::new(2).unwrap()
    }
}

/// `λ_{1,h}[v](x)`: the smallest second difference over the stencil
/// directions available at `x`, with clipped axis steps.
pub fn lambda1_h(v: &MeshFunction, x: NodeId, stencil: &DirectionStencil) -> Result<f64> {
    lambda1_h_with(v, x, stencil, StepPolicy::Clipped).map(|(val, _)| val)
}

/// As [`lambda1_h`], also returning the minimising direction.
pub fn lambda1_h_with(
    v: &MeshFunction,
    x: NodeId,
    stencil: &DirectionStencil,
    policy: StepPolicy,
) -> Result<(f64, [i64; 2])> {
    let mut best: Option<(f64, [i64; 2])> = None;
    for &e in stencil.directions() {
        if let Some(d) = second_difference(v, x, e, policy) {
            if best.map_or(true, |(b, _)| d < b) {
                best = Some((d, e));
            }
        }
    }
    best.ok_or(Error::NoDirection { node: x })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityWitness {
    pub node: NodeId,
    pub point: Point,
    pub direction: [i64; 2],
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Smallest `λ_{1,h}` over all interior nodes.
    pub min_lambda: f64,
    /// Absolute tolerance actually applied.
    pub tolerance: f64,
    /// The node attaining `min_lambda` when the check fails.
    pub witness: Option<ConvexityWitness>,
}

/// Absolute tolerance for `Δ_e v ≥ −tol` given a relative tolerance.
pub fn convexity_tolerance(v: &MeshFunction, rel: f64) -> f64 {
    let h = v.lattice().h();
    rel * v.sup_norm().max(1.0) / (h * h)
}

/// Discrete convexity: `λ_{1,h}[v] ≥ −tol` at every interior node, with the
/// default tolerance [`TOL_CONVEX`].
pub fn is_discrete_convex(v: &MeshFunction, stencil: &DirectionStencil) -> Result<ConvexityReport> {
    is_discrete_convex_tol(v, stencil, convexity_tolerance(v, TOL_CONVEX))
}

pub fn is_discrete_convex_tol(v: &MeshFunction, stencil: &DirectionStencil, tol: f64) -> Result<ConvexityReport> {
    let lat = v.lattice();
    let mut worst: Option<ConvexityWitness> = None;
    for x in lat.interior_ids() {
        let (val, dir) = lambda1_h_with(v, x, stencil, StepPolicy::Clipped)?;
        if worst.as_ref().map_or(true, |w| val < w.value) {
            worst = Some(ConvexityWitness { node: x, point: lat.point(x), direction: dir, value: val });
        }
    }
    let worst = worst.expect("lattice has interior nodes");
    let convex = worst.value >= -tol;
    Ok(ConvexityReport {
        convex,
        min_lambda: worst.value,
        tolerance: tol,
        witness: (!convex).then_some(worst),
    })
}

/// `Δ_h v(x) = Σ_i Δ_{e_i} v(x)` with clipped arms next to projected boundary nodes.
pub fn discrete_laplacian(v: &MeshFunction, x: NodeId) -> f64 {
    [AXIS_DIRS[0], AXIS_DIRS[2]]
        .iter()
        .map(|&e| second_difference(v, x, e, StepPolicy::Clipped).expect("axis arms always exist"))
        .sum()
}
