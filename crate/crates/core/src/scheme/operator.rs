//! The wide-stencil operator
//!
//! `MA_h[u](x) = min over orthogonal pairs (e, e⊥) of
//!     max(Δ_e u, 0)·max(Δ_{e⊥} u, 0) + min(Δ_e u, 0) + min(Δ_{e⊥} u, 0)`,
//!
//! with axis steps clipped at projected boundary nodes. A stencil direction
//! whose orthogonal partner does not fit in the lattice at `x` still enters
//! through the convexity term `Δ_e u` (active only when negative).

use crate::domain::{Lattice, NodeId};
use crate::meshfn::{direction_diff, Diff, DirectionStencil, MeshFunction, StepPolicy};
use crate::{Error, Result};

#[inline]
pub fn pair_term(a: f64, b: f64) -> f64 {
    a.max(0.0) * b.max(0.0) + a.min(0.0) + b.min(0.0)
}

#[inline]
pub fn lone_term(a: f64) -> f64 {
    if a < 0.0 {
        a
    } else {
        f64::INFINITY
    }
}

/// `MA_h[u](x)` evaluated directly from the stencil.
pub fn ma_operator(u: &MeshFunction, x: NodeId, stencil: &DirectionStencil) -> Result<f64> {
    let lat = u.lattice();
    if !lat.is_interior(x) {
        return Err(Error::Precondition { node: x, point: lat.point(x), what: "MA_h is defined at interior nodes".into() });
    }
    let plan = OperatorPlan::new(lat, stencil)?;
    Ok(plan.ma(x, u.values()))
}

/// Per-node second-difference stencils and the pair/lone structure of `MA_h`.
#[derive(Clone, Debug)]
pub struct OperatorPlan {
    diffs: Vec<Diff>,
    dstart: Vec<u32>,
    pairs: Vec<[u32; 2]>,
    pstart: Vec<u32>,
    lones: Vec<u32>,
    lstart: Vec<u32>,
}

impl OperatorPlan {
    pub fn new(lat: &Lattice, stencil: &DirectionStencil) -> Result<Self> {
        let mut plan = OperatorPlan {
            diffs: Vec::new(),
            dstart: vec![0],
            pairs: Vec::new(),
            pstart: vec![0],
            lones: Vec::new(),
            lstart: vec![0],
        };
        let dirs = stencil.directions();
        let mut local: Vec<Option<u32>> = vec![None; dirs.len()];
        for x in lat.interior_ids() {
            for (k, &e) in dirs.iter().enumerate() {
                local[k] = direction_diff(lat, x, e, StepPolicy::Clipped).map(|d| {
                    plan.diffs.push(d);
                    (plan.diffs.len() - 1) as u32
                });
            }
            let mut paired = vec![false; dirs.len()];
            for &[i, j] in stencil.pairs() {
                if let (Some(a), Some(b)) = (local[i], local[j]) {
                    plan.pairs.push([a, b]);
                    paired[i] = true;
                    paired[j] = true;
                }
            }
            if plan.pairs.len() as u32 == *plan.pstart.last().unwrap() {
                return Err(Error::NoDirection { node: x });
            }
            for (k, slot) in local.iter().enumerate() {
                if let (Some(d), false) = (slot, paired[k]) {
                    plan.lones.push(*d);
                }
            }
            plan.dstart.push(plan.diffs.len() as u32);
            plan.pstart.push(plan.pairs.len() as u32);
            plan.lstart.push(plan.lones.len() as u32);
        }
        Ok(plan)
    }

    pub fn num_nodes(&self) -> usize {
        self.dstart.len() - 1
    }

    #[inline]
    fn range(v: &[u32], x: usize) -> std::ops::Range<usize> {
        v[x] as usize..v[x + 1] as usize
    }

    /// Pairs of diff indices at node `x`.
    pub fn pairs(&self, x: NodeId) -> &[[u32; 2]] {
        &self.pairs[Self::range(&self.pstart, x)]
    }

    pub fn lones(&self, x: NodeId) -> &[u32] {
        &self.lones[Self::range(&self.lstart, x)]
    }

    pub fn diffs(&self, x: NodeId) -> &[Diff] {
        &self.diffs[Self::range(&self.dstart, x)]
    }

    #[inline]
    fn diff(&self, k: u32) -> &Diff {
        &self.diffs[k as usize]
    }

    /// Every node id any difference at `x` reads.
    pub fn neighbours(&self, x: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.diffs(x).iter().flat_map(|d| [d.plus, d.minus])
    }

    /// `MA_h[u](x)` with centre value `u[x]`.
    pub fn ma(&self, x: NodeId, u: &[f64]) -> f64 {
        self.ma_at(x, u, u[x])
    }

    /// `MA_h` at `x` with the centre value replaced by `u0`.
    pub fn ma_at(&self, x: NodeId, u: &[f64], u0: f64) -> f64 {
        let mut m = f64::INFINITY;
        for &[a, b] in self.pairs(x) {
            m = m.min(pair_term(self.diff(a).eval(u, u0), self.diff(b).eval(u, u0)));
        }
        for &a in self.lones(x) {
            m = m.min(lone_term(self.diff(a).eval(u, u0)));
        }
        m
    }

    /// Upper bound on `|∂MA_h/∂u(x)|` near the current state.
    pub fn center_slope(&self, x: NodeId, u: &[f64]) -> f64 {
        let u0 = u[x];
        let mut s = 0.0f64;
        for &[a, b] in self.pairs(x) {
            let (da, db) = (self.diff(a), self.diff(b));
            let (ea, eb) = (da.eval(u, u0), db.eval(u, u0));
            let (ba, bb) = (da.center_weight(), db.center_weight());
            let mut t = ba * eb.max(0.0) + bb * ea.max(0.0);
            if ea <= 0.0 {
                t += ba;
            }
            if eb <= 0.0 {
                t += bb;
            }
            s = s.max(t);
        }
        for &a in self.lones(x) {
            s = s.max(self.diff(a).center_weight());
        }
        s
    }

    /// The increment `t` such that `u(x) + t` is the largest centre value
    /// with `MA_h ≥ f` (neighbours frozen). Requires `f ≥ 0`.
    pub fn local_root(&self, x: NodeId, u: &[f64], f: f64) -> f64 {
        let u0 = u[x];
        let mut t = f64::INFINITY;
        for &[a, b] in self.pairs(x) {
            let (da, db) = (self.diff(a), self.diff(b));
            t = t.min(pair_root(da.eval(u, u0), da.center_weight(), db.eval(u, u0), db.center_weight(), f));
        }
        for &a in self.lones(x) {
            let d = self.diff(a);
            t = t.min(d.eval(u, u0) / d.center_weight());
        }
        t
    }

    /// Increment `t_lo ≤ root` at which every difference is at least `√f`, so `MA_h ≥ f`.
    pub fn lower_bracket(&self, x: NodeId, u: &[f64], f: f64) -> f64 {
        let u0 = u[x];
        let s = f.sqrt();
        self.diffs(x).iter().map(|d| (d.eval(u, u0) - s) / d.center_weight()).fold(f64::INFINITY, f64::min)
    }
}

/// Smallest `t` solving `(d1 − β1 t)(d2 − β2 t) = f` on the branch where both
/// factors are non-negative; for `f = 0` this is `min(d1/β1, d2/β2)`.
#[inline]
pub fn pair_root(d1: f64, b1: f64, d2: f64, b2: f64, f: f64) -> f64 {
    let a = b1 * b2;
    let b = d1 * b2 + d2 * b1;
    let c = d1 * d2 - f;
    let skew = d1 * b2 - d2 * b1;
    let disc = (skew * skew + 4.0 * a * f).sqrt();
    if b > 0.0 {
        2.0 * c / (b + disc)
    } else {
        (b - disc) / (2.0 * a)
    }
}
