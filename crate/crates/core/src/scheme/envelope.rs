//! The convex envelope `U(x) = sup { L(x) : L affine, L ≤ g on ∂Ω }` of
//! boundary data, computed from finitely many boundary samples.
//!
//! The LP `max a·x + b s.t. a·ζ_i + b ≤ g_i` has the dual
//! `min Σ λ_i g_i s.t. Σ λ_i ζ_i = x, Σ λ_i = 1, λ ≥ 0`, whose basic
//! solutions are barycentric weights of at most three samples. Small sample
//! sets are handled by enumerating those triples; larger ones by a dense
//! two-phase simplex on the dual.

use serde::{Deserialize, Serialize};

use crate::domain::ConvexDomain;
use crate::geom::{barycentric, orient};
use crate::{Error, Point, Result};

/// Largest sample count for which triples are enumerated under [`EnvelopeMethod::Auto`].
pub const TRIPLE_LIMIT: usize = 200;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMethod {
    #[default]
    Auto,
    Triples,
    Simplex,
}

/// An affine minorant `a·x + b` of the data attaining the envelope at some point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Minorant {
    pub value: f64,
    pub a: [f64; 2],
    pub b: f64,
}

impl Minorant {
    pub fn eval(&self, p: Point) -> f64 {
        self.a[0] * p[0] + self.a[1] * p[1] + self.b
    }
}

/// `n` arc-length equispaced samples of `∂Ω` together with the vertices of
/// polygonal domains, so that the samples span `Ω̄`.
pub fn envelope_samples(domain: &ConvexDomain, n: usize) -> Vec<Point> {
    let mut pts = domain.boundary_samples(n);
    let corners: Vec<Point> = match domain {
        ConvexDomain::Box { min, max } => vec![*min, [max[0], min[1]], *max, [min[0], max[1]]],
        ConvexDomain::Polygon { vertices } => vertices.clone(),
        ConvexDomain::Disk { .. } => Vec::new(),
    };
    let scale = domain.diameter();
    for c in corners {
        if !pts.iter().any(|p| (p[0] - c[0]).abs() <= 1e-12 * scale && (p[1] - c[1]).abs() <= 1e-12 * scale) {
            pts.push(c);
        }
    }
    pts
}

#[derive(Clone, Debug)]
pub struct ConvexEnvelope {
    samples: Vec<Point>,
    values: Vec<f64>,
    method: EnvelopeMethod,
}

impl ConvexEnvelope {
    pub fn new(samples: Vec<Point>, values: Vec<f64>, method: EnvelopeMethod) -> Result<Self> {
        if samples.len() != values.len() {
            return Err(Error::SizeMismatch { expected: samples.len(), got: values.len() });
        }
        if samples.len() < 3 {
            return Err(Error::Config("convex envelope needs at least 3 boundary samples".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: k });
        }
        Ok(ConvexEnvelope { samples, values, method })
    }

    /// Samples `g` at [`envelope_samples`] of `domain`.
    pub fn from_boundary(domain: &ConvexDomain, g: impl Fn(Point) -> f64, n: usize, method: EnvelopeMethod) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("boundary_samples must be at least 3, got {n}")));
        }
        let samples = envelope_samples(domain, n);
        let values = samples.iter().map(|&p| g(p)).collect();
        Self::new(samples, values, method)
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: Point) -> Result<f64> {
        let use_triples = match self.method {
            EnvelopeMethod::Triples => true,
            EnvelopeMethod::Simplex => false,
            EnvelopeMethod::Auto => self.samples.len() <= TRIPLE_LIMIT,
        };
        if use_triples {
            self.eval_triples(x)
        } else {
            self.minorant(x).map(|m| m.value)
        }
    }

    /// Minimum over sample triangles, segments and points containing `x` of
    /// the linear interpolant of the data.
    pub fn eval_triples(&self, x: Point) -> Result<f64> {
        let (s, g) = (&self.samples, &self.values);
        let n = s.len();
        let scale = self.scale();
        let tol = 1e-12;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if (s[i][0] - x[0]).abs() <= tol * scale && (s[i][1] - x[1]).abs() <= tol * scale {
                best = best.min(g[i]);
            }
            for j in i + 1..n {
                if let Some(t) = on_segment(x, s[i], s[j], tol * scale) {
                    best = best.min((1.0 - t) * g[i] + t * g[j]);
                }
                for k in j + 1..n {
                    let Some(l) = barycentric(x, s[i], s[j], s[k]) else { continue };
                    // near-collinear triples give meaningless coordinates; keep only
                    // those that rebuild x
                    let r = [
                        l[0] * s[i][0] + l[1] * s[j][0] + l[2] * s[k][0],
                        l[0] * s[i][1] + l[1] * s[j][1] + l[2] * s[k][1],
                    ];
                    let rebuilt = (r[0] - x[0]).abs() <= 1e-9 * scale && (r[1] - x[1]).abs() <= 1e-9 * scale;
                    if rebuilt && l.iter().all(|&c| c >= -tol) {
                        best = best.min(l[0] * g[i] + l[1] * g[j] + l[2] * g[k]);
                    }
                }
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::UnboundedLp(x))
        }
    }

    fn scale(&self) -> f64 {
        self.samples.iter().fold(1.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
    }

    /// Optimal `(a, b)` of the LP at `x` by the dual simplex method.
    pub fn minorant(&self, x: Point) -> Result<Minorant> {
        let (y, value) = dual_simplex(&self.samples, &self.values, x)?;
        Ok(Minorant { value, a: [y[0], y[1]], b: y[2] })
    }
}

/// Envelope value at `x` from `boundary_samples` samples of `g` on `∂Ω`.
pub fn convex_envelope(domain: &ConvexDomain, g: impl Fn(Point) -> f64, boundary_samples: usize, x: Point) -> Result<f64> {
    if !domain.contains(x) && domain.inset(x) < -1e-12 * domain.diameter() {
        return Err(Error::OutsideDomain(x));
    }
    ConvexEnvelope::from_boundary(domain, g, boundary_samples, EnvelopeMethod::Auto)?.eval(x)
}

fn on_segment(x: Point, a: Point, b: Point, tol: f64) -> Option<f64> {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 || orient(a, b, x).abs() > tol * len2.sqrt() {
        return None;
    }
    let t = ((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / len2;
    (-1e-12..=1.0 + 1e-12).contains(&t).then_some(t.clamp(0.0, 1.0))
}

/// Two-phase tableau simplex with Bland's rule on
/// `min gᵀλ s.t. [ζ; 1]λ = [x; 1], λ ≥ 0`. Returns the equality
/// multipliers `(a₁, a₂, b)` and the optimal value.
fn dual_simplex(samples: &[Point], g: &[f64], x: Point) -> Result<([f64; 3], f64)> {
    const M: usize = 3;
    let n = samples.len();
    let cols = n + M;
    let scale = samples.iter().fold(1.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let eps = 1e-11;

    let mut rhs = [x[0], x[1], 1.0];
    let mut sign = [1.0; M];
    let mut t = vec![vec![0.0; cols]; M];
    for (j, p) in samples.iter().enumerate() {
        t[0][j] = p[0];
        t[1][j] = p[1];
        t[2][j] = 1.0;
    }
    for r in 0..M {
        if rhs[r] < 0.0 {
            sign[r] = -1.0;
            rhs[r] = -rhs[r];
            for v in t[r].iter_mut().take(n) {
                *v = -*v;
            }
        }
        t[r][n + r] = 1.0;
    }
    let mut basis: [usize; M] = [n, n + 1, n + 2];

    let pivot = |t: &mut Vec<Vec<f64>>, rhs: &mut [f64; M], r: usize, c: usize| {
        let p = t[r][c];
        for v in t[r].iter_mut() {
            *v /= p;
        }
        rhs[r] /= p;
        for i in 0..M {
            if i != r {
                let factor = t[i][c];
                if factor != 0.0 {
                    for k in 0..cols {
                        t[i][k] -= factor * t[r][k];
                    }
                    rhs[i] -= factor * rhs[r];
                }
            }
        }
    };

    let run = |t: &mut Vec<Vec<f64>>, rhs: &mut [f64; M], basis: &mut [usize; M], cost: &dyn Fn(usize) -> f64, allowed: usize| -> Result<()> {
        for _ in 0..10 * (n + M) + 100 {
            // Reduced costs r_j = c_j − c_Bᵀ B⁻¹ A_j; Bland: first negative.
            let entering = (0..allowed).find(|&j| {
                if basis.contains(&j) {
                    return false;
                }
                let rc = cost(j) - (0..M).map(|i| cost(basis[i]) * t[i][j]).sum::<f64>();
                rc < -eps * (1.0 + cost(j).abs())
            });
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..M {
                if t[i][c] > eps {
                    let ratio = rhs[i] / t[i][c];
                    match leave {
                        Some((li, lr)) if ratio > lr + 1e-15 || (ratio >= lr - 1e-15 && basis[i] > basis[li]) => {}
                        _ => leave = Some((i, ratio)),
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Internal("dual simplex: unbounded direction".into()));
            };
            pivot(t, rhs, r, c);
            basis[r] = c;
        }
        Err(Error::Internal("dual simplex: iteration limit".into()))
    };

    // Phase 1: minimise the artificial variables.
    let phase1 = |j: usize| if j >= n { 1.0 } else { 0.0 };
    run(&mut t, &mut rhs, &mut basis, &phase1, cols)?;
    let infeas: f64 = (0..M).filter(|&i| basis[i] >= n).map(|i| rhs[i]).sum();
    if infeas > 1e-9 * scale {
        return Err(Error::UnboundedLp(x));
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..M {
        if basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| !basis.contains(&j) && t[r][j].abs() > eps) {
                pivot(&mut t, &mut rhs, r, c);
                basis[r] = c;
            }
        }
    }
    // Phase 2 over the sample columns only.
    let phase2 = |j: usize| if j < n { g[j] } else { 0.0 };
    run(&mut t, &mut rhs, &mut basis, &phase2, n)?;

    let value: f64 = (0..M).map(|i| phase2(basis[i]) * rhs[i]).sum();
    // Multipliers: artificial column k has reduced cost −y_k·sign_k.
    let mut y = [0.0; M];
    for k in 0..M {
        let col = n + k;
        let rc = -(0..M).map(|i| phase2(basis[i]) * t[i][col]).sum::<f64>();
        y[k] = -rc * sign[k];
    }
    Ok((y, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(p: Point) -> f64 {
        0.5 * (p[0] * p[0] + p[1] * p[1])
    }

    #[test]
    fn affine_data_is_reproduced() {
        let d = ConvexDomain::unit_box();
        let g = |p: Point| 2.0 * p[0] - p[1] + 0.5;
        for x in [[0.5, 0.5], [0.1, 0.9], [0.0, 0.3]] {
            let u = convex_envelope(&d, g, 32, x).unwrap();
            assert!((u - g(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn methods_agree_and_minorant_is_feasible() {
        let d = ConvexDomain::disk([0.2, -0.1], 1.3).unwrap();
        let g = |p: Point| (p[0] - 0.3).abs() + p[1] * p[1] + (2.0 * p[0]).sin();
        let tri = ConvexEnvelope::from_boundary(&d, g, 40, EnvelopeMethod::Triples).unwrap();
        let lp = ConvexEnvelope::from_boundary(&d, g, 40, EnvelopeMethod::Simplex).unwrap();
        for x in [[0.2, -0.1], [0.9, 0.4], [-0.8, -0.5], [0.2, 1.0]] {
            let a = tri.eval(x).unwrap();
            let m = lp.minorant(x).unwrap();
            assert!((a - m.value).abs() < 1e-9, "{a} vs {}", m.value);
            assert!((m.eval(x) - m.value).abs() < 1e-9);
            for (p, v) in lp.samples().iter().zip(lp.values()) {
                assert!(m.eval(*p) <= v + 1e-9);
            }
        }
    }

    #[test]
    fn quadratic_center_value() {
        // At the centre of [0,1]², ‖x‖²/2 on the boundary is minorised by
        // L = x/2 + y/2 − 1/8 (tight at the side midpoints), and the centre is
        // the midpoint of (0, 1/2) and (1, 1/2), where g averages to 3/8.
        let d = ConvexDomain::unit_box();
        let x = [0.5, 0.5];
        let u = convex_envelope(&d, sq, 64, x).unwrap();
        assert!((u - 0.375).abs() < 1e-12, "{u}");
        // The envelope dominates the convex extension ‖x‖²/2 of the data.
        assert!(u >= sq(x));
    }

    #[test]
    fn outside_hull_is_unbounded() {
        let samples = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let env = ConvexEnvelope::new(samples, vec![0.0, 1.0, 2.0], EnvelopeMethod::Simplex).unwrap();
        assert!(matches!(env.minorant([1.0, 1.0]), Err(Error::UnboundedLp(_))));
        let env = ConvexEnvelope::new(env.samples().to_vec(), vec![0.0, 1.0, 2.0], EnvelopeMethod::Triples).unwrap();
        assert!(matches!(env.eval([1.0, 1.0]), Err(Error::UnboundedLp(_))));
    }
}
