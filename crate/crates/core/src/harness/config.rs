//! Run configuration, read from TOML with dotted keys.
//!
//! ```toml
//! name = "exp"
//! seed = 7
//! h = [0.125, 0.0625, 0.03125]
//! output = "out/exp"
//!
//! domain.kind = "box"            # box | polygon | disk
//! domain.box = [[0.0, 0.0], [1.0, 1.0]]
//! # domain.vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
//! # domain.center = [0.0, 0.0]
//! # domain.radius = 1.0
//!
//! problem.builtin = "exp"        # quadratic | exp | affine, or:
//! # problem.f = "1"
//! # problem.g = "(x^2 + y^2)/2"
//! # problem.exact = "(x^2 + y^2)/2"
//!
//! compact.delta = 0.2            # K = {d(x, ∂Ω) ≥ delta}; or compact.box = [[..], [..]]
//! scheme.stencil_width = 2
//! study.abp_c = 5.0
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::domain::{build_lattice, BoundaryMode, ConvexDomain};
use crate::interp::CompactSet;
use crate::scheme::{MAProblem, SchemeConfig};
use crate::{Error, Point, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    #[serde(default)]
    seed: u64,
    h: Vec<f64>,
    output: Option<PathBuf>,
    domain: RawDomain,
    problem: RawProblem,
    #[serde(default)]
    compact: RawCompact,
    #[serde(default)]
    scheme: SchemeConfig,
    #[serde(default)]
    study: StudyOptions,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    kind: String,
    #[serde(rename = "box")]
    bbox: Option<[Point; 2]>,
    vertices: Option<Vec<Point>>,
    center: Option<Point>,
    radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    builtin: Option<String>,
    f: Option<String>,
    g: Option<String>,
    exact: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompact {
    delta: Option<f64>,
    #[serde(rename = "box")]
    bbox: Option<[Point; 2]>,
}

/// Knobs of the refinement study and its probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyOptions {
    /// Sample points per axis for sup errors on `K`.
    pub sample_density: usize,
    /// Boundary samples for the convex envelope.
    pub boundary_samples: usize,
    /// Constant for the ABP check.
    pub abp_c: f64,
    /// Affine minorant `L(x) = a·x + b` as `[a1, a2, b]` subtracted before the
    /// ABP check; `None` uses the constant `min g` over boundary nodes.
    pub abp_minorant: Option<[f64; 3]>,
    /// Largest allowed relative mass growth between consecutive levels.
    pub mass_growth_limit: f64,
    /// The mass gate applies to level pairs whose finer `h` is at most this.
    pub mass_gate_h: f64,
    /// Shell distances in multiples of `h`.
    pub shells: Vec<f64>,
    /// Random segments for the convexity probe.
    pub convexity_segments: usize,
    /// `C` in the convexity slack `ε(h) = C·h`.
    pub convexity_c: f64,
    /// Record wall time; off makes outputs bit-reproducible.
    pub timing: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            sample_density: 120,
            boundary_samples: 256,
            abp_c: crate::principle::DEFAULT_ABP_C,
            abp_minorant: None,
            mass_growth_limit: 0.25,
            mass_gate_h: 1.0 / 16.0,
            shells: vec![1.0, 2.0, 4.0],
            convexity_segments: 2000,
            convexity_c: 1.0,
            timing: true,
        }
    }
}

/// Source density, boundary data and optional exact solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemSpec {
    Builtin(String),
    Expr {
        #[serde(serialize_with = "ser_expr")]
        f: Expr,
        #[serde(serialize_with = "ser_expr")]
        g: Expr,
        #[serde(serialize_with = "ser_opt_expr")]
        exact: Option<Expr>,
    },
}

fn ser_expr<S: serde::Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(e.source())
}

fn ser_opt_expr<S: serde::Serializer>(e: &Option<Expr>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(e.source()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub name: String,
    pub domain: ConvexDomain,
    pub problem: ProblemSpec,
    /// Strictly decreasing mesh lengths.
    pub h: Vec<f64>,
    pub compact: CompactSet,
    pub scheme: SchemeConfig,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub study: StudyOptions,
}

impl RunConfig {
    /// A configuration with default scheme and study options.
    pub fn new(domain: ConvexDomain, problem: ProblemSpec, h: Vec<f64>) -> Result<Self> {
        let delta = 0.2 * domain.diameter();
        let name = match &problem {
            ProblemSpec::Builtin(n) => n.clone(),
            ProblemSpec::Expr { .. } => "custom".into(),
        };
        let cfg = RunConfig {
            name,
            domain,
            problem,
            h,
            compact: CompactSet::Inset { delta },
            scheme: SchemeConfig::default(),
            output: None,
            seed: 0,
            study: StudyOptions::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let domain = match raw.domain.kind.as_str() {
            "box" => {
                let [min, max] = raw.domain.bbox.ok_or_else(|| Error::Config("domain.kind = \"box\" needs domain.box".into()))?;
                ConvexDomain::new_box(min, max)?
            }
            "polygon" => ConvexDomain::polygon(
                raw.domain
                    .vertices
                    .ok_or_else(|| Error::Config("domain.kind = \"polygon\" needs domain.vertices".into()))?,
            )?,
            "disk" => ConvexDomain::disk(
                raw.domain.center.unwrap_or([0.0, 0.0]),
                raw.domain.radius.ok_or_else(|| Error::Config("domain.kind = \"disk\" needs domain.radius".into()))?,
            )?,
            other => return Err(Error::Config(format!("unknown domain.kind `{other}`"))),
        };
        let p = raw.problem;
        let problem = match (p.builtin, p.f, p.g) {
            (Some(b), None, None) if p.exact.is_none() => {
                if MAProblem::builtin(&b, domain.clone()).is_none() {
                    return Err(Error::Config(format!("unknown problem.builtin `{b}`")));
                }
                ProblemSpec::Builtin(b)
            }
            (None, Some(f), Some(g)) => ProblemSpec::Expr {
                f: Expr::parse(&f)?,
                g: Expr::parse(&g)?,
                exact: p.exact.as_deref().map(Expr::parse).transpose()?,
            },
            _ => {
                return Err(Error::Config(
                    "problem needs either problem.builtin alone or both problem.f and problem.g".into(),
                ))
            }
        };
        let compact = match (raw.compact.delta, raw.compact.bbox) {
            (Some(_), Some(_)) => return Err(Error::Config("give compact.delta or compact.box, not both".into())),
            (_, Some([min, max])) => CompactSet::Box { min, max },
            (delta, None) => CompactSet::Inset { delta: delta.unwrap_or(0.2 * domain.diameter()) },
        };
        let name = raw.name.unwrap_or_else(|| match &problem {
            ProblemSpec::Builtin(n) => n.clone(),
            ProblemSpec::Expr { .. } => "custom".into(),
        });
        let cfg = RunConfig {
            name,
            domain,
            problem,
            h: raw.h,
            compact,
            scheme: raw.scheme,
            output: raw.output,
            seed: raw.seed,
            study: raw.study,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.h.is_empty() {
            return Err(Error::Config("h list is empty".into()));
        }
        if let Some(&bad) = self.h.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidMeshLength(bad));
        }
        if self.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!("h list must be strictly decreasing, got {:?}", self.h)));
        }
        let s = &self.study;
        if s.boundary_samples < 3 || s.sample_density == 0 || s.shells.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Config("study: boundary_samples ≥ 3, sample_density ≥ 1 and positive shells required".into()));
        }
        if !(s.abp_c > 0.0 && s.mass_growth_limit >= 0.0 && s.convexity_c >= 0.0) {
            return Err(Error::Config("study: abp_c > 0, mass_growth_limit ≥ 0 and convexity_c ≥ 0 required".into()));
        }
        let lat = build_lattice(&self.domain, self.h[0], BoundaryMode::Projected)?;
        let inside = lat.interior_ids().any(|x| self.compact.contains(&lat, lat.point(x)));
        let positive = match self.compact {
            CompactSet::Inset { delta } => delta > 0.0,
            CompactSet::Box { min, max } => {
                [min, max, [min[0], max[1]], [max[0], min[1]]].iter().all(|&c| self.domain.inset(c) > 0.0)
                    && min[0] <= max[0]
                    && min[1] <= max[1]
            }
        };
        if !positive || !inside {
            return Err(Error::Config(format!(
                "compact set {:?} must lie inside the domain and contain a node at h = {}",
                self.compact, self.h[0]
            )));
        }
        Ok(())
    }

    /// The problem with `f`, `g` and the exact solution bound to the domain.
    pub fn problem(&self) -> MAProblem {
        match &self.problem {
            ProblemSpec::Builtin(b) => MAProblem::builtin(b, self.domain.clone()).expect("validated builtin"),
            ProblemSpec::Expr { f, g, exact } => {
                let (f, g) = (f.clone(), g.clone());
                let mut p = MAProblem::new(self.name.clone(), self.domain.clone(), move |x| f.eval(x), move |x| g.eval(x));
                if let Some(u) = exact.clone() {
                    p.exact = Some(Arc::new(move |x| u.eval(x)));
                }
                p
            }
        }
    }
}
