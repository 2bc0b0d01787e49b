//! Refinement studies: solve on a sequence of mesh lengths and tabulate
//! errors, masses and the barrier/ABP checks at each level.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::config::RunConfig;
use super::probes::{boundary_adherence_probe, convexity_of_limit_probe, AdherenceReport, ConvexityProbeReport};
use crate::domain::{build_lattice, BoundaryMode};
use crate::interp::{interpolate, lipschitz_modulus, sup_error_on_compact};
use crate::measure::{mass_bound_check, MassReport};
use crate::meshfn::MeshFunction;
use crate::principle::{abp_check, barrier_compare, harmonic_solve_values, BarrierReport};
use crate::scheme::{solve, MAProblem, SolveReport};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbpSummary {
    pub minorant: [f64; 3],
    pub empirical_c: f64,
    pub c: f64,
    pub total_mass: f64,
    pub pass: bool,
}

/// Everything measured at one mesh length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRecord {
    pub h: f64,
    pub interior_nodes: usize,
    pub boundary_nodes: usize,
    /// `sup_K |I(u_h) − u|` on the sample grid.
    pub sup_err_k: Option<f64>,
    /// `max |u_h − u|` over all nodes.
    pub sup_err_all: Option<f64>,
    /// `max |u_h − u|` over nodes with `d(x, ∂Ω) ≤ 2h`.
    pub shell_err: Option<f64>,
    pub ma_mass: f64,
    pub lipschitz_k: Option<f64>,
    pub sup_norm: f64,
    pub iters: usize,
    pub seconds: f64,
    /// Observed order of `sup_err_k` against the previous level.
    pub order: Option<f64>,
    pub solve: SolveReport,
    pub mass: MassReport,
    pub barrier: BarrierReport,
    pub abp: Option<AbpSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub h: f64,
    pub record: Option<LevelRecord>,
    /// Failed stages; the level counts as failed when non-empty.
    pub errors: Vec<String>,
    /// Stages skipped for benign reasons (e.g. `h` too coarse for `K`).
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassGate {
    pub limit: f64,
    pub gate_h: f64,
    /// `(h_coarse, h_fine, relative growth)` for every gated pair.
    pub growth: Vec<(f64, f64, f64)>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyReport {
    pub config: RunConfig,
    pub levels: Vec<Level>,
    pub mass_gate: MassGate,
    pub adherence: Option<AdherenceReport>,
    pub convexity: Option<ConvexityProbeReport>,
    /// Problems with individual checks, one line each.
    pub failures: Vec<String>,
    pub pass: bool,
}

/// A finished study plus the discrete solutions it produced.
#[derive(Clone, Debug)]
pub struct StudyOutput {
    pub report: StudyReport,
    /// `(h, u_h)` for each level that solved.
    pub solutions: Vec<(f64, MeshFunction)>,
}

/// Input errors (bad data, unusable lattice) abort the study; anything else is
/// recorded against the level.
fn level(cfg: &RunConfig, problem: &MAProblem, h: f64) -> Result<(Level, Option<MeshFunction>)> {
    let mut lv = Level { h, record: None, errors: Vec::new(), notes: Vec::new() };
    let lat = match build_lattice(&cfg.domain, h, BoundaryMode::Projected) {
        Ok(l) => Arc::new(l),
        Err(e) if e.is_input_error() => return Err(e),
        Err(e) => {
            lv.errors.push(format!("lattice: {e}"));
            return Ok((lv, None));
        }
    };
    let t0 = Instant::now();
    let (u, rep) = match solve(problem, &lat, &cfg.scheme) {
        Ok(r) => r,
        Err(e) if e.is_input_error() => return Err(e),
        Err(e) => {
            lv.errors.push(format!("solve: {e}"));
            return Ok((lv, None));
        }
    };
    let seconds = if cfg.study.timing { t0.elapsed().as_secs_f64() } else { 0.0 };

    let (mut sup_err_k, mut sup_err_all, mut shell_err) = (None, None, None);
    if let Some(exact) = &problem.exact {
        let nodal = |keep: &dyn Fn(usize) -> bool| {
            (0..lat.len()).filter(|&x| keep(x)).map(|x| (u.value(x) - exact(lat.point(x))).abs()).fold(0.0, f64::max)
        };
        sup_err_all = Some(nodal(&|_| true));
        shell_err = Some(nodal(&|x| lat.distance_to_boundary(x) <= 2.0 * h * (1.0 + 1e-9)));
        match interpolate(&u).and_then(|pl| sup_error_on_compact(&pl, |p| exact(p), &cfg.compact, cfg.study.sample_density)) {
            Ok(e) => sup_err_k = Some(e),
            Err(e) => lv.errors.push(format!("sup error on K: {e}")),
        }
    }
    let lipschitz_k = match lipschitz_modulus(&u, &cfg.compact) {
        Ok(l) => Some(l),
        Err(e @ Error::CompactTooCoarse(_)) => {
            lv.notes.push(format!("lipschitz: {e}"));
            None
        }
        Err(e) => {
            lv.errors.push(format!("lipschitz: {e}"));
            None
        }
    };
    let mass = match mass_bound_check(&u, &problem.f, f64::INFINITY) {
        Ok(m) => m,
        Err(e) => {
            lv.errors.push(format!("mass: {e}"));
            return Ok((lv, Some(u)));
        }
    };
    let boundary: Vec<f64> = lat.boundary_ids().map(|b| u.value(b)).collect();
    let barrier = match harmonic_solve_values(&lat, &boundary).and_then(|w| barrier_compare(&u, &w)) {
        Ok(b) => b,
        Err(e) => {
            lv.errors.push(format!("barrier: {e}"));
            return Ok((lv, Some(u)));
        }
    };
    if !barrier.holds {
        lv.errors.push(format!("barrier: u_h exceeds the harmonic barrier by {:e}", barrier.max_violation));
    }
    let minorant = cfg.study.abp_minorant.unwrap_or([0.0, 0.0, boundary.iter().copied().fold(f64::INFINITY, f64::min)]);
    let abp = MeshFunction::from_fn(&lat, |p| minorant[0] * p[0] + minorant[1] * p[1] + minorant[2])
        .and_then(|l| u.sub(&l))
        .and_then(|z| abp_check(&z, cfg.study.abp_c));
    let abp = match abp {
        Ok(r) => {
            if !r.pass {
                lv.errors.push(format!("abp: empirical C = {} exceeds {}", r.empirical_c, r.c));
            }
            Some(AbpSummary { minorant, empirical_c: r.empirical_c, c: r.c, total_mass: r.total_mass, pass: r.pass })
        }
        Err(e) => {
            lv.errors.push(format!("abp: {e}"));
            None
        }
    };
    lv.record = Some(LevelRecord {
        h,
        interior_nodes: lat.num_interior(),
        boundary_nodes: lat.num_boundary(),
        sup_err_k,
        sup_err_all,
        shell_err,
        ma_mass: rep.ma_total_mass,
        lipschitz_k,
        sup_norm: rep.sup_norm,
        iters: rep.iterations,
        seconds,
        order: None,
        solve: rep,
        mass,
        barrier,
        abp,
    });
    Ok((lv, Some(u)))
}

/// Observed order `log(e1/e2)/log(h1/h2)`, defined only when both errors exceed `floor`.
pub fn observed_order(h1: f64, e1: f64, h2: f64, e2: f64, floor: f64) -> Option<f64> {
    (e1 > floor && e2 > floor).then(|| (e1 / e2).ln() / (h1 / h2).ln())
}

fn mass_gate(cfg: &RunConfig, levels: &[Level]) -> MassGate {
    let s = &cfg.study;
    let recs: Vec<&LevelRecord> = levels.iter().filter_map(|l| l.record.as_ref()).collect();
    let mut growth = Vec::new();
    for w in recs.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.h > s.mass_gate_h * (1.0 + 1e-9) {
            continue;
        }
        let g = if a.ma_mass.abs() > 1e-12 {
            (b.ma_mass - a.ma_mass) / a.ma_mass.abs()
        } else if b.ma_mass.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        growth.push((a.h, b.h, g));
    }
    let pass = growth.iter().all(|g| g.2 <= s.mass_growth_limit);
    MassGate { limit: s.mass_growth_limit, gate_h: s.mass_gate_h, growth, pass }
}

/// Runs every level of `cfg`, then the probes on the levels that solved.
pub fn run_refinement_study(cfg: &RunConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    let problem = cfg.problem();
    let mut levels = Vec::new();
    let mut solutions = Vec::new();
    for &h in &cfg.h {
        let (lv, u) = level(cfg, &problem, h)?;
        log::info!("{}: h = {h} done ({} errors)", cfg.name, lv.errors.len());
        if let Some(u) = u {
            solutions.push((h, u));
        }
        levels.push(lv);
    }
    let floor = 10.0 * cfg.scheme.tol_residual;
    let mut prev: Option<(f64, f64)> = None;
    for lv in levels.iter_mut() {
        let Some(rec) = lv.record.as_mut() else { continue };
        if let (Some((h0, e0)), Some(e)) = (prev, rec.sup_err_k) {
            rec.order = observed_order(h0, e0, rec.h, e, floor);
        }
        prev = rec.sup_err_k.map(|e| (rec.h, e));
    }
    let gate = mass_gate(cfg, &levels);

    let mut failures = Vec::new();
    for lv in &levels {
        for e in &lv.errors {
            failures.push(format!("h = {}: {e}", lv.h));
        }
    }
    if !gate.pass {
        failures.push(format!("mass gate: growth above {} between levels: {:?}", gate.limit, gate.growth));
    }

    let fields: Vec<&MeshFunction> = solutions.iter().map(|(_, u)| u).collect();
    let adherence = if fields.len() >= 2 {
        match boundary_adherence_probe(&fields, &problem.g, problem.exact.as_ref(), &cfg.study) {
            Ok(r) => Some(r),
            Err(e) => {
                failures.push(format!("boundary adherence: {e}"));
                None
            }
        }
    } else {
        None
    };
    let convexity = if fields.len() >= 2 {
        let finest = &fields[fields.len() - 2..];
        match convexity_of_limit_probe(finest, &cfg.compact, cfg.study.convexity_segments, cfg.study.convexity_c, cfg.seed) {
            Ok(r) => {
                if !r.pass {
                    failures.push(format!("convexity of limit: violations {:?}", r.levels));
                }
                Some(r)
            }
            Err(e) => {
                failures.push(format!("convexity of limit: {e}"));
                None
            }
        }
    } else {
        None
    };
    let pass = failures.is_empty();
    let report = StudyReport { config: cfg.clone(), levels, mass_gate: gate, adherence, convexity, failures, pass };
    Ok(StudyOutput { report, solutions })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl StudyReport {
    pub const COLUMNS: [&'static str; 10] =
        ["h", "sup_err_K", "sup_err_all", "shell_err", "ma_mass", "lipschitz_K", "sup_norm", "iters", "seconds", "order"];

    /// One row per level that produced a record.
    pub fn table_csv(&self) -> String {
        let mut out = Self::COLUMNS.join(",");
        out.push('\n');
        for r in self.levels.iter().filter_map(|l| l.record.as_ref()) {
            let row = [
                r.h.to_string(),
                cell(r.sup_err_k),
                cell(r.sup_err_all),
                cell(r.shell_err),
                r.ma_mass.to_string(),
                cell(r.lipschitz_k),
                r.sup_norm.to_string(),
                r.iters.to_string(),
                r.seconds.to_string(),
                cell(r.order),
            ];
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `table.csv` and `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("table.csv"), self.table_csv().as_bytes())?;
        write_atomic(&dir.join("report.json"), self.to_json()?.as_bytes())
    }
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use crate::harness::config::ProblemSpec;

    #[test]
    fn orders_need_errors_above_the_floor() {
        assert!((observed_order(0.1, 4e-2, 0.05, 1e-2, 1e-8).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(observed_order(0.1, 4e-2, 0.05, 1e-9, 1e-8), None);
    }

    #[test]
    fn affine_study_is_exact_and_massless() {
        let mut cfg =
            RunConfig::new(ConvexDomain::unit_box(), ProblemSpec::Builtin("affine".into()), vec![0.25, 0.125]).unwrap();
        cfg.study.timing = false;
        let out = run_refinement_study(&cfg).unwrap();
        let r = &out.report;
        assert!(r.pass, "{:?}", r.failures);
        for lv in &r.levels {
            let rec = lv.record.as_ref().unwrap();
            assert!(rec.sup_err_k.unwrap() < 1e-12 && rec.sup_err_all.unwrap() < 1e-12);
            assert!(rec.ma_mass.abs() < 1e-12);
            assert_eq!(rec.order, None);
        }
        let csv = r.table_csv();
        assert!(csv.starts_with("h,sup_err_K,sup_err_all,shell_err,ma_mass,lipschitz_K,sup_norm,iters,seconds,order\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn artifacts_are_deterministic() {
        let mut cfg =
            RunConfig::new(ConvexDomain::unit_box(), ProblemSpec::Builtin("exp".into()), vec![0.25, 0.125]).unwrap();
        cfg.study.timing = false;
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        run_refinement_study(&cfg).unwrap().report.write(&a).unwrap();
        run_refinement_study(&cfg).unwrap().report.write(&b).unwrap();
        for f in ["table.csv", "report.json"] {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        }
    }
}
