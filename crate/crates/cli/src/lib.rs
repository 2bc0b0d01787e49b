//! `dconvex` command line.
//!
//! Exit codes: 0 success, 1 a check failed (or the solver gave up), 2 bad
//! input (unreadable or invalid configuration, negative source, unknown flag).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use dconvex::harness::{run_refinement_study, selftest, write_atomic, RunConfig};
use dconvex::measure::mass_bound_check;
use dconvex::meshfn::is_discrete_convex;
use dconvex::principle::{abp_check, barrier_compare, harmonic_solve_values};
use dconvex::scheme::{envelope_samples, ConvexEnvelope, EnvelopeMethod};
use dconvex::{build_lattice, ma_measure, solve, BoundaryMode, DirectionStencil, Error, Lattice, MeshFunction};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dconvex", version, about = "Discrete convex functions and a monotone Monge-Ampère solver")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomised checks; overrides `seed` in the configuration.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the Monge-Ampère problem at every h of the configuration.
    Solve,
    /// Monge-Ampère measure of the solution, or of a mesh function read from CSV.
    Measure {
        /// `x,y,value` rows on the lattice of the first h.
        #[arg(long, value_name = "CSV")]
        input: Option<PathBuf>,
    },
    /// ABP inequality for `u_h − L`, or for a mesh function read from CSV.
    CheckAbp {
        #[arg(long, value_name = "CSV")]
        input: Option<PathBuf>,
    },
    /// Convex envelope of the boundary data at the lattice nodes.
    Envelope,
    /// Refinement study: tables, probes and the mass gate.
    RefineStudy,
    /// Quick property suites.
    Selftest,
}

/// Failure of a command, split by exit code.
enum Failure {
    Input(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Check(e.to_string())
        }
    }
}

type Outcome = std::result::Result<Vec<String>, Failure>;

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            EXIT_OK
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            EXIT_CHECK
        }
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            EXIT_INPUT
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Command::Selftest = cli.command {
        let r = selftest(cli.seed.unwrap_or(0));
        let lines: Vec<String> =
            r.checks.iter().map(|c| format!("{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail)).collect();
        if let Some(dir) = &cli.out {
            write_json(&dir.join("selftest.json"), &r)?;
        }
        return if r.pass {
            Ok(lines)
        } else {
            Err(Failure::Check(format!("selftest\n{}", lines.join("\n"))))
        };
    }
    let Some(path) = &cli.config else {
        return Err(Failure::Input("--config <PATH> is required for this command".into()));
    };
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.out.is_some() {
        cfg.output = cli.out.clone();
    }
    match cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Measure { input } => cmd_measure(&cfg, input.as_deref()),
        Command::CheckAbp { input } => cmd_abp(&cfg, input.as_deref()),
        Command::Envelope => cmd_envelope(&cfg),
        Command::RefineStudy => cmd_study(&cfg),
        Command::Selftest => unreachable!(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    Ok(write_atomic(path, text.as_bytes())?)
}

fn lattice(cfg: &RunConfig, h: f64) -> std::result::Result<Arc<Lattice>, Failure> {
    Ok(Arc::new(build_lattice(&cfg.domain, h, BoundaryMode::Projected)?))
}

/// `h` as a file-name fragment.
fn tag(h: f64) -> String {
    format!("h{h}")
}

fn solved(cfg: &RunConfig, h: f64) -> std::result::Result<(MeshFunction, dconvex::SolveReport), Failure> {
    let lat = lattice(cfg, h)?;
    Ok(solve(&cfg.problem(), &lat, &cfg.scheme)?)
}

fn cmd_solve(cfg: &RunConfig) -> Outcome {
    let problem = cfg.problem();
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for &h in &cfg.h {
        let lat = lattice(cfg, h)?;
        let (u, rep) = solve(&problem, &lat, &cfg.scheme)?;
        let boundary: Vec<f64> = lat.boundary_ids().map(|b| u.value(b)).collect();
        let barrier = barrier_compare(&u, &harmonic_solve_values(&lat, &boundary)?)?;
        let err = problem.exact.as_ref().map(|ex| {
            (0..lat.len()).map(|x| (u.value(x) - ex(lat.point(x))).abs()).fold(0.0, f64::max)
        });
        lines.push(format!(
            "h = {h}: {} sweeps, residual {:.2e}, mass {:.6}, discrete convex {}, barrier {}{}",
            rep.iterations,
            rep.residual,
            rep.ma_total_mass,
            rep.discrete_convex,
            if barrier.holds { "ok" } else { "violated" },
            err.map(|e| format!(", nodal error {e:.2e}")).unwrap_or_default()
        ));
        if !barrier.holds {
            failed.push(format!("h = {h}: u_h exceeds the harmonic barrier by {:e}", barrier.max_violation));
        }
        if let Some(dir) = &cfg.output {
            write_atomic(&dir.join(format!("solution_{}.csv", tag(h))), u.to_csv().as_bytes())?;
            write_json(&dir.join(format!("solve_{}.json", tag(h))), &rep)?;
        }
    }
    finish(lines, failed)
}

fn finish(lines: Vec<String>, failed: Vec<String>) -> Outcome {
    if failed.is_empty() {
        Ok(lines)
    } else {
        for l in &lines {
            println!("{l}");
        }
        Err(Failure::Check(failed.join("; ")))
    }
}

/// The mesh function a measure/ABP command works on: the CSV input on the
/// lattice of the first `h`, or the solution at every `h`.
fn subjects(cfg: &RunConfig, input: Option<&Path>) -> std::result::Result<Vec<(f64, MeshFunction)>, Failure> {
    match input {
        Some(p) => {
            let h = cfg.h[0];
            let text =
                std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))?;
            Ok(vec![(h, MeshFunction::from_csv(&lattice(cfg, h)?, &text)?)])
        }
        None => cfg.h.iter().map(|&h| Ok((h, solved(cfg, h)?.0))).collect(),
    }
}

fn cmd_measure(cfg: &RunConfig, input: Option<&Path>) -> Outcome {
    let problem = cfg.problem();
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for (h, u) in subjects(cfg, input)? {
        let conv = is_discrete_convex(&u, &DirectionStencil::default())?;
        let m = ma_measure(&u)?;
        let r = mass_bound_check(&u, &problem.f, f64::INFINITY)?;
        lines.push(format!(
            "h = {h}: total mass {:.6}, ∫f ≈ {:.6}, ratio {:.4}, discrete convex {}",
            m.total, r.integral_f, r.ratio, conv.convex
        ));
        if !conv.convex {
            failed.push(format!("h = {h}: not discrete convex (min λ = {:e})", conv.min_lambda));
        }
        if let Some(dir) = &cfg.output {
            write_atomic(&dir.join(format!("measure_{}.csv", tag(h))), m.to_csv().as_bytes())?;
            write_json(&dir.join(format!("mass_{}.json", tag(h))), &r)?;
        }
    }
    finish(lines, failed)
}

fn cmd_abp(cfg: &RunConfig, input: Option<&Path>) -> Outcome {
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for (h, u) in subjects(cfg, input)? {
        let lat = u.lattice().clone();
        let z = match input {
            Some(_) => u,
            None => {
                let min_g = lat.boundary_ids().map(|b| u.value(b)).fold(f64::INFINITY, f64::min);
                let l = cfg.study.abp_minorant.unwrap_or([0.0, 0.0, min_g]);
                u.sub(&MeshFunction::from_fn(&lat, |p| l[0] * p[0] + l[1] * p[1] + l[2])?)?
            }
        };
        let r = abp_check(&z, cfg.study.abp_c)?;
        lines.push(format!(
            "h = {h}: empirical C {:.4} (bound {}), mass {:.6}, {}",
            r.empirical_c,
            r.c,
            r.total_mass,
            if r.pass { "ok" } else { "violated" }
        ));
        if !r.pass {
            failed.push(format!("h = {h}: empirical C {} exceeds {}", r.empirical_c, r.c));
        }
        if let Some(dir) = &cfg.output {
            write_json(&dir.join(format!("abp_{}.json", tag(h))), &r)?;
        }
    }
    finish(lines, failed)
}

fn cmd_envelope(cfg: &RunConfig) -> Outcome {
    let g = cfg.problem().g;
    let base = envelope_samples(&cfg.domain, cfg.study.boundary_samples);
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for &h in &cfg.h {
        let lat = lattice(cfg, h)?;
        // boundary nodes join the samples so that every node lies in their hull
        let mut pts = base.clone();
        pts.extend(lat.boundary_ids().map(|b| lat.point(b)));
        let vals: Vec<f64> = pts.iter().map(|&p| g(p)).collect();
        let env = ConvexEnvelope::new(pts, vals, EnvelopeMethod::Auto)?;
        let mut worst = 0.0f64;
        for (&s, &v) in env.samples().iter().zip(env.values()) {
            // U ≤ g at every sample; equality when g extends convexly
            worst = worst.max(env.eval(s)? - v);
        }
        let vals = (0..lat.len()).map(|x| env.eval(lat.point(x))).collect::<dconvex::Result<Vec<_>>>()?;
        let u = MeshFunction::new(lat, vals)?;
        let convex = is_discrete_convex(&u, &DirectionStencil::default())?.convex;
        lines.push(format!(
            "h = {h}: {} samples, max(U − g) = {worst:.2e}, envelope at {} nodes, discrete convex {convex}",
            env.samples().len(),
            u.values().len()
        ));
        if worst > 1e-8 {
            failed.push(format!("h = {h}: envelope exceeds the data by {worst:e}"));
        }
        if let Some(dir) = &cfg.output {
            write_atomic(&dir.join(format!("envelope_{}.csv", tag(h))), u.to_csv().as_bytes())?;
        }
    }
    finish(lines, failed)
}

fn cmd_study(cfg: &RunConfig) -> Outcome {
    let r = run_refinement_study(cfg)?.report;
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out").join(&r.config.name));
    r.write(&dir)?;
    let mut lines: Vec<String> = r.table_csv().lines().map(String::from).collect();
    lines.push(format!("wrote {}", dir.display()));
    finish(lines, r.failures)
}
