use std::path::{Path, PathBuf};
use std::process::Command;

use dconvex_cli::{cli_main, EXIT_CHECK, EXIT_INPUT, EXIT_OK};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dconvex")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn selftest_exits_zero() {
    let (code, stdout, _) = run(&["selftest", "--seed", "9"]);
    assert_eq!(code, EXIT_OK, "{stdout}");
    assert!(stdout.contains("monotonicity W=2"));
}

#[test]
fn negative_source_names_the_node() {
    let (code, _, stderr) = run(&["solve", "--config", &cfg("bad_f_negative.toml")]);
    assert_eq!(code, EXIT_INPUT);
    assert!(stderr.contains("f = ") && stderr.contains("at node"), "{stderr}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _, stderr) = run(&["solve", "--frobnicate"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(stderr.contains("Usage"), "{stderr}");
    assert_eq!(cli_main(["dconvex", "nosuchcommand"]), EXIT_INPUT);
    assert_eq!(cli_main(["dconvex", "--help"]), EXIT_OK);
}

#[test]
fn missing_or_broken_config() {
    assert_eq!(cli_main(["dconvex", "solve"]), EXIT_INPUT);
    assert_eq!(cli_main(["dconvex", "solve", "--config", "/nonexistent.toml"]), EXIT_INPUT);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    std::fs::write(&p, "h = [0.1]\ndomain.kind = \"box\"\nproblem.builtin = \"exp\"\n").unwrap();
    assert_eq!(cli_main(["dconvex", "envelope", "--config", p.to_str().unwrap()]), EXIT_INPUT);
}

#[test]
fn quad_refine_study_writes_exact_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let (code, stdout, stderr) = run(&["refine-study", "--config", &cfg("quad.toml"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{stdout}\n{stderr}");
    let csv = std::fs::read_to_string(out.join("table.csv")).unwrap();
    let mut rows = csv.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|c| *c == name).unwrap();
    let mut n = 0;
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        let h: f64 = f[col("h")].parse().unwrap();
        // nodal errors vanish; on K only the interpolation error h²/4 remains
        assert!(f[col("sup_err_all")].parse::<f64>().unwrap() < 1e-8);
        assert!(f[col("sup_err_K")].parse::<f64>().unwrap() <= h * h / 4.0 + 1e-10);
        n += 1;
    }
    assert_eq!(n, 3);
    assert!(out.join("report.json").exists());
}

#[test]
fn study_outputs_are_reproducible() {
    // the report echoes the output directory, so both runs write to the same one
    let dir = tempfile::tempdir().unwrap();
    let read = |f: &str| std::fs::read_to_string(dir.path().join(f)).unwrap();
    let study = || cli_main(["dconvex", "refine-study", "--config", &cfg("quad.toml"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(study(), EXIT_OK);
    let first = (read("table.csv"), read("report.json"));
    assert_eq!(study(), EXIT_OK);
    assert!(first.0 == read("table.csv") && first.1 == read("report.json"));
}

#[test]
fn solve_measure_abp_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let c = cfg("disk_expr.toml");
    for cmd in ["solve", "measure", "check-abp", "envelope"] {
        let (code, stdout, stderr) = run(&[cmd, "--config", &c, "--out", out]);
        assert_eq!(code, EXIT_OK, "{cmd}: {stdout}\n{stderr}");
    }
    // feed a solution back through --input
    let sol = dir.path().join("solution_h0.2.csv");
    assert!(sol.exists());
    let (code, stdout, _) = run(&["measure", "--config", &c, "--input", sol.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("discrete convex true"));
}

#[test]
fn concave_input_fails_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("quad.toml");
    // −|x|²/2 on the h = 1/8 lattice
    let sol = dir.path().join("u.csv");
    assert_eq!(cli_main(["dconvex", "solve", "--config", &c, "--out", dir.path().to_str().unwrap()]), EXIT_OK);
    let text = std::fs::read_to_string(dir.path().join("solution_h0.125.csv")).unwrap();
    let flipped: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                return format!("{l}\n");
            }
            let f: Vec<&str> = l.split(',').collect();
            let (x, y): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            format!("{},{},{}\n", f[0], f[1], -(x * x + y * y) / 2.0)
        })
        .collect();
    std::fs::write(&sol, flipped).unwrap();
    assert_eq!(cli_main(["dconvex", "measure", "--config", &c, "--input", sol.to_str().unwrap()]), EXIT_CHECK);
}
