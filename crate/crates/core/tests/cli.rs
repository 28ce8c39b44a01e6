use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use efsolve::io::{load_config, save_config};
use efsolve::manufactured::Manufactured;
use tempfile::TempDir;

fn efsolve(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efsolve")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn config(dir: &Path, name: &str, p: &str, q: &str, formats: &str) -> PathBuf {
    let path = dir.join(name);
    let text = format!(
        "# test problem\n[problem]\nN = 3\ngamma = 1\na = 2\np = \"{p}\"\nq = {q}\n\n[output]\ndir = \"out\"\nformats = [{formats}]\n"
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn manufactured_config(dir: &Path, formats: &str) -> PathBuf {
    config(dir, "m.toml", &Manufactured::new(3, 1.0, 1.0, 2.0).source_expression(), "1", formats)
}

#[test]
fn check_convergent_source() {
    let dir = TempDir::new().unwrap();
    config(dir.path(), "c.toml", "(1+r)^(-3)", "0", "\"csv\"");
    let out = efsolve(&["check", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("classification: convergent"), "{text}");
    let estimate: f64 = text.lines().find_map(|l| l.strip_prefix("integral_r_phi: ")).unwrap().parse().unwrap();
    assert!((estimate - 0.5).abs() < 1e-6);
}

#[test]
fn check_divergent_source_exits_2() {
    let dir = TempDir::new().unwrap();
    config(dir.path(), "c.toml", "(1+r)^(-2)", "0", "\"csv\"");
    let out = efsolve(&["check", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("classification: divergent"));
    // the barrier needs a convergent integral: same negative answer
    assert_eq!(efsolve(&["barrier", "c.toml"], dir.path()).status.code(), Some(2));
}

#[test]
fn unknown_key_is_an_error_with_line() {
    let dir = TempDir::new().unwrap();
    let path = config(dir.path(), "c.toml", "(1+r)^(-3)", "0", "\"csv\"");
    let text = std::fs::read_to_string(&path).unwrap().replace("gamma = 1", "gama = 1");
    std::fs::write(&path, text).unwrap();
    let out = efsolve(&["check", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("gama"), "{err}");
}

#[test]
fn invalid_problem_is_an_error() {
    let dir = TempDir::new().unwrap();
    let path = config(dir.path(), "c.toml", "(1+r)^(-3)", "0", "\"csv\"");
    let text = std::fs::read_to_string(&path).unwrap().replace("N = 3", "N = 2");
    std::fs::write(&path, text).unwrap();
    assert_eq!(efsolve(&["check", "c.toml"], dir.path()).status.code(), Some(1));
}

#[test]
fn config_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let path = manufactured_config(dir.path(), "\"csv\", \"svg\"");
    let first = load_config(&path).unwrap();
    let copy = dir.path().join("copy.toml");
    save_config(&first, &copy).unwrap();
    assert_eq!(load_config(&copy).unwrap(), first);
}

#[test]
fn solve_writes_csv_and_report() {
    let dir = TempDir::new().unwrap();
    manufactured_config(dir.path(), "\"csv\", \"json\"");
    let out = efsolve(&["solve", "m.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u,v"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 0.0);
    assert!((row[1] - 1.0).abs() < 5e-3);
    assert!(row[1] <= row[2]);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["certified"], true);
    for key in [
        "radii_used",
        "successive_gaps",
        "window_profiles",
        "tail_value",
        "window_radius",
        "k",
        "c",
        "stages",
        "final_solve",
        "final_ball",
        "profile",
        "barrier",
    ] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    for key in ["iterations", "residual_history", "final_residual", "bracket_projections", "damping_events"] {
        assert!(report["final_solve"].get(key).is_some(), "missing final_solve.{key}");
        assert!(report["stages"][0]["solve"].get(key).is_some(), "missing stages[0].solve.{key}");
    }
}

#[test]
fn svg_is_presentation_only() {
    let with = TempDir::new().unwrap();
    let without = TempDir::new().unwrap();
    manufactured_config(with.path(), "\"csv\", \"json\", \"svg\"");
    manufactured_config(without.path(), "\"csv\", \"json\"");
    let a = efsolve(&["solve", "m.toml"], with.path());
    let b = efsolve(&["solve", "m.toml"], without.path());
    assert_eq!(a.status.code(), b.status.code());
    let svg = std::fs::read_to_string(with.path().join("out/solution.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    assert!(!without.path().join("out/solution.svg").exists());
    for file in ["out/report.json", "out/solution.csv"] {
        assert_eq!(std::fs::read(with.path().join(file)).unwrap(), std::fs::read(without.path().join(file)).unwrap());
    }
}

#[test]
fn sweep_matches_individual_runs() {
    let dir = TempDir::new().unwrap();
    config(dir.path(), "s.toml", "(1+r^2)^(-2)", "0", "\"csv\"");
    let out = efsolve(&["solve", "s.toml", "--sweep", "gamma=1,2", "--out", "sweep"], dir.path());
    assert!(matches!(out.status.code(), Some(0 | 2)), "{}", String::from_utf8_lossy(&out.stderr));

    let single = config(dir.path(), "g2.toml", "(1+r^2)^(-2)", "0", "\"csv\"");
    let text = std::fs::read_to_string(&single).unwrap().replace("gamma = 1", "gamma = 2");
    std::fs::write(&single, text).unwrap();
    efsolve(&["solve", "g2.toml", "--out", "single"], dir.path());
    assert_eq!(
        std::fs::read(dir.path().join("sweep/solution-gamma-2.csv")).unwrap(),
        std::fs::read(dir.path().join("single/solution.csv")).unwrap()
    );
    assert!(dir.path().join("sweep/solution-gamma-1.csv").exists());
}

#[test]
fn eigen_and_barrier_outputs() {
    let dir = TempDir::new().unwrap();
    config(dir.path(), "c.toml", "(1+r^2)^(-2)", "0", "\"csv\"");
    let out = efsolve(&["eigen", "c.toml", "--radius", "3.141592653589793", "--h", "0.00314159265358979"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let lambda: f64 = stdout(&out).lines().find_map(|l| l.strip_prefix("lambda1: ")).unwrap().parse().unwrap();
    assert!((lambda - 1.0).abs() < 1e-5);
    let eig = std::fs::read_to_string(dir.path().join("out/eigen.csv")).unwrap();
    assert!(eig.starts_with("r,phi1\n"));

    let out = efsolve(&["barrier", "c.toml", "--radius", "10"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("supersolution: verified"));
    let barrier = std::fs::read_to_string(dir.path().join("out/barrier.csv")).unwrap();
    assert!(barrier.starts_with("r,w,v,margin\n"));
    assert_eq!(barrier.lines().count(), 1 + 1001);
}

#[test]
fn probe_and_verify() {
    let dir = TempDir::new().unwrap();
    manufactured_config(dir.path(), "\"json\"");
    let out = efsolve(&["probe", "m.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("probe: passed"));
    assert!(dir.path().join("out/probe.json").exists());

    let out = efsolve(&["verify"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("observed_order"));
    assert_eq!(efsolve(&["verify", "--min-order", "2.5"], dir.path()).status.code(), Some(2));
}

#[test]
fn uncertified_run_exits_2() {
    let dir = TempDir::new().unwrap();
    let path = config(dir.path(), "c.toml", "(1+r^2)^(-2)", "0", "\"csv\"");
    let text = std::fs::read_to_string(&path).unwrap() + "\n[solver]\nradii = [5, 10]\nh = 0.05\n";
    std::fs::write(&path, text).unwrap();
    let out = efsolve(&["solve", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("certified: false"));
    assert_eq!(efsolve(&["probe", "c.toml"], dir.path()).status.code(), Some(2));
}
