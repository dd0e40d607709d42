//! End-to-end runs of the `wavelab` binary: exit codes, stamped headers,
//! determinism and the query subcommands.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn wavelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavelab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn shipped(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

const PICARD: &str = r#"
experiment = "picard_contraction"
seed = 0
nonlinearity = """
k = 5
n = 1
alpha = (5, 0), coeff = 1.0
"""

[grid]
n = 1
points_per_axis = 64
period = 32.0

[profile]
shape = "gaussian"
width = 1.0
slot = "both"

[picard]
s = 1.25
eps = [EPS]
T = 0.5
steps = 16
"#;

fn picard(eps: &str) -> String {
    PICARD.replace("EPS", eps)
}

fn run(dir: &TempDir, sub: &str, config: &Path, out: &str, extra: &[&str]) -> Output {
    let out = dir.path().join(out);
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    wavelab(&args)
}

#[test]
fn seed_and_override_are_stamped() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.toml", &picard("0.1, 0.5"));
    let o = run(&dir, "picard-contraction", &cfg, "out", &["--seed", "7", "--override-gate"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("converged: 2"));
    let csv = std::fs::read_to_string(dir.path().join("out/picard_contraction.csv")).unwrap();
    assert!(csv.starts_with("# wavelab-csv v1 picard_contraction\n"));
    assert!(csv.contains("\n# seed: 7\n"));
    assert!(csv.contains("\n# gate_override: true\n"));
    assert!(csv.contains("\n# scope: n=1 surrogate"));
    assert!(csv.contains("\n# gate: s=1.25 case=inadmissible"));
    assert!(dir.path().join("out/picard_trace_001.csv").exists());
}

#[test]
fn refused_without_override() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.toml", &picard("0.1"));
    let o = run(&dir, "picard-contraction", &cfg, "out", &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not admitted"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn divergence_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.toml", &picard("1000.0"));
    let o = run(&dir, "picard-contraction", &cfg, "out", &["--override-gate"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.toml", &picard("0.1").replace("steps = 16", "steps = sixteen"));
    let o = run(&dir, "picard-contraction", &bad, "out", &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let good = write(&dir, "p.toml", &picard("0.1"));
    let o = run(&dir, "lifespan-sweep", &good, "out", &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not lifespan_sweep"));

    let o = run(&dir, "picard-contraction", &dir.path().join("missing.toml"), "out", &[]);
    assert_eq!(code(&o), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = shipped("radial_compare.toml");
    let cfg = Path::new(&cfg);
    assert_eq!(code(&run(&dir, "radial-compare", cfg, "a", &[])), 0);
    assert_eq!(code(&wavelab(&[
        "--threads",
        "1",
        "radial-compare",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("b").to_str().unwrap(),
    ])), 0);
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 3);
    for n in names {
        let a = std::fs::read(dir.path().join("a").join(&n)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
}

#[test]
fn gate_prints_the_verdict() {
    let o = wavelab(&["gate", "--n", "4", "--k", "3", "--s", "2.5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "case=strict s_c=2.5 q=2 admitted=false");
    let o = wavelab(&["gate", "--n", "4", "--k", "4", "--s", "2.6666666666666665"]);
    assert!(stdout(&o).contains("case=weak") && stdout(&o).contains("admitted=true"));
    let o = wavelab(&["gate", "--n", "3", "--k", "3", "--s", "2", "--radial"]);
    assert!(stdout(&o).contains("case=radial_global") && stdout(&o).contains("admitted=true"));
    let o = wavelab(&["gate", "--n", "2", "--k", "1", "--s", "-1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn radial_check_reports_a_witness() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "d1.txt", "k = 2\nn = 2\nalpha = (0, 2, 0), coeff = 1.0\n");
    let o = wavelab(&["radial-check", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("radial: false"));
    assert!(text.contains("witness: a = "));
    assert!(text.contains("R = [["));

    let o = wavelab(&["radial-check", "--config", &shipped("radial_compare.toml")]);
    assert!(stdout(&o).contains("radial: true"));
    assert!(!stdout(&o).contains("witness"));

    let bad = write(&dir, "bad.txt", "k = 2\nn = 2\nalpha = (0, 2), coeff = 1.0\n");
    assert_eq!(code(&wavelab(&["radial-check", "--spec", bad.to_str().unwrap()])), 1);
}

#[test]
fn radial_strichartz_range_is_enforced() {
    let dir = TempDir::new().unwrap();
    let base = std::fs::read_to_string(shipped("strichartz_radial_2d.toml")).unwrap();
    // radial n = 2 needs q > 2/(n−1) = 2
    for q in ["1.9", "2.0"] {
        let cfg = write(&dir, "s.toml", &base.replace("q = 2.5", &format!("q = {q}")));
        let o = run(&dir, "strichartz-ensemble", &cfg, "out", &[]);
        assert_eq!(code(&o), 2, "q = {q}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("outside every Strichartz range"));
    }
}
