use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_diskbeam");

fn scenario(varpi: f64, extra: &str) -> String {
    format!(
        r#"schema_version = 1
[params]
varpi = {varpi:?}
[law.damping]
kind = "power"
c = 1.0
p = 3.0
[grid]
n_elements = 8
[time]
dt = 0.01
horizon = 2.0
[initial.displacement]
shape = "first_mode"
amplitude = 0.1
{extra}
"#
    )
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn status(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn validate_accepts_cubic_law_and_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.toml", &scenario(1.0, ""));
    let (code, stdout, _) = status(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("r = 1"));
    assert!(stdout.contains("eps0 = 0.5"));
    assert!(stdout.contains("VALID"));
}

#[test]
fn validate_rejects_fast_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fast.toml", &scenario(3.0, ""));
    let (code, stdout, _) = status(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stdout.contains("varpi"), "{stdout}");
}

#[test]
fn malformed_file_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &scenario(1.0, "[grid2]\nn = 3\n"));
    let (code, _, stderr) = status(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("grid2"), "{stderr}");
}

#[test]
fn run_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", &scenario(1.0, "[analysis]\nenvelope = true\n"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let (code, stdout, stderr) = status(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{stdout}{stderr}");
    }
    let ta = std::fs::read(a.join("trace.csv")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("trace.csv")).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("t,E,E0,F,V,omega,tip_slope_velocity,boundary_flux,torque_flux\n"));
    assert_eq!(text.lines().count(), 1 + 21);
    assert!(a.join("envelope.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn run_refuses_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fast.toml", &scenario(3.0, ""));
    let out = dir.path().join("out");
    let (code, _, _) = status(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!out.join("trace.csv").exists());
}

#[test]
fn run_reports_analysis_failure() {
    let dir = tempfile::tempdir().unwrap();
    // an undamped beam keeps its energy, so no decaying envelope dominates
    // once the horizon is long enough
    let text = scenario(1.0, "[analysis]\nenvelope = true\nrequire_dominance = true\n")
        .replace("kind = \"power\"\nc = 1.0\np = 3.0", "kind = \"linear\"\nc = 0.0")
        .replace("horizon = 2.0", "horizon = 200.0")
        .replace("dt = 0.01", "dt = 0.05");
    let cfg = write(dir.path(), "undamped.toml", &text);
    let out = dir.path().join("out");
    let (code, stdout, stderr) = status(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 4, "{stdout}{stderr}");
    assert!(out.join("summary.json").exists());
}

#[test]
fn sweep_flags_rejected_cells_in_grid_order() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "base.toml", &scenario(0.0, ""));
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "schema_version = 1\nbase = \"base.toml\"\n[[axes]]\nkey = \"params.varpi\"\nvalues = [0.0, 1.0, 2.0, 2.9, 3.1]\n",
    );
    let out = dir.path().join("sweep");
    let (code, stdout, stderr) = status(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "3"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1], i.to_string());
        let expected = if i < 4 { "ok" } else { "rejected" };
        assert_eq!(fields[2], expected, "{row}");
    }
}
