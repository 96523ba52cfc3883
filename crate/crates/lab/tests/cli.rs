use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdmp-lab"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("experiment.conf");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const SMALL_STORAGE: &str = "\
kind = simulate
output = small
seed = 5
variant = storage
alpha = 1
beta = 2
x0 = 0.5
times = 0.5, 1
samples = 2000
";

#[test]
fn validate_accepts_every_shipped_config() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let out = bin().arg("validate").arg(&path).output().unwrap();
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        count += 1;
    }
    assert!(count >= 14);
}

#[test]
fn constraint_violation_names_line() {
    let dir = TempDir::new().unwrap();
    let path = write_config(
        &dir,
        "# telegraph with the rates the wrong way round\nkind = invariant-check\nseed = 1\nsamples = 10\nhorizon = 1\nvariant = telegraph\na = 2\nb = 1\n",
    );
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 8"), "{err}");
    assert!(err.contains("requires a < b"), "{err}");
}

#[test]
fn missing_seed_and_unknown_key_are_reported() {
    let dir = TempDir::new().unwrap();
    let text = SMALL_STORAGE.replace("seed = 5\n", "").replace("samples = 2000\n", "samples = 2000\nwidth = 3\n");
    let path = write_config(&dir, &text);
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`seed`"), "{err}");
    assert!(err.contains("line 9") && err.contains("width"), "{err}");
}

#[test]
fn run_writes_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, SMALL_STORAGE);
    let out_dir = dir.path().join("out");
    let out = run(&path, &out_dir, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = read(out_dir.join("small.csv"));
    assert!(csv.starts_with("t,coordinate,mean,std_err,oracle\n"), "{csv}");
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 3);
    let rows = read(out_dir.join("small.rows.csv"));
    assert!(rows.starts_with("name,estimate,std_err,oracle,bound,tolerance,verdict,note\n"));
    let report: serde_json::Value = serde_json::from_str(&read(out_dir.join("small.json"))).unwrap();
    assert_eq!(report["kind"], "simulate");
    assert_eq!(report["config"]["seed"], "5");
    assert!(report["rows"].as_array().unwrap().iter().all(|r| r["verdict"] == "pass"));
    // Floats carry 17 significant digits.
    let mean = csv.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    let mantissa = mean.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{mean}");
}

#[test]
fn output_bytes_do_not_depend_on_workers() {
    let dir = TempDir::new().unwrap();
    let config = shipped("c05-tcp-wasserstein.conf");
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    assert!(run(&config, &one, &["--workers", "1"]).status.success());
    assert!(run(&config, &four, &["--workers", "4"]).status.success());
    for suffix in ["csv", "rows.csv", "json"] {
        let file = format!("c05-tcp-wasserstein.{suffix}");
        assert_eq!(read(one.join(&file)), read(four.join(&file)), "{file}");
    }
}

#[test]
fn seed_override_replaces_the_config_seed() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, SMALL_STORAGE);
    let base = dir.path().join("base");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&path, &base, &[]).status.success());
    assert!(run(&path, &a, &["--seed-override", "77"]).status.success());
    assert!(run(&path, &b, &["--seed-override", "77", "--workers", "3"]).status.success());
    assert_eq!(read(a.join("small.json")), read(b.join("small.json")));
    assert_ne!(read(a.join("small.csv")), read(base.join("small.csv")));
    let report: serde_json::Value = serde_json::from_str(&read(a.join("small.json"))).unwrap();
    assert_eq!(report["config"]["seed"], "77");
}

#[test]
fn coupling_from_equal_starts_coalesces_at_first_jump() {
    let dir = TempDir::new().unwrap();
    let path = write_config(
        &dir,
        "kind = couple\ncoupling = tv\noutput = same\nseed = 9\nvariant = tcp\nlambda = 1\nx0 = 1.5\ny0 = 1.5\ntimes = 0.5, 2\nsamples = 5000\n",
    );
    let out_dir = dir.path().join("out");
    let out = run(&path, &out_dir, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = read(out_dir.join("same.rows.csv"));
    assert!(rows.contains("P(not coalesced | N_t >= 1)"), "{rows}");
}

#[test]
fn failing_rows_give_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = run(&shipped("c09-gcurve.conf"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let csv = read(dir.path().join("c09-gcurve.csv"));
    assert!(csv.starts_with("r,G\n"));
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn stability_table_has_class_column() {
    let dir = TempDir::new().unwrap();
    let out = run(&shipped("c10-stability.conf"), dir.path(), &["--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = read(dir.path().join("c10-stability.csv"));
    assert!(csv.starts_with("alpha,R,class\n"), "{csv}");
    assert!(dir.path().join("c10-stability.timing.json").exists());
}

#[test]
fn missing_config_file_is_bad_input() {
    let out = bin().arg("validate").arg("/nonexistent/experiment.conf").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
