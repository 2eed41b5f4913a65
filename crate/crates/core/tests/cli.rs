//! End-to-end runs of the `graphrep` binary: exit codes, outputs and verification.

use graphrep::cli::{exit_code, run_config, verify, Config, FileStatus, RunManifest, EXPERIMENTS, MANIFEST_FILE, SCHEMA};
use graphrep::Error;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn graphrep(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_graphrep"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("ISO_THREADS", t),
        None => cmd.env_remove("ISO_THREADS"),
    };
    cmd.output().unwrap()
}

fn run_in(dir: &Path, config: &str, threads: Option<&str>) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    graphrep(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], threads)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const TRIANGLE: &str = "experiment = exact\n[graph]\nfamily = triangle\n[model]\nbeta = 0.7\nh = 0.2\n[run]\ncheck = loop_identity\n";

#[test]
fn exact_triangle_writes_a_residual_line() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), TRIANGLE, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("out/residuals.csv"));
    assert_eq!(rows[0].join(","), "graph,beta,h,check,residual,bound,pass");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][3], "loop_ising");
    assert!(rows[1][4].parse::<f64>().unwrap() <= 1e-9);
    assert_eq!(rows[1][6], "PASS");
}

#[test]
fn ghost_test_reports_the_two_ghost_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "experiment = ghost-test\n[graph]\nfamily = tree\nk = 3\nr = 6\n[model]\nenv = bernoulli\np = 0.5\n[run]\nhg = 0.01\nlambda = 100\nnsamples = 2000\n";
    let o = run_in(tmp.path(), cfg, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("out/ghost.csv"));
    let bound = rows[0].iter().position(|c| c == "bound").unwrap();
    // 21 √0.01
    assert!(rows.iter().any(|r| r[bound] == "2.1"), "{rows:?}");
}

#[test]
fn malformed_config_exits_2_with_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), "experiment = exact\n[graph]\nfamily triangle\n", None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = run_in(tmp.path(), "experiment = exact\n[graph]\nfamily = triangle\ncolour = red\n", None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    let o = run_in(tmp.path(), "experiment = exact\n[model]\nbeta = -1\n", None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn missing_config_exits_4() {
    let o = graphrep(&["run", "/nonexistent/run.cfg"], None);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verify_matches_then_detects_an_edit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "experiment = sample\nseed = 5\n[graph]\nfamily = cycle\nn = 5\n[model]\nbeta = 0.6\nh = 0.2\n[run]\nsampler = worm\nnsamples = 2000\n";
    assert_eq!(run_in(tmp.path(), cfg, Some("1")).status.code(), Some(0));
    let manifest = tmp.path().join("out").join(MANIFEST_FILE);
    let m = manifest.to_str().unwrap();
    // a different worker count must not change any byte
    let o = graphrep(&["verify", m], Some("4"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("MATCH    samples.csv"));

    let csv = tmp.path().join("out/samples.csv");
    let mut body = fs::read_to_string(&csv).unwrap();
    body.push_str("tampered\n");
    fs::write(&csv, body).unwrap();
    let o = graphrep(&["verify", m], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("MISMATCH samples.csv"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("reproducible_outputs"));

    fs::remove_file(&csv).unwrap();
    assert_eq!(graphrep(&["verify", m], None).status.code(), Some(4));
}

#[test]
fn manifest_records_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let rep = run_config(TRIANGLE, tmp.path()).unwrap();
    let on_disk: RunManifest = serde_json::from_str(&fs::read_to_string(tmp.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, rep.manifest);
    assert_eq!(on_disk.experiment, "exact");
    assert_eq!(on_disk.graph_hashes.len(), 1);
    assert_eq!(Config::parse(&on_disk.config).unwrap(), Config::parse(TRIANGLE).unwrap());
    assert!(on_disk.outputs.iter().all(|o| o.sha256.len() == 64));
    let v = verify(&tmp.path().join(MANIFEST_FILE)).unwrap();
    assert!(v.entries.iter().all(|(_, s)| *s == FileStatus::Match));
}

#[test]
fn rerun_in_the_same_directory_drops_stale_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    run_config("experiment = spectral\n[graph]\nfamily = tree\nk = 3\nr = 4\n[run]\nanalysis = tree-rho\nsteps = 20\n", tmp.path()).unwrap();
    assert!(tmp.path().join("rho.csv").exists());
    run_config(TRIANGLE, tmp.path()).unwrap();
    assert!(!tmp.path().join("rho.csv").exists());
    assert!(tmp.path().join("residuals.csv").exists());
}

#[test]
fn listing_and_schema_cover_everything() {
    let o = graphrep(&["list-experiments"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for (name, _) in EXPERIMENTS {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    assert_eq!(EXPERIMENTS.len(), 7);
    let o = graphrep(&["print-schema"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for k in SCHEMA {
        assert!(text.contains(k.key), "{}", k.key);
    }
}

#[test]
fn error_kinds_map_to_exit_codes() {
    assert_eq!(exit_code(&Error::Config { line: 1, msg: "x".into() }), 2);
    assert_eq!(exit_code(&Error::Invalid("x".into())), 2);
    assert_eq!(exit_code(&Error::Invariant { name: "x".into(), detail: "y".into() }), 3);
    assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 4);
}
