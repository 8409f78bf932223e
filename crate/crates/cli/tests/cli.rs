use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cavity_core::{build_superoperator, spectra, SystemParams};

fn cavity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity")).args(args).output().expect("spawn cavity")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_config(dir: &Path, name: &str, text: &str, out: &str) -> Output {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    cavity(&["run", path.to_str().unwrap(), "--out", dir.join(out).to_str().unwrap()])
}

fn csv_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn hopf_prints_threshold() {
    let o = cavity(&["hopf", "--delta", "10", "--kappa", "0.1", "--gain", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("resolved SystemParams"), "{s}");
    assert!(s.contains("4.7482"), "{s}");
}

#[test]
fn minimal_gaps_config_matches_dense_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "min.cfg", "tasks=gaps\neta=0.1\neps_scaled=2\n", "out");
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/gaps.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], cavity_core::io::GAPS_HEADER);
    let gap1: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(gap1 > 0.0);

    let p = SystemParams::time_crystal(0.1, 2.0);
    let oracle = spectra::full_spectrum(&build_superoperator(&p).unwrap()).unwrap();
    assert!((gap1 - oracle.gap1.unwrap()).abs() < 1e-8 * oracle.gap1.unwrap().max(1.0));

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failed_tasks"], 0);
    assert_eq!(manifest["config"]["kappa"], 0.1);
    assert!(manifest["schema_version"].is_number());
    assert!(manifest["points"][0]["tasks"][0]["wall_time_s"].is_number());
}

#[test]
fn negative_kappa_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "bad.cfg", "kappa=-1\n", "out");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("kappa"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn eps_and_eps_scaled_conflict() {
    let o = cavity(&["spectrum", "--eta", "0.1", "--eps", "1", "--eps-scaled", "2"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("eps_scaled"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_and_key_are_errors() {
    let o = cavity(&["hopf", "--kapa", "1"]);
    assert!(!o.status.success());
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "bad.cfg", "kapa=1\n", "out");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("kapa"));
}

#[test]
fn reruns_are_byte_identical_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "tasks=gaps,steady,classical\neta=0.1,0.2\neps_scaled=0,2\ndim=12\nt_end=2\nn_traj=16\ngrid_n=21\nseed=7\n";
    let a = run_config(dir.path(), "a.cfg", &format!("{cfg}workers=1\n"), "a");
    let b = run_config(dir.path(), "b.cfg", &format!("{cfg}workers=1\n"), "b");
    let c = run_config(dir.path(), "c.cfg", &format!("{cfg}workers=3\n"), "c");
    for o in [&a, &b, &c] {
        assert!(o.status.success(), "{}", stderr(o));
    }
    let fa = csv_files(&dir.path().join("a"));
    assert!(fa.len() > 4);
    assert_eq!(fa, csv_files(&dir.path().join("b")));
    assert_eq!(fa, csv_files(&dir.path().join("c")));

    // merged rows sorted by (eta, eps_scaled)
    let gaps = fs::read_to_string(dir.path().join("a/gaps.csv")).unwrap();
    let keys: Vec<(f64, f64)> = gaps
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(keys, vec![(0.1, 0.0), (0.1, 2.0), (0.2, 0.0), (0.2, 2.0)]);
}

#[test]
fn json_config_equals_key_value() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_config(dir.path(), "a.cfg", "tasks=gaps\neta=0.1\neps_scaled=1:2:1\ndim=10\n", "a");
    let b = run_config(dir.path(), "b.json", r#"{"tasks": "gaps", "eta": 0.1, "eps_scaled": [1, 2], "dim": 10}"#, "b");
    assert!(a.status.success() && b.status.success());
    assert_eq!(csv_files(&dir.path().join("a")), csv_files(&dir.path().join("b")));
}

#[test]
fn point_failures_are_recorded_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    // eta = 0 with net gain has no finite truncation scale
    let o = run_config(dir.path(), "f.cfg", "tasks=gaps\neta=0,0.1\neps=0\n", "out");
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let gaps = fs::read_to_string(dir.path().join("out/gaps.csv")).unwrap();
    assert_eq!(gaps.lines().count(), 2);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failed_tasks"], 1);
    let err = manifest["points"][0]["tasks"][0]["error"].as_str().unwrap();
    assert!(err.contains("dim"), "{err}");
}

#[test]
fn evolve_writes_schema_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ev");
    let o = cavity(&["evolve", "--eta", "0.1", "--eps-scaled", "2", "--dim", "14", "--t-end", "1", "--grid-n", "11", "--snapshots", "0.5,1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("resolved SystemParams"));
    let files = csv_files(&out);
    let (_, ev) = files.iter().find(|(n, _)| n.starts_with("evolve")).unwrap();
    let text = String::from_utf8(ev.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), cavity_core::io::EVOLVE_HEADER);
    assert_eq!(text.lines().count(), 1 + 51);
    assert_eq!(files.iter().filter(|(n, _)| n.starts_with("husimi")).count(), 2);
}

#[test]
fn classical_subcommands_write_their_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cavity(&["classical-cycle", "--eta", "0.05", "--eps-scaled", "2", "--t-end", "5", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("period="));
    let cycle = fs::read_to_string(dir.path().join("cycle.csv")).unwrap();
    assert!(cycle.starts_with("period="));

    let o = cavity(&["mc", "--eta", "0.05", "--eps-scaled", "2", "--t-end", "1", "--n-traj", "50", "--grid-n", "11", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("ensemble.csv")).unwrap().lines().count(), 51);

    let o = cavity(&["phase-map", "--eta", "0.05", "--eps-scaled", "2", "--t-end", "1", "--grid-n", "5", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let map = fs::read_to_string(dir.path().join("phase_map.csv")).unwrap();
    assert_eq!(map.lines().next().unwrap(), cavity_core::io::PHASE_MAP_HEADER);
    assert_eq!(map.lines().count(), 26);
}
