use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_moyal-mc"));
    c.env_remove("MOYAL_MC_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

const SMALL: &str = r#"
version = 1
dim = 2
n = [2, 3]
omega = [0.5, 1.0]
mu = 1.0
alpha = 0.0

[plan]
therm_sweeps = 5
meas_sweeps = 30
seed = 42
checkpoint_interval = 4
"#;

#[test]
fn dry_run_echoes_filled_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("min.toml");
    fs::write(&cfg, "version = 1\ndim = 4\nn = 5\nomega = 0.5\nmu = 1\nalpha = 0\n[plan]\nmeas_sweeps = 10\n").unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--dry-run"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("meas_interval = 1"), "{text}");
    assert!(text.contains("start = \"hot\""), "{text}");
    assert!(text.contains("# 1 job(s)"), "{text}");
    assert!(text.contains("therm=500"), "{text}");
    assert!(!dir.path().join("moyal-out").exists());
}

#[test]
fn invalid_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "version = 1\ndim = 2\nn = 3\nomega = 0.5\nmu = -1\nalpha = 0\n[plan]\nmeas_sweeps = 10\n").unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--dry-run"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("`mu`") && err.contains("line 5"), "{err}");

    let out = run(&["simulate", "--mu", "-1", "--dry-run"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("`mu`"));
}

#[test]
fn same_seed_gives_identical_trees() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "42", "--out", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta.len(), 1 + 4 * 4);
    assert_eq!(ta, tb);
    let summary = String::from_utf8(ta["summary.csv"].clone()).unwrap();
    assert!(summary.starts_with("dim,N,omega,mu,alpha,observable,mean,sigma,tau,t_eff,sweeps,seed"));
}

#[test]
fn resume_after_kill_matches_uninterrupted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let cfg = cfg.to_str().unwrap();
    let whole = dir.path().join("whole");
    let split = dir.path().join("split");
    assert!(run(&["sweep", "--config", cfg, "--out", whole.to_str().unwrap()]).status.success());

    let killed = run(&["sweep", "--config", cfg, "--out", split.to_str().unwrap(), "--halt-after-sweeps", "12"]);
    assert!(!killed.status.success(), "interrupted sweep must exit nonzero");
    let resumed = run(&["sweep", "--config", cfg, "--out", split.to_str().unwrap(), "--resume"]);
    assert!(resumed.status.success());
    assert_eq!(fs::read(whole.join("summary.csv")).unwrap(), fs::read(split.join("summary.csv")).unwrap());

    let again = run(&["sweep", "--config", cfg, "--out", split.to_str().unwrap(), "--resume"]);
    assert!(again.status.success());
    assert!(String::from_utf8(again.stderr).unwrap().contains("skipped 4"));
    assert_eq!(tree(&whole), tree(&split));
}

#[test]
fn empty_plan_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty");
    let o = run(&["simulate", "--dim", "2", "--n", "2", "--sweeps", "0", "--therm", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let agg = fs::read_to_string(out.join("d2_n2_omega1_mu1_alpha0").join("aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 1);
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 1);
}

#[test]
fn ising_scan_csv() {
    let o = run(&["ising", "--l", "4", "--sweeps", "200", "--therm", "20", "--beta-start", "0", "--beta-stop", "1", "--beta-step", "0.5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("L,beta,e,"));
    assert!(lines[3].starts_with("4,1,"));
}

#[test]
fn moyal_check_reports_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("res.csv");
    let o = run(&["moyal-check", "--max-index", "1", "--theta", "0.5,2", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("kind,indices,theta,residual"));
    assert!(text.lines().count() > 2);

    let strict = run(&["moyal-check", "--max-index", "1", "--theta", "1", "--tolerance", "0"]);
    assert!(!strict.status.success());
}

#[test]
fn figure_presets_listed_and_known() {
    let o = run(&["sweep", "--list-figures"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("fig3-9") && text.contains("fig31-34"));

    let o = run(&["sweep", "--figure", "fig3-9", "--dry-run"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("# 44 job(s)"));
    assert!(!run(&["sweep", "--figure", "nope", "--dry-run"]).status.success());
}
