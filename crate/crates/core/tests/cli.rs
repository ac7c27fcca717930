use std::path::{Path, PathBuf};
use std::process::Command;

use perdyn::cli::{emit_plot_data, run_experiment, ExperimentConfig, ExperimentReport, PlotKind};
use perdyn::detect::RowStatus;
use perdyn::Error;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_perdyn"))
}

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn shipped_configs_round_trip() {
    let all = configs();
    assert!(all.len() >= 5);
    for path in all {
        let cfg = ExperimentConfig::load(&path).unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg, "{}", path.display());
    }
}

#[test]
fn corpus_list_prints_every_entry() {
    let out = bin().args(["corpus", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["e1", "e2", "e3", "e4", "sturmian-shift", "odometer"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn run_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--quiet", "--workers", "2", "--out"])
        .arg(dir.path())
        .arg(config("e1-visit-times.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = dir.path().join("report.json");
    assert!(report.exists());
    let sidecars = std::fs::read_dir(dir.path()).unwrap().count();
    assert!(sidecars > 1);

    let out = bin().arg("plot").arg(&report).args(["--kind", "first-hit"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "target,first_hit\n0,1\n");
    let out = bin().arg("plot").arg(&report).args(["--kind", "first-hit", "--row", "1"]).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "target,first_hit\n0,inf\n");

    let out = bin().arg("plot").arg(&report).args(["--kind", "separation"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no separation series"));
}

#[test]
fn violations_exit_with_one() {
    // a horizon far too short to see the shift separate anything
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    std::fs::write(
        &cfg,
        "format_version = 1\n[system]\nexample = \"sturmian-shift\"\n\n[[detectors]]\nkind = \"report\"\nproperties = [\"sensitive\"]\nparams = { horizon = 1, net_radius = 0.03125 }\n",
    )
    .unwrap();
    let out = bin().args(["run", "--quiet", "--out"]).arg(dir.path()).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report = ExperimentReport::from_json(&text).unwrap();
    assert!(report.matrix.iter().any(|r| r.status == RowStatus::Violation));
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["run", "/no/such/config.toml"]).output().unwrap().status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "format_version = 1\nsurprise = true\n[system]\nexample = \"e1\"\n").unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surprise"));
}

#[test]
fn seeds_change_witnesses_not_consistency() {
    let base = ExperimentConfig::load(&config("odometer.toml")).unwrap();
    let other = ExperimentConfig { seed: base.seed + 17, ..base.clone() };
    let (a, b) = (run_experiment(&base).unwrap(), run_experiment(&other).unwrap());
    let flags = |r: &ExperimentReport| r.matrix.iter().map(|m| (m.name.clone(), m.status)).collect::<Vec<_>>();
    assert_eq!(flags(&a), flags(&b));
    assert_ne!(a.canonical_json().unwrap(), b.canonical_json().unwrap());
}

#[test]
fn plot_tables_have_stable_headers() {
    let cfg = ExperimentConfig::load(&config("sturmian.toml")).unwrap();
    let r = run_experiment(&cfg).unwrap();
    let gaps = emit_plot_data(&r, PlotKind::Gaps, None).unwrap();
    assert!(gaps.starts_with("gap,count\n"));
    let sep = emit_plot_data(&r, PlotKind::Separation, None).unwrap();
    assert!(sep.starts_with("n,distance\n"));
    let members = emit_plot_data(&r, PlotKind::Members, None).unwrap();
    assert!(members.starts_with("n\n"));
    let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back.canonical_json().unwrap(), r.canonical_json().unwrap());
    assert!(matches!(emit_plot_data(&r, PlotKind::FirstHit, Some(999)), Err(Error::MissingSeries(_))));
}
