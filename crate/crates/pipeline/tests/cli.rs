use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn agegan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agegan"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn assert_error(out: &Output, code: i32, reason: &str) {
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(code), "{stderr}");
    let line = stderr.lines().last().unwrap_or_default();
    assert!(line.starts_with(&format!("error[{reason}]: ")), "{stderr}");
}

const TINY: &str = "gen_width = 4\ndisc_width = 4\nresidual_blocks = 1\ne2e_epochs = 1\ne2f_epochs = 1\n";

#[test]
fn every_subcommand_runs_on_a_tiny_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("run.cfg");
    fs::write(&cfg, TINY).unwrap();
    let (toy, store, models, out) = (d.join("toy"), d.join("store"), d.join("models"), d.join("out"));

    let o = agegan(&["synth-toy", "--per-group", "2", "--seed", "3", "--out", p(&toy)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = toy.join("manifest.csv");

    let o = agegan(&["ingest", p(&manifest)]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("4 entries, 0 skipped"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 young, 2 old, 0 excluded"));

    assert!(agegan(&["preprocess", p(&manifest), "--out", p(&store)]).status.success());
    for cmd in ["train-e2e", "train-e2f"] {
        let o = agegan(&[cmd, p(&store), "--config", p(&cfg), "--out", p(&models)]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(models.join("e2e.ckpt").is_file() && models.join("e2f.ckpt").is_file());
    assert!(fs::read_to_string(models.join("e2e_metrics.csv")).unwrap().lines().count() == 2);

    let o = agegan(&["infer", "--config", p(&cfg), "--models", p(&models), "--manifest", p(&manifest), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("toy_0000_young_output.png").is_file());
    assert!(!out.join("toy_0000_old_output.png").exists());

    let o = agegan(&[
        "infer",
        "--config",
        p(&cfg),
        "--models",
        p(&models),
        "--direction",
        "old-to-young",
        "--manifest",
        p(&manifest),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success());
    assert!(out.join("toy_0000_old_grid.png").is_file());

    let o = agegan(&["ablate", p(&store), "--config", p(&cfg), "--out", p(&d.join("ablate"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("model B interior canny pixels: 0"));

    let o = agegan(&["gradcheck", "--instances", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_error(&agegan(&["train-e2e", p(d), "--out", p(d)]), 2, "config");
    assert_error(&agegan(&["frobnicate"]), 2, "config");

    let cfg = d.join("bad.cfg");
    fs::write(&cfg, "seed = 1\nwhat = 2\n").unwrap();
    let o = agegan(&["train-e2f", p(d), "--config", p(&cfg), "--out", p(d)]);
    assert_error(&o, 2, "config");
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    fs::write(&cfg, TINY).unwrap();
    let o = agegan(&["infer", "--config", p(&cfg), "--models", p(d), "--direction", "sideways", "--out", p(d)]);
    assert_error(&o, 2, "config");
}

#[test]
fn data_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let manifest = d.join("m.csv");
    fs::write(&manifest, "image,landmarks,x,y,w,h,age\na.png,a.txt,0,0,x,10,30\n").unwrap();
    assert_error(&agegan(&["ingest", p(&manifest)]), 3, "data");

    let cfg = d.join("run.cfg");
    fs::write(&cfg, TINY).unwrap();
    assert_error(&agegan(&["train-e2e", p(&d.join("nostore")), "--config", p(&cfg), "--out", p(d)]), 3, "data");
}

#[test]
fn divergence_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let toy = d.join("toy");
    assert!(agegan(&["synth-toy", "--per-group", "1", "--out", p(&toy)]).status.success());
    let store = d.join("store");
    assert!(agegan(&["preprocess", p(&toy.join("manifest.csv")), "--out", p(&store)]).status.success());
    let cfg = d.join("run.cfg");
    fs::write(&cfg, format!("{TINY}e2f_epochs = 3\ne2f_lr = 1e300\n").replace("e2f_epochs = 1\n", "")).unwrap();
    assert_error(&agegan(&["train-e2f", p(&store), "--config", p(&cfg), "--out", p(d)]), 4, "numeric");
}
