use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const UNIFORM: &str = r#"{"angular":{"d":2,"k":2,"vertex_mass":[0.0,0.0],"interior":[{"alpha":[1,1],"w":1.0}]},"margins":{"family":"simple"}}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxstable")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) {
    let o = run(dir, args);
    assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
}

fn uniform_data(dir: &Path, n: usize) {
    fs::write(dir.join("truth.json"), UNIFORM).unwrap();
    ok(dir, &["simulate", "--model", "truth.json", "--n", &n.to_string(), "--seed", "3", "--out", "data.csv"]);
}

#[test]
fn simulate_example_contract() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["simulate", "--example", "biv-exponential", "--n", "1000", "--seed", "7", "--out", "a.csv"]);
    let text = fs::read_to_string(t.path().join("a.csv")).unwrap();
    assert!(text.ends_with('\n'));
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1000);
    for r in rows {
        let cells: Vec<f64> = r.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 2);
    }
    assert!(t.path().join("a.csv.manifest.json").exists());
}

#[test]
fn simulate_same_seed_same_bytes() {
    let t = tempfile::tempdir().unwrap();
    for out in ["a.csv", "b.csv"] {
        ok(t.path(), &["simulate", "--example", "joe-b5-pareto", "--n", "300", "--seed", "11", "--out", out]);
    }
    assert_eq!(fs::read(t.path().join("a.csv")).unwrap(), fs::read(t.path().join("b.csv")).unwrap());
}

#[test]
fn simulate_names_violated_constraint() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("bad.json"), UNIFORM.replace("\"w\":1.0", "\"w\":0.5")).unwrap();
    let o = run(t.path(), &["simulate", "--model", "bad.json", "--n", "5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("R2"), "{}", stderr(&o));
}

#[test]
fn fit_writes_expected_chain_length() {
    let t = tempfile::tempdir().unwrap();
    uniform_data(t.path(), 100);
    ok(t.path(), &["fit", "--data", "data.csv", "--iterations", "200", "--burn-in", "50", "--thin", "3", "--out", "f"]);
    let chain = fs::read_to_string(t.path().join("f/chain-0.jsonl")).unwrap();
    assert_eq!(chain.lines().count(), 50);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.path().join("f/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["posterior"]["states"], 50);
    assert!(t.path().join("f/manifest.json").exists());
}

#[test]
fn resume_matches_uninterrupted_run() {
    let t = tempfile::tempdir().unwrap();
    uniform_data(t.path(), 80);
    let base = ["fit", "--data", "data.csv", "--iterations", "300", "--burn-in", "100", "--chains", "2", "--seed", "5"];
    let with = |extra: &[&'static str]| base.iter().copied().chain(extra.iter().copied()).collect::<Vec<_>>();
    ok(t.path(), &with(&["--out", "full"]));
    ok(t.path(), &with(&["--out", "part", "--until", "170"]));
    // simulate a write cut short mid-line
    let p = t.path().join("part/chain-1.jsonl");
    let bytes = fs::read(&p).unwrap();
    fs::write(&p, &bytes[..bytes.len() - 40]).unwrap();
    ok(t.path(), &with(&["--out", "part", "--resume"]));
    for f in ["chain-0.jsonl", "chain-1.jsonl", "summary.json"] {
        assert_eq!(fs::read(t.path().join("full").join(f)).unwrap(), fs::read(t.path().join("part").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn weibull_without_compact_shape_prior_is_config_error() {
    let t = tempfile::tempdir().unwrap();
    uniform_data(t.path(), 30);
    let o = run(t.path(), &["fit", "--data", "data.csv", "--family", "weibull", "--iterations", "10", "--burn-in", "5"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    fs::write(t.path().join("prior.json"), r#"{"margins":{"kernels":{"shape":{"kind":"uniform","lower":1.5,"upper":6.0}}}}"#).unwrap();
    let o = run(
        t.path(),
        &["fit", "--data", "data.csv", "--family", "weibull", "--prior", "prior.json", "--iterations", "10", "--burn-in", "5"],
    );
    assert_ne!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn out_of_support_rows_exit_3() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("data.csv"), "1.0,2.0\n0.5,-1.0\n3.0,1.0\n").unwrap();
    let o = run(t.path(), &["fit", "--data", "data.csv", "--iterations", "10", "--burn-in", "5"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
}

#[test]
fn diagnose_contract() {
    let t = tempfile::tempdir().unwrap();
    uniform_data(t.path(), 200);
    ok(t.path(), &["fit", "--data", "data.csv", "--iterations", "600", "--burn-in", "300", "--out", "f"]);

    ok(t.path(), &["diagnose", "--chain", "f", "--out", "plain.json"]);
    let plain: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.path().join("plain.json")).unwrap()).unwrap();
    assert!(plain["distances"].is_null());
    assert!(plain["posterior"]["states"].as_u64().unwrap() > 0);

    ok(t.path(), &["diagnose", "--chain", "f", "--truth", "truth.json", "--svg", "svg", "--out", "d.json"]);
    let d: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.path().join("d.json")).unwrap()).unwrap();
    for m in ["ks-angular", "pickands-sup", "l1-angular"] {
        assert!(d["distances"][m].as_f64().unwrap() >= 0.0, "{m}");
    }
    assert!(d["distances"]["hellinger"]["value"].as_f64().unwrap() < 0.05);
    assert!(t.path().join("svg/pickands.svg").exists());

    assert_eq!(code(&run(t.path(), &["diagnose", "--chain", "missing.jsonl"])), 2);

    let mut text = fs::read_to_string(t.path().join("f/chain-0.jsonl")).unwrap();
    let lines = text.lines().count();
    text.push_str("{not json\n");
    fs::write(t.path().join("broken.jsonl"), text).unwrap();
    let o = run(t.path(), &["diagnose", "--chain", "broken.jsonl"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains(&format!("line {}", lines + 1)), "{}", stderr(&o));
}

#[test]
fn experiment_contract() {
    let t = tempfile::tempdir().unwrap();
    let cfg = |seeds: &str, kind: &str| {
        format!(
            r#"{{"generator":{{"kind":"{kind}","model":{UNIFORM}}},"n_grid":[40],"seeds":{seeds},"sampler":{{"iterations":200,"burn_in":100}},"mc_samples":100}}"#
        )
    };
    fs::write(t.path().join("one.json"), cfg("[1]", "within-model")).unwrap();
    ok(t.path(), &["experiment", "--config", "one.json", "--out", "one"]);
    for f in ["report.json", "report.csv", "ks-angular.svg", "hellinger.svg", "manifest.json"] {
        assert!(t.path().join("one").join(f).exists(), "{f}");
    }

    fs::write(t.path().join("empty.json"), cfg("[]", "within-model")).unwrap();
    ok(t.path(), &["experiment", "--config", "empty.json", "--out", "empty"]);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.path().join("empty/report.json")).unwrap()).unwrap();
    assert_eq!(r["cells"].as_array().unwrap().len(), 0);

    fs::write(t.path().join("bogus.json"), cfg("[1]", "no-such-generator")).unwrap();
    assert_eq!(code(&run(t.path(), &["experiment", "--config", "bogus.json"])), 2);
}

#[test]
fn rerun_reproduces_and_detects_changed_inputs() {
    let t = tempfile::tempdir().unwrap();
    uniform_data(t.path(), 60);
    ok(t.path(), &["fit", "--data", "data.csv", "--iterations", "150", "--burn-in", "50", "--chains", "2", "--out", "f"]);
    ok(t.path(), &["rerun", "--manifest", "f/manifest.json"]);
    ok(t.path(), &["rerun", "--manifest", "data.csv.manifest.json"]);
    fs::write(t.path().join("data.csv"), "1.0,1.0\n").unwrap();
    assert_eq!(code(&run(t.path(), &["rerun", "--manifest", "f/manifest.json"])), 4);
    fs::write(t.path().join("junk.json"), "not a manifest").unwrap();
    assert_eq!(code(&run(t.path(), &["rerun", "--manifest", "junk.json"])), 4);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let t = tempfile::tempdir().unwrap();
    uniform_data(t.path(), 60);
    for (threads, out) in [("1", "a"), ("4", "b")] {
        let o = Command::new(env!("CARGO_BIN_EXE_maxstable"))
            .current_dir(t.path())
            .env("MAXSTABLE_THREADS", threads)
            .args(["fit", "--data", "data.csv", "--iterations", "120", "--burn-in", "20", "--chains", "3", "--out", out])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for c in 0..3 {
        let f = format!("chain-{c}.jsonl");
        assert_eq!(fs::read(t.path().join("a").join(&f)).unwrap(), fs::read(t.path().join("b").join(&f)).unwrap());
    }
}
