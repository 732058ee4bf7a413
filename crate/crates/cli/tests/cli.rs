use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tukey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tukey")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn square(dir: &Path) -> String {
    file(dir, "square.csv", "1,1\n-1,1\n-1,-1\n1,-1\n").display().to_string()
}

#[test]
fn depth_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sq = square(dir.path());
    let o = tukey(&["depth", "--input", &sq, "--point", "0,0", "--method", "exact2d"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "depth 2/4 (0.5)\n");
    let o = tukey(&["depth", "--input", &sq, "--point", "5,5"]);
    assert_eq!(stdout(&o), "depth 0/4 (0)\n");
    let o = tukey(&["depth", "--input", &sq, "--point", "-1,0", "--method", "net"]);
    assert_eq!(stdout(&o), "depth 1/4 (0.25) upper-bound\n");
}

#[test]
fn depth_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = tukey(&["depth", "--input", missing.to_str().unwrap(), "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.csv"));

    let bad = file(dir.path(), "bad.csv", "0,0\n1,1\n2,oops\n");
    let o = tukey(&["depth", "--input", bad.to_str().unwrap(), "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let sq = square(dir.path());
    let o = tukey(&["depth", "--input", &sq, "--point", "0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    let cube = file(dir.path(), "cube.csv", "0,0,0\n1,0,0\n0,1,0\n0,0,1\n");
    let o = tukey(&["depth", "--input", cube.to_str().unwrap(), "--point", "0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn levelset_on_axes_is_the_box() {
    let dir = tempfile::tempdir().unwrap();
    let sq = square(dir.path());
    let out = dir.path().join("set.csv");
    let o = tukey(&[
        "levelset", "--input", &sq, "--alpha", "0.25", "--method", "sampled", "--directions", "4", "--axes",
        "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "status nonempty constraints 4\n");
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert_eq!(r[2], 1.0);
        assert_eq!(r[0].abs() + r[1].abs(), 1.0);
    }
}

#[test]
fn levelset_validation_and_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let sq = square(dir.path());
    assert_eq!(tukey(&["levelset", "--input", &sq, "--alpha", "1.5"]).status.code(), Some(2));
    let cube = file(dir.path(), "cube.csv", "0,0,0\n1,0,0\n0,1,0\n0,0,1\n");
    let o = tukey(&["levelset", "--input", cube.to_str().unwrap(), "--alpha", "0.3", "--method", "exact2d"]);
    assert_eq!(o.status.code(), Some(2));

    // depth 3/4 is never reached, so the truncated set is {0}
    let o = tukey(&["levelset", "--input", &sq, "--alpha", "0.75", "--truncate-log-n"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("status nonempty"));
    let o2 = tukey(&["levelset", "--input", &sq, "--alpha", "0.75"]);
    assert!(stderr(&o2).contains("status empty"));
}

#[test]
fn hausdorff_outputs_and_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let a = file(dir.path(), "a.csv", "1,0,1\n-1,0,0\n0,1,1\n0,-1,0\n");
    let b = file(dir.path(), "b.csv", "1,0,2\n-1,0,0\n0,1,2\n0,-1,0\n");
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());

    let o = tukey(&["hausdorff", "--a", a, "--b", a]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("0.000000000000 "));

    let o = tukey(&["hausdorff", "--a", a, "--b", b, "--net-delta", "0.001"]);
    let nums: Vec<f64> = stdout(&o).split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert_eq!(nums.len(), 2);
    assert!(nums[0] <= 2f64.sqrt() + 1e-9 && 2f64.sqrt() <= nums[0] + nums[1]);

    let empty = file(dir.path(), "e.csv", "1,0,-1\n-1,0,0\n0,1,1\n0,-1,0\n");
    let o = tukey(&["hausdorff", "--a", empty.to_str().unwrap(), "--b", a]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o).trim(), "empty");
    let strip = file(dir.path(), "s.csv", "1,0,1\n-1,0,0\n");
    let o = tukey(&["hausdorff", "--a", strip.to_str().unwrap(), "--b", a]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o).trim(), "unbounded");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(tukey(&["bogus"]).status.code(), Some(2));
    assert_eq!(tukey(&["experiment", "bogus"]).status.code(), Some(2));
    let o = tukey(&["experiment", "rate", "--reps", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn net_experiment_writes_bound_column() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = tukey(&["experiment", "net", "--m-grid", "10,100", "--reps", "50", "--seed", "3", "--output-dir", d]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("net_raw.csv")).unwrap();
    assert!(text.lines().next().unwrap().split(',').any(|c| c == "bound"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn rate_experiment_is_reproducible_and_config_merges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = file(
        dir.path(),
        "cfg.json",
        r#"{"dist":{"kind":"gaussian","dim":2},"alpha":0.2,"n_grid":[100,200],"reps":3,
            "directions":{"rule":"fixed","m":200},"net_delta":0.05,"seed":11}"#,
    );
    let run = |sub: &str, extra: &[&str]| {
        let out = dir.path().join(sub);
        let mut args = vec!["experiment", "rate", "--config", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = tukey(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        out
    };
    let one = run("one", &["--threads", "2"]);
    let two = run("two", &[]);
    let raw1 = std::fs::read(one.join("rate_raw.csv")).unwrap();
    assert_eq!(raw1, std::fs::read(two.join("rate_raw.csv")).unwrap());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(one.join("rate_summary.json")).unwrap()).unwrap();
    assert!(summary["slope"].is_number());
    assert_eq!(summary["config"]["base_seed"], 11);

    // flags win over the file
    let three = run("three", &["--reps", "2", "--seed", "12"]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(three.join("rate_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["reps"], 2);
    assert_eq!(summary["config"]["base_seed"], 12);
    let raw = std::fs::read_to_string(three.join("rate_raw.csv")).unwrap();
    assert_eq!(raw.lines().next().unwrap(), "n,rep,seed,M,hausdorff,certified_error");
    assert_eq!(raw.lines().count(), 5);
}

#[test]
fn tail_experiment_marks_domain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = tukey(&[
        "experiment", "tail", "--n-grid", "200", "--reps", "4", "--directions", "200", "--net-delta", "0.05",
        "--x-grid", "1,2", "--exponent-variant", "theorem", "--output-dir", d,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("tail_raw.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(stdout(&o).contains("out-of-domain"));
}
