//! End-to-end runs of the `hitsignal` binary on short chains.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SHORT: &str = r#"
seed = 11

[chain]
iterations = 4000
burn_in = 1000
thin = 3

[[synth.metrics]]
name = "SIG"
players = 120
p1 = 0.6

[[synth.metrics]]
name = "NUL"
players = 120
p1 = 0.0

[pca]
reps = 50
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hitsignal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, SHORT).unwrap();
    path
}

fn stage(cfg: &Path, out: &Path, cmd: &str) -> Output {
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), cmd]);
    assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn column(path: &Path, key: &str, col: &str) -> BTreeMap<String, String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().clone();
    let k = h.iter().position(|x| x == key).unwrap();
    let c = h.iter().position(|x| x == col).unwrap();
    r.records().map(|x| x.unwrap()).map(|x| (x[k].to_string(), x[c].to_string())).collect()
}

/// Every file under `root` except the echoed config, which names the root.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "run_config.toml" {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn synth_fit_report_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = tmp.path().join("out");
    for cmd in ["synth", "fit", "report"] {
        stage(&cfg, &out, cmd);
    }
    for f in ["panels/SIG.csv", "truth/NUL.csv", "fits/SIG.draws.csv", "fits/NUL.meta.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    for f in ["summary.csv", "top_players.csv", "signal.svg", "signal_zoom.svg", "players/SIG.csv"] {
        assert!(out.join("report").join(f).is_file(), "{f}");
    }
    let p1 = column(&out.join("report/summary.csv"), "metric", "p1_hat");
    let sig: f64 = p1["SIG"].parse().unwrap();
    let nul: f64 = p1["NUL"].parse().unwrap();
    assert!((sig - 0.6).abs() < 0.2, "signal p1 {sig}");
    assert!(nul < 0.3, "null p1 {nul}");
    let svg = fs::read_to_string(out.join("report/signal.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        for cmd in ["synth", "fit", "report"] {
            stage(&cfg, out, cmd);
        }
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(v == &tb[k], "{} differs", k.display());
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let mut trees = Vec::new();
    for jobs in ["1", "4"] {
        let out = tmp.path().join(jobs);
        for cmd in ["synth", "fit"] {
            let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs, cmd]);
            assert!(o.status.success());
        }
        trees.push(tree(&out));
    }
    assert_eq!(trees[0], trees[1]);
}

#[test]
fn lasso_and_pca_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = tmp.path().join("out");
    stage(&cfg, &out, "synth");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--metrics",
        "SIG",
        "lasso",
    ]);
    assert!(o.status.success());
    let files: Vec<_> = fs::read_dir(out.join("lasso")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 2, "{files:?}");
    let frac = column(&out.join("lasso/summary.csv"), "metric", "chosen_fraction");
    let f: f64 = frac["SIG"].parse().unwrap();
    assert!(f > 0.2, "chosen fraction {f}");

    stage(&cfg, &out, "pca");
    let spectrum = fs::read_to_string(out.join("pca/all.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 3, "{spectrum}");
    assert!(out.join("pca/all.svg").is_file());
    let count = column(&out.join("pca/summary.csv"), "set", "significant_count");
    assert!(count.contains_key("all"));
}

#[test]
fn ingest_writes_one_panel_per_selected_metric() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = tmp.path().join("raw.csv");
    let mut text = String::from("player_id,season,PA,AB,H,HR,BB,K\n");
    for p in 0..30 {
        for s in 0..4 {
            let pa = 300 + 7 * p + 11 * s;
            let ab = pa - 30 - (p % 5);
            let h = ab / 4 + (p * 3 + s) % 17;
            let hr = (p + 2 * s) % 25;
            let bb = 20 + (p * 7 + s) % 30;
            let k = 50 + (p * 13 + 5 * s) % 60;
            text += &format!("p{p},{},{pa},{ab},{h},{hr},{bb},{k}\n", 2001 + s);
        }
    }
    fs::write(&raw, text).unwrap();
    let out = tmp.path().join("out");
    let o = run(&["--out", out.to_str().unwrap(), "--metrics", "AVG,HR,BB/PA,K", "ingest", "--raw", raw.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> =
        fs::read_dir(out.join("panels")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 5, "{names:?}");
    assert!(names.contains(&"normality.csv".to_string()));
    let obs = column(&out.join("panels/normality.csv"), "metric", "observations");
    assert_eq!(obs.len(), 4);
    assert!(obs.values().all(|v| v == "120"));
}

#[test]
fn exit_codes_follow_error_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();

    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--bogus-flag", "fit"]).status.code(), Some(1));
    assert_eq!(run(&["--out", o, "ingest"]).status.code(), Some(1));
    let missing = tmp.path().join("nope.csv");
    assert_eq!(run(&["--out", o, "ingest", "--raw", missing.to_str().unwrap()]).status.code(), Some(2));

    let raw = tmp.path().join("raw.csv");
    fs::write(&raw, "player_id,season,PA,H,AB\na,2001,10,3,9\n").unwrap();
    let unknown = run(&["--out", o, "--metrics", "NOPE", "ingest", "--raw", raw.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(1));

    let bad_config = tmp.path().join("bad.toml");
    fs::write(&bad_config, "seed = 1\nunknown_key = 2\n").unwrap();
    assert_eq!(run(&["--config", bad_config.to_str().unwrap(), "config"]).status.code(), Some(1));
}

#[test]
fn config_command_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let o = run(&["--config", cfg.to_str().unwrap(), "--seed", "99", "config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("seed = 99"));
    let again = tmp.path().join("again.toml");
    fs::write(&again, &text).unwrap();
    let o2 = run(&["--config", again.to_str().unwrap(), "config"]);
    assert_eq!(String::from_utf8(o2.stdout).unwrap(), text);
}
