use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &[&str] =
    &["--set", "total_pop=200", "--set", "n_pop=20", "--set", "init_pop=40", "--set", "n_episodes=5"];

fn qdtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdtree")).args(args).output().expect("spawn qdtree")
}

fn ok(args: &[&str]) -> Output {
    let out = qdtree(args);
    assert!(out.status.success(), "qdtree {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn fails(args: &[&str], needle: &str) {
    let out = qdtree(args);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(!out.status.success(), "qdtree {args:?} unexpectedly succeeded");
    assert!(stderr.contains(needle), "stderr of {args:?} lacks {needle:?}:\n{stderr}");
}

fn run(dir: &Path, extra: &[&str]) {
    let mut args = vec!["run", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    ok(&args);
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn me_run_writes_expected_files_and_reruns_bit_identically() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&a, &["--algo", "me", "--env", "cartpole", "--runs", "2", "--seed", "7"]);
    run(&b, &["--algo", "me", "--env", "cartpole", "--runs", "2", "--seed", "7"]);
    for r in ["run_0", "run_1"] {
        for f in ["trend.csv", "archive.csv", "coverage.csv"] {
            assert_eq!(read(a.join(r).join(f)), read(b.join(r).join(f)), "{r}/{f}");
        }
        assert!(a.join(r).join("meta.txt").is_file());
        assert!(!a.join(r).join("evals.csv").exists());
    }
    let snapshot = read(a.join("run_1/config.snapshot"));
    assert!(snapshot.contains("seed = 8\n"), "{snapshot}");
    assert!(snapshot.contains("runs = 1\n"));
    assert_eq!(
        read(a.join("run_0/archive.csv")).lines().next().unwrap(),
        "entropy_bin,depth_bin,fitness,entropy,depth,eval_seed,genotype"
    );
    let trend = read(a.join("run_0/trend.csv"));
    assert_eq!(trend.lines().last().unwrap().split(',').next().unwrap(), "200");
    // Replicates differ.
    assert_ne!(read(a.join("run_0/archive.csv")), read(a.join("run_1/archive.csv")));
}

#[test]
fn snapshot_reproduces_its_run() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    run(&a, &["--algo", "ge", "--env", "cartpole", "--runs", "2", "--seed", "3"]);
    let again = tmp.path().join("again");
    ok(&["run", "--config", p(&a.join("run_1/config.snapshot")), "--out", p(&again)]);
    for f in ["trend.csv", "population.csv"] {
        assert_eq!(read(a.join("run_1").join(f)), read(again.join("run_0").join(f)), "{f}");
    }
}

#[test]
fn ge_pipeline_project_aggregate_export() {
    let tmp = TempDir::new().unwrap();
    let ge = tmp.path().join("ge");
    run(&ge, &["--algo", "ge", "--env", "cartpole", "--runs", "2", "--log-all-evals"]);
    let evals = read(ge.join("run_0/evals.csv"));
    assert_eq!(evals.lines().count(), 201);

    // Trend-only aggregation before projection.
    let agg = tmp.path().join("agg");
    ok(&["aggregate", "--out", p(&agg), p(&ge)]);
    assert!(agg.join("trend_summary.csv").is_file());
    assert!(!agg.join("average_map.csv").exists());

    for r in ["run_0", "run_1"] {
        ok(&["project-ge-map", p(&ge.join(r))]);
    }
    let first = read(ge.join("run_0/archive.csv"));
    ok(&["project-ge-map", p(&ge.join("run_0"))]);
    assert_eq!(read(ge.join("run_0/archive.csv")), first, "projection is idempotent");

    ok(&["aggregate", "--out", p(&agg), p(&ge.join("run_0")), p(&ge.join("run_1"))]);
    let avg = read(agg.join("average_map.csv"));
    assert_eq!(avg.lines().count(), 101);
    assert_eq!(avg.lines().next().unwrap(), "entropy_bin,depth_bin,fitness,runs");
    let summary = read(agg.join("trend_summary.csv"));
    assert_eq!(summary.lines().count(), 1 + 200 / 20);

    let out1 = ok(&["export-tree", p(&ge.join("run_0")), "--best"]);
    let text1 = read(ge.join("run_0/tree_best.txt"));
    let out2 = ok(&["export-tree", p(&ge.join("run_0")), "--best"]);
    assert_eq!(out1.stdout, out2.stdout);
    assert_eq!(read(ge.join("run_0/tree_best.txt")), text1);
    assert!(text1.starts_with("# best: fitness "), "{text1}");
}

#[test]
fn me_export_cell_and_best() {
    let tmp = TempDir::new().unwrap();
    let me = tmp.path().join("me");
    run(&me, &["--algo", "me", "--env", "mountaincar", "--runs", "1"]);
    let archive = read(me.join("run_0/archive.csv"));
    let row = archive.lines().nth(1).expect("archive has an elite");
    let mut f = row.split(',');
    let cell = format!("{},{}", f.next().unwrap(), f.next().unwrap());
    let out = ok(&["export-tree", p(&me.join("run_0")), "--cell", &cell]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Accelerate") || text.contains("action"), "{text}");
    ok(&["export-tree", p(&me.join("run_0")), "--best"]);
}

#[test]
fn invalid_configs_write_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("never");
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "algo = me\nenv = cartpole\nwarp_drive = on\n").unwrap();
    fails(&["run", "--config", p(&cfg), "--out", p(&out)], "unknown key");
    fails(&["run", "--algo", "ge", "--env", "cartpole", "--set", "n_pop=7", "--out", p(&out)], "n_pop");
    fails(&["run", "--algo", "me", "--env", "cartpole", "--set", "max_value=100", "--out", p(&out)], "max_value");
    fails(&["run", "--algo", "xx", "--env", "cartpole", "--out", p(&out)], "unknown algorithm");
    fails(&["run", "--env", "cartpole", "--out", p(&out)], "algorithm not set");
    fs::write(&cfg, "algo = me\nenv cartpole\n").unwrap();
    fails(&["run", "--config", p(&cfg), "--out", p(&out)], "bad.cfg:2");
    fails(&["run", "--config", p(&tmp.path().join("missing.cfg"))], "missing.cfg");
    assert!(!out.exists());
}

#[test]
fn error_cases_of_the_other_commands() {
    let tmp = TempDir::new().unwrap();
    let (ge, me) = (tmp.path().join("ge"), tmp.path().join("me"));
    run(&ge, &["--algo", "ge", "--env", "cartpole", "--runs", "1"]);
    run(&me, &["--algo", "me", "--env", "cartpole", "--runs", "1"]);

    fails(&["project-ge-map", p(&ge.join("run_0"))], "--log-all-evals");
    fails(&["project-ge-map", p(&me.join("run_0"))], "not a GE run");
    fails(&["aggregate", "--out", p(&tmp.path().join("agg")), p(&ge), p(&me)], "different configurations");
    fails(&["aggregate", "--out", p(&tmp.path().join("agg")), p(tmp.path())], "no run directories");
    fails(&["export-tree", p(&ge.join("run_0")), "--cell", "0,0"], "project-ge-map");
    fails(&["export-tree", p(&me.join("run_0")), "--cell", "12,0"], "outside");

    let archive = read(me.join("run_0/archive.csv"));
    let occupied: Vec<String> =
        archive.lines().skip(1).map(|l| l.splitn(3, ',').take(2).collect::<Vec<_>>().join(",")).collect();
    let empty = (0..10).flat_map(|e| (0..10).map(move |d| format!("{e},{d}"))).find(|c| !occupied.contains(c)).unwrap();
    fails(&["export-tree", p(&me.join("run_0")), "--cell", &empty], "is empty");

    // A tampered fitness no longer matches re-evaluation.
    let mut lines: Vec<String> = archive.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(str::to_string).collect();
    fields[2] = "12345.5".into();
    lines[1] = fields.join(",");
    let cell = format!("{},{}", fields[0], fields[1]);
    fs::write(me.join("run_0/archive.csv"), lines.join("\n") + "\n").unwrap();
    fails(&["export-tree", p(&me.join("run_0")), "--cell", &cell], "re-evaluation");

    fs::write(me.join("run_0/archive.csv"), "nonsense\n").unwrap();
    fails(&["export-tree", p(&me.join("run_0")), "--best"], "unexpected header");
}
