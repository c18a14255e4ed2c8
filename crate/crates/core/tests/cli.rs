use std::path::Path;
use std::process::{Command, Output};

fn edgecache(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgecache")).args(args).output().unwrap()
}

fn write_template(dir: &Path) -> String {
    let path = dir.join("template.toml");
    std::fs::write(
        &path,
        "node_count = 3\ncontent_count = 10\nmen_capacity_mb = 400.0\nbs_capacity_mb = 400.0\n\n[solver]\nmax_nodes = 500\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_template(dir.path());
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.csv"));
        let o = edgecache(&[
            "sweep", "--config", &config, "--axis", "content_count", "--values", "4,6", "--reps", "2", "--seed", "5",
            "--policy", "greedy,guaranteed-greedy,distributed,oracle", "--per-node", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8(outputs[0].clone()).unwrap().lines().count(), 1 + 2 * 4 * 2);
}

#[test]
fn solve_and_hit_rates_print_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_template(dir.path());
    let o = edgecache(&["solve", "--config", &config, "--template", "--seed", "2", "--policy", "locally-optimal"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("policy,seed,objective,mean_node_delay"));
    assert!(text.lines().nth(1).unwrap().starts_with("locally-optimal,2,"));

    let a = edgecache(&["hit-rates", "--config", &config, "--template", "--count", "500"]);
    let b = edgecache(&["hit-rates", "--config", &config, "--template", "--count", "500"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "policy,n,local_hit,global_hit,h_tot,h_star_tot,seed,count");
    // Greedy global hits are hidden by default.
    let greedy = text.lines().find(|l| l.starts_with("greedy,1,")).unwrap();
    assert_eq!(greedy.split(',').nth(3).unwrap(), "");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_template(dir.path());
    assert_eq!(edgecache(&["solve", "--config", "/nonexistent/x.toml"]).status.code(), Some(2));
    assert_eq!(edgecache(&["sweep", "--values", "2,1"]).status.code(), Some(2));
    assert_eq!(edgecache(&["sweep", "--values", "1", "--policy", "nearest"]).status.code(), Some(2));
    assert_eq!(edgecache(&["solve", "--policy", "centralized"]).status.code(), Some(3));
    assert_eq!(edgecache(&["oracle", "--config", &config, "--template", "--budget", "3"]).status.code(), Some(3));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "node_count = 3\nbogus = 1\n").unwrap();
    assert_eq!(edgecache(&["sweep", "--config", bad.to_str().unwrap(), "--values", "1"]).status.code(), Some(2));
    // A one-node budget on a fractional root stops at the limit.
    let tight = dir.path().join("tight.toml");
    std::fs::write(&tight, "node_count = 3\ncontent_count = 6\nmen_capacity_mb = 300.0\nbs_capacity_mb = 300.0\n[solver]\nmax_nodes = 1\neta = 0.0\n").unwrap();
    let o = edgecache(&["solve", "--config", tight.to_str().unwrap(), "--template", "--policy", "centralized"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8(o.stdout).unwrap().contains("node_limit"));
}
