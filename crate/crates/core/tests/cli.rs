use std::path::Path;
use std::process::{Command, Output};

fn rankdepth(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankdepth")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn trim_then_pairwise_reports_sst() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = rankdepth(d, &["sample", "--model", "mixture", "--n", "5", "--phi", "0.8", "--phi2", "0.5", "--count", "80", "--count2", "70", "--seed", "12", "--out", "mix.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rankdepth(d, &["trim", "mix.csv", "--out", "trimmed.csv", "--trace", "trace.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,removed_count"));
    let o = rankdepth(d, &["pairwise", "trimmed.csv", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "SST");
    assert_eq!(v["cycles"], 0);
    let o = rankdepth(d, &["aggregate", "trimmed.csv", "--method", "kemeny-sst", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn kemeny_sst_rejects_cyclic_data_and_names_the_triple() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cycle.csv"), "1,2,3\n3,1,2\n2,3,1\n1,2,3\n3,1,2\n2,3,1\n1,2,3\n").unwrap();
    let o = rankdepth(dir.path(), &["aggregate", "cycle.csv", "--method", "kemeny-sst"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("items ("), "{}", stderr(&o));
}

#[test]
fn kemeny_brute_force_and_borda_agree_on_a_clear_majority() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.csv"), "a,b,c\n1,2,3\n1,2,3\n3,2,1\n").unwrap();
    for method in ["kemeny-bf", "borda"] {
        let o = rankdepth(dir.path(), &["aggregate", "s.csv", "--method", method]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), "1,2,3\n", "{method}");
    }
    let o = rankdepth(dir.path(), &["aggregate", "s.csv", "--method", "dt-borda"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_errors_exit_two_and_name_the_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "1,2,3\n1,1,3\n").unwrap();
    let o = rankdepth(dir.path(), &["depth", "bad.csv", "--out", "depths.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
    assert!(!dir.path().join("depths.csv").exists());
}

#[test]
fn stochastic_commands_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = rankdepth(dir.path(), &["sample", "--model", "pl", "--n", "4", "--count", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rankdepth(dir.path(), &["sample", "--model", "pl", "--weights", "4,3,2,1", "--count", "5", "--seed", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn depth_normalized_lies_in_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.csv"), "2,1,3,4\n1,2,3,4\n4,3,2,1\n").unwrap();
    for metric in ["kendall", "rho", "footrule", "hamming"] {
        let o = rankdepth(dir.path(), &["depth", "s.csv", "--metric", metric, "--normalize", "--format", "json"]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        for d in v["depths"].as_array().unwrap() {
            let d = d.as_f64().unwrap();
            assert!((0.0..=1.0).contains(&d), "{metric}: {d}");
        }
    }
    let o = rankdepth(dir.path(), &["depth", "s.csv", "--exhaustive"]);
    assert_eq!(stdout(&o).lines().count(), 25);
}

#[test]
fn ordering_input_matches_ranks_input() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ranks.csv"), "2,3,1\n1,2,3\n").unwrap();
    std::fs::write(dir.path().join("order.csv"), "3,1,2\n1,2,3\n").unwrap();
    let a = rankdepth(dir.path(), &["depth", "ranks.csv"]);
    let b = rankdepth(dir.path(), &["depth", "order.csv", "--input-format", "ordering"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn repro_bundles_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = rankdepth(dir.path(), &["repro", "htest", "--out-dir", "out", "--reps", "5", "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
    let o = rankdepth(dir.path(), &["repro", "ddplot", "--out-dir", "dd", "--seed", "4"]);
    assert!(o.status.success());
    for tag in ["a", "b", "c", "d"] {
        assert!(dir.path().join(format!("dd/ddplot_{tag}.csv")).exists());
    }
}
