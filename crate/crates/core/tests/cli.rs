use std::path::{Path, PathBuf};
use std::process::Command;

use cesaro_core::cli::run;

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn cesaro(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["cesaro"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scenario(name: &str) -> String {
    scenarios().join(name).to_str().unwrap().to_string()
}

fn write_scenario(dir: &Path, text: &str) -> String {
    let path = dir.join("s.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_canonical_matches_golden() {
    let (code, out, _) = cesaro(&["simulate", "--scenario", &scenario("canonical.toml")]);
    assert_eq!(code, 0);
    assert_eq!(out, golden("canonical_averages.csv"));
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[1].starts_with("0,1,7,-0.714285714285714"));
}

#[test]
fn simulate_exact_prints_fractions() {
    let (code, out, _) = cesaro(&["simulate", "--exact", "--scenario", &scenario("canonical.toml")]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(1).unwrap(), "0,1,7,-5/7,0,-5/7");
    assert_eq!(out.lines().nth(3).unwrap(), "0,1,79,-41/79,0,-41/79");
}

#[test]
fn simulate_writes_one_file_per_chain_and_start() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let (code, _, _) = cesaro(&["simulate", "--scenario", &scenario("mixed.toml"), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    let mut names: Vec<String> =
        std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 3 * 3 + 1);
    assert!(names.contains(&"chain2_n5.csv".to_string()));
    let combined = std::fs::read_to_string(out_dir.join("averages.csv")).unwrap();
    let chains: Vec<usize> = combined.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(chains.windows(2).all(|w| w[0] <= w[1]), "rows grouped by chain in ascending order");
    let single = std::fs::read_to_string(out_dir.join("chain0_n1.csv")).unwrap();
    assert_eq!(single.lines().count(), 1 + 11);
}

#[test]
fn empty_checkpoint_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "[checkpoints]\nt_min = 6\nt_max = 5\n\n[[chain]]\nvalue_tail = \"constant 1\"\n");
    let (code, _, err) = cesaro(&["simulate", "--scenario", &path]);
    assert_eq!(code, 2);
    assert!(err.contains("line 1") && err.contains("empty checkpoint range"), "{err}");
}

#[test]
fn config_errors_report_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "[scenario]\nseed = 1\n\n[[chain]]\nvalues = [1, 2]\nvalue_tail = \"sometimes\"\n");
    let (code, _, err) = cesaro(&["simulate", "--scenario", &path]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4"), "{err}");
    let path = write_scenario(dir.path(), "[scenario]\nseed = \"x\"\n");
    let (code, _, err) = cesaro(&["verify", "--scenario", &path]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
    let (code, _, err) = cesaro(&["simulate", "--scenario", "/nonexistent/s.toml"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot read"), "{err}");
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(cesaro(&["frobnicate"]).0, 2);
    assert_eq!(cesaro(&["verify", "--scenario", &scenario("canonical.toml"), "--suite", "nope"]).0, 2);
    assert_eq!(cesaro(&["verify", "--scenario", &scenario("canonical.toml"), "--threads", "0"]).0, 2);
    assert_eq!(cesaro(&["--help"]).0, 0);
}

#[test]
fn verify_theorem1_on_canonical_passes() {
    let (code, out, _) = cesaro(&["verify", "--suite", "theorem1", "--scenario", &scenario("canonical.toml")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("[PASS] theorem1 bounds chain 0 n 1"));
    let last: Vec<&str> = out.lines().rev().take(2).collect();
    assert_eq!(last, vec!["theorem1,2,2,0", "suite,checks,passed,failed"]);
}

#[test]
fn decreasing_weights_fail_verification() {
    let (code, out, _) = cesaro(&["verify", "--suite", "theorem1", "--scenario", &scenario("decreasing_weights.toml")]);
    assert_eq!(code, 1);
    assert!(out.contains("[FAIL] theorem1 contraction S"), "{out}");
    assert!(out.ends_with("theorem1,2,1,1\n"), "{out}");
}

#[test]
fn verify_exact_mode() {
    let (code, out, _) =
        cesaro(&["verify", "--suite", "theorem1", "--exact", "--scenario", &scenario("mixed.toml")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("(exact)"));
}

#[test]
fn verify_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let (code, out, _) =
        cesaro(&["verify", "--suite", "norms", "--scenario", &scenario("canonical.toml"), "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(path).unwrap(), out);
}

#[test]
fn seeded_runs_repeat() {
    let args = ["verify", "--suite", "residuality", "--seed", "99", "--scenario", &scenario("mixed.toml")];
    let a = cesaro(&args);
    assert_eq!(a.0, 0, "{}", a.1);
    assert_eq!(a, cesaro(&args));
}

#[test]
fn partition_outputs_match_golden() {
    for (name, file) in [("half_line.toml", "half_line_partition.txt"), ("motif.toml", "motif_partition.txt")] {
        let (code, out, err) = cesaro(&["partition", "--cells", "4", "--scenario", &scenario(name)]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(out, golden(file), "{name}");
    }
    let (_, out, _) = cesaro(&["partition", "--cells", "4", "--scenario", &scenario("half_line.toml")]);
    assert!(out.contains("z0 1 0"));
    assert!(out.contains("cell 0 1 measure 1 "));
}

#[test]
fn infeasible_partitions_exit_3() {
    let (code, _, err) = cesaro(&["partition", "--scenario", &scenario("no_level_set.toml")]);
    assert_eq!(code, 3, "{err}");
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        dir.path(),
        "[base]\nmotif_origin = 0\nmotif_period = 1\nmotif_pieces = [\"interval 0 0.5\", \"interval 0.5 1\"]\nmotif_values = [1, -1]\n",
    );
    let (code, _, err) = cesaro(&["partition", "--scenario", &path]);
    assert_eq!(code, 3);
    assert!(err.contains("complement too large"), "{err}");
    assert_eq!(cesaro(&["partition", "--scenario", &scenario("canonical.toml")]).0, 2);
}

#[test]
fn norm_row() {
    let (code, out, _) = cesaro(&["norm", "--scenario", &scenario("canonical.toml")]);
    assert_eq!(code, 0);
    assert_eq!(out, "l1,linf,l1_plus_linf,tau\ninf,1.0000000000000000,1.0000000000000000,1.0000000000000000\n");
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "[[chain]]\nweights = [0.5, 0.5, 2]\nweight_tail = \"constant 2\"\nvalues = [4, 2, 1]\n");
    // v* = 4 on (0, 1/2], 2 on (1/2, 1]: integral 3
    let (_, out, _) = cesaro(&["norm", "--scenario", &path]);
    assert_eq!(out, "l1,linf,l1_plus_linf,tau\n5.0000000000000000,4.0000000000000000,3.0000000000000000,2.0000000000000000\n");
}

#[test]
fn residuality_rows() {
    let (code, out, _) = cesaro(&["residuality", "--scenario", &scenario("mixed.toml")]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "chain,diameter");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("margin,") && lines[4].ends_with(",pass"));
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "[[chain]]\nvalue_tail = \"constant 1\"\n[[chain]]\n");
    let (code, out, _) = cesaro(&["residuality", "--scenario", &path]);
    assert_eq!(code, 1);
    assert!(out.ends_with("margin,0,fail\n"), "{out}");
}

#[test]
fn sigma_and_iterate() {
    assert_eq!(cesaro(&["sigma", "1", "8"]).1, "n,m,flips,sigma\n1,8,2,1\n");
    assert_eq!(cesaro(&["sigma", "0", "1"]).1, "n,m,flips,sigma\n0,1,1,-1\n");
    let (code, out, _) = cesaro(&["iterate", "--scenario", &scenario("canonical.toml"), "--n", "1", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "chain,n,k,re,im\n0,1,2,-1.0000000000000000,0\n");
    let (_, out, _) =
        cesaro(&["iterate", "--exact", "--scenario", &scenario("mixed.toml"), "--chain", "2", "--n", "0", "--k", "1"]);
    // σ(0,1) = -1 and v(2,1) = 9/10 + 2/5 i
    assert_eq!(out, "chain,n,k,re,im\n2,0,1,-9/10,-2/5\n");
    assert_eq!(cesaro(&["iterate", "--scenario", &scenario("canonical.toml"), "--chain", "4", "--k", "1"]).0, 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cesaro");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["sigma", "2", "7"]), Some(0));
    assert_eq!(status(&["partition", "--scenario", &scenario("no_level_set.toml")]), Some(3));
    assert_eq!(status(&["verify", "--suite", "theorem1", "--scenario", &scenario("decreasing_weights.toml")]), Some(1));
    assert_eq!(status(&["simulate"]), Some(2));
}
