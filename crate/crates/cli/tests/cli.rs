//! End-to-end runs of the `syk-lab` binary.

use std::process::{Command, Output};

fn syk_lab(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_syk-lab"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("SYK_LAB_WORKERS", w),
        None => cmd.env_remove("SYK_LAB_WORKERS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: [&str; 10] = [
    "--set",
    "n=6",
    "--set",
    "k=2",
    "--set",
    "r=40",
    "--set",
    "n_disorder=3",
    "--set",
    "t=0.5",
];

#[test]
fn scan_n_writes_config_block_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let mut args = vec!["scan-n", "--output", path.to_str().unwrap()];
    args.extend(SMALL);
    let out = syk_lab(&args, None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "model,n,k,l,p,t,r,kappa,seed,N_disorder,N_bernoulli,observed,observed_stderr,bound,ratio,wall_time_s,error"
    );
    assert!(text.contains("# r = 40"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("dense,6,2,1,"))
            .count(),
        1
    );
}

#[test]
fn scan_is_byte_identical_across_worker_counts() {
    let run = |workers: &str| {
        let mut args = vec![
            "scan-n",
            "--set",
            "model=\"sparse\"",
            "--set",
            "n_bernoulli=2",
        ];
        args.extend(SMALL);
        let out = syk_lab(&args, Some(workers));
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = [8]\nk = 4\nl = [2, 4]\nt = 2.0\n").unwrap();
    let out = syk_lab(
        &["bounds", "--config", cfg.to_str().unwrap(), "--set", "r=50"],
        None,
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("dense,")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",50,")));
}

#[test]
fn invalid_configuration_exits_with_2() {
    let out = syk_lab(&["scan-n", "--set", "n=7"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));
    let out = syk_lab(&["scan-t", "--set", "t_points=1"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = syk_lab(&["bounds", "--set", "bogus=1"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_rows_exit_with_1() {
    // The sparse first-order model has no closed-form Trotter-number bound.
    let out = syk_lab(&["solve-r", "--set", "model=sparse", "--set", "n=8"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).lines().any(|l| l.starts_with("sparse,8,")));
}

#[test]
fn gen_then_evolve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let out = syk_lab(
        &[
            "gen",
            "--set",
            "n=6",
            "--set",
            "k=4",
            "--set",
            "master_seed=5",
            "-o",
            inst.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    let json = std::fs::read_to_string(&inst).unwrap();
    assert!(json.contains("\"couplings\""));
    let set = format!("instance={:?}", inst.to_str().unwrap());
    let out = syk_lab(
        &[
            "evolve", "--set", &set, "--set", "t=0.2", "--set", "r=30", "--set", "l=1,2",
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        stdout(&out)
            .lines()
            .filter(|l| l.starts_with("dense,6,4,"))
            .count(),
        2
    );
}

#[test]
fn oracle_suite_passes_and_mutation_is_caught() {
    let out = syk_lab(&["oracle", "--set", "coloring_n=6,8"], None);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS overlap_sign_law"));
    let out = syk_lab(
        &[
            "oracle",
            "--set",
            "coloring_n=6,8",
            "--set",
            "inject_sign_flip=true",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL overlap_sign_law"));
    assert!(text.contains("counterexample: k = 2, α = ["));
}

#[test]
fn scan_t_emits_fit_trailer() {
    let out = syk_lab(
        &[
            "scan-t",
            "--set",
            "n=6",
            "--set",
            "k=2",
            "--set",
            "delta_only=true",
            "--set",
            "t_min=1",
            "--set",
            "t_max=10",
        ],
        None,
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let fit = text.lines().last().unwrap();
    assert!(
        fit.starts_with("# fit model=dense n=6 k=2 l=1 slope_bound="),
        "{fit}"
    );
}
