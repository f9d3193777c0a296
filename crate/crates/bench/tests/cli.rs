use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grpda-bench"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GRPDA_CACHE_DIR")
        .output()
        .unwrap()
}

#[test]
fn run_writes_one_csv_per_scheme_and_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(
        &[
            "run",
            "--family",
            "lasso",
            "--case",
            "i",
            "--p",
            "200",
            "--q",
            "1000",
            "--s",
            "10",
            "--schemes",
            "grpda,pda",
            "--iters",
            "1000",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files: Vec<String> = std::fs::read_dir(dir.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, ["grpda.csv", "manifest.json", "pda.csv"]);
    let csv = std::fs::read_to_string(dir.path().join("o/grpda.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "iter,objective,objective_error,gap,a_n,beta_n,tau_n,wall_ns"
    );
    assert_eq!(csv.lines().count(), 1001);

    let replayed = bench(&["replay", "o/manifest.json", "--check", "--out", "r"], dir.path());
    assert!(replayed.status.success());
    assert_eq!(
        String::from_utf8_lossy(&replayed.stdout),
        "grpda.csv: identical\npda.csv: identical\n"
    );
    for f in ["grpda.csv", "pda.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("o").join(f)).unwrap(),
            std::fs::read(dir.path().join("r").join(f)).unwrap()
        );
    }
}

#[test]
fn unknown_scheme_lists_valid_ones() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(
        &[
            "run",
            "--family",
            "lasso",
            "--p",
            "5",
            "--q",
            "8",
            "--s",
            "2",
            "--schemes",
            "grpda,newton",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("newton"));
    for s in [
        "grpda",
        "agrpda",
        "rgrpda",
        "arrow-hurwicz",
        "pda",
        "pgm",
        "fista",
        "graal",
    ] {
        assert!(err.contains(s), "{err}");
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn inapplicable_scheme_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(
        &["run", "--family", "game", "--p", "5", "--q", "5", "--schemes", "fista"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(
        &[
            "certify",
            "--family",
            "lasso",
            "--p",
            "5",
            "--q",
            "7",
            "--s",
            "2",
            "--psi",
            "2",
            "--product",
            "1.99",
            "--json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["order"], 19);
    assert!(v["report"]["max_modulus"].as_f64().unwrap() <= 1.0 + 1e-8);
    assert_eq!(v["report"]["eigen"]["eigenvalues"].as_array().unwrap().len(), 19);
}

#[test]
fn certify_over_cap_suggests_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(
        &["certify", "--family", "lasso", "--p", "200", "--q", "500"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mode sampling"));
}

#[test]
fn sweep_rejects_psi_beyond_golden_ratio_for_games() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(
        &[
            "sweep-psi",
            "--family",
            "game",
            "--p",
            "5",
            "--q",
            "5",
            "--psis",
            "2.5",
            "--iters",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_single_psi_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(
        &[
            "sweep-psi",
            "--family",
            "lasso",
            "--p",
            "10",
            "--q",
            "20",
            "--s",
            "3",
            "--psis",
            "1.618",
            "--iters",
            "20000",
            "--beta",
            "1",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "psi,median_iterations,reached,seeds");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1.618,") && lines[1].ends_with(",1,1"), "{text}");
}

#[test]
fn cache_dir_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--cache-dir",
        "cache",
        "--family",
        "nnls",
        "--p",
        "20",
        "--q",
        "40",
        "--d",
        "0.3",
        "--schemes",
        "pgm",
        "--iters",
        "50",
        "--reference",
        "--reference-iters",
        "2000",
    ];
    assert!(bench(&args, dir.path()).status.success());
    let count = |sub: &str| {
        std::fs::read_dir(dir.path().join("cache/instances").join(sub))
            .unwrap()
            .count()
    };
    let before = count("nnls");
    assert!(bench(&args, dir.path()).status.success());
    assert_eq!(count("nnls"), before);
    assert!(before >= 2);
}
