use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn idea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idea"))
        .args(args)
        .env_remove("IDEA_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_all_artifacts_and_reaches_the_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = idea(&[
        "run",
        "--problem",
        "paraboloid",
        "--algo",
        "idea",
        "--budget",
        "20000",
        "--seed",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for ext in ["report.json", "trace.csv", "archive.jsonl", "params.toml"] {
        assert!(dir.path().join(format!("paraboloid-idea-s1.{ext}")).exists(), "{ext}");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("paraboloid-idea-s1.report.json")).unwrap()).unwrap();
    assert!(report["best_f"].as_f64().unwrap() <= 1e-4);
    let trace = fs::read_to_string(dir.path().join("paraboloid-idea-s1.trace.csv")).unwrap();
    assert!(trace.starts_with("evaluations,best_f\n"));
}

#[test]
fn resolved_parameters_can_be_fed_back() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(idea(&[
        "run",
        "--problem",
        "rastrigin",
        "--dim",
        "2",
        "--algo",
        "mbh-gr",
        "--budget",
        "5000",
        "--out",
        s(&a)
    ])
    .status
    .success());
    let params = a.join("rastrigin-mbh-gr-s0.params.toml");
    let out = idea(&[
        "run",
        "--problem",
        "rastrigin",
        "--dim",
        "2",
        "--algo",
        "mbh-gr",
        "--budget",
        "5000",
        "--params",
        s(&params),
        "--out",
        s(&b),
    ]);
    assert!(out.status.success());
    let name = "rastrigin-mbh-gr-s0.report.json";
    assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
}

#[test]
fn data_dir_variable_sets_the_default_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_idea"))
        .args([
            "run",
            "--problem",
            "paraboloid",
            "--dim",
            "2",
            "--budget",
            "2000",
            "--algo",
            "de",
        ])
        .env("IDEA_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("paraboloid-de-s0.report.json").exists());
}

#[test]
fn bad_requests_exit_nonzero() {
    let unknown = idea(&["run", "--problem", "nope", "--budget", "100"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("nope"));
    assert_eq!(
        idea(&["run", "--problem", "paraboloid", "--budget", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        idea(&["run", "--problem", "paraboloid", "--algo", "pso", "--budget", "10"])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[idea]\nn_pop = \"many\"\n").unwrap();
    let out = idea(&[
        "run",
        "--problem",
        "paraboloid",
        "--budget",
        "1000",
        "--params",
        s(&bad),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_pop"));

    let budgets = idea(&["bench", "--problem", "paraboloid", "--budgets", "2000,1000"]);
    assert_eq!(budgets.status.code(), Some(2));
    let long = idea(&[
        "bench",
        "--problem",
        "paraboloid",
        "--budgets",
        "1000",
        "--runs",
        "1000",
    ]);
    assert_eq!(long.status.code(), Some(2));
}

#[test]
fn bench_is_deterministic_and_has_one_row_per_budget() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "bench".to_string(),
            "--problem".into(),
            "rastrigin".into(),
            "--dim".into(),
            "2".into(),
            "--algo".into(),
            "idea".into(),
            "--runs".into(),
            "5".into(),
            "--budgets".into(),
            "2000,5000".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |extra: &[&str], p: &Path| {
        let mut v = args(s(p));
        v.extend(extra.iter().map(|x| x.to_string()));
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        assert!(idea(&refs).status.success());
    };
    run(&[], &a);
    run(&["--jobs", "1"], &b);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.as_bytes(), fs::read(&b).unwrap().as_slice());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "algorithm,problem,seed,N,n,j_s,p_s,ci_low,ci_high,wall_seconds"
    );
    assert_eq!(lines.len(), 3);
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert!(cols[5].parse::<usize>().unwrap() <= 5);
        assert_eq!(cols[9], "");
    }
}

#[test]
fn analyze_single_record_and_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let archive = dir.path().join("one.jsonl");
    let rec = r#"{"x":[0.75,0.5],"f":2.0,"evaluations_used":10,"origin":"harvest"}"#;
    fs::write(&archive, format!("{rec}\n")).unwrap();
    let dup = dir.path().join("dup.jsonl");
    fs::write(&dup, format!("{rec}\n{rec}\n")).unwrap();
    let before = fs::read(&dup).unwrap();

    let out = idea(&[
        "analyze",
        "--archive",
        s(&archive),
        s(&dup),
        "--problem",
        "paraboloid",
        "--dim",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    // Best-known point is the centre (0.5, 0.5) in unit coordinates.
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols[3], "");
    assert!((cols[4].parse::<f64>().unwrap() - 0.25).abs() < 1e-9);
    assert_eq!(fs::read(&dup).unwrap(), before);

    let other = idea(&[
        "analyze",
        "--archive",
        s(&archive),
        "--problem",
        "paraboloid",
        "--dim",
        "2",
        "--best-known=-5,-5",
    ]);
    let row = String::from_utf8(other.stdout).unwrap();
    let d: f64 = row.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((d - (0.75f64.powi(2) + 0.25).sqrt()).abs() < 1e-9);

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    assert_eq!(
        idea(&[
            "analyze",
            "--archive",
            s(&empty),
            "--problem",
            "paraboloid",
            "--dim",
            "2"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn harvested_rastrigin_archive_shows_a_funnel() {
    let dir = tempfile::tempdir().unwrap();
    let archive = dir.path().join("h.jsonl");
    let out = idea(&[
        "harvest",
        "--problem",
        "rastrigin",
        "--dim",
        "2",
        "--starts",
        "300",
        "--seed",
        "5",
        "--out",
        s(&archive),
    ]);
    assert!(out.status.success());
    let out = idea(&[
        "analyze",
        "--archive",
        s(&archive),
        "--problem",
        "rastrigin",
        "--dim",
        "2",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    // Mean d_tl per level must not grow toward lower levels.
    let mut sums = std::collections::BTreeMap::<usize, (f64, usize)>::new();
    for line in text.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        let e = sums.entry(c[2].parse().unwrap()).or_default();
        e.0 += c[4].parse::<f64>().unwrap();
        e.1 += 1;
    }
    let means: Vec<f64> = sums.values().map(|(t, n)| t / *n as f64).collect();
    assert!(means.len() >= 3);
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

#[test]
fn sample_size_reports_the_formula_and_the_discrepancy() {
    let out = idea(&["sample-size", "--d-err", "0.1"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("n = 97"));
    let help = idea(&["sample-size", "--help"]);
    let text = String::from_utf8_lossy(&help.stdout);
    assert!(text.contains("175") && text.contains("0.020857") && text.contains("385"));
    assert_eq!(idea(&["sample-size", "--d-err", "1.5"]).status.code(), Some(2));
}
