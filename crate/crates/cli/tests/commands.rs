use std::path::Path;
use std::process::{Command, Output};

use fdaclust_cli::PipelineConfig;
use fdaclust_core::eval::AnalysisReport;

fn fdaclust(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdaclust"))
        .arg("--out-dir")
        .arg(dir)
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn init_writes_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(&fdaclust(dir.path(), &["init"]));
    let config = PipelineConfig::load(&dir.path().join("fdaclust.toml")).unwrap();
    assert_eq!(config, PipelineConfig::default());
    // a second init without --force refuses to overwrite
    assert!(!fdaclust(dir.path(), &["init"]).status.success());
    ok(&fdaclust(dir.path(), &["init", "--force"]));
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&fdaclust(d, &["synth"]));
    ok(&fdaclust(d, &["smooth", "--cohort", &p(d, "cohort.csv")]));
    ok(&fdaclust(d, &["fpca", "--functional", &p(d, "functional.json")]));
    ok(&fdaclust(d, &["cluster", "--route", "fpc-kmeans", "--input", &p(d, "scores.csv")]));
    ok(&fdaclust(d, &["cluster", "--route", "ts-fuzzy", "--input", &p(d, "cohort.csv")]));
    assert!(d.join("clustering-ts-fuzzy.memberships.csv").exists());
    let table = ok(&fdaclust(
        d,
        &[
            "evaluate",
            "--clustering",
            &p(d, "clustering-fpc-kmeans.json"),
            "--labels",
            &p(d, "labels.csv"),
            "--cohort",
            &p(d, "cohort.csv"),
            "--features",
            &p(d, "scores.csv"),
        ],
    ));
    assert!(table.contains("fpc-kmeans"), "{table}");
    let report = AnalysisReport::from_json(&std::fs::read_to_string(d.join("report-fpc-kmeans.json")).unwrap()).unwrap();
    assert!(report.ccr >= 0.95);
    assert_eq!(report.n, 120);
    for input in ["cohort.csv", "scores.csv", "fpca.json", "report-fpc-kmeans.json", "clustering-ts-fuzzy.memberships.csv"] {
        ok(&fdaclust(d, &["plot", "--input", &p(d, input)]));
    }
}

#[test]
fn stored_table_ccr() {
    let dir = tempfile::tempdir().unwrap();
    let table = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/table6.csv");
    let out = ok(&fdaclust(dir.path(), &["evaluate", "--contingency", table]));
    assert!(out.contains("0.4333"), "{out}");
    assert!(out.contains("0.8917"), "{out}");
}

#[test]
fn single_curve_plot_is_valid_svg() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let csv = "id,time,value\nonly,0,1\nonly,0.5,0.7\nonly,1,1\n";
    std::fs::write(d.join("one.csv"), csv).unwrap();
    ok(&fdaclust(d, &["plot", "--input", &p(d, "one.csv"), "--output", &p(d, "one.svg")]));
    let svg = std::fs::read_to_string(d.join("one.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert!(doc.descendants().filter(|n| n.has_tag_name("path")).count() >= 1);
}

fn failure(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = fdaclust(dir, args);
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn failures_map_to_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    std::fs::write(d.join("window.toml"), "[cluster]\nwindow = 5\n").unwrap();
    let (code, err) = failure(d, &["--config", &p(d, "window.toml"), "pipeline"]);
    assert_eq!(code, 9, "{err}");
    assert!(err.starts_with("error[config]: "), "{err}");

    let (code, err) = failure(d, &["smooth", "--cohort", &p(d, "missing.csv")]);
    assert_eq!(code, 5, "{err}");
    assert!(err.starts_with("error[io]: "), "{err}");

    std::fs::write(d.join("bad.csv"), "id,time,value\na,zero,1\n").unwrap();
    let (code, err) = failure(d, &["smooth", "--cohort", &p(d, "bad.csv")]);
    assert_eq!(code, 3, "{err}");
    assert!(err.starts_with("error[parse]: "), "{err}");
    assert_eq!(err.lines().count(), 1);

    let (code, _) = failure(d, &["cluster", "--route", "nope", "--input", "x"]);
    assert_eq!(code, 2);
}

#[test]
fn synthetic_raw_files_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&fdaclust(d, &["synth", "--raw-per-grade", "2"]));
    assert!(d.join("raw_labels.csv").exists());
    ok(&fdaclust(d, &["ingest", "--raw-dir", &p(d, "raw")]));
    let csv = std::fs::read_to_string(d.join("smiling.symmetry.csv")).unwrap();
    let ids: std::collections::BTreeSet<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids.len(), 8);
    assert!(ids.contains("m_hb1_001") && ids.contains("m_hb6_002"));
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |threads: &str, sub: &str| {
        Command::new(env!("CARGO_BIN_EXE_fdaclust"))
            .env("FDACLUST_THREADS", threads)
            .args(["--quiet", "--out-dir"])
            .arg(d.join(sub))
            .arg("synth")
            .output()
            .unwrap()
    };
    ok(&run("1", "one"));
    ok(&run("4", "four"));
    assert_eq!(
        std::fs::read(d.join("one/cohort.csv")).unwrap(),
        std::fs::read(d.join("four/cohort.csv")).unwrap()
    );
    let bad = run("zero", "bad");
    assert_eq!(bad.status.code(), Some(9));
}
