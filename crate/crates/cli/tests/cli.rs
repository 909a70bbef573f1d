use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PUBS: &str = "\
pub_id,year,citations,categories,author_ids
p1,2005,12,AG,r1
p2,2005,3,AG,r2;r3
p3,2005,0,AG,r4
p4,2006,40,AG;BU,r1;r5
p5,2006,7,BU,r5
p6,2006,1,BU,r6
p7,2007,0,BU,r2
p8,2007,5,BU,r3
";

const RESEARCHERS: &str = "\
researcher_id,sds,uda
r1,AGR/10,AGR
r2,AGR/10,AGR
r3,AGR/10,AGR
r4,AGR/10,AGR
r5,FIS/05,FIS
r6,FIS/05,FIS
";

fn citescale(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_citescale"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn tiny_corpus(dir: &Path) {
    fs::write(dir.join("pubs.csv"), PUBS).unwrap();
    fs::write(dir.join("researchers.csv"), RESEARCHERS).unwrap();
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{stderr}");
    serde_json::from_str(lines[0]).expect("error line is JSON")
}

fn report(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_tiny_corpus_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    tiny_corpus(dir.path());
    let out = citescale(
        &[
            "analyze",
            "--pubs",
            "pubs.csv",
            "--researchers",
            "researchers.csv",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        listing(&dir.path().join("run")),
        ["baselines.csv", "rankings.csv", "report.json"]
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("quartile shift"), "{stdout}");
    for tag in ["CIT", "PERC", "A ", "M0", "A0"] {
        assert!(
            stdout.lines().any(|l| l.trim_start().starts_with(tag)),
            "{tag} missing in {stdout}"
        );
    }
}

#[test]
fn missing_researchers_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    tiny_corpus(dir.path());
    let out = citescale(
        &[
            "analyze",
            "--pubs",
            "pubs.csv",
            "--researchers",
            "absent.csv",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    let err = error_line(&out);
    assert_eq!(err["error"], "io");
    assert!(err["message"].as_str().unwrap().contains("absent.csv"));
    assert!(!dir.path().join("run").exists());
}

#[test]
fn malformed_input_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    tiny_corpus(dir.path());
    fs::write(dir.path().join("pubs.csv"), format!("{PUBS}p9,2007,-4,BU,r3\n")).unwrap();
    let out = citescale(
        &[
            "analyze",
            "--pubs",
            "pubs.csv",
            "--researchers",
            "researchers.csv",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    let err = error_line(&out);
    assert!(err["message"].as_str().unwrap().contains("pubs.csv"), "{err}");
    assert!(!dir.path().join("run").exists());
}

#[test]
fn benchmark_only_scenario_set_gives_unit_correlations() {
    let dir = tempfile::tempdir().unwrap();
    tiny_corpus(dir.path());
    let out = citescale(
        &[
            "analyze",
            "--pubs",
            "pubs.csv",
            "--researchers",
            "researchers.csv",
            "--out",
            "run",
            "--scenarios",
            "A0",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path().join("run/report.json"));
    let correlations = r["correlations"].as_array().unwrap();
    assert_eq!(correlations.len(), 2);
    for c in correlations {
        assert_eq!(c["scenario"], "A0");
        assert_eq!(c["rho"], 1.0);
    }
}

#[test]
fn benchmark_outside_scenario_set_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = citescale(
        &["analyze", "--out", "run", "--scenarios", "CIT,A", "--benchmark", "A0"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["error"], "invalid-config");
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for target in ["a", "b"] {
        let out = citescale(&["synth", "--out", target, "--seed", "7", "--n-sds", "2"], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8(out.stdout).unwrap().contains("seed 7"));
        assert_eq!(
            listing(&dir.path().join(target)),
            ["publications.csv", "researchers.csv"]
        );
    }
    for file in ["publications.csv", "researchers.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn synth_rejects_zero_sds() {
    let dir = tempfile::tempdir().unwrap();
    let out = citescale(&["synth", "--out", "c", "--n-sds", "0"], dir.path());
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["error"], "invalid-config");
    assert!(!dir.path().join("c").exists());
}

#[test]
fn synth_output_feeds_analyze_end_to_end_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(
        citescale(&["synth", "--out", "corpus", "--seed", "11", "--n-sds", "4"], p)
            .status
            .success()
    );
    for target in ["x", "y"] {
        let out = citescale(
            &[
                "analyze",
                "--pubs",
                "corpus/publications.csv",
                "--researchers",
                "corpus/researchers.csv",
                "--out",
                target,
                "--impacts",
            ],
            p,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let names = listing(&p.join("x"));
    assert_eq!(names, ["baselines.csv", "impacts.csv", "rankings.csv", "report.json"]);
    for name in names {
        assert_eq!(
            fs::read(p.join("x").join(&name)).unwrap(),
            fs::read(p.join("y").join(&name)).unwrap()
        );
    }
}

#[test]
fn tables_writes_six_files() {
    let dir = tempfile::tempdir().unwrap();
    tiny_corpus(dir.path());
    let run = citescale(
        &[
            "analyze",
            "--pubs",
            "pubs.csv",
            "--researchers",
            "researchers.csv",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(run.status.success());
    let out = citescale(
        &["tables", "--report", "run/report.json", "--out", "tables"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        listing(&dir.path().join("tables")),
        [
            "bottom_shift.csv",
            "quartile_shift.csv",
            "sds_correlations.csv",
            "tables.txt",
            "top_shift.csv",
            "uda_descriptives.csv"
        ]
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("Percentage of researchers per UDA that change quartile rank"));
}

#[test]
fn single_uda_tables_have_one_body_row_and_total() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("synth.toml"),
        "seed = 4\nn_sds = 3\nn_uda = 1\nresearchers_per_sds = [15, 25]\n",
    )
    .unwrap();
    assert!(citescale(&["synth", "--out", "corpus", "--config", "synth.toml"], p)
        .status
        .success());
    let run = citescale(
        &[
            "analyze",
            "--pubs",
            "corpus/publications.csv",
            "--researchers",
            "corpus/researchers.csv",
            "--out",
            "run",
        ],
        p,
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(
        citescale(&["tables", "--report", "run/report.json", "--format", "tsv"], p)
            .status
            .success()
    );
    for name in ["quartile_shift.tsv", "top_shift.tsv", "bottom_shift.tsv"] {
        let text = fs::read_to_string(p.join("run").join(name)).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 2, "{name}: {text}");
        assert!(rows[0].starts_with("U00\t"));
        assert!(rows[1].starts_with("Total\t"));
    }
}

#[test]
fn self_benchmark_shift_table_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = citescale(
        &[
            "analyze",
            "--out",
            "run",
            "--seed",
            "2",
            "--scenarios",
            "M0",
            "--benchmark",
            "M0",
        ],
        p,
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(citescale(&["tables", "--report", "run/report.json"], p)
        .status
        .success());
    let text = fs::read_to_string(p.join("run/quartile_shift.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("UDA,SS_M0"));
    let mut rows = 0;
    for line in lines {
        assert!(line.ends_with(",0.0"), "{line}");
        rows += 1;
    }
    assert!(rows >= 2);
}

#[test]
fn malformed_report_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("report.json"), "{\"metadata\": 3}").unwrap();
    let out = citescale(&["tables", "--report", "report.json"], dir.path());
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["error"], "malformed-report");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    tiny_corpus(p);
    fs::write(
        p.join("run.toml"),
        "pubs = \"pubs.csv\"\nresearchers = \"researchers.csv\"\nout = \"from-file\"\nformat = \"tsv\"\nsds_threshold = 0.9\n",
    )
    .unwrap();
    let out = citescale(
        &[
            "analyze",
            "--config",
            "run.toml",
            "--format",
            "csv",
            "--sds-threshold",
            "0.5",
        ],
        p,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        listing(&p.join("from-file")),
        ["baselines.csv", "rankings.csv", "report.json"]
    );
    let r = report(p.join("from-file/report.json"));
    assert_eq!(r["metadata"]["sds_threshold"], 0.5);
}

#[test]
fn unknown_flag_is_a_single_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = citescale(&["analyze", "--bogus"], dir.path());
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["error"], "usage");
}
