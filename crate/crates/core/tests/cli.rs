use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;
use sensorsniff::cli::{run, Cli};
use sensorsniff::detect::{active_detect, format_report, DetectConfig, DiscoveryLog, Observation, OuiDatabase};
use sensorsniff::eval::{format_rows, parse_batch, run_suite};
use sensorsniff::trace::{group_by_device, read_ground_truth, read_packets};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_sensorsniff");

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/s5_camera.toml")
}

fn sensorsniff(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn library(args: &[&str]) -> sensorsniff::Result<String> {
    run(&Cli::parse_from(
        std::iter::once("sensorsniff").chain(args.iter().copied()),
    ))
}

fn simulate_fixture() -> TempDir {
    let dir = TempDir::new().unwrap();
    let out = sensorsniff(&[
        "simulate",
        "--scenario",
        fixture().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

#[test]
fn simulate_is_deterministic_and_writes_every_countermeasure() {
    let a = simulate_fixture();
    let b = simulate_fixture();
    let files = dir_contents(a.path());
    assert_eq!(files, dir_contents(b.path()));
    let cms: Vec<&String> = files.keys().filter(|k| k.starts_with("cm_")).collect();
    assert_eq!(
        cms,
        [
            "cm_0_padding.csv",
            "cm_1_noise.csv",
            "cm_2_resolution.csv",
            "cm_3_tape-delay.csv"
        ]
    );
    for name in ["traffic.csv", "imu.csv", "audio.csv", "userpath.csv"] {
        assert!(files.contains_key(name), "{name}");
    }
}

#[test]
fn simulate_seed_override_changes_the_capture() {
    let a = simulate_fixture();
    let b = TempDir::new().unwrap();
    let out = sensorsniff(&[
        "simulate",
        "--scenario",
        fixture().to_str().unwrap(),
        "--out",
        b.path().to_str().unwrap(),
        "--seed",
        "12",
    ]);
    assert!(out.status.success());
    assert_ne!(
        fs::read(a.path().join("traffic.csv")).unwrap(),
        fs::read(b.path().join("traffic.csv")).unwrap()
    );
}

#[test]
fn invalid_polygon_exits_with_config_status() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(fixture())
        .unwrap()
        .replace("[[0, 0], [6, 0], [6, 5], [0, 5]]", "[[0, 0], [6, 5], [6, 0], [0, 5]]");
    let bad = p(&dir, "bad.toml");
    fs::write(&bad, text).unwrap();
    let out = sensorsniff(&["simulate", "--scenario", &bad, "--out", &p(&dir, "out")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("polygon"));
}

#[test]
fn detect_output_matches_the_library_byte_for_byte() {
    let dir = simulate_fixture();
    let args = [
        "detect",
        "--traffic",
        &p(&dir, "traffic.csv"),
        "--imu",
        &p(&dir, "imu.csv"),
    ];
    let out = sensorsniff(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let via_cli = library(&args).unwrap();
    assert_eq!(out.stdout, via_cli.as_bytes());

    let traces = group_by_device(&read_packets(&dir.path().join("traffic.csv")).unwrap());
    let imu = read_ground_truth(&dir.path().join("imu.csv")).unwrap();
    let obs = Observation {
        traces: &traces,
        imu: &imu,
        audio: None,
    };
    let r = active_detect(
        &obs,
        &OuiDatabase::builtin(),
        &mut DiscoveryLog::default(),
        &DetectConfig::default(),
    )
    .unwrap();
    assert_eq!(out.stdout, format_report(&r).as_bytes());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("aa:bb:cc:00:00:01,true,")), "{text}");
    assert_eq!(text.lines().count(), 1 + traces.len());
}

#[test]
fn detect_report_flag_writes_the_same_text() {
    let dir = simulate_fixture();
    let report = p(&dir, "report.txt");
    let args = [
        "detect",
        "--traffic",
        &p(&dir, "traffic.csv"),
        "--imu",
        &p(&dir, "imu.csv"),
    ];
    let stdout = sensorsniff(&args).stdout;
    let mut with_report = args.to_vec();
    with_report.extend(["--report", &report]);
    let out = sensorsniff(&with_report);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read(&report).unwrap(), stdout);
}

#[test]
fn still_ground_truth_exits_with_insufficient_activity() {
    let dir = simulate_fixture();
    let imu = fs::read_to_string(dir.path().join("imu.csv")).unwrap();
    let still: String = imu.lines().take(250).map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("still.csv"), still).unwrap();
    let out = sensorsniff(&[
        "detect",
        "--traffic",
        &p(&dir, "traffic.csv"),
        "--imu",
        &p(&dir, "still.csv"),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = sensorsniff(&[
        "detect",
        "--traffic",
        &p(&dir, "traffic.csv"),
        "--imu",
        &p(&dir, "imu.csv"),
        "--mode",
        "background",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mismatched_inputs_exit_with_status_4() {
    let dir = simulate_fixture();
    let traffic = fs::read_to_string(dir.path().join("traffic.csv")).unwrap();
    let late: String = traffic
        .lines()
        .map(|l| {
            let (ts, rest) = l.split_once(',').unwrap();
            format!("{},{rest}\n", ts.parse::<u64>().unwrap() + 500_000_000)
        })
        .collect();
    fs::write(dir.path().join("late.csv"), late).unwrap();
    let out = sensorsniff(&[
        "detect",
        "--traffic",
        &p(&dir, "late.csv"),
        "--imu",
        &p(&dir, "imu.csv"),
    ]);
    assert_eq!(out.status.code(), Some(4));

    let out = sensorsniff(&[
        "detect",
        "--traffic",
        &p(&dir, "traffic.csv"),
        "--imu",
        &p(&dir, "imu.csv"),
        "--mac",
        "11:22:33:44:55:66",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn out_of_range_parameters_exit_with_config_status() {
    let dir = simulate_fixture();
    for extra in [["--p-value", "2"], ["--window-ms", "0"], ["--mode", "sideways"]] {
        let mut args = vec![
            "detect",
            "--traffic",
            &p(&dir, "traffic.csv"),
            "--imu",
            &p(&dir, "imu.csv"),
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        args.extend(extra.iter().map(|s| s.to_string()));
        let out = Command::new(BIN).args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn localize_output_matches_the_library() {
    let scenario = fixture();
    let args = [
        "localize",
        "--scenario",
        scenario.to_str().unwrap(),
        "--mac",
        "aa:bb:cc:00:00:01",
        "--oracle",
    ];
    let out = sensorsniff(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(out.stdout, library(&args).unwrap().as_bytes());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.starts_with("#localize mac=aa:bb:cc:00:00:01 status=converged"),
        "{text}"
    );
    assert!(text.lines().any(|l| l.starts_with("trial,1,")));
    // The sensor sits in the corner cell.
    assert!(text.lines().any(|l| l == "cell,0,0"), "{text}");
}

#[test]
fn localize_unknown_sensor_is_a_mismatch() {
    let out = sensorsniff(&[
        "localize",
        "--scenario",
        fixture().to_str().unwrap(),
        "--mac",
        "aa:bb:cc:00:00:99",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn evaluate_empty_suite_prints_only_the_header() {
    let dir = TempDir::new().unwrap();
    let out = sensorsniff(&["evaluate", "--suite", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), format_rows(&[]));
}

#[test]
fn evaluate_single_batch_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let batch = "name = \"few\"\nkind = \"detection\"\nseed = 3\ntrials = 4\n";
    fs::write(dir.path().join("few.toml"), batch).unwrap();
    let args = ["evaluate", "--suite", dir.path().to_str().unwrap()];
    let out = sensorsniff(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "{text}");
    assert!(rows[0].contains("seeds 3..7"), "{}", rows[0]);
    assert!(rows[0].ends_with("PASS") || rows[0].ends_with("FAIL"));

    let direct = format_rows(&run_suite(&[parse_batch(batch).unwrap()]).unwrap());
    assert_eq!(text, direct);
    assert_eq!(text, library(&args).unwrap());
}

#[test]
fn evaluate_skips_bad_batches_with_a_warning() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("a.toml"),
        "name = \"a\"\nkind = \"detection\"\nseed = 0\ntrials = 2\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("b.toml"),
        "name = \"b\"\nkind = \"teleport\"\nseed = 0\ntrials = 2\n",
    )
    .unwrap();
    fs::write(dir.path().join("c.toml"), "this is not toml = =").unwrap();
    let out = sensorsniff(&["evaluate", "--suite", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let warnings = text.lines().filter(|l| l.starts_with("# warning:")).count();
    assert_eq!(warnings, 2, "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("2 | a |")).count(), 1, "{text}");
}

#[test]
fn evaluate_missing_suite_is_a_config_error() {
    let out = sensorsniff(&["evaluate", "--suite", "/nonexistent/suite/dir"]);
    assert_eq!(out.status.code(), Some(2));
}
