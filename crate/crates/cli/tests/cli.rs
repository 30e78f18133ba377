use std::fs;
use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use rover_health::scenario::{builtin, builtin_scenarios, ObserverMode, TerrainSpec};
use rover_health_cli::{parse_config, write_config, CsvTable, CSV_COLUMNS};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rover-health"));
    cmd.env_remove("ROVER_HEALTH_OUT");
    cmd
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn builtin_configs_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in builtin_scenarios() {
        let path = dir.path().join(format!("{}.json", cfg.name));
        write_config(&cfg, &path).unwrap();
        assert_eq!(parse_config(&path).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edited_configs_round_trip(
        which in 0usize..6,
        seed in any::<u64>(),
        cruise in 0.01f64..2.0,
        radius in 0.01f64..3.0,
        dt in 1e-4f64..0.05,
        duration in 1.0f64..500.0,
        wx in -1e3f64..1e3,
        wy in -1e3f64..1e3,
        kp in 0.0f64..100.0,
        shared in any::<bool>(),
        noise in any::<bool>(),
    ) {
        let mut cfg = builtin_scenarios().swap_remove(which);
        cfg.noise.seed = seed;
        cfg.noise.enabled = noise;
        cfg.mission.cruise_speed = cruise;
        cfg.mission.acceptance_radius = radius;
        cfg.mission.waypoints.push((wx, wy));
        cfg.dt = dt;
        cfg.duration = duration;
        cfg.gains.heading.kp = kp;
        if shared {
            cfg.observer_mode = ObserverMode::SharedCommand;
        }
        prop_assume!(cfg.validate().is_ok());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        write_config(&cfg, &path).unwrap();
        prop_assert_eq!(parse_config(&path).unwrap(), cfg);
    }
}

#[test]
fn relative_grid_path_resolves_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("maps");
    fs::create_dir(&sub).unwrap();
    let mut grid = String::from("ncols 11\nnrows 5\nxllcorner -10\nyllcorner -10\ncellsize 5\nNODATA_value -9999\n");
    for _ in 0..5 {
        grid.push_str(&["0.0"; 11].join(" "));
        grid.push('\n');
    }
    write(&sub, "flat.asc", &grid);
    let cfg_path = write(
        dir.path(),
        "grid.json",
        r#"{"builtin": "straight_A", "terrain": {"kind": "ascii_grid", "path": "maps/flat.asc"}, "duration": 3}"#,
    );
    let cfg = parse_config(&cfg_path).unwrap();
    assert_eq!(
        cfg.terrain,
        TerrainSpec::AsciiGrid {
            path: sub.join("flat.asc")
        }
    );

    // Runs from any working directory.
    let out = dir.path().join("out");
    let status = bin()
        .current_dir("/")
        .args(["run", "--no-plots", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let table = CsvTable::open(&out.join("straight_A/telemetry.csv")).unwrap();
    assert_eq!(table.len(), 300);
}

#[test]
fn run_writes_csv_summary_config_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fresh/nested");
    let status = bin()
        .args([
            "run",
            "--scenario",
            "straight_B",
            "--seed",
            "3",
            "--set",
            "duration=8",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run_dir = out.join("straight_B");
    for f in [
        "telemetry.csv",
        "summary.json",
        "config.json",
        "path.svg",
        "health.svg",
        "residual_heading.svg",
        "residual_velocity.svg",
    ] {
        assert!(run_dir.join(f).is_file(), "missing {f}");
    }
    let csv = fs::read_to_string(run_dir.join("telemetry.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 801);
    let cfg = parse_config(&run_dir.join("config.json")).unwrap();
    assert_eq!(cfg.noise.seed, 3);
    assert_eq!(cfg.duration, 8.0);
    let svg = fs::read_to_string(run_dir.join("residual_heading.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("t [s]") && svg.contains("heading residual [rad]"));
    assert!(
        svg.contains("fill-opacity"),
        "alarm shading expected after the gyro fault"
    );

    let replot = dir.path().join("replot");
    let status = bin()
        .args(["plot", "--in"])
        .arg(run_dir.join("telemetry.csv"))
        .arg("--out")
        .arg(&replot)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(replot.join("path.svg").is_file());
}

#[test]
fn report_rebuilds_from_a_results_directory() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["straight_A", "straight_B", "straight_C"] {
        let status = bin()
            .args(["run", "--no-plots", "--set", "duration=7", "--scenario", name, "--out"])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert!(bin()
        .args(["report", "--in"])
        .arg(dir.path())
        .status()
        .unwrap()
        .success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 3);
    let rows = report["comparison"]["straight"].as_array().unwrap();
    let cases: Vec<&str> = rows.iter().map(|r| r["case"].as_str().unwrap()).collect();
    assert_eq!(cases, ["A", "B", "C"]);
    assert_eq!(rows[0]["adaptive_detections"], 0);
    assert_eq!(report["runs"][0]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn exit_codes_distinguish_usage_from_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let code = |cmd: &mut Command| cmd.status().unwrap().code();

    assert_eq!(code(bin().arg("list")), Some(0));
    assert_eq!(code(bin().arg("frobnicate")), Some(1));
    assert_eq!(code(bin().args(["run", "--scenario", "no_such"])), Some(1));
    assert_eq!(
        code(bin().args(["run", "--config"]).arg(dir.path().join("missing.json"))),
        Some(1)
    );
    let bad = write(dir.path(), "bad.json", "{\"builtin\": \"straight_A\", \"dt\": 0}");
    let out = bin().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`dt`"));
    let broken = write(dir.path(), "broken.json", "{\n\"builtin\": \"straight_A\",\n}");
    let out = bin().args(["run", "--config"]).arg(&broken).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));

    let blow_up = write(
        dir.path(),
        "blow_up.json",
        r#"{"builtin": "straight_A", "rover": {"mass": 1e-300, "yaw_inertia": 1e-300}}"#,
    );
    let out_dir = dir.path().join("abort");
    let status = bin()
        .args(["run", "--no-plots", "--config"])
        .arg(&blow_up)
        .arg("--out")
        .arg(&out_dir)
        .status();
    assert_eq!(status.unwrap().code(), Some(2));
    // The partial log is still flushed.
    assert!(!CsvTable::open(&out_dir.join("straight_A/telemetry.csv"))
        .unwrap()
        .is_empty());
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .env("ROVER_HEALTH_OUT", dir.path())
        .args(["run", "--no-plots", "--scenario", "serpentine_A", "--set", "duration=1"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("serpentine_A/telemetry.csv").is_file());
    assert!(builtin("serpentine_A").is_some());
}
