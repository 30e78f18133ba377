//! Acceptance suite. Prints one PASS/FAIL line per criterion with the
//! measured values and the pinned tolerances, then fails if any line failed.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rover_health::fdi::{ChannelThresholdConfig, ThresholdChannel, ThresholdConfig};
use rover_health::monitor::{health_raw, vital_dist_rate, vital_gaussian, VitalParams};
use rover_health::scenario::{
    run_scenario, serpentine, straight, ObserverMode, RunOutput, ScenarioConfig, TestCase, BUILTIN_INJECTION_TIME,
};
use rover_health::sim::{rk4_step, FilterKind, FilterState};
use sha2::{Digest, Sha256};

// Pinned tolerances.
const ORACLE_TOL: f64 = 1e-6;
const EXACT_TOL: f64 = 1e-12;
const DIST_RATE_ZERO_TOL: f64 = 1e-5;
const HEALTH_TOL: f64 = 1e-4;
const ZERO_RESIDUAL_TOL: f64 = 1e-9;
const NOMINAL_SEEDS: u64 = 10;
const NOMINAL_BUDGET_S: f64 = 30.0;
const MAX_LATENCY_S: f64 = 2.0;
const MIN_HEALTH_DROP: f64 = 0.15;
const DROP_WINDOW_S: f64 = 2.0;
/// Pre-fault level is taken over this window before injection, after the
/// start-up transient has passed.
const PRE_FAULT_WINDOW_S: f64 = 2.0;
const RECOVERY_TOL: f64 = 0.05;
const DEFICIT_WINDOW_S: f64 = 10.0;
const DEFICIT_RATIO: f64 = 3.0;
const THRESHOLD_SETTLE_TOL: f64 = 0.01;
const THRESHOLD_SETTLE_TAUS: f64 = 10.0;
const RK4_MIN_ORDER: f64 = 3.5;
const DC_GAIN_TOL: f64 = 1e-2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(cfg: &ScenarioConfig) -> RunOutput<f64> {
    run_scenario(cfg).expect("builtin scenario runs")
}

fn secs(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| format!("{v:.2} s"))
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn vital_oracles() -> Outcome {
    let p = VitalParams::<f64>::default();
    let (sigma, k, x0) = (0.4, 20.0, 0.1);
    let gauss = |x: f64| 1.0 - (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let logistic = |x: f64| 1.0 / (1.0 + (-k * (x - x0)).exp());
    let cases = [
        ("g(0)", vital_gaussian(0.0, sigma), 0.0026443, gauss(0.0), ORACLE_TOL),
        ("g(2)", vital_gaussian(2.0, sigma), 0.9999963, gauss(2.0), ORACLE_TOL),
        ("d(0.1)", vital_dist_rate(0.1, k, x0), 0.5, logistic(0.1), EXACT_TOL),
        (
            "d(-0.25)",
            vital_dist_rate(-0.25, k, x0),
            9.11e-4,
            logistic(-0.25),
            ORACLE_TOL,
        ),
        (
            "d(0)",
            vital_dist_rate(0.0, k, x0),
            0.11920,
            logistic(0.0),
            DIST_RATE_ZERO_TOL,
        ),
    ];
    let defaults =
        p.k == k && p.x0 == x0 && p.sigma_accel == sigma && p.sigma_heading == sigma && p.sigma_voltage == sigma;
    let pass = defaults
        && cases
            .iter()
            .all(|(_, got, pinned, closed, tol)| within(*got, *pinned, *tol) && within(*got, *closed, EXACT_TOL));
    let values: Vec<String> = cases.iter().map(|(n, got, ..)| format!("{n}={got:.7}")).collect();
    outcome(pass, format!("{} defaults(sigma,k,x0)={defaults}", values.join(" ")))
}

fn health_oracles() -> Outcome {
    let hb = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let h05 = health_raw(0.5, true);
    let h0 = health_raw(0.0, true);
    let h1 = health_raw(1.0, false);
    let h01 = health_raw(0.1, true);
    let pass = within(h05, 0.0, EXACT_TOL)
        && within(h0, 1.0, EXACT_TOL)
        && within(h1, 1.0, EXACT_TOL)
        && within(h01, 0.5310, HEALTH_TOL)
        && within(h01, 1.0 - hb(0.1), EXACT_TOL);
    outcome(
        pass,
        format!("H(0.5)={h05:.2e} H(0)={h0} H(1,no clamp)={h1} H(0.1)={h01:.5}"),
    )
}

fn zero_residual() -> Outcome {
    let mut worst = Vec::new();
    for mode in [ObserverMode::Independent, ObserverMode::SharedCommand] {
        let mut cfg = straight(TestCase::A);
        cfg.noise.enabled = false;
        cfg.observer_mode = mode;
        let out = run(&cfg);
        let m = out
            .log
            .records
            .iter()
            .map(|r| r.residual.r_psi.abs().max(r.residual.r_v.abs()))
            .fold(0.0, f64::max);
        worst.push((mode, m));
    }
    let pass = worst.iter().all(|(_, m)| *m < ZERO_RESIDUAL_TOL);
    outcome(
        pass,
        format!(
            "max|r| independent={:.1e} shared={:.1e} (< {ZERO_RESIDUAL_TOL:.0e})",
            worst[0].1, worst[1].1
        ),
    )
}

fn nominal_no_false_alarm() -> Outcome {
    let start = Instant::now();
    let mut events = 0;
    let mut runs = 0;
    for make in [straight, serpentine] {
        for seed in 0..NOMINAL_SEEDS {
            let mut cfg = make(TestCase::A);
            cfg.noise.seed = seed;
            events += run(&cfg).summary.adaptive_detections().count();
            runs += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        events == 0 && elapsed < NOMINAL_BUDGET_S,
        format!("{runs} runs, {events} adaptive events, {elapsed:.2} s (< {NOMINAL_BUDGET_S} s)"),
    )
}

fn health_between(out: &RunOutput<f64>, from: f64, to: f64) -> impl Iterator<Item = f64> + '_ {
    out.log
        .records
        .iter()
        .filter(move |r| r.t >= from && r.t < to)
        .map(|r| r.health.h_filtered)
}

fn gyro_offset() -> Outcome {
    let t0 = BUILTIN_INJECTION_TIME;
    let mut parts = Vec::new();
    let mut pass = true;
    for make in [straight, serpentine] {
        let out = run(&make(TestCase::B));
        let latency = out.summary.latencies.first().and_then(|l| l.adaptive_heading);
        pass &= latency.is_some_and(|l| l <= MAX_LATENCY_S);
        parts.push(format!("{} heading latency={}", out.summary.name, secs(latency)));
    }
    let out = run(&straight(TestCase::B));
    let pre = health_between(&out, t0 - PRE_FAULT_WINDOW_S, t0).fold(f64::INFINITY, f64::min);
    let dip = health_between(&out, t0, t0 + DROP_WINDOW_S).fold(f64::INFINITY, f64::min);
    let recovered = health_between(&out, t0 + DROP_WINDOW_S, f64::INFINITY).fold(f64::NEG_INFINITY, f64::max);
    pass &= pre - dip >= MIN_HEALTH_DROP && recovered >= pre - RECOVERY_TOL;
    parts.push(format!(
        "straight pre={pre:.3} dip={dip:.3} drop={:.3} (>= {MIN_HEALTH_DROP}) recovered={recovered:.3} (>= pre-{RECOVERY_TOL})",
        pre - dip
    ));
    outcome(pass, parts.join("; "))
}

fn mean_speed_deficit(out: &RunOutput<f64>) -> f64 {
    let end = out.summary.t_end;
    let tail: Vec<f64> = out
        .log
        .records
        .iter()
        .filter(|r| r.t >= end - DEFICIT_WINDOW_S)
        .map(|r| (r.plant.u - 0.25).abs())
        .collect();
    tail.iter().sum::<f64>() / tail.len() as f64
}

fn motor_failure() -> Outcome {
    let faulty = run(&straight(TestCase::C));
    let nominal = run(&straight(TestCase::A));
    let l = faulty.summary.latencies.first();
    let heading = l.and_then(|l| l.adaptive_heading);
    let velocity = l.and_then(|l| l.adaptive_velocity);
    let (df, dn) = (mean_speed_deficit(&faulty), mean_speed_deficit(&nominal));
    let pass = heading.is_some_and(|v| v <= MAX_LATENCY_S)
        && velocity.is_some_and(|v| v <= MAX_LATENCY_S)
        && df >= DEFICIT_RATIO * dn;
    outcome(
        pass,
        format!(
            "latency heading={} velocity={} (<= {MAX_LATENCY_S} s); deficit C={df:.4} A={dn:.4} ratio={:.1} (>= {DEFICIT_RATIO})",
            secs(heading),
            secs(velocity),
            df / dn
        ),
    )
}

fn health_ordering() -> Outcome {
    let [a, b, c] = TestCase::ALL.map(|case| run(&straight(case)));
    let whole = |o: &RunOutput<f64>| o.summary.min_health;
    let after =
        |o: &RunOutput<f64>| health_between(o, BUILTIN_INJECTION_TIME, f64::INFINITY).fold(f64::INFINITY, f64::min);
    let pass = whole(&c) <= whole(&b) && whole(&b) <= whole(&a) && after(&c) <= after(&b) && after(&b) <= after(&a);
    outcome(
        pass,
        format!(
            "min H over run C={:.3} B={:.3} A={:.3}; after injection C={:.3} B={:.3} A={:.3}",
            whole(&c),
            whole(&b),
            whole(&a),
            after(&c),
            after(&b),
            after(&a)
        ),
    )
}

fn threshold_reduction() -> Outcome {
    let defaults = ThresholdConfig::<f64>::default();
    let dt = 0.01;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, base) in [("heading", defaults.heading), ("velocity", defaults.velocity)] {
        let cfg = ChannelThresholdConfig {
            k_d: 0.0,
            k_l: 0.0,
            ..base
        };
        let mut ch = ThresholdChannel::new(&cfg, defaults.highpass_hz, defaults.lowpass_hz, dt).unwrap();
        let steps = (THRESHOLD_SETTLE_TAUS * ch.lowpass().time_constant() / dt).ceil() as usize;
        let mut th = 0.0;
        for i in 0..steps {
            let t = i as f64 * dt;
            // Arbitrary residual and health; neither may reach the output.
            let r = 0.3 * (1.7 * t).sin() + if i % 7 == 0 { 0.5 } else { -0.1 };
            let h = 0.5 + 0.5 * (0.3 * t).cos();
            th = ch.step(r, h);
        }
        let rel = (th - cfg.c).abs() / cfg.c;
        worst = worst.max(rel);
        detail.push(format!("{name} {th:.5} vs c={}", cfg.c));
    }
    outcome(
        worst <= THRESHOLD_SETTLE_TOL,
        format!("{} rel err={worst:.1e} (<= {THRESHOLD_SETTLE_TOL})", detail.join(", ")),
    )
}

fn csv_digests(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path().join("telemetry.csv");
            let bytes = std::fs::read(&p).ok()?;
            let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            Some((p.parent()?.file_name()?.to_string_lossy().into_owned(), digest))
        })
        .collect();
    out.sort();
    out
}

fn batch_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_rover-health");
    let mut digests = Vec::new();
    for leg in ["first", "second"] {
        let dir = tmp.path().join(leg);
        let status = Command::new(bin)
            .args(["batch", "--all-builtin", "--no-plots", "--out"])
            .arg(&dir)
            .output()
            .expect("spawn batch");
        if !status.status.success() {
            return outcome(false, format!("batch exited with {}", status.status));
        }
        digests.push(csv_digests(&dir));
    }
    let pass = digests[0].len() == 6 && digests[0] == digests[1];
    outcome(
        pass,
        format!(
            "{} CSVs, sha256 equal across runs: {}",
            digests[0].len(),
            digests[0] == digests[1]
        ),
    )
}

fn numerical_substrate() -> Outcome {
    let error = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let mut x = [1.0];
        for i in 0..steps {
            x = rk4_step(&x, i as f64 * dt, dt, |_, s| [-s[0]]).unwrap();
        }
        (x[0] - (-1.0f64).exp()).abs()
    };
    let order = (error(0.1) / error(0.05)).log2();
    let order_fine = (error(0.05) / error(0.025)).log2();
    let dc = |kind| {
        let mut f = FilterState::new(kind, 1.0, 0.01).unwrap();
        let mut y = 0.0;
        for _ in 0..5000 {
            y = f.step(1.0);
        }
        y
    };
    let (lp1, lp2, hp) = (
        dc(FilterKind::LowPass1),
        dc(FilterKind::LowPass2),
        dc(FilterKind::HighPass1),
    );
    let pass = order.min(order_fine) >= RK4_MIN_ORDER
        && within(lp1, 1.0, DC_GAIN_TOL)
        && within(lp2, 1.0, DC_GAIN_TOL)
        && hp.abs() <= DC_GAIN_TOL;
    outcome(
        pass,
        format!(
            "rk4 order={order:.2},{order_fine:.2} (>= {RK4_MIN_ORDER}); DC gain lp1={lp1:.4} lp2={lp2:.4} hp={hp:.1e}"
        ),
    )
}

fn waypoint_delay() -> Outcome {
    let s = run(&serpentine(TestCase::C)).summary;
    let all_later = s
        .plant_collection_times
        .iter()
        .zip(&s.observer_collection_times)
        .all(|(p, o)| p >= o);
    let last = s.collection_deltas.last().copied();
    let pass = s.plant_waypoints_collected() == s.observer_waypoints_collected()
        && s.plant_waypoints_collected() > 0
        && all_later
        && last.is_some_and(|d| d > 0.0);
    let deltas: Vec<String> = s.collection_deltas.iter().map(|d| format!("{d:.2}")).collect();
    outcome(
        pass,
        format!("deltas [{}] s, plant never earlier: {all_later}", deltas.join(", ")),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("vital-function oracles", vital_oracles),
        ("health oracles", health_oracles),
        ("zero residual, both observer modes", zero_residual),
        ("nominal runs raise no adaptive alarm", nominal_no_false_alarm),
        ("gyro offset detected, health dips and recovers", gyro_offset),
        (
            "motor failure detected on both channels, speed deficit persists",
            motor_failure,
        ),
        ("health ordering C <= B <= A", health_ordering),
        ("threshold reduces to c without dynamic terms", threshold_reduction),
        ("batch CSVs byte-identical", batch_determinism),
        ("RK4 order and filter DC gains", numerical_substrate),
        ("serpentine waypoint delay", waypoint_delay),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
