//! Hand-rolled SVG line charts for one run: overhead path, health, and each
//! residual against its thresholds with alarm intervals shaded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rover_health::scenario::TelemetryLog;
use rover_health::{to_f64, Scalar};

use crate::error::{CliError, Result};
use crate::telemetry::CsvTable;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
/// Polylines are thinned to about this many vertices.
const MAX_VERTICES: usize = 2000;

const PLANT: &str = "#d62728";
const OBSERVER: &str = "#1f77b4";
const ADAPTIVE: &str = "#2ca02c";
const STATIC: &str = "#7f7f7f";

/// The signals the plots need, in plain `f64` columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotData {
    pub t: Vec<f64>,
    pub plant: Vec<(f64, f64)>,
    pub observer: Vec<(f64, f64)>,
    pub waypoints: Vec<(f64, f64)>,
    pub h_raw: Vec<f64>,
    pub h: Vec<f64>,
    pub residual: [Vec<f64>; 2],
    pub adaptive: [Vec<f64>; 2],
    pub fixed: [Vec<f64>; 2],
    pub alarm: [Vec<bool>; 2],
}

impl PlotData {
    pub fn from_log<T: Scalar>(log: &TelemetryLog<T>, waypoints: &[(f64, f64)]) -> Self {
        let col = |f: &dyn Fn(&rover_health::scenario::TelemetryRecord<T>) -> T| -> Vec<f64> {
            log.records.iter().map(|r| to_f64(f(r))).collect()
        };
        Self {
            t: col(&|r| r.t),
            plant: log
                .records
                .iter()
                .map(|r| (to_f64(r.plant.x), to_f64(r.plant.y)))
                .collect(),
            observer: log
                .records
                .iter()
                .map(|r| (to_f64(r.observer.x), to_f64(r.observer.y)))
                .collect(),
            waypoints: waypoints.to_vec(),
            h_raw: col(&|r| r.health.h_raw),
            h: col(&|r| r.health.h_filtered),
            residual: [col(&|r| r.residual.r_psi), col(&|r| r.residual.r_v)],
            adaptive: [
                col(&|r| r.adaptive_threshold.heading),
                col(&|r| r.adaptive_threshold.velocity),
            ],
            fixed: [
                col(&|r| r.static_threshold.heading),
                col(&|r| r.static_threshold.velocity),
            ],
            alarm: [
                log.records.iter().map(|r| r.adaptive_alarm.heading).collect(),
                log.records.iter().map(|r| r.adaptive_alarm.velocity).collect(),
            ],
        }
    }

    /// Rebuilds plot inputs from an exported CSV. Waypoints are not part of
    /// the telemetry, so the path plot omits them.
    pub fn from_table(table: &CsvTable) -> Self {
        let col = |name: &str| table.column(name).expect("fixed telemetry column").to_vec();
        let pairs = |a: &str, b: &str| col(a).into_iter().zip(col(b)).collect();
        let flags = |name: &str| col(name).into_iter().map(|v| v != 0.0).collect();
        Self {
            t: col("t"),
            plant: pairs("plant_x", "plant_y"),
            observer: pairs("obs_x", "obs_y"),
            waypoints: Vec::new(),
            h_raw: col("h_raw"),
            h: col("h"),
            residual: [col("r_psi"), col("r_v")],
            adaptive: [col("thr_psi_adaptive"), col("thr_v_adaptive")],
            fixed: [col("thr_psi_static"), col("thr_v_static")],
            alarm: [flags("alarm_psi"), flags("alarm_v")],
        }
    }
}

struct Series {
    label: String,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

impl Series {
    fn new(label: impl Into<String>, color: &'static str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            color,
            dashed: false,
            points,
        }
    }

    fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Default)]
struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
    markers: Vec<(f64, f64)>,
    /// Shaded x-intervals.
    bands: Vec<(f64, f64)>,
    y_range: Option<(f64, f64)>,
    equal_aspect: bool,
}

/// Round tick spacing giving roughly `target` intervals over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    // Snap round-off around zero so it does not print as "-0".
    let v = if v.abs() < step * 1e-6 { 0.0 } else { v };
    format!("{v:.decimals$}")
}

fn bounds<'a>(points: impl Iterator<Item = &'a (f64, f64)>) -> Option<(f64, f64, f64, f64)> {
    points
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .fold(None, |acc, &(x, y)| match acc {
            None => Some((x, x, y, y)),
            Some((x0, x1, y0, y1)) => Some((x0.min(x), x1.max(x), y0.min(y), y1.max(y))),
        })
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo > 1e-12 {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = lo.abs().max(1.0) * 0.1;
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    fn render(&self) -> String {
        let all = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .chain(self.markers.iter());
        let (mut x0, mut x1, mut y0, mut y1) = bounds(all).unwrap_or((0.0, 1.0, 0.0, 1.0));
        (x0, x1) = widen(x0, x1);
        (y0, y1) = match self.y_range {
            Some(r) => r,
            None => widen(y0, y1),
        };
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        if self.equal_aspect {
            // Same metres per pixel on both axes.
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            (x0, x1) = (cx - scale * pw / 2.0, cx + scale * pw / 2.0);
            (y0, y1) = (cy - scale * ph / 2.0, cy + scale * ph / 2.0);
        }
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<clipPath id="plot"><rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}"/></clipPath>"#
        );

        for &(a, b) in &self.bands {
            let (a, b) = (sx(a.max(x0)), sx(b.min(x1)));
            if b >= a {
                let _ = writeln!(
                    s,
                    r##"<rect x="{a:.2}" y="{MARGIN_TOP}" width="{:.2}" height="{ph}" fill="#ff7f0e" fill-opacity="0.2"/>"##,
                    (b - a).max(0.5)
                );
            }
        }

        // Grid and tick labels.
        let xs = tick_step(x1 - x0, 8.0);
        let mut v = (x0 / xs).ceil() * xs;
        while v <= x1 + 1e-9 * xs {
            let px = sx(v);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.2}" y1="{MARGIN_TOP}" x2="{px:.2}" y2="{:.2}" stroke="#e0e0e0"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                MARGIN_TOP + ph,
                MARGIN_TOP + ph + 16.0,
                fmt_tick(v, xs)
            );
            v += xs;
        }
        let ys = tick_step(y1 - y0, 6.0);
        let mut v = (y0 / ys).ceil() * ys;
        while v <= y1 + 1e-9 * ys {
            let py = sy(v);
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e0e0e0"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT + pw,
                MARGIN_LEFT - 6.0,
                py + 4.0,
                fmt_tick(v, ys)
            );
            v += ys;
        }
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for series in &self.series {
            let stride = series.points.len().div_ceil(MAX_VERTICES).max(1);
            let dash = if series.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            // Non-finite samples split the line.
            let mut run = String::new();
            let flush = |run: &mut String, s: &mut String| {
                if !run.is_empty() {
                    let _ = writeln!(
                        s,
                        r#"<polyline clip-path="url(#plot)" fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                        series.color,
                        run.trim_end()
                    );
                    run.clear();
                }
            };
            let last = series.points.len().saturating_sub(1);
            for (i, &(x, y)) in series.points.iter().enumerate() {
                if i % stride != 0 && i != last {
                    continue;
                }
                if x.is_finite() && y.is_finite() {
                    let _ = write!(run, "{:.2},{:.2} ", sx(x), sy(y.clamp(y0 - (y1 - y0), y1 + (y1 - y0))));
                } else {
                    flush(&mut run, &mut s);
                }
            }
            flush(&mut run, &mut s);
        }
        for &(x, y) in &self.markers {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="black" stroke-width="1.5"/>"#,
                sx(x),
                sy(y)
            );
        }

        // Legend.
        let lx = MARGIN_LEFT + pw + 12.0;
        let mut ly = MARGIN_TOP + 12.0;
        for series in self.series.iter().filter(|s| !s.label.is_empty()) {
            let dash = if series.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                lx + 24.0,
                series.color,
                lx + 30.0,
                ly + 4.0,
                escape(&series.label)
            );
            ly += 18.0;
        }
        if !self.markers.is_empty() {
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{ly}" r="5" fill="none" stroke="black"/><text x="{}" y="{}">waypoint</text>"#,
                lx + 12.0,
                lx + 30.0,
                ly + 4.0
            );
            ly += 18.0;
        }
        if !self.bands.is_empty() {
            let _ = writeln!(
                s,
                r##"<rect x="{lx}" y="{}" width="24" height="10" fill="#ff7f0e" fill-opacity="0.2"/><text x="{}" y="{}">alarm</text>"##,
                ly - 5.0,
                lx + 30.0,
                ly + 4.0
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Contiguous intervals where `flags` is set, as `[t_start, t_end]`.
fn alarm_bands(t: &[f64], flags: &[bool]) -> Vec<(f64, f64)> {
    let mut bands = Vec::new();
    let mut start = None;
    for (i, (&ti, &on)) in t.iter().zip(flags).enumerate() {
        match (on, start) {
            (true, None) => start = Some(ti),
            (false, Some(s)) => {
                bands.push((s, t[i - 1].max(s)));
                start = None;
            }
            _ => {}
        }
    }
    if let (Some(s), Some(&end)) = (start, t.last()) {
        bands.push((s, end));
    }
    bands
}

fn path_chart(d: &PlotData, title: &str) -> Chart {
    Chart {
        title: format!("{title}: path"),
        x_label: "x [m]".into(),
        y_label: "y [m]".into(),
        series: vec![
            Series::new("observer", OBSERVER, d.observer.clone()),
            Series::new("plant", PLANT, d.plant.clone()).dashed(),
        ],
        markers: d.waypoints.clone(),
        equal_aspect: true,
        ..Chart::default()
    }
}

fn health_chart(d: &PlotData, title: &str) -> Chart {
    let pairs = |v: &[f64]| d.t.iter().copied().zip(v.iter().copied()).collect();
    Chart {
        title: format!("{title}: health"),
        x_label: "t [s]".into(),
        y_label: "health H [-]".into(),
        series: vec![
            Series::new("H raw", STATIC, pairs(&d.h_raw)),
            Series::new("H filtered", PLANT, pairs(&d.h)),
        ],
        y_range: Some((-0.02, 1.02)),
        ..Chart::default()
    }
}

fn residual_chart(d: &PlotData, title: &str, i: usize) -> Chart {
    let (name, unit) = if i == 0 {
        ("heading", "rad")
    } else {
        ("velocity", "m/s")
    };
    let pairs = |v: &[f64], sign: f64| d.t.iter().zip(v).map(|(&t, &y)| (t, sign * y)).collect::<Vec<_>>();
    let mut series = vec![
        Series::new(format!("residual ({name})"), OBSERVER, pairs(&d.residual[i], 1.0)),
        Series::new("adaptive threshold", ADAPTIVE, pairs(&d.adaptive[i], 1.0)),
        Series::new("", ADAPTIVE, pairs(&d.adaptive[i], -1.0)),
    ];
    if d.fixed[i].iter().any(|v| v.is_finite()) {
        series.push(Series::new("static threshold", STATIC, pairs(&d.fixed[i], 1.0)).dashed());
        series.push(Series::new("", STATIC, pairs(&d.fixed[i], -1.0)).dashed());
    }
    // Unlabelled series (the mirrored lower bounds) stay out of the legend.
    let mut chart = Chart {
        title: format!("{title}: {name} residual"),
        x_label: "t [s]".into(),
        y_label: format!("{name} residual [{unit}]"),
        series,
        bands: alarm_bands(&d.t, &d.alarm[i]),
        ..Chart::default()
    };
    chart.series.retain(|s| !s.points.is_empty());
    chart
}

pub const PLOT_FILES: [&str; 4] = [
    "path.svg",
    "health.svg",
    "residual_heading.svg",
    "residual_velocity.svg",
];

/// Writes the four charts into `out_dir`, creating it if needed.
pub fn emit_plots(data: &PlotData, title: &str, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let charts = [
        path_chart(data, title),
        health_chart(data, title),
        residual_chart(data, title, 0),
        residual_chart(data, title, 1),
    ];
    let mut written = Vec::new();
    for (chart, file) in charts.iter().zip(PLOT_FILES) {
        let path = out_dir.join(file);
        fs::write(&path, chart.render()).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(tick_step(10.0, 5.0), 2.0);
        assert_eq!(tick_step(1.0, 8.0), 0.1);
        assert_eq!(tick_step(100.0, 4.0), 20.0);
        assert_eq!(fmt_tick(0.30000000000000004, 0.1), "0.3");
        assert_eq!(fmt_tick(-1e-17, 5.0), "0");
    }

    #[test]
    fn bands_cover_alarm_runs() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let f = [false, true, true, false, true, true];
        assert_eq!(alarm_bands(&t, &f), vec![(1.0, 2.0), (4.0, 5.0)]);
        assert!(alarm_bands(&t, &[false; 6]).is_empty());
    }

    #[test]
    fn nan_splits_polylines() {
        let chart = Chart {
            series: vec![Series::new(
                "s",
                PLANT,
                vec![(0.0, 0.0), (1.0, 1.0), (2.0, f64::NAN), (3.0, 1.0), (4.0, 0.0)],
            )],
            ..Chart::default()
        };
        let svg = chart.render();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(!svg.contains("NaN"));
    }
}
