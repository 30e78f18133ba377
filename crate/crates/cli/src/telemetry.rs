//! Telemetry CSV: one row per step, fixed 29-column layout.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rover_health::scenario::TelemetryLog;
use rover_health::{Scalar, SimError};

use crate::error::{CliError, Result};

pub const CSV_COLUMNS: [&str; 29] = [
    "t",
    "plant_x",
    "plant_y",
    "plant_psi",
    "plant_u",
    "obs_x",
    "obs_y",
    "obs_psi",
    "obs_u",
    "psi_meas",
    "speed_meas",
    "accel_x",
    "v_left",
    "v_right",
    "vital_ax",
    "vital_ddot",
    "vital_psidot",
    "vital_vdot",
    "p",
    "h_raw",
    "h",
    "r_psi",
    "r_v",
    "thr_psi_adaptive",
    "thr_v_adaptive",
    "thr_psi_static",
    "thr_v_static",
    "alarm_psi",
    "alarm_v",
];

/// Writes the log as CSV. Reals use the shortest decimal that reads back to
/// the same value; alarm columns (adaptive detector) are 0 or 1.
pub fn write_csv<T: Scalar, W: Write>(log: &TelemetryLog<T>, out: W) -> Result<()> {
    if log.is_empty() {
        return Err(SimError::Domain("cannot export an empty telemetry log".into()).into());
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let flag = |b: bool| if b { "1" } else { "0" }.to_string();
    for r in &log.records {
        let reals = [
            r.t,
            r.plant.x,
            r.plant.y,
            r.plant.psi,
            r.plant.u,
            r.observer.x,
            r.observer.y,
            r.observer.psi,
            r.observer.u,
            r.reading.psi_meas,
            r.reading.speed_meas,
            r.reading.accel_x,
            r.command.v_left,
            r.command.v_right,
            r.vitals.v_accel,
            r.vitals.v_dist_rate,
            r.vitals.v_heading_rate,
            r.vitals.v_voltage_rate,
            r.health.p,
            r.health.h_raw,
            r.health.h_filtered,
            r.residual.r_psi,
            r.residual.r_v,
            r.adaptive_threshold.heading,
            r.adaptive_threshold.velocity,
            r.static_threshold.heading,
            r.static_threshold.velocity,
        ];
        let row = reals
            .iter()
            .map(ToString::to_string)
            .chain([flag(r.adaptive_alarm.heading), flag(r.adaptive_alarm.velocity)]);
        w.write_record(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn export_csv<T: Scalar>(log: &TelemetryLog<T>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(log, &mut out)?;
    out.flush().map_err(|e| CliError::io(path, e))
}

/// A telemetry CSV read back column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.clone();
        if header.iter().ne(CSV_COLUMNS) {
            return Err(CliError::Usage(format!(
                "telemetry header does not match the expected {} columns",
                CSV_COLUMNS.len()
            )));
        }
        let mut columns = vec![Vec::new(); CSV_COLUMNS.len()];
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            for (i, field) in record.iter().enumerate() {
                let v = field.parse().map_err(|_| {
                    CliError::Usage(format!(
                        "row {}: `{field}` in {} is not a number",
                        row + 2,
                        CSV_COLUMNS[i]
                    ))
                })?;
                columns[i].push(v);
            }
        }
        Ok(Self { columns })
    }

    pub fn open(path: &Path) -> Result<Self> {
        Self::read(File::open(path).map_err(|e| CliError::io(path, e))?)
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column by header name.
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let i = CSV_COLUMNS.iter().position(|c| *c == name)?;
        Some(&self.columns[i])
    }
}
