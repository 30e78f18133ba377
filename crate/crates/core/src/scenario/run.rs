use thiserror::Error;

use super::config::{ObserverMode, ScenarioConfig};
use super::summary::{summarize, RunSummary};
use super::telemetry::{PerChannel, TelemetryLog, TelemetryRecord, Track};
use crate::error::SimError;
use crate::fdi::{residuals, Channel, DetectorKind, DetectorState, ThresholdChannel, ThresholdConfig};
use crate::gnc::{control_step, update_waypoints, Controllers, GuidanceState, Mission};
use crate::monitor::MonitorState;
use crate::scalar::{cast, Scalar};
use crate::sim::{NoiseSource, SimClock};
use crate::terrain::TerrainError;
use crate::vehicle::{integrate_step, sense, BodyState, FaultSet, RoverParams};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] SimError),
    #[error("terrain: {0}")]
    Terrain(#[from] TerrainError),
}

/// A finished (or aborted) run. When `abort` is set the log holds every step
/// completed before the failure.
#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub log: TelemetryLog<T>,
    pub summary: RunSummary,
    pub abort: Option<SimError>,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput<f64>, ScenarioError> {
    run_scenario_as::<f64>(cfg)
}

/// Runs one scenario in the chosen precision.
///
/// Each step senses the plant, steers it, advances the observer's control,
/// forms residuals, updates health and thresholds, runs the detectors, logs,
/// then integrates both bodies. Detectors are armed only while neither
/// mission is complete.
pub fn run_scenario_as<T: Scalar>(cfg: &ScenarioConfig) -> Result<RunOutput<T>, ScenarioError> {
    cfg.validate()?;
    let terrain = cfg.terrain.build::<T>()?;
    let dt: T = cast(cfg.dt);
    let mission: Mission<T> = cfg.mission.cast();
    let rover: RoverParams<T> = cfg.rover.cast();
    let gains = cfg.gains.cast::<T>();
    let vital_params = cfg.vitals.cast::<T>();
    let thresholds: ThresholdConfig<T> = cfg.thresholds.cast();
    let faults = cfg.fault_set::<T>()?;
    let no_faults = FaultSet::none();
    let max_voltage = rover.motor.max_voltage;

    let mut noise = if cfg.noise.enabled {
        NoiseSource::new(cfg.noise.seed, cfg.noise.sigma.cast())?
    } else {
        NoiseSource::disabled()
    };
    let mut quiet = NoiseSource::disabled();
    let mut monitor = MonitorState::new(cfg.monitor.cast(), dt)?;
    let mut threshold = [
        ThresholdChannel::new(&thresholds.heading, thresholds.highpass_hz, thresholds.lowpass_hz, dt)?,
        ThresholdChannel::new(&thresholds.velocity, thresholds.highpass_hz, thresholds.lowpass_hz, dt)?,
    ];
    let static_threshold = Channel::ALL.map(|ch| thresholds.channel(ch).static_threshold);
    let mut adaptive_det = [DetectorState::new(thresholds.debounce_n); 2];
    let mut static_det = adaptive_det;

    let start = BodyState::at_rest(cast(cfg.start.x), cast(cfg.start.y), cast(cfg.start.psi), &terrain);
    let (mut plant, mut observer) = (start, start);
    let (mut plant_prev_u, mut observer_prev_u) = (start.u, start.u);
    let (mut plant_gs, mut observer_gs) = (GuidanceState::new(), GuidanceState::new());
    let (mut plant_ctrl, mut observer_ctrl) = (Controllers::new(&gains), Controllers::new(&gains));

    let mut clock = SimClock::new(dt)?;
    let steps = cfg.step_count();
    let mut log = TelemetryLog {
        records: Vec::with_capacity(steps as usize),
        ..TelemetryLog::default()
    };
    let mut abort = None;

    for _ in 0..steps {
        let t = clock.t();

        let reading = sense(&plant, plant_prev_u, &faults, &mut noise, t, dt);
        update_waypoints(&mut plant_gs, reading.position_meas, &mission, t);
        let command = control_step(&reading, &plant_gs, &mission, &mut plant_ctrl, max_voltage, dt);

        let observer_command = match cfg.observer_mode {
            ObserverMode::Independent => {
                let own = sense(&observer, observer_prev_u, &no_faults, &mut quiet, t, dt);
                update_waypoints(&mut observer_gs, own.position_meas, &mission, t);
                control_step(&own, &observer_gs, &mission, &mut observer_ctrl, max_voltage, dt)
            }
            ObserverMode::SharedCommand => {
                update_waypoints(&mut observer_gs, (observer.x, observer.y), &mission, t);
                command
            }
        };

        let residual = residuals((observer.psi, observer.u), (reading.psi_meas, reading.speed_meas), t);
        let (vitals, health) = monitor.step(&reading, &command, plant_gs.current_target(&mission), &vital_params, dt);

        let armed = !plant_gs.mission_complete && !observer_gs.mission_complete;
        let mut adaptive_threshold = PerChannel::default();
        let mut static_values = PerChannel::default();
        let mut adaptive_alarm = PerChannel::default();
        let mut static_alarm = PerChannel::default();
        for (i, ch) in Channel::ALL.into_iter().enumerate() {
            let r = residual.get(ch);
            let th = threshold[i].step(r, health.h_filtered);
            adaptive_threshold.set(ch, th);
            if armed {
                log.events
                    .extend(adaptive_det[i].detect(r, th, ch, DetectorKind::Adaptive, t));
            }
            adaptive_alarm.set(ch, adaptive_det[i].active_alarm);

            let fixed = static_threshold[i];
            static_values.set(ch, fixed.unwrap_or_else(T::nan));
            if let (Some(fixed), true) = (fixed, armed) {
                log.events
                    .extend(static_det[i].detect(r, fixed, ch, DetectorKind::Static, t));
            }
            static_alarm.set(ch, static_det[i].active_alarm);
        }

        log.records.push(TelemetryRecord {
            t,
            plant: Track::from(&plant),
            observer: Track::from(&observer),
            reading,
            command,
            vitals,
            health,
            residual,
            adaptive_threshold,
            static_threshold: static_values,
            adaptive_alarm,
            static_alarm,
        });

        if plant_gs.mission_complete && observer_gs.mission_complete {
            break;
        }

        let next_plant = integrate_step(&plant, &command, &faults, &terrain, &rover, t, dt);
        let next_observer = integrate_step(&observer, &observer_command, &no_faults, &terrain, &rover, t, dt);
        match (next_plant, next_observer) {
            (Ok(p), Ok(o)) => {
                plant_prev_u = plant.u;
                observer_prev_u = observer.u;
                plant = p;
                observer = o;
            }
            (Err(e), _) | (_, Err(e)) => {
                abort = Some(e);
                break;
            }
        }
        clock.tick();
    }

    log.plant_collections = plant_gs.collection_times;
    log.observer_collections = observer_gs.collection_times;
    let mut summary = summarize(&log, cfg)?;
    summary.aborted = abort.as_ref().map(ToString::to_string);
    Ok(RunOutput { log, summary, abort })
}
