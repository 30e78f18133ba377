use super::config::{FaultConfig, ScenarioConfig, TerrainSpec};
use crate::gnc::Mission;
use crate::vehicle::FRONT_LEFT;

/// Time at which every builtin fault is injected, s.
pub const BUILTIN_INJECTION_TIME: f64 = 5.0;
/// Heading offset of the builtin gyro fault, degrees.
pub const BUILTIN_GYRO_OFFSET_DEG: f64 = 10.0;

/// The fault-free (A), gyro-offset (B) and motor-failure (C) test cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestCase {
    A,
    B,
    C,
}

impl TestCase {
    pub const ALL: [TestCase; 3] = [TestCase::A, TestCase::B, TestCase::C];

    pub fn suffix(self) -> char {
        match self {
            TestCase::A => 'A',
            TestCase::B => 'B',
            TestCase::C => 'C',
        }
    }

    pub fn from_name(name: &str) -> Option<TestCase> {
        match name.rsplit('_').next()? {
            "A" => Some(TestCase::A),
            "B" => Some(TestCase::B),
            "C" => Some(TestCase::C),
            _ => None,
        }
    }

    pub fn faults(self) -> Vec<FaultConfig> {
        match self {
            TestCase::A => Vec::new(),
            TestCase::B => vec![FaultConfig::GyroOffset {
                offset_deg: BUILTIN_GYRO_OFFSET_DEG,
                t_inject: BUILTIN_INJECTION_TIME,
                enabled: true,
            }],
            TestCase::C => vec![FaultConfig::MotorFailure {
                wheel_index: FRONT_LEFT,
                t_inject: BUILTIN_INJECTION_TIME,
                enabled: true,
            }],
        }
    }
}

fn base(
    name: String,
    waypoints: Vec<(f64, f64)>,
    duration: f64,
    terrain: TerrainSpec,
    case: TestCase,
) -> ScenarioConfig {
    ScenarioConfig {
        name,
        terrain,
        mission: Mission {
            waypoints,
            acceptance_radius: 0.2,
            cruise_speed: 0.25,
        },
        start: Default::default(),
        rover: Default::default(),
        gains: Default::default(),
        vitals: Default::default(),
        monitor: Default::default(),
        thresholds: Default::default(),
        faults: case.faults(),
        noise: Default::default(),
        duration,
        dt: 0.01,
        observer_mode: Default::default(),
    }
}

/// Straight run to a single target 20 m ahead on gently rolling ground.
pub fn straight(case: TestCase) -> ScenarioConfig {
    base(
        format!("straight_{}", case.suffix()),
        vec![(20.0, 0.0)],
        120.0,
        TerrainSpec::Sinusoid {
            amplitude: 0.02,
            wavelength: 20.0,
        },
        case,
    )
}

/// Zig-zag through five waypoints with 4 m lateral swings.
pub fn serpentine(case: TestCase) -> ScenarioConfig {
    base(
        format!("serpentine_{}", case.suffix()),
        vec![(6.0, 2.0), (12.0, -2.0), (18.0, 2.0), (24.0, -2.0), (30.0, 0.0)],
        200.0,
        TerrainSpec::Sinusoid {
            amplitude: 0.02,
            wavelength: 20.0,
        },
        case,
    )
}

/// All six builtin scenarios: straight then serpentine, cases A to C.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    TestCase::ALL
        .into_iter()
        .map(straight)
        .chain(TestCase::ALL.into_iter().map(serpentine))
        .collect()
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|c| c.name == name)
}
