//! Generators, fleets, net-load profiles and dispatch state.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::DispatchError;

pub const DEFAULT_PENALTY: f64 = 2500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    /// MW
    pub g_min: f64,
    /// MW
    pub g_max: f64,
    /// MW per interval
    pub ramp_up: f64,
    /// MW per interval
    pub ramp_down: f64,
    /// $/MWh
    pub cost: f64,
}

impl GeneratorSpec {
    pub fn new(name: impl Into<String>, g_max: f64, ramp: f64, cost: f64) -> Self {
        GeneratorSpec { name: name.into(), g_min: 0.0, g_max, ramp_up: ramp, ramp_down: ramp, cost }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(default)]
    pub name: String,
    pub interval_minutes: u32,
    pub generators: Vec<GeneratorSpec>,
}

impl SystemSpec {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Interval length in hours.
    pub fn dt_hours(&self) -> f64 {
        self.interval_minutes as f64 / 60.0
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.g_max).sum()
    }

    pub fn total_ramp_up(&self) -> f64 {
        self.generators.iter().map(|g| g.ramp_up).sum()
    }

    pub fn max_cost(&self) -> f64 {
        self.generators.iter().map(|g| g.cost).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn from_json(text: &str) -> Result<Self, DispatchError> {
        let sys: SystemSpec = serde_json::from_str(text)?;
        let v = validate(&sys);
        if !v.is_empty() {
            return Err(DispatchError::InvalidSystem(v));
        }
        Ok(sys)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system serializes")
    }

    pub fn load(path: &Path) -> Result<Self, DispatchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DispatchError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Built-in system by name, or a JSON file path.
    pub fn resolve(name_or_path: &str) -> Result<Self, DispatchError> {
        match name_or_path {
            "two_gen" | "two-gen" | "2gen" => Ok(two_gen_system()),
            "ten_gen" | "ten-gen" | "10gen" => Ok(ten_gen_system()),
            path => Self::load(Path::new(path)),
        }
    }

    pub fn fingerprint(&self) -> u64 {
        fnv1a(self.to_json().as_bytes())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Two 500 MW units: a fast cheap one and a slow expensive one.
pub fn two_gen_system() -> SystemSpec {
    SystemSpec {
        name: "two_gen".into(),
        interval_minutes: 5,
        generators: vec![
            GeneratorSpec::new("G1", 500.0, 500.0, 25.0),
            GeneratorSpec::new("G2", 500.0, 50.0, 30.0),
        ],
    }
}

/// Ten-unit fleet: (cost $/MWh, capacity MW, ramp MW/5min).
pub const TEN_GEN_TABLE: [(f64, f64, f64); 10] = [
    (185.0, 22.0, 7.5),
    (30.0, 170.0, 17.5),
    (55.0, 85.0, 7.5),
    (15.0, 230.0, 7.5),
    (20.0, 613.0, 37.5),
    (19.5, 686.0, 10.0),
    (48.0, 45.0, 10.0),
    (60.0, 50.0, 5.0),
    (57.0, 260.0, 5.0),
    (50.0, 400.0, 12.5),
];

pub fn ten_gen_system() -> SystemSpec {
    SystemSpec {
        name: "ten_gen".into(),
        interval_minutes: 5,
        generators: TEN_GEN_TABLE
            .iter()
            .enumerate()
            .map(|(i, &(cost, cap, ramp))| GeneratorSpec::new(format!("G{}", i + 1), cap, ramp, cost))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoGenerators,
    ZeroInterval,
    NonFinite { generator: usize, field: &'static str },
    NegativeMin { generator: usize },
    MinAboveMax { generator: usize },
    NonPositiveRampUp { generator: usize },
    NonPositiveRampDown { generator: usize },
    DuplicateName { generator: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoGenerators => write!(f, "system has no generators"),
            Violation::ZeroInterval => write!(f, "interval_minutes must be positive"),
            Violation::NonFinite { generator, field } => {
                write!(f, "generator {generator}: {field} is not finite")
            }
            Violation::NegativeMin { generator } => write!(f, "generator {generator}: g_min < 0"),
            Violation::MinAboveMax { generator } => {
                write!(f, "generator {generator}: g_min > g_max")
            }
            Violation::NonPositiveRampUp { generator } => {
                write!(f, "generator {generator}: ramp_up must be positive")
            }
            Violation::NonPositiveRampDown { generator } => {
                write!(f, "generator {generator}: ramp_down must be positive")
            }
            Violation::DuplicateName { generator } => {
                write!(f, "generator {generator}: duplicate name")
            }
        }
    }
}

/// Every invariant violation of `system`; empty when valid.
pub fn validate(system: &SystemSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if system.generators.is_empty() {
        out.push(Violation::NoGenerators);
    }
    if system.interval_minutes == 0 {
        out.push(Violation::ZeroInterval);
    }
    for (i, g) in system.generators.iter().enumerate() {
        let fields = [
            ("g_min", g.g_min),
            ("g_max", g.g_max),
            ("ramp_up", g.ramp_up),
            ("ramp_down", g.ramp_down),
            ("cost", g.cost),
        ];
        let mut finite = true;
        for (field, v) in fields {
            if !v.is_finite() {
                out.push(Violation::NonFinite { generator: i, field });
                finite = false;
            }
        }
        if system.generators[..i].iter().any(|h| h.name == g.name) {
            out.push(Violation::DuplicateName { generator: i });
        }
        if !finite {
            continue;
        }
        if g.g_min < 0.0 {
            out.push(Violation::NegativeMin { generator: i });
        } else if g.g_min > g.g_max {
            out.push(Violation::MinAboveMax { generator: i });
        }
        if g.ramp_up <= 0.0 {
            out.push(Violation::NonPositiveRampUp { generator: i });
        }
        if g.ramp_down <= 0.0 {
            out.push(Violation::NonPositiveRampDown { generator: i });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetLoadProfile {
    /// MW per interval, d(1)..d(T).
    pub values: Vec<f64>,
    pub interval_minutes: u32,
}

impl NetLoadProfile {
    pub fn new(values: Vec<f64>) -> Result<Self, DispatchError> {
        Self::with_interval(values, 5)
    }

    pub fn with_interval(values: Vec<f64>, interval_minutes: u32) -> Result<Self, DispatchError> {
        if values.is_empty() {
            return Err(DispatchError::Profile("profile is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DispatchError::Profile(format!("value {i} is not finite")));
        }
        if interval_minutes == 0 {
            return Err(DispatchError::Profile("interval must be positive".into()));
        }
        Ok(NetLoadProfile { values, interval_minutes })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value standing in for d(0): the first reading.
    pub fn t0_value(&self) -> f64 {
        self.values[0]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn t_min(&self, t: usize) -> f64 {
        (t as u64 * self.interval_minutes as u64) as f64
    }

    pub fn fingerprint(&self) -> u64 {
        let bytes: Vec<u8> = self.values.iter().flat_map(|v| v.to_bits().to_le_bytes()).collect();
        fnv1a(&bytes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchState {
    /// g_i(t−1), MW
    pub prev_output: Vec<f64>,
    /// s(t−1), MW
    pub prev_shed: f64,
}

impl DispatchState {
    pub fn new(prev_output: Vec<f64>) -> Self {
        DispatchState { prev_output, prev_shed: 0.0 }
    }

    pub fn check(&self, system: &SystemSpec) -> Result<(), DispatchError> {
        if self.prev_output.len() != system.len() {
            return Err(DispatchError::Config(format!(
                "state has {} outputs for {} generators",
                self.prev_output.len(),
                system.len()
            )));
        }
        for (g, &p) in system.generators.iter().zip(&self.prev_output) {
            if p < g.g_min - 1e-6 || p > g.g_max + 1e-6 {
                return Err(DispatchError::Config(format!(
                    "{}: previous output {p} outside [{}, {}]",
                    g.name, g.g_min, g.g_max
                )));
            }
        }
        if self.prev_shed < 0.0 {
            return Err(DispatchError::Config("previous shed is negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// $/MWh
    pub rho_s: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { rho_s: DEFAULT_PENALTY }
    }
}

impl PenaltyConfig {
    pub fn check(&self, system: &SystemSpec) -> Result<(), DispatchError> {
        if !(self.rho_s > system.max_cost()) {
            return Err(DispatchError::Config(format!(
                "penalty {} must exceed every generator cost (max {})",
                self.rho_s,
                system.max_cost()
            )));
        }
        Ok(())
    }
}
