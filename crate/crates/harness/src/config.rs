//! Experiment configuration and its JSON file form.
//!
//! ```json
//! {
//!   "gains":      { "kp": 0.87, "ti": 0.17, "td": 2.76, "decay": 0.97 },
//!   "grids":      { "neurons": 151, "distribution": "uniform", "mode": "floor", "quantized": false },
//!   "plant":      { "mass": 0.68, "drag": 1.0, "motor_tau": 0.02, "battery_sag": 0.0 },
//!   "sensor":     { "quantum": 0.01, "window": 1 },
//!   "experiment": { "controller": "npid", "setpoint": 1.5, "duration": 20.0, "rate": 70.0 }
//! }
//! ```
//!
//! Every key is optional; missing ones take the defaults below.

use std::path::Path;

use npid_core::grid::GridSpec;
use npid_core::{Distribution, NpidConfig, PidGains, PlantParams, RoundingMode, SensorConfig};
use serde::{Deserialize, Serialize};

use crate::Error;

/// Integral decay used by the closed-loop experiments.
pub const EXPERIMENT_DECAY: f64 = 0.97;

/// Rounding used by the closed-loop experiments. Floor keeps the decay
/// draining the integral down to the zero bin.
pub const EXPERIMENT_MODE: RoundingMode = RoundingMode::Floor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Controller {
    Npid,
    Baseline,
}

impl std::fmt::Display for Controller {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Controller::Npid => "npid",
            Controller::Baseline => "baseline",
        })
    }
}

/// Output distribution used for a given resolution when none is requested:
/// very small populations get the quadratic code.
pub fn default_distribution(neurons: usize) -> Distribution {
    if neurons <= 15 {
        Distribution::Quadratic
    } else {
        Distribution::Uniform
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub controller: Controller,
    pub npid: NpidConfig,
    pub plant: PlantParams,
    pub sensor: SensorConfig,
    /// Thrust sag rate, N/s.
    pub battery_sag: f64,
    /// m
    pub setpoint: f64,
    /// s
    pub duration: f64,
    /// Control rate, Hz.
    pub rate: f64,
    /// Physics steps per control tick.
    pub substeps: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut npid = NpidConfig::standard(151, Distribution::Uniform);
        npid.decay = EXPERIMENT_DECAY;
        npid.mode = EXPERIMENT_MODE;
        ExperimentConfig {
            controller: Controller::Npid,
            npid,
            plant: PlantParams::default(),
            sensor: SensorConfig::default(),
            battery_sag: 0.0,
            setpoint: 1.5,
            duration: 20.0,
            rate: npid_core::npid::CONTROL_RATE_HZ,
            substeps: 10,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Standard grids at resolution `neurons`, keeping gains, decay, mode and
    /// quantization of `self`.
    pub fn with_resolution(&self, neurons: usize, distribution: Distribution) -> Self {
        let mut fresh = NpidConfig::standard(neurons, distribution);
        let old = &self.npid;
        fresh.kp = old.kp;
        fresh.ti = old.ti;
        fresh.td = old.td;
        fresh.decay = old.decay;
        fresh.mode = old.mode;
        fresh.quantized = old.quantized;
        let i_hi = fresh.output.hi * fresh.ti / fresh.kp;
        fresh.integral = GridSpec::new(-i_hi, i_hi, neurons, distribution);
        ExperimentConfig {
            npid: fresh,
            ..self.clone()
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate
    }

    pub fn ticks(&self) -> usize {
        (self.duration * self.rate).round() as usize
    }

    /// Gains of the conventional controller, sharing the N-PID's decay so
    /// both integrals leak alike.
    pub fn gains(&self) -> PidGains {
        PidGains {
            kp: self.npid.kp,
            ti: self.npid.ti,
            td: self.npid.td,
            decay: self.npid.decay,
        }
    }

    /// The N-PID config with its control period tied to the loop rate.
    pub fn npid_config(&self) -> NpidConfig {
        NpidConfig {
            dt: self.dt(),
            ..self.npid.clone()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Config("duration must be positive".into()));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::Config("rate must be positive".into()));
        }
        if self.substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        if !self.setpoint.is_finite() {
            return Err(Error::Config("setpoint must be finite".into()));
        }
        if !(self.battery_sag >= 0.0) {
            return Err(Error::Config(
                "battery sag rate must be non-negative".into(),
            ));
        }
        self.plant.validate().map_err(|e| Error::Config(e.into()))?;
        self.npid_config().validate()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let file: ConfigFile = serde_json::from_str(text)?;
        let cfg = file.into_config();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ConfigFile::from_config(self)).expect("config serializes")
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub gains: GainsSection,
    pub grids: GridsSection,
    pub plant: PlantSection,
    pub sensor: SensorConfig,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainsSection {
    pub kp: f64,
    pub ti: f64,
    pub td: f64,
    pub decay: f64,
}

impl Default for GainsSection {
    fn default() -> Self {
        let c = ExperimentConfig::default();
        GainsSection {
            kp: c.npid.kp,
            ti: c.npid.ti,
            td: c.npid.td,
            decay: c.npid.decay,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridsSection {
    pub neurons: usize,
    /// Output (and integral) distribution; defaults by resolution.
    pub distribution: Option<Distribution>,
    pub mode: RoundingMode,
    pub quantized: bool,
    /// Explicit per-population overrides.
    pub io: Option<GridSpec>,
    pub error: Option<GridSpec>,
    pub integral: Option<GridSpec>,
    pub derivative: Option<GridSpec>,
    pub output: Option<GridSpec>,
}

impl Default for GridsSection {
    fn default() -> Self {
        GridsSection {
            neurons: 151,
            distribution: None,
            mode: EXPERIMENT_MODE,
            quantized: false,
            io: None,
            error: None,
            integral: None,
            derivative: None,
            output: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub mass: f64,
    pub g: f64,
    pub drag: f64,
    pub motor_tau: f64,
    pub thrust_limits: Option<(f64, f64)>,
    pub hover_adjust: f64,
    pub battery_sag: f64,
}

impl Default for PlantSection {
    fn default() -> Self {
        let p = PlantParams::default();
        PlantSection {
            mass: p.mass,
            g: p.g,
            drag: p.drag,
            motor_tau: p.motor_tau,
            thrust_limits: p.thrust_limits,
            hover_adjust: p.hover_adjust,
            battery_sag: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub controller: Controller,
    pub setpoint: f64,
    pub duration: f64,
    pub rate: f64,
    pub substeps: usize,
    pub seed: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let c = ExperimentConfig::default();
        ExperimentSection {
            controller: c.controller,
            setpoint: c.setpoint,
            duration: c.duration,
            rate: c.rate,
            substeps: c.substeps,
            seed: c.seed,
        }
    }
}

impl ConfigFile {
    pub fn into_config(self) -> ExperimentConfig {
        let g = self.grids;
        let dist = g
            .distribution
            .unwrap_or_else(|| default_distribution(g.neurons));
        let base = ExperimentConfig::default();
        let mut cfg = ExperimentConfig {
            controller: self.experiment.controller,
            plant: PlantParams {
                mass: self.plant.mass,
                g: self.plant.g,
                drag: self.plant.drag,
                motor_tau: self.plant.motor_tau,
                thrust_limits: self.plant.thrust_limits,
                hover_adjust: self.plant.hover_adjust,
            },
            sensor: self.sensor,
            battery_sag: self.plant.battery_sag,
            setpoint: self.experiment.setpoint,
            duration: self.experiment.duration,
            rate: self.experiment.rate,
            substeps: self.experiment.substeps,
            seed: self.experiment.seed,
            ..base
        };
        cfg.npid.kp = self.gains.kp;
        cfg.npid.ti = self.gains.ti;
        cfg.npid.td = self.gains.td;
        cfg.npid.decay = self.gains.decay;
        cfg.npid.mode = g.mode;
        cfg.npid.quantized = g.quantized;
        let mut cfg = cfg.with_resolution(g.neurons, dist);
        let n = &mut cfg.npid;
        if let Some(s) = g.io {
            n.io = s;
        }
        if let Some(s) = g.error {
            n.error = s;
        }
        if let Some(s) = g.integral {
            n.integral = s;
        }
        if let Some(s) = g.derivative {
            n.derivative = s;
        }
        if let Some(s) = g.output {
            n.output = s;
        }
        cfg
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let n = &cfg.npid;
        ConfigFile {
            gains: GainsSection {
                kp: n.kp,
                ti: n.ti,
                td: n.td,
                decay: n.decay,
            },
            grids: GridsSection {
                neurons: n.output.n,
                distribution: Some(n.output.distribution),
                mode: n.mode,
                quantized: n.quantized,
                io: Some(n.io),
                error: Some(n.error),
                integral: Some(n.integral),
                derivative: Some(n.derivative),
                output: Some(n.output),
            },
            plant: PlantSection {
                mass: cfg.plant.mass,
                g: cfg.plant.g,
                drag: cfg.plant.drag,
                motor_tau: cfg.plant.motor_tau,
                thrust_limits: cfg.plant.thrust_limits,
                hover_adjust: cfg.plant.hover_adjust,
                battery_sag: cfg.battery_sag,
            },
            sensor: cfg.sensor,
            experiment: ExperimentSection {
                controller: cfg.controller,
                setpoint: cfg.setpoint,
                duration: cfg.duration,
                rate: cfg.rate,
                substeps: cfg.substeps,
                seed: cfg.seed,
            },
        }
    }
}
