//! Vertical-axis quadrotor model with a centimeter altitude sensor.

use alloc::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantParams {
    /// kg
    pub mass: f64,
    /// m/s²
    pub g: f64,
    /// Linear drag, N·s/m.
    pub drag: f64,
    /// First-order motor lag, seconds; 0 is instantaneous.
    pub motor_tau: f64,
    /// Thrust limits in Newtons. `None` means `[0, 4 * hover]`.
    pub thrust_limits: Option<(f64, f64)>,
    /// Hand adjustment added to `mass * g`, Newtons.
    pub hover_adjust: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            mass: 0.68,
            g: GRAVITY,
            drag: 1.0,
            motor_tau: 0.02,
            thrust_limits: None,
            hover_adjust: 0.0,
        }
    }
}

impl PlantParams {
    pub fn limits(&self) -> (f64, f64) {
        self.thrust_limits
            .unwrap_or((0.0, 4.0 * hover_thrust(self)))
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err("mass must be positive");
        }
        if !(self.drag >= 0.0 && self.motor_tau >= 0.0) {
            return Err("drag and motor time constant must be non-negative");
        }
        let (lo, hi) = self.limits();
        let hover = hover_thrust(self);
        if !(lo <= hover && hover <= hi) {
            return Err("hover thrust must lie within the thrust limits");
        }
        Ok(())
    }
}

/// Thrust that balances gravity, plus the hand adjustment.
pub fn hover_thrust(params: &PlantParams) -> f64 {
    params.mass * params.g + params.hover_adjust
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantState {
    /// Altitude, m.
    pub z: f64,
    /// Vertical velocity, m/s.
    pub vz: f64,
    /// Thrust after motor lag, N.
    pub thrust: f64,
    /// s
    pub t: f64,
}

impl PlantState {
    /// Resting on the ground with motors at `thrust`.
    pub fn grounded(thrust: f64) -> Self {
        PlantState {
            z: 0.0,
            vz: 0.0,
            thrust,
            t: 0.0,
        }
    }
}

/// Semi-implicit Euler step of `m·z'' = T - m·g - c·z'`.
pub fn plant_step(state: &PlantState, command: f64, dt: f64, params: &PlantParams) -> PlantState {
    let (lo, hi) = params.limits();
    let command = command.clamp(lo, hi);
    let thrust = if params.motor_tau > 0.0 {
        let alpha = 1.0 - libm::exp(-dt / params.motor_tau);
        state.thrust + (command - state.thrust) * alpha
    } else {
        command
    };
    let accel = (thrust - params.mass * params.g - params.drag * state.vz) / params.mass;
    let mut vz = state.vz + accel * dt;
    let mut z = state.z + vz * dt;
    if z <= 0.0 {
        z = 0.0;
        vz = vz.max(0.0);
    }
    PlantState {
        z,
        vz,
        thrust,
        t: state.t + dt,
    }
}

/// Linear battery sag: thrust bias `-rate * t`.
pub fn battery_sag(t: f64, rate: f64) -> f64 {
    -rate * t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorConfig {
    /// Altitude resolution, m.
    pub quantum: f64,
    /// Finite-difference window in control ticks.
    pub window: usize,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            quantum: 0.01,
            window: 1,
        }
    }
}

/// Altitude sensor that floors to `quantum` and differentiates the
/// quantized readings over `window` ticks.
#[derive(Debug, Clone)]
pub struct SensorModel {
    config: SensorConfig,
    history: VecDeque<f64>,
}

impl SensorModel {
    pub fn new(config: SensorConfig) -> Result<Self, &'static str> {
        if !(config.quantum.is_finite() && config.quantum > 0.0) {
            return Err("sensor quantum must be positive");
        }
        if config.window == 0 {
            return Err("derivative window must be at least 1");
        }
        Ok(SensorModel {
            config,
            history: VecDeque::with_capacity(config.window + 1),
        })
    }

    pub fn config(&self) -> SensorConfig {
        self.config
    }

    pub fn quantize(&self, z: f64) -> f64 {
        let q = self.config.quantum;
        // Round the quotient first so exact multiples are not floored one step low.
        let steps = libm::floor(libm::round(z / q * 1e9) / 1e9);
        steps * q
    }

    /// Reads altitude and its finite-difference derivative.
    pub fn sense(&mut self, state: &PlantState, dt: f64) -> (f64, f64) {
        let z = self.quantize(state.z);
        let w = self.config.window;
        self.history.push_back(z);
        if self.history.len() > w + 1 {
            self.history.pop_front();
        }
        let d = if self.history.len() == w + 1 {
            (z - self.history[0]) / (w as f64 * dt)
        } else {
            0.0
        };
        (z, d)
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hover_examples() {
        let p = PlantParams::default();
        assert!((hover_thrust(&p) - 6.6708).abs() < 1e-12);
        let p2 = PlantParams {
            hover_adjust: 0.1,
            ..p
        };
        assert!((hover_thrust(&p2) - 6.7708).abs() < 1e-12);
        let p3 = PlantParams { mass: 1.0, ..p };
        assert!((hover_thrust(&p3) - 9.81).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_holds() {
        let p = PlantParams {
            drag: 0.0,
            motor_tau: 0.0,
            ..Default::default()
        };
        let mut s = PlantState {
            z: 1.0,
            vz: 0.0,
            thrust: hover_thrust(&p),
            t: 0.0,
        };
        for _ in 0..1000 {
            s = plant_step(&s, hover_thrust(&p), 0.001, &p);
        }
        assert!((s.z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn newton_second_law() {
        let p = PlantParams {
            drag: 0.0,
            motor_tau: 0.0,
            ..Default::default()
        };
        let s = PlantState {
            z: 1.0,
            vz: 0.0,
            thrust: 0.0,
            t: 0.0,
        };
        let dt = 1e-3;
        let next = plant_step(&s, hover_thrust(&p) + 1.25, dt, &p);
        assert!((next.vz / dt - 1.25 / 0.68).abs() < 1e-9);
        assert!((1.25f64 / 0.68 - 1.8382).abs() < 1e-4);
    }

    #[test]
    fn ground_clamp() {
        let p = PlantParams::default();
        let mut s = PlantState::grounded(0.0);
        for _ in 0..100 {
            s = plant_step(&s, 0.0, 0.01, &p);
            assert_eq!(s.z, 0.0);
            assert!(s.vz >= 0.0);
        }
    }

    #[test]
    fn drag_decays_velocity() {
        let p = PlantParams {
            motor_tau: 0.0,
            ..Default::default()
        };
        let mut s = PlantState {
            z: 2.0,
            vz: 1.0,
            thrust: hover_thrust(&p),
            t: 0.0,
        };
        let mut prev = s.vz.abs();
        for _ in 0..2000 {
            s = plant_step(&s, hover_thrust(&p), 0.01, &p);
            assert!(s.vz.abs() <= prev);
            prev = s.vz.abs();
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn sensor_floor_and_derivative() {
        let mut m = SensorModel::new(SensorConfig::default()).unwrap();
        let dt = 1.0 / 70.0;
        let (z, d) = m.sense(
            &PlantState {
                z: 1.507,
                ..Default::default()
            },
            dt,
        );
        assert!((z - 1.50).abs() < 1e-12);
        assert_eq!(d, 0.0);
        let (_, d) = m.sense(
            &PlantState {
                z: 1.507,
                ..Default::default()
            },
            dt,
        );
        assert_eq!(d, 0.0);

        let mut m = SensorModel::new(SensorConfig::default()).unwrap();
        let mut last = 0.0;
        for k in 0..10 {
            let (_, d) = m.sense(
                &PlantState {
                    z: 1.0 + 0.01 * k as f64 + 0.001,
                    ..Default::default()
                },
                dt,
            );
            last = d;
        }
        assert!((last - 0.70).abs() < 1e-9);
    }

    #[test]
    fn sensor_error_in_range() {
        let m = SensorModel::new(SensorConfig::default()).unwrap();
        for k in 0..5000 {
            let z = k as f64 * 0.000_731;
            let err = z - m.quantize(z);
            assert!((-1e-9..0.01).contains(&err), "z={z} err={err}");
        }
    }

    #[test]
    fn battery_examples() {
        assert_eq!(battery_sag(0.0, 0.3), 0.0);
        assert!((battery_sag(60.0, 0.005) + 0.3).abs() < 1e-12);
        assert_eq!(battery_sag(123.0, 0.0), 0.0);
    }

    #[test]
    fn sensor_rejects_bad_config() {
        assert!(SensorModel::new(SensorConfig {
            quantum: 0.0,
            window: 1
        })
        .is_err());
        assert!(SensorModel::new(SensorConfig {
            quantum: 0.01,
            window: 0
        })
        .is_err());
    }
}
