//! Conventional discrete PID and a bin-level reference for the spiking one.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::RoundingMode;
use crate::npid::{NpidConfig, NpidError, NpidGrids, TickBins};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    /// Integral time, seconds.
    pub ti: f64,
    /// Derivative time, seconds.
    pub td: f64,
    /// Integral decay per step; 1 disables it.
    #[serde(default = "one")]
    pub decay: f64,
}

fn one() -> f64 {
    1.0
}

impl PidGains {
    pub fn new(kp: f64, ti: f64, td: f64) -> Self {
        PidGains {
            kp,
            ti,
            td,
            decay: 1.0,
        }
    }

    pub fn standard() -> Self {
        Self::new(
            crate::npid::DEFAULT_KP,
            crate::npid::DEFAULT_TI,
            crate::npid::DEFAULT_TD,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    pub initialized: bool,
}

/// One step of
///
/// ```text
/// e_k = r - y
/// i_k = decay * i_{k-1} + e_k * dt
/// d_k = (e_k - e_{k-1}) / dt          (0 on the first step)
/// u_k = kp * e_k + kp / ti * i_k + kp * td * d_k
/// ```
///
/// `u_k` is clamped to `clamp` when given.
pub fn pid_step(
    state: &mut PidState,
    r: f64,
    y: f64,
    dt: f64,
    gains: &PidGains,
    clamp: Option<(f64, f64)>,
) -> f64 {
    let e = r - y;
    if !state.initialized {
        state.prev_error = e;
        state.initialized = true;
    }
    state.integral = gains.decay * state.integral + e * dt;
    let d = (e - state.prev_error) / dt;
    state.prev_error = e;
    let u = gains.kp * e + gains.kp / gains.ti * state.integral + gains.kp * gains.td * d;
    match clamp {
        Some((lo, hi)) => u.clamp(lo, hi),
        None => u,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    IntegralBin { bin: usize, len: usize },
    Config(NpidError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::IntegralBin { bin, len } => {
                write!(
                    f,
                    "integral bin {bin} does not fit an integral grid of {len} values"
                )
            }
            OracleError::Config(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OracleError {}

impl From<NpidError> for OracleError {
    fn from(e: NpidError) -> Self {
        OracleError::Config(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantPidState {
    pub integral_bin: usize,
}

/// Bin-level PID that rounds every intermediate onto the same grids, with
/// the same rounding mode, as the spiking network. Pure arithmetic; no
/// neurons involved.
#[derive(Debug, Clone)]
pub struct QuantPid {
    grids: NpidGrids,
    gains: [f64; 3],
    dt: f64,
    decay: f64,
    mode: RoundingMode,
}

impl QuantPid {
    pub fn from_config(cfg: &NpidConfig) -> Result<Self, OracleError> {
        cfg.validate()?;
        Ok(QuantPid {
            grids: NpidGrids::from_config(cfg)?,
            gains: cfg.control_gains(),
            dt: cfg.dt,
            decay: cfg.decay,
            mode: cfg.mode,
        })
    }

    pub fn grids(&self) -> &NpidGrids {
        &self.grids
    }

    pub fn initial_state(&self) -> QuantPidState {
        QuantPidState {
            integral_bin: self.grids.integral.zero_index().expect("validated grid"),
        }
    }

    pub fn step(
        &self,
        state: &mut QuantPidState,
        target: f64,
        measurement: f64,
        derivative: f64,
    ) -> Result<TickBins, OracleError> {
        let g = &self.grids;
        let t = g.io.encode(target);
        let m = g.io.encode(measurement);
        let d = g.derivative.encode(derivative);
        self.step_encoded(state, t, m, d)
    }

    pub fn step_encoded(
        &self,
        state: &mut QuantPidState,
        t: usize,
        m: usize,
        d: usize,
    ) -> Result<TickBins, OracleError> {
        let g = &self.grids;
        let i_len = g.integral.len();
        if state.integral_bin >= i_len {
            return Err(OracleError::IntegralBin {
                bin: state.integral_bin,
                len: i_len,
            });
        }
        let io = g.io.values();
        let e_sum = 0.0 + io[t] + -io[m];
        let e = g.error.round(e_sum, self.mode);

        let i_sum = 0.0
            + self.decay * g.integral.values()[state.integral_bin]
            + self.dt * g.error.values()[e];
        let i = g.integral.round(i_sum, self.mode);

        let [kp, ki, kd] = self.gains;
        let u_sum = 0.0
            + kp * g.error.values()[e]
            + ki * g.integral.values()[i]
            + kd * g.derivative.values()[d];
        let u = g.output.round(u_sum, self.mode);

        state.integral_bin = i;
        Ok(TickBins {
            target: t,
            measurement: m,
            derivative: d,
            error: e,
            integral: i,
            output: u,
        })
    }
}

/// Free-function form of [`QuantPid::step`]; returns the output bin.
pub fn quantized_pid_step(
    state: &mut QuantPidState,
    target: f64,
    measurement: f64,
    derivative: f64,
    pid: &QuantPid,
) -> Result<usize, OracleError> {
    pid.step(state, target, measurement, derivative)
        .map(|b| b.output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Distribution;

    const DT: f64 = 1.0 / 70.0;

    #[test]
    fn zero_error_stays_zero() {
        let mut s = PidState::default();
        for _ in 0..100 {
            assert_eq!(
                pid_step(
                    &mut s,
                    2.0,
                    2.0,
                    DT,
                    &PidGains::standard(),
                    Some((-1.25, 1.25))
                ),
                0.0
            );
        }
    }

    #[test]
    fn first_step_default_gains() {
        let mut s = PidState::default();
        let g = PidGains::standard();
        let raw = pid_step(&mut s, 1.5, 0.0, DT, &g, None);
        // 0.87 * 1.5 + 0.87 / 0.17 * (1.5 / 70)
        assert!((raw - 1.414_67).abs() < 1e-5);
        assert!((s.integral - 0.021_428_6).abs() < 1e-7);
        let mut s = PidState::default();
        assert_eq!(
            pid_step(&mut s, 1.5, 0.0, DT, &g, Some((-1.25, 1.25))),
            1.25
        );
    }

    #[test]
    fn integral_action_is_linear() {
        let g = PidGains::new(1.0, 0.5, 0.0);
        let mut s = PidState::default();
        let eps = 0.01;
        let mut prev = pid_step(&mut s, eps, 0.0, DT, &g, None);
        for _ in 0..50 {
            let u = pid_step(&mut s, eps, 0.0, DT, &g, None);
            assert!((u - prev - g.kp / g.ti * eps * DT).abs() < 1e-12);
            prev = u;
        }
    }

    #[test]
    fn derivative_uses_previous_error() {
        let g = PidGains::new(0.0, 1.0, 1.0);
        let g = PidGains { kp: 1.0, ..g };
        let mut s = PidState::default();
        pid_step(&mut s, 1.0, 0.0, 0.1, &g, None);
        let before = s.integral;
        let u = pid_step(&mut s, 1.0, 0.5, 0.1, &g, None);
        let e = 0.5;
        let expected = e + (before + e * 0.1) + (0.5 - 1.0) / 0.1;
        assert!((u - expected).abs() < 1e-12);
    }

    #[test]
    fn oracle_zero_and_saturation() {
        let cfg = NpidConfig::standard(151, Distribution::Uniform);
        let pid = QuantPid::from_config(&cfg).unwrap();
        let mut s = pid.initial_state();
        let zero_out = pid.grids().output.zero_index().unwrap();
        assert_eq!(
            quantized_pid_step(&mut s, 2.0, 2.0, 0.0, &pid),
            Ok(zero_out)
        );
        let mut s = pid.initial_state();
        let top = pid.grids().output.len() - 1;
        assert_eq!(quantized_pid_step(&mut s, 1.5, 0.0, 0.0, &pid), Ok(top));
    }

    #[test]
    fn oracle_rejects_foreign_state() {
        let cfg = NpidConfig::standard(15, Distribution::Quadratic);
        let pid = QuantPid::from_config(&cfg).unwrap();
        let mut s = QuantPidState { integral_bin: 15 };
        assert_eq!(
            pid.step(&mut s, 1.0, 1.0, 0.0),
            Err(OracleError::IntegralBin { bin: 15, len: 15 })
        );
    }
}
