//! Step-response metrics.

use npid_core::ValueGrid;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::TraceRecord;
use crate::Error;

/// Settling band half-width, in measurement bins around the set-point bin.
pub const SETTLING_BAND_BINS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics {
    /// 10% to 90% of the step, s.
    pub rise_time: f64,
    /// Peak past the set-point, m.
    pub overshoot: f64,
    /// `overshoot` as a percentage of the step.
    pub overshoot_pct: f64,
    /// First time after which altitude stays in the settling band, s.
    /// Equals the run duration when `settled` is false.
    pub settling_time: f64,
    /// `|z - set-point|` at the last sample, m.
    pub steady_state_error: f64,
    /// Fraction of ticks with the controller output at a limit.
    pub saturation: f64,
    pub settled: bool,
}

impl RunMetrics {
    pub fn compute(cfg: &ExperimentConfig, trace: &[TraceRecord]) -> Result<Self, Error> {
        let io = cfg.npid.io.build()?;
        let out = cfg.npid.output;
        let duration = trace.len() as f64 / cfg.rate;
        let Some(first) = trace.first() else {
            return Ok(RunMetrics {
                rise_time: 0.0,
                overshoot: 0.0,
                overshoot_pct: 0.0,
                settling_time: 0.0,
                steady_state_error: 0.0,
                saturation: 0.0,
                settled: false,
            });
        };
        let sp = cfg.setpoint;
        let z0 = first.z;
        let step = sp - z0;
        // Work in the direction of the step so overshoot is always "past".
        let dir = if step < 0.0 { -1.0 } else { 1.0 };
        let progress = |z: f64| dir * (z - z0);
        let span = step.abs();

        let rise_time = if span > 0.0 {
            let t10 = trace
                .iter()
                .find(|r| progress(r.z) >= 0.1 * span)
                .map(|r| r.t);
            let t90 = trace
                .iter()
                .find(|r| progress(r.z) >= 0.9 * span)
                .map(|r| r.t);
            match (t10, t90) {
                (Some(a), Some(b)) => b - a,
                _ => duration,
            }
        } else {
            0.0
        };

        let peak = trace.iter().map(|r| dir * (r.z - sp)).fold(0.0, f64::max);
        let overshoot = peak.max(0.0);
        let overshoot_pct = if span > 0.0 {
            100.0 * overshoot / span
        } else {
            0.0
        };

        let (settled, settling_time) = match settling_time(&io, trace, sp, SETTLING_BAND_BINS) {
            Some(t) => (true, t),
            None => (false, duration),
        };
        let last = trace[trace.len() - 1];
        let steady_state_error = (last.z - sp).abs();
        let saturated = trace
            .iter()
            .filter(|r| r.u_newton <= out.lo || r.u_newton >= out.hi)
            .count();
        let saturation = saturated as f64 / trace.len() as f64;

        Ok(RunMetrics {
            rise_time,
            overshoot,
            overshoot_pct,
            settling_time,
            steady_state_error,
            saturation,
            settled,
        })
    }
}

/// Whether `z` lies within `band` measurement bins of the set-point's bin.
pub fn in_band(io: &ValueGrid, z: f64, setpoint: f64, band: usize) -> bool {
    io.encode(z).abs_diff(io.encode(setpoint)) <= band
}

/// Start of the final stretch the trace spends inside the band, if the
/// last sample is inside it.
pub fn settling_time(
    io: &ValueGrid,
    trace: &[TraceRecord],
    setpoint: f64,
    band: usize,
) -> Option<f64> {
    let mut start = None;
    for r in trace {
        if in_band(io, r.z, setpoint, band) {
            start.get_or_insert(r.t);
        } else {
            start = None;
        }
    }
    start
}
