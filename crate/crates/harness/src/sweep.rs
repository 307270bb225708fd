//! Batches of step responses.

use npid_core::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{default_distribution, Controller, ExperimentConfig};
use crate::experiment::{run_step_response, Run};
use crate::Error;

pub const STEP_SETPOINTS: [f64; 5] = [1.0, 1.5, 2.0, 2.5, 3.0];
pub const RESOLUTIONS: [usize; 3] = [151, 63, 15];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub controller: Controller,
    pub setpoint: f64,
    pub neurons: usize,
    pub distribution: Distribution,
    pub quantized: bool,
    pub rise_time: f64,
    pub overshoot: f64,
    pub overshoot_pct: f64,
    pub settling_time: f64,
    pub steady_state_error: f64,
    pub saturation: f64,
    pub settled: bool,
}

impl SummaryRow {
    pub fn of(run: &Run) -> Self {
        let c = &run.config;
        let m = &run.metrics;
        SummaryRow {
            controller: c.controller,
            setpoint: c.setpoint,
            neurons: c.npid.output.n,
            distribution: c.npid.output.distribution,
            quantized: c.npid.quantized,
            rise_time: m.rise_time,
            overshoot: m.overshoot,
            overshoot_pct: m.overshoot_pct,
            settling_time: m.settling_time,
            steady_state_error: m.steady_state_error,
            saturation: m.saturation,
            settled: m.settled,
        }
    }
}

/// Runs every config; results keep the input order.
pub fn compare(cfgs: &[ExperimentConfig]) -> Result<Vec<Run>, Error> {
    cfgs.par_iter().map(run_step_response).collect()
}

/// Cross product of set-points and resolutions. `distribution` applies to
/// every resolution; `None` picks the default for each.
pub fn sweep(
    base: &ExperimentConfig,
    setpoints: &[f64],
    neurons: &[usize],
    distribution: Option<Distribution>,
) -> Result<Vec<Run>, Error> {
    let mut cfgs = Vec::with_capacity(setpoints.len() * neurons.len());
    for &n in neurons {
        let dist = distribution.unwrap_or_else(|| default_distribution(n));
        let at_n = base.with_resolution(n, dist);
        for &sp in setpoints {
            cfgs.push(ExperimentConfig {
                setpoint: sp,
                ..at_n.clone()
            });
        }
    }
    compare(&cfgs)
}

/// N-PID and the conventional PID on the same plant and set-point.
pub fn npid_vs_baseline(base: &ExperimentConfig) -> [ExperimentConfig; 2] {
    [
        ExperimentConfig {
            controller: Controller::Npid,
            ..base.clone()
        },
        ExperimentConfig {
            controller: Controller::Baseline,
            ..base.clone()
        },
    ]
}

pub fn summarize(runs: &[Run]) -> Vec<SummaryRow> {
    runs.iter().map(SummaryRow::of).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep_is_empty() {
        let runs = sweep(&ExperimentConfig::default(), &[], &RESOLUTIONS, None).unwrap();
        assert!(runs.is_empty());
        assert!(compare(&[]).unwrap().is_empty());
    }

    #[test]
    fn sweep_order_follows_resolution_then_setpoint() {
        let base = ExperimentConfig {
            duration: 0.5,
            ..Default::default()
        };
        let rows = summarize(&sweep(&base, &[1.0, 2.0], &[63, 15], None).unwrap());
        let keys: Vec<_> = rows.iter().map(|r| (r.neurons, r.setpoint)).collect();
        assert_eq!(keys, [(63, 1.0), (63, 2.0), (15, 1.0), (15, 2.0)]);
        assert_eq!(rows[2].distribution, Distribution::Quadratic);
    }
}
