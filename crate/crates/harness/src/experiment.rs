//! Closed-loop altitude step response.

use npid_core::{
    battery_sag, hover_thrust, pid_step, plant_step, NpidNetwork, PidState, PlantState,
    SensorModel, SpikeTrace, TraceMode,
};
use serde::Serialize;

use crate::config::{Controller, ExperimentConfig};
use crate::metrics::RunMetrics;
use crate::Error;

/// One control tick, sampled before the controller acts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: f64,
    pub z: f64,
    pub vz: f64,
    pub z_meas: f64,
    pub target: f64,
    pub error_bin: Option<usize>,
    pub integral_bin: Option<usize>,
    pub deriv_bin: Option<usize>,
    pub u_bin: Option<usize>,
    /// Thrust offset from the controller, N.
    pub u_newton: f64,
    /// Command sent to the plant, N.
    pub thrust_total: f64,
}

#[derive(Debug, Clone)]
pub struct Run {
    pub config: ExperimentConfig,
    pub trace: Vec<TraceRecord>,
    pub metrics: RunMetrics,
    /// Spike activity, when requested.
    pub spikes: Option<SpikeTrace>,
}

enum Ctrl {
    Npid(Box<NpidNetwork>),
    Baseline(PidState),
}

pub fn run_step_response(cfg: &ExperimentConfig) -> Result<Run, Error> {
    simulate(cfg, TraceMode::Off)
}

/// Like [`run_step_response`], also recording the network's spikes.
pub fn run_with_spikes(cfg: &ExperimentConfig, mode: TraceMode) -> Result<Run, Error> {
    simulate(cfg, mode)
}

fn simulate(cfg: &ExperimentConfig, trace_mode: TraceMode) -> Result<Run, Error> {
    cfg.validate()?;
    let npid_cfg = cfg.npid_config();
    let dt = cfg.dt();
    let dt_phys = dt / cfg.substeps as f64;
    let hover = hover_thrust(&cfg.plant);
    let out = npid_cfg.output;
    let clamp = (out.lo, out.hi);

    let mut ctrl = match cfg.controller {
        Controller::Npid => {
            let mut net = NpidNetwork::new(npid_cfg)?;
            net.set_trace_mode(trace_mode);
            Ctrl::Npid(Box::new(net))
        }
        Controller::Baseline => Ctrl::Baseline(PidState::default()),
    };
    let gains = cfg.gains();
    let mut sensor = SensorModel::new(cfg.sensor).map_err(|e| Error::Config(e.into()))?;
    let mut state = PlantState::grounded(0.0);

    let ticks = cfg.ticks();
    let mut trace = Vec::with_capacity(ticks);
    for k in 0..ticks {
        let t = k as f64 * dt;
        let (z_meas, dz) = sensor.sense(&state, dt);
        let (bins, u) = match &mut ctrl {
            Ctrl::Npid(net) => {
                // The derivative population carries d(error)/dt = -dz/dt.
                let b = net.step_bins(cfg.setpoint, z_meas, -dz);
                (Some(b), net.grids().output.values()[b.output])
            }
            Ctrl::Baseline(s) => (
                None,
                pid_step(s, cfg.setpoint, z_meas, dt, &gains, Some(clamp)),
            ),
        };
        let thrust_total = hover + u + battery_sag(t, cfg.battery_sag);
        trace.push(TraceRecord {
            t,
            z: state.z,
            vz: state.vz,
            z_meas,
            target: cfg.setpoint,
            error_bin: bins.map(|b| b.error),
            integral_bin: bins.map(|b| b.integral),
            deriv_bin: bins.map(|b| b.derivative),
            u_bin: bins.map(|b| b.output),
            u_newton: u,
            thrust_total,
        });
        for _ in 0..cfg.substeps {
            state = plant_step(&state, thrust_total, dt_phys, &cfg.plant);
        }
    }

    let metrics = RunMetrics::compute(cfg, &trace)?;
    let spikes = match ctrl {
        Ctrl::Npid(mut net) if trace_mode != TraceMode::Off => Some(net.fetch_trace()),
        _ => None,
    };
    Ok(Run {
        config: cfg.clone(),
        trace,
        metrics,
        spikes,
    })
}

/// Altitude after the full run, for integration convergence checks.
pub fn final_altitude(cfg: &ExperimentConfig) -> Result<f64, Error> {
    let run = run_step_response(cfg)?;
    Ok(run.trace.last().map_or(0.0, |r| r.z))
}
