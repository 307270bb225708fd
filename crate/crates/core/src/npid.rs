//! The spiking PID: three adder units wired into one controller.
//!
//! ```text
//! target ──┐
//!          ├─ error unit (t - m) ──┬──────────────────────────┐
//! measured ┘                       ├─ integral unit ──┐        │
//!                  ┌── delay 1 ────┘  (decay·i + dt·e) ├─ control unit ── thrust offset
//!                  └───────────────── integral ───────┘        │
//! derivative ──────────────────────────────────────────────────┘
//! ```
//!
//! The control unit fuses the gains into its weights:
//! `u = kp·e + (kp/ti)·i + (kp·td)·d`. The integral unit reads its own
//! reduce layer from the previous tick; because its output is a bounded grid
//! the integral cannot wind up past the grid ends.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::adder::{AdderUnit, Layer, Sign, UnitError, UnitInput};
use crate::grid::{Distribution, GridError, GridSpec, RoundingMode, ValueGrid};
use crate::netlist::{Netlist, NetlistBuilder, NetlistError, Source};

/// Proportional gain used in the simulated altitude experiments.
pub const DEFAULT_KP: f64 = 0.87;
/// Integral time constant, seconds.
pub const DEFAULT_TI: f64 = 0.17;
/// Derivative time constant, seconds.
pub const DEFAULT_TD: f64 = 2.76;
/// Control loop rate, Hz.
pub const CONTROL_RATE_HZ: f64 = 70.0;
/// Target and measured altitude range, meters.
pub const ALTITUDE_RANGE: (f64, f64) = (0.0, 4.0);
/// Error-derivative range.
pub const DERIVATIVE_RANGE: (f64, f64) = (-0.5, 0.5);
/// Thrust offset range around hover, Newtons.
pub const OUTPUT_RANGE: (f64, f64) = (-1.25, 1.25);

#[derive(Debug, Clone, PartialEq)]
pub enum NpidError {
    Config(&'static str),
    Grid(GridError),
    Unit(UnitError),
    Netlist(NetlistError),
}

impl fmt::Display for NpidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NpidError::Config(what) => write!(f, "invalid N-PID config: {what}"),
            NpidError::Grid(e) => write!(f, "grid: {e}"),
            NpidError::Unit(e) => write!(f, "adder unit: {e}"),
            NpidError::Netlist(e) => write!(f, "netlist: {e}"),
        }
    }
}

impl core::error::Error for NpidError {}

impl From<GridError> for NpidError {
    fn from(e: GridError) -> Self {
        NpidError::Grid(e)
    }
}

impl From<UnitError> for NpidError {
    fn from(e: UnitError) -> Self {
        NpidError::Unit(e)
    }
}

impl From<NetlistError> for NpidError {
    fn from(e: NetlistError) -> Self {
        NpidError::Netlist(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NpidConfig {
    pub kp: f64,
    pub ti: f64,
    pub td: f64,
    /// Control period, seconds.
    pub dt: f64,
    /// Shared by target and measurement.
    pub io: GridSpec,
    pub error: GridSpec,
    pub integral: GridSpec,
    pub derivative: GridSpec,
    pub output: GridSpec,
    /// Factor on the recurrent integral weights, in `(0, 1]`.
    pub decay: f64,
    pub mode: RoundingMode,
    pub quantized: bool,
}

impl Default for NpidConfig {
    fn default() -> Self {
        Self::standard(151, Distribution::Uniform)
    }
}

impl NpidConfig {
    /// Default gains and ranges with every population at resolution `n`.
    ///
    /// The integral range is chosen so the integral term alone can just
    /// saturate the output, and follows the output's distribution.
    pub fn standard(n: usize, output: Distribution) -> Self {
        let (kp, ti) = (DEFAULT_KP, DEFAULT_TI);
        let i_hi = OUTPUT_RANGE.1 * ti / kp;
        let (alt_lo, alt_hi) = ALTITUDE_RANGE;
        NpidConfig {
            kp,
            ti,
            td: DEFAULT_TD,
            dt: 1.0 / CONTROL_RATE_HZ,
            io: GridSpec::new(alt_lo, alt_hi, n, Distribution::Uniform),
            error: GridSpec::new(alt_lo - alt_hi, alt_hi - alt_lo, n, Distribution::Uniform),
            integral: GridSpec::new(-i_hi, i_hi, n, output),
            derivative: GridSpec::new(
                DERIVATIVE_RANGE.0,
                DERIVATIVE_RANGE.1,
                n,
                Distribution::Uniform,
            ),
            output: GridSpec::new(OUTPUT_RANGE.0, OUTPUT_RANGE.1, n, output),
            decay: 1.0,
            mode: RoundingMode::Nearest,
            quantized: false,
        }
    }

    /// Control-unit gains for error, integral and derivative inputs.
    pub fn control_gains(&self) -> [f64; 3] {
        [self.kp, self.kp / self.ti, self.kp * self.td]
    }

    pub fn validate(&self) -> Result<(), NpidError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(NpidError::Config("dt must be positive"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(NpidError::Config("decay must lie in (0, 1]"));
        }
        if !self.kp.is_finite() || !self.td.is_finite() || self.td < 0.0 {
            return Err(NpidError::Config("kp and td must be finite, td >= 0"));
        }
        if !(self.ti.is_finite() && self.ti > 0.0) {
            return Err(NpidError::Config("ti must be positive"));
        }
        Ok(())
    }
}

/// Materialized grids of every population.
#[derive(Debug, Clone, PartialEq)]
pub struct NpidGrids {
    pub io: ValueGrid,
    pub error: ValueGrid,
    pub integral: ValueGrid,
    pub derivative: ValueGrid,
    pub output: ValueGrid,
}

impl NpidGrids {
    pub fn from_config(cfg: &NpidConfig) -> Result<Self, NpidError> {
        let grids = NpidGrids {
            io: cfg.io.build()?,
            error: cfg.error.build()?,
            integral: cfg.integral.build()?,
            derivative: cfg.derivative.build()?,
            output: cfg.output.build()?,
        };
        for g in [&grids.error, &grids.integral, &grids.output] {
            if g.zero_index().is_none() {
                return Err(NpidError::Config(
                    "error, integral and output grids must contain 0",
                ));
            }
        }
        Ok(grids)
    }
}

/// Bins selected in one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickBins {
    pub target: usize,
    pub measurement: usize,
    pub derivative: usize,
    pub error: usize,
    pub integral: usize,
    pub output: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub t: f64,
    pub error_bin: usize,
    pub integral_bin: usize,
    pub deriv_bin: usize,
    pub output_bin: usize,
    /// Decoded thrust offset, Newtons.
    pub output: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterEvent {
    pub tick: u64,
    pub neuron: u32,
    pub layer: Layer,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrace {
    pub ticks: Vec<TickRecord>,
    pub raster: Vec<RasterEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    #[default]
    Off,
    /// One [`TickRecord`] per tick.
    Bins,
    /// Bins plus every firing neuron.
    Raster,
}

/// Neuron id layout, matching [`NpidNetwork::netlist`].
#[derive(Debug, Clone, Copy)]
struct Layout {
    target: u32,
    measurement: u32,
    derivative: u32,
    units: [u32; 3],
}

#[derive(Debug, Clone)]
pub struct NpidNetwork {
    config: NpidConfig,
    grids: NpidGrids,
    error_unit: AdderUnit,
    integral_unit: AdderUnit,
    control_unit: AdderUnit,
    zero_integral: usize,
    integral_bin: usize,
    tick: u64,
    layout: Layout,
    trace_mode: TraceMode,
    trace: SpikeTrace,
    scratch: [Vec<bool>; 3],
}

pub fn build_npid(config: NpidConfig) -> Result<NpidNetwork, NpidError> {
    NpidNetwork::new(config)
}

impl NpidNetwork {
    pub fn new(config: NpidConfig) -> Result<Self, NpidError> {
        config.validate()?;
        let grids = NpidGrids::from_config(&config)?;
        let mode = config.mode;
        let q = config.quantized;

        let error_unit = AdderUnit::new(
            alloc::vec![
                UnitInput::plus(grids.io.clone()),
                UnitInput::minus(grids.io.clone())
            ],
            grids.error.clone(),
            mode,
            q,
        )?;
        let integral_unit = AdderUnit::new(
            alloc::vec![
                UnitInput::new(grids.integral.clone(), Sign::Plus, config.decay),
                UnitInput::new(grids.error.clone(), Sign::Plus, config.dt),
            ],
            grids.integral.clone(),
            mode,
            q,
        )?;
        let [kp, ki, kd] = config.control_gains();
        let control_unit = AdderUnit::new(
            alloc::vec![
                UnitInput::new(grids.error.clone(), Sign::Plus, kp),
                UnitInput::new(grids.integral.clone(), Sign::Plus, ki),
                UnitInput::new(grids.derivative.clone(), Sign::Plus, kd),
            ],
            grids.output.clone(),
            mode,
            q,
        )?;

        let n_io = grids.io.len() as u32;
        let inputs = 2 * n_io + grids.derivative.len() as u32;
        let e_len = error_unit.neuron_count() as u32;
        let i_len = integral_unit.neuron_count() as u32;
        let layout = Layout {
            target: 0,
            measurement: n_io,
            derivative: 2 * n_io,
            units: [inputs, inputs + e_len, inputs + e_len + i_len],
        };

        let zero_integral = grids.integral.zero_index().expect("checked in NpidGrids");
        Ok(NpidNetwork {
            config,
            grids,
            error_unit,
            integral_unit,
            control_unit,
            zero_integral,
            integral_bin: zero_integral,
            tick: 0,
            layout,
            trace_mode: TraceMode::Off,
            trace: SpikeTrace::default(),
            scratch: Default::default(),
        })
    }

    pub fn config(&self) -> &NpidConfig {
        &self.config
    }

    pub fn grids(&self) -> &NpidGrids {
        &self.grids
    }

    pub fn units(&self) -> [&AdderUnit; 3] {
        [&self.error_unit, &self.integral_unit, &self.control_unit]
    }

    pub fn integral_bin(&self) -> usize {
        self.integral_bin
    }

    /// Overwrites the recurrent integral state.
    pub fn set_integral_bin(&mut self, bin: usize) -> Result<(), NpidError> {
        if bin >= self.grids.integral.len() {
            return Err(NpidError::Grid(GridError::IndexOutOfRange {
                index: bin,
                len: self.grids.integral.len(),
            }));
        }
        self.integral_bin = bin;
        Ok(())
    }

    /// Runs one control tick and returns the thrust offset in Newtons.
    pub fn step(&mut self, target: f64, measurement: f64, derivative: f64) -> f64 {
        let bins = self.step_bins(target, measurement, derivative);
        self.grids.output.values()[bins.output]
    }

    /// Runs one control tick and returns every selected bin.
    pub fn step_bins(&mut self, target: f64, measurement: f64, derivative: f64) -> TickBins {
        let t = self.grids.io.encode(target);
        let m = self.grids.io.encode(measurement);
        let d = self.grids.derivative.encode(derivative);
        self.step_encoded(t, m, d)
    }

    /// Same as [`step_bins`](Self::step_bins) with inputs already encoded.
    ///
    /// # Panics
    /// If an input bin is out of range for its grid.
    pub fn step_encoded(&mut self, t: usize, m: usize, d: usize) -> TickBins {
        // Bins are in range and every unit's reduce layer has exactly one
        // winner by construction, so propagation cannot fail here.
        let [se, si, sc] = &mut self.scratch;
        let e = self
            .error_unit
            .propagate(&[t, m], se)
            .expect("error unit evaluation");
        let i = self
            .integral_unit
            .propagate(&[self.integral_bin, e], si)
            .expect("integral unit evaluation");
        let u = self
            .control_unit
            .propagate(&[e, i, d], sc)
            .expect("control unit evaluation");
        self.integral_bin = i;

        let bins = TickBins {
            target: t,
            measurement: m,
            derivative: d,
            error: e,
            integral: i,
            output: u,
        };
        if self.trace_mode != TraceMode::Off {
            self.record(bins);
        }
        self.tick += 1;
        bins
    }

    fn record(&mut self, bins: TickBins) {
        let tick = self.tick;
        self.trace.ticks.push(TickRecord {
            tick,
            t: tick as f64 * self.config.dt,
            error_bin: bins.error,
            integral_bin: bins.integral,
            deriv_bin: bins.derivative,
            output_bin: bins.output,
            output: self.grids.output.values()[bins.output],
        });
        if self.trace_mode != TraceMode::Raster {
            return;
        }
        let l = self.layout;
        let raster = &mut self.trace.raster;
        for id in [
            l.target + bins.target as u32,
            l.measurement + bins.measurement as u32,
            l.derivative + bins.derivative as u32,
        ] {
            raster.push(RasterEvent {
                tick,
                neuron: id,
                layer: Layer::Input,
            });
        }
        let outs = [bins.error, bins.integral, bins.output];
        let units = [&self.error_unit, &self.integral_unit, &self.control_unit];
        for k in 0..3 {
            let first = l.units[k];
            let unit = units[k];
            for (idx, (a, &fired)) in unit.aggregate().iter().zip(&self.scratch[k]).enumerate() {
                if fired {
                    raster.push(RasterEvent {
                        tick,
                        neuron: first + idx as u32,
                        layer: a.layer,
                    });
                }
            }
            let reduce_first = first + unit.aggregate().len() as u32;
            raster.push(RasterEvent {
                tick,
                neuron: reduce_first + outs[k] as u32,
                layer: Layer::Reduce,
            });
        }
    }

    /// Clears the integral state, tick counter and recorded trace.
    pub fn reset(&mut self) {
        self.integral_bin = self.zero_integral;
        self.tick = 0;
        self.trace = SpikeTrace::default();
    }

    /// `(unit neurons, input neurons)`.
    pub fn neuron_count(&self) -> (usize, usize) {
        let unit = self.units().iter().map(|u| u.neuron_count()).sum();
        let input = 2 * self.grids.io.len() + self.grids.derivative.len();
        (unit, input)
    }

    pub fn record_raster(&mut self, on: bool) {
        self.trace_mode = if on {
            TraceMode::Raster
        } else {
            TraceMode::Off
        };
    }

    pub fn set_trace_mode(&mut self, mode: TraceMode) {
        self.trace_mode = mode;
    }

    pub fn trace(&self) -> &SpikeTrace {
        &self.trace
    }

    pub fn fetch_trace(&mut self) -> SpikeTrace {
        core::mem::take(&mut self.trace)
    }

    /// Exports the network with quantized weights. Float-mode networks are
    /// quantized for export; their own evaluation is unaffected.
    pub fn netlist(&self) -> Result<Netlist, NpidError> {
        let quantize = |u: &AdderUnit| {
            if u.scale().is_some() {
                Ok(u.clone())
            } else {
                u.quantized()
            }
        };
        let e = quantize(&self.error_unit)?;
        let i = quantize(&self.integral_unit)?;
        let c = quantize(&self.control_unit)?;
        let mut b = NetlistBuilder::new();
        let target = b.add_input("target", &self.grids.io);
        let measurement = b.add_input("measurement", &self.grids.io);
        let derivative = b.add_input("derivative", &self.grids.derivative);
        let eu = b.add_unit(
            "error",
            &e,
            &[Source::Input(target), Source::Input(measurement)],
        )?;
        let iu = b.add_unit("integral", &i, &[Source::Delayed(1), Source::Unit(eu)])?;
        b.add_unit(
            "control",
            &c,
            &[
                Source::Unit(eu),
                Source::Unit(iu),
                Source::Input(derivative),
            ],
        )?;
        Ok(b.finish()?)
    }
}
