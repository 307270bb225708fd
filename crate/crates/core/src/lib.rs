//! Position-coded spiking PID control.
//!
//! Values are carried by which neuron of a population fires ([`grid`]).
//! Adder units ([`adder`]) add and subtract such values with an aggregate
//! layer of threshold neurons and a winner-takes-all reduce layer; three of
//! them form the spiking PID in [`npid`]. [`pid`] has the conventional
//! controller and a bin-level arithmetic reference, [`plant`] a vertical
//! quadrotor model to close the loop around either.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adder;
pub mod grid;
pub mod netlist;
pub mod npid;
pub mod pid;
pub mod plant;
pub mod quantize;
pub mod spike;

pub use adder::{build_adder, eval_unit, AdderUnit, Layer, Sign, UnitError, UnitInput, WeightMode};
pub use grid::{Distribution, GridError, GridSpec, RoundingMode, ValueGrid};
pub use netlist::{export_netlist, Netlist, NetlistBuilder, NetlistError, NetlistSim, Source};
pub use npid::{
    build_npid, NpidConfig, NpidError, NpidGrids, NpidNetwork, SpikeTrace, TickBins, TraceMode,
};
pub use pid::{pid_step, quantized_pid_step, PidGains, PidState, QuantPid, QuantPidState};
pub use plant::{
    battery_sag, hover_thrust, plant_step, PlantParams, PlantState, SensorConfig, SensorModel,
};
pub use quantize::{choose_scale, quantize_weight};
pub use spike::SpikePattern;
