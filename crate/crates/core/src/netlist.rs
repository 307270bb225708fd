//! Flat neuron/synapse graph of quantized adder units.
//!
//! A [`Netlist`] is what gets written to disk: integer thresholds, even
//! integer weights and per-synapse delays, plus enough metadata to find the
//! input populations and each unit's reduce layer again. [`NetlistSim`]
//! evaluates a netlist directly, independent of [`AdderUnit`].

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::adder::{AdderUnit, Layer};
use crate::grid::{GridError, RoundingMode, ValueGrid};
use crate::quantize::is_legal_weight;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuronSpec {
    pub id: u32,
    pub layer: Layer,
    pub threshold: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynapseSpec {
    pub src: u32,
    pub dst: u32,
    pub weight: i32,
    pub delay: u8,
}

/// A position-coded input population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationMeta {
    pub name: String,
    pub first: u32,
    pub len: u32,
    /// Index into [`NetlistMeta::grids`].
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitMeta {
    pub name: String,
    pub first: u32,
    pub aggregate: u32,
    /// First reduce neuron; reduce neuron `k` encodes output bin `k`.
    pub reduce_first: u32,
    pub reduce: u32,
    pub output_grid: usize,
    pub scale: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetlistMeta {
    /// Integer units per real unit, one entry per unit.
    pub scale: Vec<u32>,
    pub grids: Vec<ValueGrid>,
    pub mode: RoundingMode,
    pub inputs: Vec<PopulationMeta>,
    pub units: Vec<UnitMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub neurons: Vec<NeuronSpec>,
    pub synapses: Vec<SynapseSpec>,
    pub meta: NetlistMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetlistError {
    NotQuantized(String),
    MixedModes,
    GridMismatch {
        unit: String,
        input: usize,
    },
    SourceCount {
        unit: String,
        expected: usize,
        got: usize,
    },
    /// A synapse or source refers to a neuron or population that does not exist.
    Dangling(String),
    IllegalWeight {
        src: u32,
        dst: u32,
        weight: i32,
    },
    IllegalDelay {
        src: u32,
        dst: u32,
        delay: u8,
    },
    NegativeThreshold(u32),
    NonSequentialIds,
    /// Delay-0 edges form a cycle.
    Cycle,
    Grid(GridError),
    InputCount {
        expected: usize,
        got: usize,
    },
    BinOutOfRange {
        input: usize,
        bin: usize,
    },
    UnusedInputs(usize),
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetlistError::NotQuantized(u) => {
                write!(f, "unit {u} has float weights; quantize before export")
            }
            NetlistError::MixedModes => f.write_str("units use different rounding modes"),
            NetlistError::GridMismatch { unit, input } => {
                write!(
                    f,
                    "unit {unit}: input {input} grid differs from its source population"
                )
            }
            NetlistError::SourceCount {
                unit,
                expected,
                got,
            } => {
                write!(f, "unit {unit}: expected {expected} sources, got {got}")
            }
            NetlistError::Dangling(what) => write!(f, "dangling reference: {what}"),
            NetlistError::IllegalWeight { src, dst, weight } => {
                write!(f, "synapse {src}->{dst} has illegal weight {weight}")
            }
            NetlistError::IllegalDelay { src, dst, delay } => {
                write!(f, "synapse {src}->{dst} has unsupported delay {delay}")
            }
            NetlistError::NegativeThreshold(id) => {
                write!(f, "neuron {id} has a negative threshold")
            }
            NetlistError::NonSequentialIds => f.write_str("neuron ids must be 0..n in order"),
            NetlistError::Cycle => f.write_str("zero-delay synapses form a cycle"),
            NetlistError::Grid(e) => write!(f, "grid: {e}"),
            NetlistError::InputCount { expected, got } => {
                write!(f, "expected {expected} input bins, got {got}")
            }
            NetlistError::BinOutOfRange { input, bin } => {
                write!(f, "input population {input}: bin {bin} out of range")
            }
            NetlistError::UnusedInputs(n) => {
                write!(f, "{n} input populations are not consumed by any unit")
            }
        }
    }
}

impl core::error::Error for NetlistError {}

impl From<GridError> for NetlistError {
    fn from(e: GridError) -> Self {
        NetlistError::Grid(e)
    }
}

/// Where a unit input's spikes come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Input(usize),
    /// Reduce layer of an earlier unit, same tick.
    Unit(usize),
    /// Reduce layer of a unit (possibly the one being added) on the previous tick.
    Delayed(usize),
}

#[derive(Debug, Clone)]
pub struct NetlistBuilder {
    neurons: Vec<NeuronSpec>,
    synapses: Vec<SynapseSpec>,
    meta: NetlistMeta,
    mode: Option<RoundingMode>,
}

impl Default for NetlistBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl NetlistBuilder {
    pub fn new() -> Self {
        NetlistBuilder {
            neurons: Vec::new(),
            synapses: Vec::new(),
            meta: NetlistMeta {
                scale: Vec::new(),
                grids: Vec::new(),
                mode: RoundingMode::default(),
                inputs: Vec::new(),
                units: Vec::new(),
            },
            mode: None,
        }
    }

    fn intern_grid(&mut self, grid: &ValueGrid) -> usize {
        if let Some(i) = self.meta.grids.iter().position(|g| g == grid) {
            return i;
        }
        self.meta.grids.push(grid.clone());
        self.meta.grids.len() - 1
    }

    fn push_neuron(&mut self, layer: Layer, threshold: i64) -> u32 {
        let id = self.neurons.len() as u32;
        self.neurons.push(NeuronSpec {
            id,
            layer,
            threshold,
        });
        id
    }

    pub fn add_input(&mut self, name: &str, grid: &ValueGrid) -> usize {
        let grid_idx = self.intern_grid(grid);
        let first = self.neurons.len() as u32;
        for _ in 0..grid.len() {
            self.push_neuron(Layer::Input, 0);
        }
        self.meta.inputs.push(PopulationMeta {
            name: name.into(),
            first,
            len: grid.len() as u32,
            grid: grid_idx,
        });
        self.meta.inputs.len() - 1
    }

    pub fn add_unit(
        &mut self,
        name: &str,
        unit: &AdderUnit,
        sources: &[Source],
    ) -> Result<usize, NetlistError> {
        let scale = unit
            .scale()
            .ok_or_else(|| NetlistError::NotQuantized(name.into()))?;
        match self.mode {
            Some(m) if m != unit.mode() => return Err(NetlistError::MixedModes),
            _ => self.mode = Some(unit.mode()),
        }
        if sources.len() != unit.inputs().len() {
            return Err(NetlistError::SourceCount {
                unit: name.into(),
                expected: unit.inputs().len(),
                got: sources.len(),
            });
        }
        let this = self.meta.units.len();
        let first = self.neurons.len() as u32;
        let aggregate = unit.aggregate().len() as u32;
        let reduce_first = first + aggregate;

        // Resolve sources before adding neurons so self-recurrence can refer to
        // this unit's reduce layer.
        let mut resolved = Vec::with_capacity(sources.len());
        for (k, src) in sources.iter().enumerate() {
            let (first_id, grid, delay) = match *src {
                Source::Input(i) => {
                    let p =
                        self.meta.inputs.get(i).ok_or_else(|| {
                            NetlistError::Dangling(format!("input population {i}"))
                        })?;
                    (p.first, &self.meta.grids[p.grid], 0u8)
                }
                Source::Unit(u) if u < this => {
                    let m = &self.meta.units[u];
                    (m.reduce_first, &self.meta.grids[m.output_grid], 0)
                }
                Source::Delayed(u) if u < this => {
                    let m = &self.meta.units[u];
                    (m.reduce_first, &self.meta.grids[m.output_grid], 1)
                }
                Source::Delayed(u) if u == this => (reduce_first, unit.output(), 1),
                Source::Unit(u) | Source::Delayed(u) => {
                    return Err(NetlistError::Dangling(format!("unit {u}")));
                }
            };
            if grid != &unit.inputs()[k].grid {
                return Err(NetlistError::GridMismatch {
                    unit: name.into(),
                    input: k,
                });
            }
            resolved.push((first_id, delay));
        }

        for a in unit.aggregate() {
            self.push_neuron(a.layer, a.threshold as i64);
        }
        for r in unit.reduce() {
            self.push_neuron(Layer::Reduce, r.threshold as i64);
        }

        for (k, &(src_first, delay)) in resolved.iter().enumerate() {
            for bin in 0..unit.inputs()[k].grid.len() {
                let w = unit.weight(k, bin) as i32;
                if w == 0 {
                    continue;
                }
                for (a_idx, a) in unit.aggregate().iter().enumerate() {
                    let weight = if a.layer == Layer::AggregatePos {
                        w
                    } else {
                        -w
                    };
                    self.synapses.push(SynapseSpec {
                        src: src_first + bin as u32,
                        dst: first + a_idx as u32,
                        weight,
                        delay,
                    });
                }
            }
        }
        for (r_idx, r) in unit.reduce().iter().enumerate() {
            for &(a_idx, w) in &r.synapses {
                self.synapses.push(SynapseSpec {
                    src: first + a_idx as u32,
                    dst: reduce_first + r_idx as u32,
                    weight: w as i32,
                    delay: 0,
                });
            }
        }

        let output_grid = self.intern_grid(unit.output());
        self.meta.scale.push(scale);
        self.meta.units.push(UnitMeta {
            name: name.into(),
            first,
            aggregate,
            reduce_first,
            reduce: unit.reduce().len() as u32,
            output_grid,
            scale,
        });
        Ok(this)
    }

    pub fn finish(mut self) -> Result<Netlist, NetlistError> {
        if let Some(m) = self.mode {
            self.meta.mode = m;
        }
        let net = Netlist {
            neurons: self.neurons,
            synapses: self.synapses,
            meta: self.meta,
        };
        net.validate()?;
        Ok(net)
    }
}

/// Exports independent quantized units. Unit inputs consume the `inputs`
/// populations in order: the first unit takes as many as it has operands,
/// the next unit continues from there.
pub fn export_netlist(units: &[AdderUnit], inputs: &[ValueGrid]) -> Result<Netlist, NetlistError> {
    let mut b = NetlistBuilder::new();
    for (i, g) in inputs.iter().enumerate() {
        b.add_input(&format!("input{i}"), g);
    }
    let mut next = 0;
    for (u, unit) in units.iter().enumerate() {
        let k = unit.inputs().len();
        if next + k > inputs.len() {
            return Err(NetlistError::Dangling(format!(
                "unit{u} needs {k} more input populations"
            )));
        }
        let sources: Vec<Source> = (next..next + k).map(Source::Input).collect();
        b.add_unit(&format!("unit{u}"), unit, &sources)?;
        next += k;
    }
    if next != inputs.len() {
        return Err(NetlistError::UnusedInputs(inputs.len() - next));
    }
    b.finish()
}

impl Netlist {
    /// Checks endpoint references, weight and delay legality, and that the
    /// zero-delay graph is acyclic. Returns a topological order.
    pub fn validate(&self) -> Result<Vec<u32>, NetlistError> {
        let n = self.neurons.len();
        for (i, neuron) in self.neurons.iter().enumerate() {
            if neuron.id as usize != i {
                return Err(NetlistError::NonSequentialIds);
            }
            if neuron.threshold < 0 {
                return Err(NetlistError::NegativeThreshold(neuron.id));
            }
        }
        for s in &self.synapses {
            if s.src as usize >= n || s.dst as usize >= n {
                return Err(NetlistError::Dangling(format!(
                    "synapse {}->{}",
                    s.src, s.dst
                )));
            }
            if !is_legal_weight(s.weight) {
                return Err(NetlistError::IllegalWeight {
                    src: s.src,
                    dst: s.dst,
                    weight: s.weight,
                });
            }
            if s.delay > 1 {
                return Err(NetlistError::IllegalDelay {
                    src: s.src,
                    dst: s.dst,
                    delay: s.delay,
                });
            }
        }
        for g in &self.meta.grids {
            g.validate()?;
        }
        for p in &self.meta.inputs {
            if p.grid >= self.meta.grids.len() || (p.first + p.len) as usize > n {
                return Err(NetlistError::Dangling(format!("population {}", p.name)));
            }
        }
        for u in &self.meta.units {
            if u.output_grid >= self.meta.grids.len() || (u.reduce_first + u.reduce) as usize > n {
                return Err(NetlistError::Dangling(format!("unit {}", u.name)));
            }
        }

        let mut indegree = vec![0usize; n];
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); n];
        for s in self.synapses.iter().filter(|s| s.delay == 0) {
            indegree[s.dst as usize] += 1;
            out[s.src as usize].push(s.dst);
        }
        let mut queue: VecDeque<u32> = (0..n as u32)
            .filter(|&i| indegree[i as usize] == 0)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &d in &out[i as usize] {
                indegree[d as usize] -= 1;
                if indegree[d as usize] == 0 {
                    queue.push_back(d);
                }
            }
        }
        if order.len() != n {
            return Err(NetlistError::Cycle);
        }
        Ok(order)
    }

    /// `(unit neurons, input neurons)`.
    pub fn neuron_counts(&self) -> (usize, usize) {
        let inputs = self
            .neurons
            .iter()
            .filter(|n| n.layer == Layer::Input)
            .count();
        (self.neurons.len() - inputs, inputs)
    }
}

/// Layer-synchronous evaluator for a [`Netlist`].
#[derive(Debug, Clone)]
pub struct NetlistSim<'a> {
    net: &'a Netlist,
    order: Vec<u32>,
    /// Per neuron: `(src, weight, delay)`.
    incoming: Vec<Vec<(u32, i32, u8)>>,
    current: Vec<bool>,
    previous: Vec<bool>,
}

impl<'a> NetlistSim<'a> {
    pub fn new(net: &'a Netlist) -> Result<Self, NetlistError> {
        let order = net.validate()?;
        let n = net.neurons.len();
        let mut incoming = vec![Vec::new(); n];
        for s in &net.synapses {
            incoming[s.dst as usize].push((s.src, s.weight, s.delay));
        }
        Ok(NetlistSim {
            net,
            order,
            incoming,
            current: vec![false; n],
            previous: vec![false; n],
        })
    }

    pub fn reset(&mut self) {
        self.current.iter_mut().for_each(|f| *f = false);
        self.previous.iter_mut().for_each(|f| *f = false);
    }

    /// Advances one tick with one active bin per input population.
    pub fn step(&mut self, bins: &[usize]) -> Result<&[bool], NetlistError> {
        let inputs = &self.net.meta.inputs;
        if bins.len() != inputs.len() {
            return Err(NetlistError::InputCount {
                expected: inputs.len(),
                got: bins.len(),
            });
        }
        for (i, (p, &b)) in inputs.iter().zip(bins).enumerate() {
            if b >= p.len as usize {
                return Err(NetlistError::BinOutOfRange { input: i, bin: b });
            }
        }
        core::mem::swap(&mut self.current, &mut self.previous);
        self.current.iter_mut().for_each(|f| *f = false);
        for (p, &b) in inputs.iter().zip(bins) {
            self.current[(p.first as usize) + b] = true;
        }
        for &id in &self.order {
            let neuron = &self.net.neurons[id as usize];
            if neuron.layer == Layer::Input {
                continue;
            }
            let mut potential: i64 = 0;
            for &(src, w, delay) in &self.incoming[id as usize] {
                let fired = if delay == 0 {
                    self.current[src as usize]
                } else {
                    self.previous[src as usize]
                };
                if fired {
                    potential += w as i64;
                }
            }
            self.current[id as usize] = potential >= neuron.threshold;
        }
        Ok(&self.current)
    }

    pub fn fired(&self) -> &[bool] {
        &self.current
    }

    /// Winning output bin of unit `unit` on the last tick, if exactly one
    /// reduce neuron fired.
    pub fn unit_output(&self, unit: usize) -> Option<usize> {
        let m = self.net.meta.units.get(unit)?;
        let start = m.reduce_first as usize;
        let slice = &self.current[start..start + m.reduce as usize];
        let mut winners = slice.iter().enumerate().filter(|(_, &f)| f);
        match (winners.next(), winners.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adder::{build_adder, UnitInput};
    use crate::grid::Distribution;

    fn grid(lo: f64, hi: f64, n: usize) -> ValueGrid {
        ValueGrid::new(lo, hi, n, Distribution::Uniform).unwrap()
    }

    fn three_value_quantized() -> AdderUnit {
        let g = grid(-1.0, 1.0, 3);
        build_adder(
            vec![UnitInput::plus(g.clone()), UnitInput::plus(g)],
            grid(-2.0, 2.0, 5),
            RoundingMode::Floor,
        )
        .unwrap()
        .quantized()
        .unwrap()
    }

    #[test]
    fn three_value_export_counts() {
        let g = grid(-1.0, 1.0, 3);
        let net = export_netlist(&[three_value_quantized()], &[g.clone(), g]).unwrap();
        assert_eq!(net.neuron_counts(), (11, 6));
        assert!(net.synapses.iter().all(|s| is_legal_weight(s.weight)));
        assert_eq!(net.meta.scale, vec![254]);
        assert_eq!(net.meta.grids.len(), 2);
    }

    #[test]
    fn empty_export() {
        let net = export_netlist(&[], &[]).unwrap();
        assert!(net.neurons.is_empty());
        assert!(net.synapses.is_empty());
    }

    #[test]
    fn export_requires_quantized_units() {
        let g = grid(-1.0, 1.0, 3);
        let unit = build_adder(
            vec![UnitInput::plus(g.clone())],
            g.clone(),
            RoundingMode::Floor,
        )
        .unwrap();
        assert!(matches!(
            export_netlist(&[unit], &[g]),
            Err(NetlistError::NotQuantized(_))
        ));
    }

    #[test]
    fn export_input_accounting_errors() {
        let g = grid(-1.0, 1.0, 3);
        assert!(matches!(
            export_netlist(&[three_value_quantized()], std::slice::from_ref(&g)),
            Err(NetlistError::Dangling(_))
        ));
        assert_eq!(
            export_netlist(
                &[three_value_quantized()],
                &[g.clone(), g.clone(), g.clone()]
            ),
            Err(NetlistError::UnusedInputs(1))
        );
        let other = grid(-2.0, 2.0, 3);
        assert!(matches!(
            export_netlist(&[three_value_quantized()], &[g, other]),
            Err(NetlistError::GridMismatch { .. })
        ));
    }

    #[test]
    fn sim_matches_unit_on_all_pairs() {
        let g = grid(-1.0, 1.0, 3);
        let unit = three_value_quantized();
        let net = export_netlist(core::slice::from_ref(&unit), &[g.clone(), g]).unwrap();
        let mut sim = NetlistSim::new(&net).unwrap();
        let mut agg = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                sim.step(&[a, b]).unwrap();
                assert_eq!(
                    sim.unit_output(0),
                    Some(unit.propagate(&[a, b], &mut agg).unwrap())
                );
            }
        }
    }

    #[test]
    fn validation_catches_bad_graphs() {
        let g = grid(-1.0, 1.0, 3);
        let good = export_netlist(&[three_value_quantized()], &[g.clone(), g]).unwrap();

        let mut bad = good.clone();
        bad.synapses.push(SynapseSpec {
            src: 0,
            dst: 999,
            weight: 2,
            delay: 0,
        });
        assert!(matches!(bad.validate(), Err(NetlistError::Dangling(_))));

        let mut bad = good.clone();
        bad.synapses[0].weight = 3;
        assert!(matches!(
            bad.validate(),
            Err(NetlistError::IllegalWeight { .. })
        ));

        let mut bad = good.clone();
        bad.synapses[0].delay = 2;
        assert!(matches!(
            bad.validate(),
            Err(NetlistError::IllegalDelay { .. })
        ));

        // Zero reduce neuron back onto the positive zero aggregate neuron that drives it.
        let mut bad = good.clone();
        let zero_reduce = good.meta.units[0].reduce_first + 2;
        let pos_zero = good.meta.units[0].first;
        bad.synapses.push(SynapseSpec {
            src: zero_reduce,
            dst: pos_zero,
            weight: 2,
            delay: 0,
        });
        assert_eq!(bad.validate(), Err(NetlistError::Cycle));

        // The same back edge is fine with a delay.
        let mut ok = good.clone();
        ok.synapses.push(SynapseSpec {
            src: zero_reduce,
            dst: pos_zero,
            weight: 2,
            delay: 1,
        });
        assert!(ok.validate().is_ok());

        let mut bad = good;
        bad.neurons[3].id = 7;
        assert_eq!(bad.validate(), Err(NetlistError::NonSequentialIds));
    }
}
