//! Spiking adder units: an aggregate layer followed by a reduce layer.
//!
//! Every input neuron (one per bin of an input grid) connects densely to the
//! aggregate layer. Its weight into the positive sub-population is
//! `gain * sign * value`; into the negative sub-population the same weight
//! negated, so both groups only ever need non-negative thresholds. Positive
//! aggregate neurons stand for output values `>= 0` with thresholds growing
//! with the value's magnitude, negative ones for values `<= 0`. All neurons
//! whose threshold is reached fire, so each group fires a prefix ordered by
//! magnitude.
//!
//! The reduce layer has one neuron per output value. It is excited by the
//! aggregate neuron of the same value and inhibited by the aggregate neuron
//! of the next larger magnitude in the same group, so only the highest firing
//! aggregate neuron gets through. The extreme values have no inhibitor,
//! which clamps out-of-range sums.
//!
//! Zero is covered twice: the positive zero neuron has threshold 0 and fires
//! for any sum `>= 0`; the negative zero neuron has the smallest positive
//! threshold and fires only for strictly negative sums. Exactly one of them
//! fires, and both excite the zero reduce neuron, which is inhibited by the
//! first non-zero neuron of either group. With `N` output values that gives
//! `N + 1` aggregate and `N` reduce neurons.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{RoundingMode, ValueGrid};
use crate::quantize::{choose_scale, quantize_weight, ScaleError};
use crate::spike::SpikePattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Input,
    AggregatePos,
    AggregateNeg,
    Reduce,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Input => "input",
            Layer::AggregatePos => "aggregate-pos",
            Layer::AggregateNeg => "aggregate-neg",
            Layer::Reduce => "reduce",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// One operand of an adder: its grid, whether it is added or subtracted,
/// and the gain folded into its synaptic weights.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitInput {
    pub grid: ValueGrid,
    pub sign: Sign,
    pub gain: f64,
}

impl UnitInput {
    pub fn new(grid: ValueGrid, sign: Sign, gain: f64) -> Self {
        UnitInput { grid, sign, gain }
    }

    pub fn plus(grid: ValueGrid) -> Self {
        Self::new(grid, Sign::Plus, 1.0)
    }

    pub fn minus(grid: ValueGrid) -> Self {
        Self::new(grid, Sign::Minus, 1.0)
    }

    /// Real-valued weight contributed when bin `index` fires.
    pub fn real_weight(&self, index: usize) -> f64 {
        self.gain * self.sign.factor() * self.grid.values()[index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Float,
    /// Integer weights and thresholds at `scale` units per real unit.
    Quantized {
        scale: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateNeuron {
    pub layer: Layer,
    /// Output bin whose magnitude this neuron's threshold encodes.
    pub bin: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceNeuron {
    pub bin: usize,
    pub threshold: f64,
    /// `(aggregate index, weight)` pairs.
    pub synapses: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitError {
    NoInputs,
    /// Adder outputs need an exact zero value.
    OutputWithoutZero,
    NonFiniteGain(usize),
    Scale(ScaleError),
    InputCount {
        expected: usize,
        got: usize,
    },
    PatternLength {
        input: usize,
        expected: usize,
        got: usize,
    },
    NotOneHot {
        input: usize,
    },
    BinOutOfRange {
        input: usize,
        bin: usize,
        len: usize,
    },
    NoWinner,
    MultipleWinners(usize),
}

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitError::NoInputs => f.write_str("adder needs at least one input"),
            UnitError::OutputWithoutZero => f.write_str("adder output grid must contain 0"),
            UnitError::NonFiniteGain(i) => write!(f, "input {i} has a non-finite gain"),
            UnitError::Scale(e) => write!(f, "weight scale: {e}"),
            UnitError::InputCount { expected, got } => {
                write!(f, "expected {expected} input patterns, got {got}")
            }
            UnitError::PatternLength {
                input,
                expected,
                got,
            } => {
                write!(
                    f,
                    "input {input}: pattern has {got} neurons, grid has {expected}"
                )
            }
            UnitError::NotOneHot { input } => write!(f, "input {input} is not one-hot"),
            UnitError::BinOutOfRange { input, bin, len } => {
                write!(f, "input {input}: bin {bin} out of range for {len} values")
            }
            UnitError::NoWinner => f.write_str("no reduce neuron fired"),
            UnitError::MultipleWinners(n) => write!(f, "{n} reduce neurons fired"),
        }
    }
}

impl core::error::Error for UnitError {}

impl From<ScaleError> for UnitError {
    fn from(e: ScaleError) -> Self {
        UnitError::Scale(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdderUnit {
    inputs: Vec<UnitInput>,
    /// Per input, per bin: weight into every positive aggregate neuron.
    weights: Vec<Vec<f64>>,
    output: ValueGrid,
    mode: RoundingMode,
    weight_mode: WeightMode,
    aggregate: Vec<AggregateNeuron>,
    reduce: Vec<ReduceNeuron>,
}

/// Builds a float-weight adder computing `sum(gain * sign * x)` onto `output`.
pub fn build_adder(
    inputs: Vec<UnitInput>,
    output: ValueGrid,
    mode: RoundingMode,
) -> Result<AdderUnit, UnitError> {
    AdderUnit::new(inputs, output, mode, false)
}

impl AdderUnit {
    pub fn new(
        inputs: Vec<UnitInput>,
        output: ValueGrid,
        mode: RoundingMode,
        quantized: bool,
    ) -> Result<Self, UnitError> {
        if inputs.is_empty() {
            return Err(UnitError::NoInputs);
        }
        if let Some(i) = inputs.iter().position(|u| !u.gain.is_finite()) {
            return Err(UnitError::NonFiniteGain(i));
        }
        let zero = output.zero_index().ok_or(UnitError::OutputWithoutZero)?;

        let real: Vec<Vec<f64>> = inputs
            .iter()
            .map(|u| (0..u.grid.len()).map(|i| u.real_weight(i)).collect())
            .collect();

        let weight_mode = if quantized {
            let flat: Vec<f64> = real.iter().flatten().copied().collect();
            WeightMode::Quantized {
                scale: choose_scale(&flat)?,
            }
        } else {
            WeightMode::Float
        };

        let weights = match weight_mode {
            WeightMode::Float => real,
            WeightMode::Quantized { scale } => real
                .iter()
                .map(|ws| {
                    ws.iter()
                        .map(|&w| quantize_weight(w, scale) as f64)
                        .collect()
                })
                .collect(),
        };

        let (aggregate, reduce) = wire(&output, zero, mode, weight_mode);
        Ok(AdderUnit {
            inputs,
            weights,
            output,
            mode,
            weight_mode,
            aggregate,
            reduce,
        })
    }

    /// Same unit with integer weights and thresholds.
    pub fn quantized(&self) -> Result<Self, UnitError> {
        Self::new(self.inputs.clone(), self.output.clone(), self.mode, true)
    }

    pub fn inputs(&self) -> &[UnitInput] {
        &self.inputs
    }

    pub fn output(&self) -> &ValueGrid {
        &self.output
    }

    pub fn mode(&self) -> RoundingMode {
        self.mode
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    pub fn scale(&self) -> Option<u32> {
        match self.weight_mode {
            WeightMode::Float => None,
            WeightMode::Quantized { scale } => Some(scale),
        }
    }

    pub fn aggregate(&self) -> &[AggregateNeuron] {
        &self.aggregate
    }

    pub fn reduce(&self) -> &[ReduceNeuron] {
        &self.reduce
    }

    /// Weight from bin `bin` of input `input` into the positive aggregate
    /// group; the negative group receives its negation.
    pub fn weight(&self, input: usize, bin: usize) -> f64 {
        self.weights[input][bin]
    }

    pub fn neuron_count(&self) -> usize {
        self.aggregate.len() + self.reduce.len()
    }

    /// Arithmetic reference: the sum of the decoded inputs rounded onto the
    /// output grid, without going through any neurons.
    pub fn expected_bin(&self, bins: &[usize]) -> Result<usize, UnitError> {
        self.check_bins(bins)?;
        let mut s = 0.0;
        for (u, &b) in self.inputs.iter().zip(bins) {
            s += u.gain * u.sign.factor() * u.grid.values()[b];
        }
        Ok(self.output.round(s, self.mode))
    }

    fn check_bins(&self, bins: &[usize]) -> Result<(), UnitError> {
        if bins.len() != self.inputs.len() {
            return Err(UnitError::InputCount {
                expected: self.inputs.len(),
                got: bins.len(),
            });
        }
        for (i, (u, &b)) in self.inputs.iter().zip(bins).enumerate() {
            if b >= u.grid.len() {
                return Err(UnitError::BinOutOfRange {
                    input: i,
                    bin: b,
                    len: u.grid.len(),
                });
            }
        }
        Ok(())
    }

    /// Membrane potentials of the positive and negative aggregate groups
    /// when the given input bins fire. Every neuron in a group shares the
    /// same fan-in, so one accumulation per group suffices.
    pub fn potentials(&self, bins: &[usize]) -> (f64, f64) {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for (ws, &b) in self.weights.iter().zip(bins) {
            pos += ws[b];
            neg += -ws[b];
        }
        (pos, neg)
    }

    /// Runs one evaluation from input bin indices.
    ///
    /// Writes the aggregate firing set into `aggregate` (resized to the
    /// aggregate layer) and returns the winning output bin.
    pub fn propagate(&self, bins: &[usize], aggregate: &mut Vec<bool>) -> Result<usize, UnitError> {
        self.check_bins(bins)?;
        let (pos, neg) = self.potentials(bins);
        aggregate.clear();
        aggregate.extend(self.aggregate.iter().map(|a| {
            let v = if a.layer == Layer::AggregatePos {
                pos
            } else {
                neg
            };
            v >= a.threshold
        }));
        let mut winner = None;
        let mut fired = 0;
        for r in &self.reduce {
            let drive: f64 = r
                .synapses
                .iter()
                .filter(|(src, _)| aggregate[*src])
                .map(|(_, w)| *w)
                .sum();
            if drive >= r.threshold {
                fired += 1;
                winner.get_or_insert(r.bin);
            }
        }
        match (winner, fired) {
            (Some(bin), 1) => Ok(bin),
            (None, _) => Err(UnitError::NoWinner),
            (_, n) => Err(UnitError::MultipleWinners(n)),
        }
    }

    /// Evaluates the unit on one one-hot pattern per input.
    ///
    /// Returns the reduce-layer pattern and the aggregate-layer pattern.
    pub fn eval(&self, spikes: &[SpikePattern]) -> Result<(SpikePattern, SpikePattern), UnitError> {
        if spikes.len() != self.inputs.len() {
            return Err(UnitError::InputCount {
                expected: self.inputs.len(),
                got: spikes.len(),
            });
        }
        let mut bins = Vec::with_capacity(spikes.len());
        for (i, (p, u)) in spikes.iter().zip(&self.inputs).enumerate() {
            if p.len() != u.grid.len() {
                return Err(UnitError::PatternLength {
                    input: i,
                    expected: u.grid.len(),
                    got: p.len(),
                });
            }
            bins.push(p.winner().ok_or(UnitError::NotOneHot { input: i })?);
        }
        let mut aggregate = Vec::new();
        let bin = self.propagate(&bins, &mut aggregate)?;
        Ok((
            SpikePattern::one_hot(self.output.len(), bin),
            SpikePattern::from_bools(aggregate),
        ))
    }
}

/// Free-function form of [`AdderUnit::eval`].
pub fn eval_unit(
    unit: &AdderUnit,
    spikes: &[SpikePattern],
) -> Result<(SpikePattern, SpikePattern), UnitError> {
    unit.eval(spikes)
}

fn wire(
    output: &ValueGrid,
    zero: usize,
    mode: RoundingMode,
    weight_mode: WeightMode,
) -> (Vec<AggregateNeuron>, Vec<ReduceNeuron>) {
    let v = output.values();
    let n = v.len();

    // Thresholds in real units, then scaled. Potentials of quantized units
    // are integers, so `p >= t` is the same test as `p >= ceil(t)`.
    let scale_threshold = |t: f64| -> f64 {
        match weight_mode {
            WeightMode::Float => t,
            WeightMode::Quantized { scale } => libm::ceil(t * scale as f64).max(1.0),
        }
    };
    let epsilon = match weight_mode {
        WeightMode::Float => f64::from_bits(1),
        WeightMode::Quantized { .. } => 1.0,
    };
    let (unit_weight, reduce_threshold) = match weight_mode {
        // Synaptic weights must be even once quantized.
        WeightMode::Float => (1.0, 1.0),
        WeightMode::Quantized { .. } => (2.0, 2.0),
    };

    let mut aggregate = Vec::with_capacity(n + 1);
    // Positive group: zero, then increasing values.
    aggregate.push(AggregateNeuron {
        layer: Layer::AggregatePos,
        bin: zero,
        threshold: 0.0,
    });
    for bin in zero + 1..n {
        let t = match mode {
            RoundingMode::Floor => v[bin],
            RoundingMode::Nearest => 0.5 * (v[bin - 1] + v[bin]),
        };
        aggregate.push(AggregateNeuron {
            layer: Layer::AggregatePos,
            bin,
            threshold: scale_threshold(t),
        });
    }
    let neg_start = aggregate.len();
    // Negative group: strictly-negative sentinel for zero, then increasing magnitudes.
    aggregate.push(AggregateNeuron {
        layer: Layer::AggregateNeg,
        bin: zero,
        threshold: epsilon,
    });
    for bin in (0..zero).rev() {
        let t = match mode {
            RoundingMode::Floor => -v[bin],
            RoundingMode::Nearest => 0.5 * (-v[bin + 1] + -v[bin]),
        };
        aggregate.push(AggregateNeuron {
            layer: Layer::AggregateNeg,
            bin,
            threshold: scale_threshold(t),
        });
    }

    let pos_of = |bin: usize| bin - zero;
    let neg_of = |bin: usize| neg_start + (zero - bin);

    let mut reduce = Vec::with_capacity(n);
    for bin in 0..n {
        let mut synapses = vec![];
        if bin == zero {
            synapses.push((pos_of(zero), unit_weight));
            synapses.push((neg_of(zero), unit_weight));
            if zero + 1 < n {
                synapses.push((pos_of(zero + 1), -unit_weight));
            }
            if zero > 0 {
                synapses.push((neg_of(zero - 1), -unit_weight));
            }
        } else if bin > zero {
            synapses.push((pos_of(bin), unit_weight));
            if bin + 1 < n {
                synapses.push((pos_of(bin + 1), -unit_weight));
            }
        } else {
            synapses.push((neg_of(bin), unit_weight));
            if bin > 0 {
                synapses.push((neg_of(bin - 1), -unit_weight));
            }
        }
        reduce.push(ReduceNeuron {
            bin,
            threshold: reduce_threshold,
            synapses,
        });
    }
    (aggregate, reduce)
}
