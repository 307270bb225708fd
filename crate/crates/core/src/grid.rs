//! Position-code value grids.
//!
//! A [`ValueGrid`] is the ordered set of real values a population of neurons
//! can represent, one neuron per value. Encoding picks the single closest
//! value (winner-takes-all); decoding reads it back.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// How the representable values are spread over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Uniform,
    /// `sign(u)·u²` over uniformly spaced `u`, dense around zero.
    Quadratic,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform => f.write_str("uniform"),
            Distribution::Quadratic => f.write_str("quadratic"),
        }
    }
}

impl core::str::FromStr for Distribution {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "quadratic" => Ok(Distribution::Quadratic),
            _ => Err(GridError::UnknownDistribution),
        }
    }
}

/// Rounding applied when a real sum is mapped back onto a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMode {
    /// Largest-magnitude value not exceeding the sum's magnitude, same sign.
    Floor,
    /// Closest value; exact midpoints go away from zero.
    #[default]
    Nearest,
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoundingMode::Floor => f.write_str("floor"),
            RoundingMode::Nearest => f.write_str("nearest"),
        }
    }
}

impl core::str::FromStr for RoundingMode {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "floor" => Ok(RoundingMode::Floor),
            "nearest" => Ok(RoundingMode::Nearest),
            _ => Err(GridError::UnknownMode),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// `lo >= hi` or a non-finite endpoint.
    InvalidRange {
        lo: f64,
        hi: f64,
    },
    TooFewValues(usize),
    /// Quadratic grids must be symmetric around zero.
    AsymmetricQuadratic {
        lo: f64,
        hi: f64,
    },
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    /// Values are not strictly increasing or endpoints do not match.
    Malformed,
    UnknownDistribution,
    UnknownMode,
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::InvalidRange { lo, hi } => write!(f, "invalid grid range [{lo}, {hi}]"),
            GridError::TooFewValues(n) => write!(f, "grid needs at least 2 values, got {n}"),
            GridError::AsymmetricQuadratic { lo, hi } => {
                write!(f, "quadratic grid requires lo = -hi, got [{lo}, {hi}]")
            }
            GridError::IndexOutOfRange { index, len } => {
                write!(f, "bin index {index} out of range for grid of {len} values")
            }
            GridError::Malformed => f.write_str("grid values are not strictly increasing"),
            GridError::UnknownDistribution => {
                f.write_str("unknown distribution (expected uniform or quadratic)")
            }
            GridError::UnknownMode => {
                f.write_str("unknown rounding mode (expected floor or nearest)")
            }
        }
    }
}

impl core::error::Error for GridError {}

/// Range, size and distribution of a grid, without the materialized values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub distribution: Distribution,
}

impl GridSpec {
    pub const fn new(lo: f64, hi: f64, n: usize, distribution: Distribution) -> Self {
        GridSpec {
            lo,
            hi,
            n,
            distribution,
        }
    }

    pub fn build(&self) -> Result<ValueGrid, GridError> {
        ValueGrid::new(self.lo, self.hi, self.n, self.distribution)
    }
}

/// Ordered, strictly increasing list of representable values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid {
    lo: f64,
    hi: f64,
    n: usize,
    distribution: Distribution,
    values: Vec<f64>,
}

impl ValueGrid {
    /// Builds a grid of `n` values spanning `[lo, hi]`.
    ///
    /// Uniform grids step by `(hi - lo) / (n - 1)`. Quadratic grids square
    /// uniformly spaced points over `[-sqrt(hi), sqrt(hi)]` and keep their
    /// sign, which requires `lo == -hi`.
    pub fn new(lo: f64, hi: f64, n: usize, distribution: Distribution) -> Result<Self, GridError> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(GridError::InvalidRange { lo, hi });
        }
        if n < 2 {
            return Err(GridError::TooFewValues(n));
        }
        let last = (n - 1) as f64;
        let mut values: Vec<f64> = match distribution {
            // Weighted endpoints: symmetric odd grids hit exactly 0 in the middle.
            Distribution::Uniform => (0..n)
                .map(|i| (lo * (last - i as f64) + hi * i as f64) / last)
                .collect(),
            Distribution::Quadratic => {
                if lo != -hi {
                    return Err(GridError::AsymmetricQuadratic { lo, hi });
                }
                let root = libm::sqrt(hi);
                (0..n)
                    .map(|i| {
                        // Integer numerator keeps the midpoint of odd grids at exactly 0.
                        let u = root * (2.0 * i as f64 - last) / last;
                        if u < 0.0 {
                            -(u * u)
                        } else {
                            u * u
                        }
                    })
                    .collect()
            }
        };
        values[0] = lo;
        values[n - 1] = hi;
        let grid = ValueGrid {
            lo,
            hi,
            n,
            distribution,
            values,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Checks the structural invariants; used after deserialization.
    pub fn validate(&self) -> Result<(), GridError> {
        if self.n < 2 {
            return Err(GridError::TooFewValues(self.n));
        }
        if self.values.len() != self.n
            || self.values[0] != self.lo
            || self.values[self.n - 1] != self.hi
            || self.values.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(GridError::Malformed);
        }
        Ok(())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distribution(&self) -> Distribution {
        self.distribution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.lo, self.hi, self.n, self.distribution)
    }

    /// Index of the value exactly equal to zero, if the grid has one.
    pub fn zero_index(&self) -> Option<usize> {
        self.values.iter().position(|&v| v == 0.0)
    }

    /// Width of the widest gap between neighbouring values.
    pub fn max_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Width of the bin at `index`: the mean of its two neighbouring gaps
    /// (one gap at the endpoints).
    pub fn bin_width(&self, index: usize) -> f64 {
        let v = &self.values;
        let left = if index > 0 {
            v[index] - v[index - 1]
        } else {
            v[1] - v[0]
        };
        let right = if index + 1 < self.n {
            v[index + 1] - v[index]
        } else {
            v[index] - v[index - 1]
        };
        0.5 * (left + right)
    }

    /// Winner-takes-all encoding: index of the closest value.
    ///
    /// Out-of-range inputs clamp to the endpoints; ties go to the lower index.
    pub fn encode(&self, x: f64) -> usize {
        let v = &self.values;
        // First index whose value is >= x.
        let upper = v.partition_point(|&g| g < x);
        if upper == 0 {
            return 0;
        }
        if upper == self.n {
            return self.n - 1;
        }
        let below = x - v[upper - 1];
        let above = v[upper] - x;
        if above < below {
            upper
        } else {
            upper - 1
        }
    }

    pub fn decode(&self, index: usize) -> Result<f64, GridError> {
        self.values
            .get(index)
            .copied()
            .ok_or(GridError::IndexOutOfRange { index, len: self.n })
    }

    /// Maps a real sum onto the grid the way a spiking adder's output layer does.
    ///
    /// The sum is clamped to `[lo, hi]`. Non-negative sums pick among the
    /// non-negative values and negative sums among the non-positive ones,
    /// comparing magnitudes: `Floor` takes the largest magnitude `<= |s|`,
    /// `Nearest` compares against midpoints between neighbouring magnitudes
    /// (a sum on a midpoint goes to the larger magnitude). Sums smaller than
    /// every candidate map to the smallest-magnitude candidate.
    pub fn round(&self, s: f64, mode: RoundingMode) -> usize {
        let s = s.clamp(self.lo, self.hi);
        let v = &self.values;
        if s >= 0.0 {
            let first = v.partition_point(|&g| g < 0.0);
            if first == self.n {
                return self.n - 1;
            }
            let mut best = first;
            for j in first + 1..self.n {
                let threshold = match mode {
                    RoundingMode::Floor => v[j],
                    RoundingMode::Nearest => 0.5 * (v[j - 1] + v[j]),
                };
                if s >= threshold {
                    best = j;
                } else {
                    break;
                }
            }
            best
        } else {
            let m = -s;
            // Last index whose value is <= 0.
            let end = v.partition_point(|&g| g <= 0.0);
            if end == 0 {
                return 0;
            }
            let mut best = end - 1;
            for j in (0..end - 1).rev() {
                let threshold = match mode {
                    RoundingMode::Floor => -v[j],
                    RoundingMode::Nearest => 0.5 * (-v[j + 1] + -v[j]),
                };
                if m >= threshold {
                    best = j;
                } else {
                    break;
                }
            }
            best
        }
    }
}
