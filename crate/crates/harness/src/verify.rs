//! Exhaustive check of a two-input adder against grid arithmetic.

use npid_core::{AdderUnit, Distribution, RoundingMode, UnitInput, ValueGrid};
use serde::Serialize;

use crate::Error;

/// Largest resolution accepted for exhaustive enumeration.
pub const MAX_VERIFY_N: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdderSetup {
    pub input: (f64, f64),
    pub input_n: usize,
    pub output: (f64, f64),
    pub output_n: usize,
    pub distribution: Distribution,
    pub mode: RoundingMode,
    pub quantized: bool,
}

impl AdderSetup {
    /// Inputs and output share one grid of `n` values over the control range.
    pub fn square(
        n: usize,
        distribution: Distribution,
        mode: RoundingMode,
        quantized: bool,
    ) -> Self {
        let r = npid_core::npid::OUTPUT_RANGE;
        AdderSetup {
            input: r,
            input_n: n,
            output: r,
            output_n: n,
            distribution,
            mode,
            quantized,
        }
    }

    /// Three-value inputs `{-1, 0, 1}` into a five-value output `{-2..2}`.
    pub fn three_value() -> Self {
        AdderSetup {
            input: (-1.0, 1.0),
            input_n: 3,
            output: (-2.0, 2.0),
            output_n: 5,
            distribution: Distribution::Uniform,
            mode: RoundingMode::Nearest,
            quantized: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdderReport {
    pub setup: AdderSetup,
    pub pairs: usize,
    pub exact: usize,
    pub within_one: usize,
    pub max_dev: usize,
    /// Up to ten `(a, b, expected, got)` mismatches.
    pub examples: Vec<(usize, usize, usize, usize)>,
}

impl AdderReport {
    pub fn is_exact(&self) -> bool {
        self.exact == self.pairs
    }

    /// Passes when float units are exact and quantized units stay within
    /// one bin.
    pub fn passed(&self) -> bool {
        if self.setup.quantized {
            self.within_one == self.pairs
        } else {
            self.is_exact()
        }
    }
}

impl std::fmt::Display for AdderReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = &self.setup;
        write!(
            f,
            "n={} {} {} {}: {}/{} exact, {}/{} within 1 bin, max deviation {}",
            s.input_n,
            s.distribution,
            s.mode,
            if s.quantized { "quantized" } else { "float" },
            self.exact,
            self.pairs,
            self.within_one,
            self.pairs,
            self.max_dev
        )
    }
}

pub fn verify_adder(setup: &AdderSetup) -> Result<AdderReport, Error> {
    if setup.input_n > MAX_VERIFY_N || setup.output_n > MAX_VERIFY_N {
        return Err(Error::Config(format!(
            "verification is limited to {MAX_VERIFY_N} values"
        )));
    }
    let g = ValueGrid::new(
        setup.input.0,
        setup.input.1,
        setup.input_n,
        setup.distribution,
    )?;
    let out = ValueGrid::new(
        setup.output.0,
        setup.output.1,
        setup.output_n,
        setup.distribution,
    )?;
    let inputs = vec![UnitInput::plus(g.clone()), UnitInput::plus(g)];
    let reference = AdderUnit::new(inputs, out, setup.mode, false)?;
    let unit = if setup.quantized {
        reference.quantized()?
    } else {
        reference.clone()
    };

    let n = setup.input_n;
    let mut report = AdderReport {
        setup: *setup,
        pairs: 0,
        exact: 0,
        within_one: 0,
        max_dev: 0,
        examples: Vec::new(),
    };
    let mut agg = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let want = reference.expected_bin(&[a, b])?;
            let got = unit.propagate(&[a, b], &mut agg)?;
            let dev = want.abs_diff(got);
            report.pairs += 1;
            if dev == 0 {
                report.exact += 1;
            } else if report.examples.len() < 10 {
                report.examples.push((a, b, want, got));
            }
            if dev <= 1 {
                report.within_one += 1;
            }
            report.max_dev = report.max_dev.max(dev);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_value_is_exact() {
        let r = verify_adder(&AdderSetup::three_value()).unwrap();
        assert_eq!((r.pairs, r.exact), (9, 9));
        assert!(r.passed());
    }

    #[test]
    fn small_quantized_uniform_within_one() {
        let r = verify_adder(&AdderSetup::square(
            15,
            Distribution::Uniform,
            RoundingMode::Nearest,
            true,
        ))
        .unwrap();
        assert_eq!(r.within_one, r.pairs);
    }

    #[test]
    fn oversized_rejected() {
        let s = AdderSetup::square(1003, Distribution::Uniform, RoundingMode::Floor, false);
        assert!(verify_adder(&s).is_err());
    }
}
