//! Fixed-point weights for 8-bit signed synapses.
//!
//! Legal weights are the even integers in `[-256, 254]`.

use core::fmt;

pub const WEIGHT_MIN: i32 = -256;
pub const WEIGHT_MAX: i32 = 254;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleError {
    /// Every weight was zero, so no scale is defined.
    AllZero,
    NonFinite,
}

impl fmt::Display for ScaleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleError::AllZero => f.write_str("cannot choose a scale for all-zero weights"),
            ScaleError::NonFinite => f.write_str("weights must be finite"),
        }
    }
}

impl core::error::Error for ScaleError {}

pub fn is_legal_weight(w: i32) -> bool {
    w % 2 == 0 && (WEIGHT_MIN..=WEIGHT_MAX).contains(&w)
}

/// Quantizes a real weight at `scale` integer units per real unit.
///
/// Computes `2 * round(w * scale / 2)` rounding halves away from zero, then
/// clamps into `[-256, 254]`.
pub fn quantize_weight(w: f64, scale: u32) -> i32 {
    let half = libm::round(w * scale as f64 / 2.0);
    let q = 2.0 * half;
    q.clamp(WEIGHT_MIN as f64, WEIGHT_MAX as f64) as i32
}

/// Largest integer scale with `max|w| * scale <= 254`, never below 1.
pub fn choose_scale(weights: &[f64]) -> Result<u32, ScaleError> {
    let mut max = 0.0f64;
    for &w in weights {
        if !w.is_finite() {
            return Err(ScaleError::NonFinite);
        }
        max = max.max(w.abs());
    }
    if max == 0.0 {
        return Err(ScaleError::AllZero);
    }
    let bound = WEIGHT_MAX as f64;
    let mut scale = libm::floor(bound / max);
    while scale > 1.0 && max * scale > bound {
        scale -= 1.0;
    }
    while max * (scale + 1.0) <= bound {
        scale += 1.0;
    }
    Ok(if scale < 1.0 {
        1
    } else if scale > u32::MAX as f64 {
        u32::MAX
    } else {
        scale as u32
    })
}
