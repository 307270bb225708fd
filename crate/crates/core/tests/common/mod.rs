//! Reference arithmetic shared by the integration tests.

#![allow(dead_code)]

use npid_core::{RoundingMode, ValueGrid};

/// Scan-based reference: no thresholds, no midpoints.
pub fn oracle_bin(output: &ValueGrid, s: f64, mode: RoundingMode) -> usize {
    let v = output.values();
    let s = s.clamp(output.lo(), output.hi());
    match mode {
        RoundingMode::Floor => {
            let mut best: Option<usize> = None;
            for (i, &x) in v.iter().enumerate() {
                let same_side = if s >= 0.0 { x >= 0.0 } else { x <= 0.0 };
                if same_side && x.abs() <= s.abs() && best.is_none_or(|b| x.abs() > v[b].abs()) {
                    best = Some(i);
                }
            }
            best.unwrap_or_else(|| output.zero_index().unwrap())
        }
        RoundingMode::Nearest => {
            let mut best = 0;
            for i in 1..v.len() {
                let d = (s - v[i]).abs();
                let db = (s - v[best]).abs();
                if d < db || (d == db && v[i].abs() > v[best].abs()) {
                    best = i;
                }
            }
            best
        }
    }
}

/// Bins acceptable for `s`: the oracle's choice, plus its neighbour when
/// `s` lies within float roundoff of the midpoint between them.
pub fn acceptable_bins(output: &ValueGrid, s: f64, mode: RoundingMode) -> Vec<usize> {
    let best = oracle_bin(output, s, mode);
    let v = output.values();
    let s = s.clamp(output.lo(), output.hi());
    let tol = 1e-12 * (1.0 + s.abs());
    let mut out = vec![best];
    for j in [best.wrapping_sub(1), best + 1] {
        let Some(&x) = v.get(j) else { continue };
        let edge = match mode {
            RoundingMode::Nearest => 0.5 * (x + v[best]),
            // Floor changes bin exactly at a grid value.
            RoundingMode::Floor => {
                if x.abs() > v[best].abs() {
                    x
                } else {
                    v[best]
                }
            }
        };
        if (s - edge).abs() <= tol {
            out.push(j);
        }
    }
    out
}
