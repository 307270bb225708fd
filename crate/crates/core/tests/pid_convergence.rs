//! Bin-level PID at fine resolution against the continuous-valued one.

use npid_core::{
    pid_step, Distribution, NpidConfig, PidGains, PidState, QuantPid, QuantPidState, RoundingMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst gap over random ticks. Each tick starts both controllers from the
/// same integral value, so the gap is the rounding of a single evaluation.
fn per_tick_gap(mode: RoundingMode, on_grid: bool) -> f64 {
    let cfg = NpidConfig {
        mode,
        ..NpidConfig::standard(1001, Distribution::Uniform)
    };
    let pid = QuantPid::from_config(&cfg).unwrap();
    let g = pid.grids();
    let gains = PidGains::new(cfg.kp, cfg.ti, cfg.td);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut qs = pid.initial_state();
    let mut worst: f64 = 0.0;
    for _ in 0..20_000 {
        let (target, m) = if on_grid {
            let n = g.io.len();
            (
                g.io.values()[rng.gen_range(0..n)],
                g.io.values()[rng.gen_range(0..n)],
            )
        } else {
            (rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0))
        };
        let d = if on_grid {
            g.derivative.values()[rng.gen_range(0..g.derivative.len())]
        } else {
            rng.gen_range(-0.5..0.5)
        };
        let i_prev = g.integral.values()[qs.integral_bin];
        let e = target - m;
        // Keep the continuous integral inside the integral grid.
        if !(g.integral.lo()..=g.integral.hi()).contains(&(i_prev + e * cfg.dt)) {
            qs = pid.initial_state();
            continue;
        }
        // Seed the previous error so that (e - e_prev) / dt == d.
        let mut ps = PidState {
            integral: i_prev,
            prev_error: e - d * cfg.dt,
            initialized: true,
        };
        let u = pid_step(&mut ps, target, m, cfg.dt, &gains, Some((-1.25, 1.25)));
        let b = pid.step(&mut qs, target, m, d).unwrap();
        worst = worst.max((g.output.values()[b.output] - u).abs());
    }
    worst
}

#[test]
fn fine_grids_track_continuous_pid_within_one_bin() {
    let cfg = NpidConfig::standard(1001, Distribution::Uniform);
    let bin = cfg.error.build().unwrap().max_gap();
    let worst = per_tick_gap(RoundingMode::Nearest, true);
    assert!(worst <= bin, "worst gap {worst} exceeds one bin ({bin})");
}

/// Off-grid inputs and floor rounding: every population may be off by its
/// rounding error, scaled by the gain that carries it to the output.
#[test]
fn fine_grids_gap_within_rounding_budget() {
    let cfg = NpidConfig::standard(1001, Distribution::Uniform);
    let gap = |s: &npid_core::GridSpec| s.build().unwrap().max_gap();
    let ki = cfg.kp / cfg.ti;
    let kd = cfg.kp * cfg.td;
    for mode in [RoundingMode::Nearest, RoundingMode::Floor] {
        let r = if mode == RoundingMode::Nearest {
            0.5
        } else {
            1.0
        };
        let e_err = gap(&cfg.io) + r * gap(&cfg.error);
        let budget = cfg.kp * e_err
            + ki * (cfg.dt * e_err + r * gap(&cfg.integral))
            + kd * r * gap(&cfg.derivative)
            + r * gap(&cfg.output);
        let worst = per_tick_gap(mode, false);
        assert!(
            worst <= budget + 1e-12,
            "{mode}: worst gap {worst} over budget {budget}"
        );
    }
}

#[test]
fn zero_state_agrees_exactly_on_grid_points() {
    let cfg = NpidConfig::standard(1001, Distribution::Uniform);
    let pid = QuantPid::from_config(&cfg).unwrap();
    let g = pid.grids();
    let zero = QuantPidState {
        integral_bin: g.integral.zero_index().unwrap(),
    };
    let mut qs = zero;
    let b = pid.step(&mut qs, 2.0, 2.0, 0.0).unwrap();
    assert_eq!(g.output.values()[b.output], 0.0);
    let mut qs = zero;
    let b = pid.step(&mut qs, 1.5, 0.0, 0.0).unwrap();
    assert_eq!(b.output, g.output.len() - 1);
}
