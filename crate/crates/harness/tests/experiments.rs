use npid_core::{Distribution, TraceMode};
use npid_harness::config::{Controller, ExperimentConfig};
use npid_harness::emit::{self, TRACE_COLUMNS};
use npid_harness::experiment::{final_altitude, run_step_response, run_with_spikes};
use npid_harness::sweep::{self, npid_vs_baseline, summarize, RESOLUTIONS, STEP_SETPOINTS};

fn short(n: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default()
        .with_resolution(n, npid_harness::config::default_distribution(n));
    cfg.duration = 5.0;
    cfg
}

fn csv_bytes(run: &npid_harness::Run) -> Vec<u8> {
    let mut buf = Vec::new();
    emit::trace_csv(&mut buf, &run.trace).unwrap();
    buf
}

#[test]
fn trace_csv_has_one_row_per_tick() {
    let run = run_step_response(&ExperimentConfig::default()).unwrap();
    assert_eq!(run.trace.len(), 1400);
    let text = String::from_utf8(csv_bytes(&run)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TRACE_COLUMNS.join(","));
    assert_eq!(lines.count(), 1400);
}

#[test]
fn baseline_csv_leaves_bins_empty() {
    let mut cfg = short(63);
    cfg.controller = Controller::Baseline;
    let text = String::from_utf8(csv_bytes(&run_step_response(&cfg).unwrap())).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), TRACE_COLUMNS.len());
    assert_eq!(&row[5..9], ["", "", "", ""]);
}

#[test]
fn svg_has_one_polyline_per_run() {
    let runs = sweep::sweep(&short(15), &[1.0, 2.0, 3.0], &[15, 63], None).unwrap();
    let svg = emit::svg_plot(&runs);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 6);
    assert_eq!(emit::svg_plot(&[]).matches("<polyline").count(), 0);
}

#[test]
fn repeated_runs_emit_identical_bytes() {
    let cfg = short(151);
    let a = run_step_response(&cfg).unwrap();
    let b = run_step_response(&cfg).unwrap();
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
    assert_eq!(csv_bytes(&a), csv_bytes(&a));
    assert_eq!(
        emit::svg_plot(std::slice::from_ref(&a)),
        emit::svg_plot(&[b])
    );

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nested/trace.csv");
    emit::to_file(&p, |w| emit::trace_csv(w, &a.trace)).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), csv_bytes(&a));
}

#[test]
fn spike_outputs_follow_the_trace() {
    let cfg = short(15);
    let run = run_with_spikes(&cfg, TraceMode::Raster).unwrap();
    let spikes = run.spikes.as_ref().unwrap();
    assert_eq!(spikes.ticks.len(), run.trace.len());
    for (s, r) in spikes.ticks.iter().zip(&run.trace) {
        assert_eq!(Some(s.output_bin), r.u_bin);
        assert_eq!(s.output, r.u_newton);
    }
    let mut buf = Vec::new();
    emit::spike_ticks_csv(&mut buf, spikes).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text
        .starts_with("tick,t_seconds,error_bin,integral_bin,deriv_bin,output_bin,output_newton\n"));
    assert_eq!(text.lines().count(), run.trace.len() + 1);

    let mut buf = Vec::new();
    emit::raster_csv(&mut buf, spikes).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("tick,neuron_id,layer\n"));
    // Every tick fires at least one neuron in each input and unit population.
    assert!(text.lines().count() > 6 * run.trace.len());
}

#[test]
fn starting_at_the_setpoint_holds_zero_output() {
    for controller in [Controller::Npid, Controller::Baseline] {
        let mut cfg = short(63);
        cfg.controller = controller;
        cfg.setpoint = 0.0;
        let run = run_step_response(&cfg).unwrap();
        let io = cfg.npid.io.build().unwrap();
        let zero = cfg.npid.output.build().unwrap().zero_index();
        for r in &run.trace {
            assert_eq!(r.u_newton, 0.0);
            if controller == Controller::Npid {
                assert_eq!(r.u_bin, zero);
            }
        }
        assert!(run.metrics.steady_state_error <= io.bin_width(0) / 2.0);
    }
}

#[test]
fn halving_the_physics_step_barely_moves_the_baseline() {
    for sp in STEP_SETPOINTS {
        let mut cfg = ExperimentConfig {
            controller: Controller::Baseline,
            setpoint: sp,
            ..Default::default()
        };
        let a = final_altitude(&cfg).unwrap();
        cfg.substeps *= 2;
        let b = final_altitude(&cfg).unwrap();
        assert!((a - b).abs() < 1e-3, "set-point {sp}: {a} vs {b}");
    }
}

#[test]
fn full_sweep_has_fifteen_rows() {
    let base = ExperimentConfig {
        duration: 1.0,
        ..Default::default()
    };
    let runs = sweep::sweep(&base, &STEP_SETPOINTS, &RESOLUTIONS, None).unwrap();
    let rows = summarize(&runs);
    assert_eq!(rows.len(), 15);
    assert_eq!(rows[14].neurons, 15);
    assert_eq!(rows[14].distribution, Distribution::Quadratic);

    let pair = sweep::compare(&npid_vs_baseline(&ExperimentConfig {
        setpoint: 2.0,
        ..base
    }))
    .unwrap();
    let rows = summarize(&pair);
    assert_eq!(rows.len(), 2);
    assert_eq!(
        (rows[0].controller, rows[1].controller),
        (Controller::Npid, Controller::Baseline)
    );

    let mut buf = Vec::new();
    emit::summary_csv(&mut buf, &rows).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
}

#[test]
fn metrics_are_non_negative() {
    let runs = sweep::sweep(&ExperimentConfig::default(), &[1.0, 3.0], &[15, 151], None).unwrap();
    for r in &runs {
        let m = r.metrics;
        for v in [
            m.rise_time,
            m.overshoot,
            m.overshoot_pct,
            m.settling_time,
            m.steady_state_error,
            m.saturation,
        ] {
            assert!(v >= 0.0 && v.is_finite(), "{m:?}");
        }
        assert!(m.saturation <= 1.0);
    }
}

#[test]
fn config_file_round_trip() {
    let mut cfg = ExperimentConfig::default().with_resolution(63, Distribution::Uniform);
    cfg.setpoint = 2.5;
    cfg.battery_sag = 0.005;
    cfg.npid.quantized = true;
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cfg.json");
    std::fs::write(&p, cfg.to_json()).unwrap();
    let back = ExperimentConfig::load(&p).unwrap();
    assert_eq!(back, cfg);
    assert!(ExperimentConfig::load(&dir.path().join("missing.json")).is_err());
}
