//! CSV and SVG output. Everything here is a pure function of its input, so
//! emitting the same data twice gives identical bytes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use npid_core::SpikeTrace;
use serde::Serialize;

use crate::experiment::{Run, TraceRecord};
use crate::sweep::SummaryRow;
use crate::Error;

fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T], header: &[&str]) -> Result<(), Error> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub const TRACE_COLUMNS: [&str; 11] = [
    "t",
    "z",
    "vz",
    "z_meas",
    "target",
    "error_bin",
    "integral_bin",
    "deriv_bin",
    "u_bin",
    "u_newton",
    "thrust_total",
];

/// Bin columns are empty for the conventional controller.
pub fn trace_csv<W: Write>(out: W, trace: &[TraceRecord]) -> Result<(), Error> {
    write_rows(out, trace, &TRACE_COLUMNS)
}

pub fn spike_ticks_csv<W: Write>(out: W, spikes: &SpikeTrace) -> Result<(), Error> {
    write_rows(
        out,
        &spikes.ticks,
        &[
            "tick",
            "t_seconds",
            "error_bin",
            "integral_bin",
            "deriv_bin",
            "output_bin",
            "output_newton",
        ],
    )
}

pub fn raster_csv<W: Write>(out: W, spikes: &SpikeTrace) -> Result<(), Error> {
    write_rows(out, &spikes.raster, &["tick", "neuron_id", "layer"])
}

pub fn summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), Error> {
    write_rows(
        out,
        rows,
        &[
            "controller",
            "setpoint",
            "neurons",
            "distribution",
            "quantized",
            "rise_time",
            "overshoot",
            "overshoot_pct",
            "settling_time",
            "steady_state_error",
            "saturation",
            "settled",
        ],
    )
}

/// Writes to `path` through `f`, creating parent directories.
pub fn to_file<F>(path: &Path, f: F) -> Result<(), Error>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<(), Error>,
{
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

const W: f64 = 800.0;
const H: f64 = 480.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Altitude against time, one polyline per run, with the settling band of
/// each distinct set-point shaded.
pub fn svg_plot(runs: &[Run]) -> String {
    let t_max = runs
        .iter()
        .filter_map(|r| r.trace.last())
        .map(|r| r.t)
        .fold(1e-9, f64::max);
    let z_max = runs
        .iter()
        .flat_map(|r| r.trace.iter().map(|x| x.z.max(x.target)))
        .fold(1.0, f64::max)
        * 1.1;
    let x = |t: f64| MARGIN + t / t_max * (W - 2.0 * MARGIN);
    let y = |z: f64| H - MARGIN - z / z_max * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);

    let mut bands: Vec<(f64, f64)> = Vec::new();
    for run in runs {
        let Ok(io) = run.config.npid.io.build() else {
            continue;
        };
        let b = io.encode(run.config.setpoint);
        let band = crate::metrics::SETTLING_BAND_BINS;
        let lo = io.values()[b.saturating_sub(band)];
        let hi = io.values()[(b + band).min(io.len() - 1)];
        if !bands.contains(&(lo, hi)) {
            bands.push((lo, hi));
        }
    }
    for (lo, hi) in bands {
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#cccccc" fill-opacity="0.5"/>"##,
            x(0.0),
            y(hi),
            x(t_max) - x(0.0),
            y(lo) - y(hi)
        );
    }

    let _ = writeln!(
        s,
        r#"<path d="M{m} {b} L{r} {b} M{m} {b} L{m} {t}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12">t [s] 0 to {:.1}</text>"#,
        W / 2.0 - 40.0,
        H - 15.0,
        t_max
    );
    let _ = writeln!(
        s,
        r#"<text x="5" y="{}" font-size="12">z [m] 0 to {:.2}</text>"#,
        MARGIN - 15.0,
        z_max
    );

    for (k, run) in runs.iter().enumerate() {
        let mut pts = String::new();
        for r in &run.trace {
            let _ = write!(pts, "{:.2},{:.2} ", x(r.t), y(r.z));
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"><title>{} N={} setpoint={}</title></polyline>"#,
            pts.trim_end(),
            COLORS[k % COLORS.len()],
            run.config.controller,
            run.config.npid.output.n,
            run.config.setpoint
        );
    }
    s.push_str("</svg>\n");
    s
}
