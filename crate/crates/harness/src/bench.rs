//! Wall-clock throughput of the spiking controller.

use std::time::Instant;

use npid_core::{NpidConfig, NpidNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::Error;

pub const MIN_BENCH_TICKS: usize = 1_000_000;

/// Ticks timed individually for the latency percentiles.
const LATENCY_BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchReport {
    pub neurons: usize,
    pub ticks: usize,
    pub ticks_per_second: f64,
    /// Mean tick latency, ns.
    pub mean_ns: f64,
    /// 99th percentile tick latency, ns. Ticks are timed in batches of 64
    /// since a single tick is close to the clock resolution.
    pub p99_ns: f64,
}

impl std::fmt::Display for BenchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "N={} ticks={} throughput={:.0} ticks/s mean={:.1} ns p99={:.1} ns",
            self.neurons, self.ticks, self.ticks_per_second, self.mean_ns, self.p99_ns
        )
    }
}

/// Steps the network with random in-range inputs. `ticks` is raised to
/// [`MIN_BENCH_TICKS`].
pub fn bench(cfg: &NpidConfig, ticks: usize, seed: u64) -> Result<BenchReport, Error> {
    let ticks = ticks.max(MIN_BENCH_TICKS);
    let mut net = NpidNetwork::new(cfg.clone())?;
    let (nt, nd) = (net.grids().io.len(), net.grids().derivative.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Inputs are drawn up front so the timing covers the network only.
    let inputs: Vec<[usize; 3]> = (0..4096)
        .map(|_| {
            [
                rng.gen_range(0..nt),
                rng.gen_range(0..nt),
                rng.gen_range(0..nd),
            ]
        })
        .collect();

    let mut batches = Vec::with_capacity(ticks / LATENCY_BATCH + 1);
    let mut sink = 0usize;
    let start = Instant::now();
    let mut done = 0;
    while done < ticks {
        let len = LATENCY_BATCH.min(ticks - done);
        let t0 = Instant::now();
        for k in done..done + len {
            let [t, m, d] = inputs[k % inputs.len()];
            sink = sink.wrapping_add(net.step_encoded(t, m, d).output);
        }
        batches.push(t0.elapsed().as_nanos() as f64 / len as f64);
        done += len;
    }
    let total = start.elapsed().as_secs_f64();
    std::hint::black_box(sink);

    batches.sort_by(f64::total_cmp);
    let p99 = batches[((batches.len() - 1) as f64 * 0.99).round() as usize];
    Ok(BenchReport {
        neurons: cfg.output.n,
        ticks,
        ticks_per_second: ticks as f64 / total,
        mean_ns: total * 1e9 / ticks as f64,
        p99_ns: p99,
    })
}
