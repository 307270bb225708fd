use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use npid_core::{Distribution, NpidNetwork, RoundingMode, TraceMode};
use npid_harness::config::{default_distribution, Controller, ExperimentConfig};
use npid_harness::experiment::run_with_spikes;
use npid_harness::sweep::{self, summarize, RESOLUTIONS, STEP_SETPOINTS};
use npid_harness::verify::{verify_adder, AdderSetup};
use npid_harness::{bench, emit, netlist_io};

#[derive(Parser)]
#[command(
    name = "npid",
    version,
    about = "Spiking PID experiments on a simulated quadrotor altitude loop"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single step response.
    Run {
        #[command(flatten)]
        opts: Opts,
        #[arg(long, value_enum)]
        controller: Option<Controller>,
        /// Also write the spike raster.
        #[arg(long)]
        raster: bool,
    },
    /// Set-points crossed with resolutions.
    Sweep {
        #[command(flatten)]
        opts: Opts,
        /// Comma-separated set-points, m.
        #[arg(long, value_delimiter = ',')]
        setpoints: Vec<f64>,
        /// Comma-separated resolutions.
        #[arg(long = "neuron-list", value_delimiter = ',')]
        neuron_list: Vec<usize>,
    },
    /// N-PID against the conventional PID.
    Compare {
        #[command(flatten)]
        opts: Opts,
    },
    /// Enumerate every input pair of a two-input adder.
    VerifyAdder {
        #[command(flatten)]
        opts: Opts,
        /// Three-value example grids instead of the control range.
        #[arg(long)]
        three_value: bool,
    },
    /// Controller throughput.
    Bench {
        #[command(flatten)]
        opts: Opts,
        #[arg(long, default_value_t = bench::MIN_BENCH_TICKS)]
        ticks: usize,
    },
    /// Write the quantized network as JSON.
    ExportNetlist {
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    /// m
    #[arg(long)]
    setpoint: Option<f64>,
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long)]
    distribution: Option<Distribution>,
    /// Hz
    #[arg(long)]
    rate: Option<f64>,
    /// s
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    mode: Option<RoundingMode>,
    #[arg(long)]
    quantized: Option<bool>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Opts {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.decay {
            cfg.npid.decay = v;
        }
        if let Some(v) = self.mode {
            cfg.npid.mode = v;
        }
        if let Some(v) = self.quantized {
            cfg.npid.quantized = v;
        }
        if self.neurons.is_some() || self.distribution.is_some() {
            let n = self.neurons.unwrap_or(cfg.npid.output.n);
            let dist = self.distribution.unwrap_or_else(|| default_distribution(n));
            cfg = cfg.with_resolution(n, dist);
        }
        if let Some(v) = self.setpoint {
            cfg.setpoint = v;
        }
        if let Some(v) = self.rate {
            cfg.rate = v;
        }
        if let Some(v) = self.duration {
            cfg.duration = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self) -> &Path {
        self.out.as_deref().unwrap_or(Path::new("out"))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn print_rows(rows: &[sweep::SummaryRow]) {
    println!("controller  setpoint  N    rise[s]  overshoot[%]  settling[s]  sse[m]   settled");
    for r in rows {
        println!(
            "{:<10}  {:>8.2}  {:<3}  {:>7.2}  {:>12.1}  {:>11.2}  {:>7.4}  {}",
            r.controller.to_string(),
            r.setpoint,
            r.neurons,
            r.rise_time,
            r.overshoot_pct,
            r.settling_time,
            r.steady_state_error,
            r.settled
        );
    }
}

fn write_batch(dir: &Path, runs: &[npid_harness::Run]) -> Result<()> {
    for (k, run) in runs.iter().enumerate() {
        let c = &run.config;
        let name = format!(
            "trace_{:02}_{}_n{}_sp{}.csv",
            k, c.controller, c.npid.output.n, c.setpoint
        );
        emit::to_file(&dir.join(name), |w| emit::trace_csv(w, &run.trace))?;
    }
    let rows = summarize(runs);
    emit::to_file(&dir.join("summary.csv"), |w| emit::summary_csv(w, &rows))?;
    std::fs::write(dir.join("plot.svg"), emit::svg_plot(runs)).context("writing plot")?;
    print_rows(&rows);
    println!("wrote {}", dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            opts,
            controller,
            raster,
        } => {
            let mut cfg = opts.experiment()?;
            if let Some(c) = controller {
                cfg.controller = c;
            }
            let mode = if raster {
                TraceMode::Raster
            } else {
                TraceMode::Bins
            };
            let run = run_with_spikes(&cfg, mode)?;
            let dir = opts.out_dir();
            if let Some(spikes) = &run.spikes {
                emit::to_file(&dir.join("spikes.csv"), |w| {
                    emit::spike_ticks_csv(w, spikes)
                })?;
                if raster {
                    emit::to_file(&dir.join("raster.csv"), |w| emit::raster_csv(w, spikes))?;
                }
            }
            std::fs::write(dir.join("config.json"), cfg.to_json() + "\n").ok();
            write_batch(dir, std::slice::from_ref(&run))?;
        }
        Command::Sweep {
            opts,
            setpoints,
            neuron_list,
        } => {
            let cfg = opts.experiment()?;
            let setpoints = if setpoints.is_empty() {
                STEP_SETPOINTS.to_vec()
            } else {
                setpoints
            };
            let neurons = if neuron_list.is_empty() {
                opts.neurons.map_or(RESOLUTIONS.to_vec(), |n| vec![n])
            } else {
                neuron_list
            };
            let runs = sweep::sweep(&cfg, &setpoints, &neurons, opts.distribution)?;
            write_batch(opts.out_dir(), &runs)?;
        }
        Command::Compare { opts } => {
            let cfg = opts.experiment()?;
            let runs = sweep::compare(&sweep::npid_vs_baseline(&cfg))?;
            write_batch(opts.out_dir(), &runs)?;
        }
        Command::VerifyAdder { opts, three_value } => {
            let setup = if three_value {
                AdderSetup::three_value()
            } else {
                let n = opts.neurons.unwrap_or(151);
                AdderSetup::square(
                    n,
                    opts.distribution.unwrap_or(Distribution::Uniform),
                    opts.mode.unwrap_or_default(),
                    opts.quantized.unwrap_or(false),
                )
            };
            let report = verify_adder(&setup)?;
            println!("{report}");
            for (a, b, want, got) in &report.examples {
                println!("  ({a}, {b}): expected bin {want}, got {got}");
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench { opts, ticks } => {
            let cfg = opts.experiment()?;
            let report = bench::bench(&cfg.npid_config(), ticks, cfg.seed)?;
            println!("{report}");
        }
        Command::ExportNetlist { opts } => {
            let cfg = opts.experiment()?;
            let net = NpidNetwork::new(cfg.npid_config())?.netlist()?;
            let path = opts
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("netlist.json"));
            netlist_io::write_netlist(&net, &path)?;
            let (units, inputs) = net.neuron_counts();
            println!(
                "{} unit neurons, {} input neurons, {} synapses -> {}",
                units,
                inputs,
                net.synapses.len(),
                path.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
