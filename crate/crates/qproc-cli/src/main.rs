//! Experiment runner for programmable-processor channel simulation.
//!
//! Subcommands:
//! * `optimize` — learn a program state for a target channel (optionally
//!   sweeping a channel parameter), writing CSV/JSON result files.
//! * `diamond` — distances between two channels: diamond (SDP), trace,
//!   fidelity and the analytic bounds.
//! * `sweep` — port-based teleportation identity-simulation scaling via
//!   the joint SDP, one row per port count.

mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{channel_with_param, CostSpec, ExperimentConfig, Method};
use qproc::channels::{choi_from_kraus, KrausChannel};
use qproc::costs::{bound_report, trace_cost, CostFunction};
use qproc::io::{ChannelSpec, MatrixJson, ProcessorSpec, SdpSolutionJson};
use qproc::linalg::hermitize;
use qproc::optim::{
    frank_wolfe, frank_wolfe_linesearch, projected_subgradient, stochastic_smoothing_fw,
    OptimizerConfig, OptimizerTrace,
};
use qproc::processors::{choi_power_program, ProcessorMap};
use qproc::sdp::{diamond_distance, optimal_program_sdp, ProgramConstraint};
use qproc::states::{fidelity, ChoiMatrix, DensityOperator, HermitianOperator};

#[derive(Parser)]
#[command(name = "qproc", about = "Optimize program states for programmable quantum processors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a program state from a JSON experiment configuration.
    Optimize {
        /// Path to the experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the optimizer seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the iteration budget.
        #[arg(long)]
        iters: Option<usize>,
        /// Override the output path prefix.
        #[arg(long)]
        out: Option<String>,
    },
    /// Distances between two channels given as inline JSON specs.
    Diamond {
        /// First channel spec, e.g. '{"type":"identity","d":2}'.
        #[arg(long = "channel-a")]
        channel_a: String,
        /// Second channel spec, e.g. '{"type":"depolarizing","p":0.4}'.
        #[arg(long = "channel-b")]
        channel_b: String,
        /// Duality-gap tolerance of the diamond SDP.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Identity-simulation scaling of reduced port-based teleportation.
    Sweep {
        /// Comma-separated port counts, e.g. 2,3,4,5,6.
        #[arg(long, default_value = "2,3,4,5,6")]
        ports: String,
        /// Output path prefix (writes <out>.csv and <out>_meta.json).
        #[arg(long, default_value = "pbt_identity")]
        out: String,
        /// Duality-gap tolerance of the joint SDP.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Optimize { config, seed, iters, out } => cmd_optimize(&config, seed, iters, out),
        Command::Diamond { channel_a, channel_b, tol } => cmd_diamond(&channel_a, &channel_b, tol),
        Command::Sweep { ports, out, tol } => cmd_sweep(&ports, &out, tol),
    };
    if let Err(err) = outcome {
        let code = if err.to_string().contains("configuration") { "invalid_config" } else { "runtime_error" };
        let payload = json!({ "error": code, "message": format!("{err:#}") });
        eprintln!("{payload}");
        std::process::exit(2);
    }
}

fn parse_channel(text: &str) -> Result<ChannelSpec> {
    let body = match text.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => text.to_string(),
    };
    let spec: ChannelSpec =
        serde_json::from_str(&body).context("invalid configuration: channel spec")?;
    Ok(spec)
}

/// The natural tensor-power/identity baseline program for processors whose
/// program space can hold the target's Choi matrix directly.
fn choi_baseline(spec: &ProcessorSpec, target: &ChoiMatrix) -> Option<DensityOperator> {
    match spec {
        ProcessorSpec::Teleport { d } if target.dim() == d * d => {
            Some(target.density().clone())
        }
        ProcessorSpec::Pbt { n_ports, .. } => choi_power_program(target, *n_ports).ok(),
        ProcessorSpec::PbtReduced { .. } => Some(target.density().clone()),
        _ => None,
    }
}

fn run_optimizer(
    method: &Method,
    cost: &CostFunction,
    init: &DensityOperator,
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    let trace = match method {
        Method::Ps => projected_subgradient(cost, init, cfg),
        Method::Fw => frank_wolfe(cost, init, cfg),
        Method::FwLs => frank_wolfe_linesearch(cost, init, cfg),
        Method::SmoothedFw => stochastic_smoothing_fw(cost, init, cfg),
    }?;
    Ok(trace)
}

struct RunResult {
    best_cost: f64,
    baseline_c1: Option<f64>,
    best_c1: f64,
    trace: OptimizerTrace,
    processor: Arc<ProcessorMap>,
    target: ChoiMatrix,
}

fn run_point(config: &ExperimentConfig, channel: &ChannelSpec, seed: u64) -> Result<RunResult> {
    let kraus = channel.build().context("invalid configuration: channel")?;
    let target = choi_from_kraus(&kraus).context("building target Choi matrix")?;
    let processor =
        Arc::new(config.processor.build().context("invalid configuration: processor")?);
    let cost = CostFunction::new(processor.clone(), target.clone(), config.cost.kind())
        .context("invalid configuration: cost")?;
    let c1 = trace_cost(processor.clone(), target.clone())?;

    let baseline = choi_baseline(&config.processor, &target);
    let baseline_c1 = baseline.as_ref().map(|b| c1.eval(b)).transpose()?;
    let init = baseline
        .clone()
        .unwrap_or_else(|| DensityOperator::maximally_mixed(processor.program_dim()));

    let mut cfg = config.optimizer.build(target.d_in());
    cfg.seed = seed;
    if matches!(config.cost, CostSpec::Trace)
        && matches!(config.optimizer.method, Method::Fw | Method::FwLs)
    {
        bail!("invalid configuration: Frank-Wolfe needs a differentiable cost (infidelity or smooth_trace)");
    }
    let trace = run_optimizer(&config.optimizer.method, &cost, &init, &cfg)?;
    let best_c1 = c1.eval(&trace.best_program)?;
    Ok(RunResult {
        best_cost: trace.best_cost,
        baseline_c1,
        best_c1,
        trace,
        processor,
        target,
    })
}

fn cmd_optimize(
    path: &PathBuf,
    seed: Option<u64>,
    iters: Option<usize>,
    out: Option<String>,
) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("invalid configuration: cannot read {}", path.display()))?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).context("invalid configuration: parse error")?;
    if let Some(s) = seed {
        config.optimizer.seed = s;
    }
    if let Some(n) = iters {
        config.optimizer.iterations = n;
    }
    let prefix = out
        .or_else(|| config.output_path.clone())
        .unwrap_or_else(|| "qproc_run".to_string());
    if let Some(dir) = std::path::Path::new(&prefix).parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let started = Instant::now();

    match &config.sweep {
        None => {
            let result = run_point(&config, &config.channel.clone(), config.optimizer.seed)?;
            let trace_path = format!("{prefix}_trace.csv");
            let mut f = fs::File::create(&trace_path)?;
            result.trace.to_csv_deterministic(&mut f)?;

            let program_path = format!("{prefix}_program.json");
            let program = MatrixJson::from_matrix(result.trace.best_program.matrix());
            fs::write(&program_path, serde_json::to_string_pretty(&program)?)?;

            let bounds = bound_report(&result.processor, &result.target, &result.trace.best_program)?;
            let bounds_path = format!("{prefix}_bounds.json");
            fs::write(&bounds_path, serde_json::to_string_pretty(&bounds)?)?;

            write_meta(&prefix, &config, started, Some(&result.trace))?;
            println!(
                "{}",
                json!({
                    "best_cost": result.best_cost,
                    "best_c1": result.best_c1,
                    "baseline_c1": result.baseline_c1,
                    "iterations": result.trace.records.len() - 1,
                    "outputs": [trace_path, program_path, bounds_path],
                })
            );
        }
        Some(sweep) => {
            let points: Vec<(usize, ChannelSpec)> = sweep
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| Ok((i, channel_with_param(&config.channel, &sweep.param, v)?)))
                .collect::<Result<_>>()?;
            let base_seed = config.optimizer.seed;
            let mut rows: Vec<(usize, f64, Option<f64>)> = Vec::new();
            std::thread::scope(|scope| -> Result<()> {
                let mut handles = Vec::new();
                for (i, spec) in &points {
                    let config = &config;
                    let i = *i;
                    let spec = spec.clone();
                    handles.push((
                        i,
                        scope.spawn(move || run_point(config, &spec, base_seed + i as u64)),
                    ));
                }
                for (i, h) in handles {
                    let res = h.join().map_err(|_| anyhow!("sweep worker panicked"))??;
                    rows.push((i, res.best_c1, res.baseline_c1));
                }
                Ok(())
            })?;
            rows.sort_by_key(|r| r.0);
            let csv_path = format!("{prefix}_sweep.csv");
            let mut f = fs::File::create(&csv_path)?;
            writeln!(f, "{},c1_optimized,c1_choi_program", sweep.param)?;
            for (i, best, baseline) in &rows {
                let baseline = baseline.map(|b| format!("{b:.12e}")).unwrap_or_default();
                writeln!(f, "{:.6},{:.12e},{}", sweep.values[*i], best, baseline)?;
            }
            write_meta(&prefix, &config, started, None)?;
            println!(
                "{}",
                json!({ "points": rows.len(), "outputs": [csv_path] })
            );
        }
    }
    Ok(())
}

fn write_meta(
    prefix: &str,
    config: &ExperimentConfig,
    started: Instant,
    trace: Option<&OptimizerTrace>,
) -> Result<()> {
    let meta = json!({
        "config": config,
        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
        "wall_ms_per_iteration": trace.map(|t| t.records.iter().map(|r| r.wall_ms).collect::<Vec<_>>()),
    });
    fs::write(format!("{prefix}_meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn channel_choi(ch: &KrausChannel) -> Result<ChoiMatrix> {
    Ok(choi_from_kraus(ch)?)
}

fn cmd_diamond(a: &str, b: &str, tol: f64) -> Result<()> {
    let ch_a = parse_channel(a)?.build().context("invalid configuration: channel-a")?;
    let ch_b = parse_channel(b)?.build().context("invalid configuration: channel-b")?;
    if ch_a.d_in() != ch_b.d_in() || ch_a.d_out() != ch_b.d_out() {
        bail!("invalid configuration: channels have different dimensions");
    }
    let chi_a = channel_choi(&ch_a)?;
    let chi_b = channel_choi(&ch_b)?;
    let delta = HermitianOperator::new(chi_a.matrix() - chi_b.matrix())?;
    let c1 = qproc::linalg::trace_norm(delta.matrix())?;
    let sol = diamond_distance(&delta, chi_a.d_in(), tol)?;
    let f = fidelity(chi_a.density(), chi_b.density())?;
    let spectral = qproc::sdp::spectral_diamond_upper(&chi_a, &chi_b)?;
    let report = json!({
        "diamond": sol.objective,
        "duality_gap": sol.duality_gap,
        "trace": c1,
        "fidelity": f,
        "bounds": {
            "diamond_lower_c1": c1,
            "diamond_upper_d_c1": chi_a.d_in() as f64 * c1,
            "spectral_upper": spectral,
            "fuchs_van_de_graaf": 2.0 * (1.0 - f * f).max(0.0).sqrt(),
        },
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_sweep(ports: &str, out: &str, tol: f64) -> Result<()> {
    let ns: Vec<usize> = ports
        .split(',')
        .map(|t| t.trim().parse::<usize>().context("invalid configuration: port list"))
        .collect::<Result<_>>()?;
    if ns.is_empty() {
        bail!("invalid configuration: empty port list");
    }
    let started = Instant::now();
    let chi_id = choi_from_kraus(&qproc::channels::identity_channel(2)?)?;
    let mut rows: Vec<(usize, f64, f64, f64, SdpSolutionJson)> = Vec::new();
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for &n in &ns {
            let chi_id = chi_id.clone();
            handles.push((
                n,
                scope.spawn(move || -> Result<(f64, f64, SdpSolutionJson)> {
                    let proc = qproc::processors::pbt_reduced_processor(n, 2)?;
                    let fixed_out = hermitize(&proc.apply_raw(chi_id.matrix())?);
                    let omega = HermitianOperator::new(chi_id.matrix() - fixed_out)?;
                    let at_choi = diamond_distance(&omega, 2, tol)?.objective;
                    let sol = optimal_program_sdp(&proc, &chi_id, tol, ProgramConstraint::ChoiSet)?;
                    let summary = SdpSolutionJson::from_solution(&sol);
                    Ok((at_choi, sol.objective, summary))
                }),
            ));
        }
        for (n, h) in handles {
            let (at_choi, optimized, summary) =
                h.join().map_err(|_| anyhow!("sweep worker panicked"))??;
            rows.push((n, at_choi, optimized, 4.0 / n as f64, summary));
        }
        Ok(())
    })?;
    rows.sort_by_key(|r| r.0);

    if let Some(dir) = std::path::Path::new(out).parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let csv_path = format!("{out}.csv");
    let mut f = fs::File::create(&csv_path)?;
    writeln!(f, "n_ports,c_diamond_choi_program,c_diamond_optimized,bound_4_over_n")?;
    for (n, at_choi, optimized, bound, _) in &rows {
        writeln!(f, "{n},{at_choi:.12e},{optimized:.12e},{bound:.12e}")?;
    }
    let meta = json!({
        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
        "tol": tol,
        "solutions": rows.iter().map(|(n, _, _, _, s)| json!({"n_ports": n, "sdp": s})).collect::<Vec<_>>(),
    });
    fs::write(format!("{out}_meta.json"), serde_json::to_string_pretty(&meta)?)?;
    println!("{}", json!({ "points": rows.len(), "outputs": [csv_path] }));
    Ok(())
}
