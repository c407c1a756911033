use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use rig_core::graph::clustering_estimate;
use rig_core::harness::{
    compare_with_limit, emit, identity_suite, limit_ensemble, ranking_consistency, run_discrete, ExperimentConfig,
    ReportSummary,
};
use rig_core::limit::{height_from_z, rank_excursions, regime_from_index, LimitParams, ZSampler};
use rig_core::rng::replicate_rng;
use rig_core::weights::{Color, CriticalPair, Regime, WeightSpec};

#[derive(Parser)]
#[command(name = "rig", about = "Critical random intersection graphs: simulation and limit comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Output directory; defaults to the configured one, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::load(&self.config).with_context(|| format!("reading {}", self.config.display()))?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        cfg.validate()?;
        let out = self.out.clone().or_else(|| cfg.out_dir.clone().map(PathBuf::from)).unwrap_or_else(|| "out".into());
        Ok((cfg, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Replicated discrete runs; writes components.csv and summary.json.
    Simulate(RunArgs),
    /// Ensemble of tilted limit paths; writes paths.csv and excursions.csv.
    Limit(LimitArgs),
    /// Discrete runs against a limit ensemble, with a wrong-scaling control.
    Compare(RunArgs),
    /// Exact identity suite on random small instances.
    Check {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clustering coefficient of homogeneous intersection graphs.
    Clustering {
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        graphs: usize,
        #[arg(long, default_value_t = 100_000)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Allowed absolute error against the limit value.
        #[arg(long, default_value_t = 0.03)]
        tolerance: f64,
    },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = 1)]
    regime: u8,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    /// Tail constant of the black law (regimes 2 and 3).
    #[arg(long, default_value_t = 1.0)]
    c_b: f64,
    /// Tail constant of the white law (regime 3).
    #[arg(long, default_value_t = 1.0)]
    c_w: f64,
    #[arg(long, default_value_t = 10.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 100)]
    paths: usize,
    /// Height estimator level (regimes 2 and 3).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Keep every `stride`-th grid point in paths.csv.
    #[arg(long, default_value_t = 10)]
    stride: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn limit_params(args: &LimitArgs) -> Result<LimitParams> {
    let regime = regime_from_index(args.regime)?;
    Ok(match regime {
        Regime::ThirdMoments => LimitParams::unit(args.theta)?,
        _ => LimitParams::heavy(regime, args.theta, 1.0, 1.0, args.alpha, args.c_b, args.c_w)?,
    })
}

fn run_limit(args: &LimitArgs) -> Result<bool> {
    let params = limit_params(args)?;
    let sampler = ZSampler::new(&params, args.horizon, args.step, None)?;
    let stride = args.stride.max(1);
    let results: Vec<_> = (0..args.paths)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let mut rng = replicate_rng(args.seed, k as u64);
            let z = sampler.sample(&mut rng)?;
            let h = height_from_z(&z, &params, args.epsilon)?;
            Ok((z, h))
        })
        .collect::<Result<_>>()?;
    std::fs::create_dir_all(&args.out)?;
    let mut paths = csv::Writer::from_path(args.out.join("paths.csv"))?;
    paths.write_record(["path", "t", "z", "height"])?;
    let mut exc = csv::Writer::from_path(args.out.join("excursions.csv"))?;
    exc.write_record(["path", "rank", "start", "end", "length", "complete", "near_tie"])?;
    let mut warned = false;
    for (k, (z, h)) in results.iter().enumerate() {
        if let (Some(w), false) = (&h.warning, warned) {
            eprintln!("warning: {w}");
            warned = true;
        }
        for i in (0..z.len()).step_by(stride) {
            paths.write_record([k.to_string(), z.time(i).to_string(), z.values[i].to_string(), h.path.values[i].to_string()])?;
        }
        for (r, e) in rank_excursions(z).iter().enumerate() {
            exc.write_record([
                k.to_string(),
                (r + 1).to_string(),
                e.start.to_string(),
                e.end.to_string(),
                e.length.to_string(),
                e.complete.to_string(),
                e.near_tie.to_string(),
            ])?;
        }
    }
    paths.flush()?;
    exc.flush()?;
    println!("wrote {} paths to {}", args.paths, args.out.display());
    Ok(true)
}

fn run_compare(args: &RunArgs) -> Result<bool> {
    let (cfg, out) = args.load()?;
    let report = run_discrete(&cfg)?;
    let params = LimitParams::from_pair(&cfg.pair)?;
    let settings = rig_core::harness::LimitSettings { paths: report.replicates.len(), ..cfg.limit.clone() };
    let ensemble = limit_ensemble(&params, &settings, cfg.top_k)?;
    let comparisons = compare_with_limit(&report, &ensemble, None)?;
    let control = compare_with_limit(&report, &ensemble, Some(0.5))?;
    let ranking = ranking_consistency(&report, 1)?;
    let mut ok = true;
    for c in &comparisons {
        println!("top-{}: KS(y) = {:.4}, KS(x) = {:.4}, threshold {} -> {}", c.k, c.ks_y, c.ks_x, c.threshold, verdict(c.pass));
        ok &= c.pass;
    }
    for c in &control {
        let rejected = c.ks_y > 0.2;
        println!("control top-{}: KS(y) = {:.4} must exceed 0.2 -> {}", c.k, c.ks_y, verdict(rejected));
        ok &= rejected;
    }
    let rho = params.rho();
    let ratio_ok = (ranking.ratio_mean / rho - 1.0).abs() <= 0.05;
    println!("ranking agreement {:.4} (>= 0.9) -> {}", ranking.agreement, verdict(ranking.agreement >= 0.9));
    println!("x/y ratio {:.4} ± {:.4} vs ρ = {rho:.4} -> {}", ranking.ratio_mean, ranking.ratio_half_width, verdict(ratio_ok));
    ok &= ranking.agreement >= 0.9 && ratio_ok;
    let mut summary = ReportSummary::new(&report)?;
    summary.comparisons = comparisons;
    summary.ranking = Some(ranking);
    emit(&summary, &out)?;
    Ok(ok)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(args) => {
            let (cfg, out) = args.load()?;
            let report = run_discrete(&cfg)?;
            if report.partial {
                eprintln!("warning: vertex budget reached after {} replicates", report.replicates.len());
            }
            let summary = ReportSummary::new(&report)?;
            emit(&summary, &out)?;
            println!("{} replicates, {} without components, hash {}", report.replicates.len(), report.empty_replicates, summary.hash);
            Ok(!report.partial)
        }
        Command::Limit(args) => run_limit(&args),
        Command::Compare(args) => run_compare(&args),
        Command::Check { instances, seed, out } => {
            let report = identity_suite(instances, seed);
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("identities.json"), serde_json::to_string_pretty(&report)?)?;
            }
            Ok(report.violations() == 0)
        }
        Command::Clustering { theta, n, graphs, replicates, seed, tolerance } => {
            let one = |c| WeightSpec::point_mass(1.0, c);
            let pair = CriticalPair::new(one(Color::Black)?, one(Color::White)?, theta, n)?;
            let est = clustering_estimate(&pair, graphs, replicates, seed)?;
            let target = 1.0 / (1.0 + theta.sqrt());
            let Some(value) = est.value else { bail!("no wedges in the sampled graphs") };
            let pass = (value - target).abs() <= tolerance;
            println!("clustering {value:.4} ± {:.4} vs {target:.4} -> {}", est.std_error, verdict(pass));
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
