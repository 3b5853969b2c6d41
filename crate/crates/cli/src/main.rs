//! `tpng`: batch runs, reaching-law comparison and offline log validation.
//!
//! Exit codes: 0 success, 1 run aborted, 2 configuration or input error,
//! 3 check failed.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;

use tpng_core::checks::{run_checks, CheckLimits, CheckStatus};
use tpng_core::guidance::{diagnose, reaching_times, ReachingLaw};
use tpng_core::plot::{render_plots, PlotRun};
use tpng_core::trajectory_io::{read_trajectory_csv, write_trajectory_csv};
use tpng_core::{load_scenario, Scenario, ScenarioSpec, SimResult, TrajectoryLog};

use report::{print_table, write_summary_csv, SummaryRow};

const DEFAULT_OUT_ROOT: &str = "tpng-out";

#[derive(Parser)]
#[command(name = "tpng", version, about = "Impact-time guidance engagement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (or every point of its sweep) and write trajectories.
    Run(RunArgs),
    /// Run the standard and exponential reaching laws on the same scenario.
    Compare(RunArgs),
    /// Replay the invariant checks on a trajectory CSV.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Standard,
    Exponential,
}

impl From<VariantArg> for ReachingLaw {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Standard => ReachingLaw::Standard,
            VariantArg::Exponential => ReachingLaw::Exponential,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML file; the baseline engagement when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory. Defaults to `$TPNG_OUT/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root for default output directories.
    #[arg(long, env = "TPNG_OUT", default_value = DEFAULT_OUT_ROOT, hide_env_values = true)]
    out_root: PathBuf,
    /// Single impact time [s], replacing the sweep axis.
    #[arg(long)]
    td: Option<f64>,
    /// Integration step [s].
    #[arg(long)]
    dt: Option<f64>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "on")]
    plots: Toggle,
    /// Reaching law (ignored by `compare`).
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Trajectory CSV written by `tpng run`.
    csv: PathBuf,
    /// Scenario the log came from, for bounds and alpha; baseline otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Allowed relative deviation of the fitted error decay from alpha.
    #[arg(long, default_value_t = 0.05)]
    decay_tolerance: f64,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Abort(anyhow::Error),
    Config(anyhow::Error),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Abort(_) => 1,
            Failure::Config(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn core_err(e: tpng_core::Error) -> Failure {
    if e.is_config_error() {
        Failure::Config(e.into())
    } else {
        Failure::Abort(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Validate(args) => cmd_validate(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Abort(e) => eprintln!("error: run aborted: {e:#}"),
                Failure::Config(e) => eprintln!("error: {e:#}"),
                Failure::Check(msg) => eprintln!("check failed: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load_spec(args: &RunArgs) -> Result<ScenarioSpec, Failure> {
    let mut spec = match &args.config {
        Some(path) => load_scenario(path)
            .with_context(|| format!("loading {}", path.display()))
            .map_err(Failure::Config)?,
        None => ScenarioSpec::default(),
    };
    if let Some(td) = args.td {
        spec = spec.with_impact_time(td).map_err(config_err)?;
    }
    if let Some(dt) = args.dt {
        spec = spec.with_dt(dt).map_err(config_err)?;
    }
    if let Some(v) = args.variant {
        spec = spec.with_variant(v.into());
    }
    Ok(spec)
}

fn out_dir(args: &RunArgs, spec: &ScenarioSpec) -> PathBuf {
    match &args.out {
        Some(p) => p.clone(),
        None => args
            .out_root
            .join(spec.output_dir.clone().unwrap_or_else(|| PathBuf::from(&spec.name))),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Abort(anyhow!(e)))
}

struct Outcome {
    scenario: Scenario,
    result: tpng_core::Result<(SimResult, TrajectoryLog)>,
}

/// Runs every scenario in parallel and writes each trajectory to
/// `<out>/<label>/trajectory.csv`.
fn execute(runs: Vec<Scenario>, out: &Path, jobs: usize) -> Result<Vec<Outcome>, Failure> {
    let outcomes: Vec<Outcome> = pool(jobs)?.install(|| {
        runs.into_par_iter()
            .map(|scenario| {
                let result = tpng_core::run(&scenario);
                Outcome { scenario, result }
            })
            .collect()
    });
    for o in &outcomes {
        if let Ok((_, log)) = &o.result {
            let path = out.join(&o.scenario.label).join("trajectory.csv");
            write_trajectory_csv(log, &path)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(Failure::Abort)?;
            info!("wrote {}", path.display());
        }
    }
    Ok(outcomes)
}

fn summarize(outcomes: &[Outcome]) -> Vec<SummaryRow> {
    outcomes
        .iter()
        .filter_map(|o| {
            let (res, _) = o.result.as_ref().ok()?;
            Some(SummaryRow::new(&o.scenario, res))
        })
        .collect()
}

fn plot(outcomes: &[Outcome], dir: &Path) -> Result<(), Failure> {
    let runs: Vec<PlotRun<'_>> = outcomes
        .iter()
        .filter_map(|o| {
            let (_, log) = o.result.as_ref().ok()?;
            Some(PlotRun {
                label: &o.scenario.label,
                log,
                a_min: o.scenario.saturation.a_min,
                a_max: o.scenario.saturation.a_max,
            })
        })
        .collect();
    if runs.is_empty() {
        return Ok(());
    }
    render_plots(&runs, dir)
        .with_context(|| format!("writing plots to {}", dir.display()))
        .map_err(Failure::Abort)?;
    Ok(())
}

fn first_abort(outcomes: &[Outcome]) -> Result<(), Failure> {
    let mut failure = None;
    for o in outcomes {
        if let Err(e) = &o.result {
            eprintln!("{}: {e}", o.scenario.label);
            if failure.is_none() {
                failure = Some(anyhow!("{}: {e}", o.scenario.label));
            }
        }
    }
    match failure {
        Some(e) => Err(Failure::Abort(e)),
        None => Ok(()),
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let spec = load_spec(args)?;
    let out = out_dir(args, &spec);
    let outcomes = execute(spec.expand(), &out, args.jobs)?;
    let rows = summarize(&outcomes);
    write_summary_csv(&rows, &out.join("summary.csv")).map_err(Failure::Abort)?;
    if args.plots == Toggle::On {
        plot(&outcomes, &out.join("plots"))?;
    }
    print_table(&rows);
    println!("output: {}", out.display());
    first_abort(&outcomes)
}

fn cmd_compare(args: &RunArgs) -> Result<(), Failure> {
    let base = load_spec(args)?;
    if base.sweep.len() != 1 {
        return Err(Failure::Config(anyhow!(
            "compare needs a single-run scenario; the sweep has {} runs",
            base.sweep.len()
        )));
    }
    let out = out_dir(args, &base);
    let runs: Vec<Scenario> = [ReachingLaw::Standard, ReachingLaw::Exponential]
        .into_iter()
        .map(|v| {
            let mut s = base.clone().with_variant(v).expand().remove(0);
            s.label = v.to_string();
            s
        })
        .collect();

    let launch = &runs[1];
    let rel = launch.initial.relative().map_err(core_err)?;
    let diag = diagnose(
        &launch.initial,
        &rel,
        &launch.guidance,
        &launch.saturation,
        &launch.config.guards,
    )
    .map_err(core_err)?;
    let (t_r1, t_r2) = reaching_times(diag.s_val, &launch.guidance);

    let outcomes = execute(runs, &out, args.jobs)?;
    first_abort(&outcomes)?;
    let rows = summarize(&outcomes);
    write_summary_csv(&rows, &out.join("summary.csv")).map_err(Failure::Abort)?;
    if args.plots == Toggle::On {
        plot(&outcomes, &out.join("plots"))?;
    }

    println!("{:<12} {:>22} {:>26}", "reaching", "convergence time [s]", "control effort [m^2/s^3]");
    for r in &rows {
        println!(
            "{:<12} {:>22} {:>26.4}",
            r.label,
            r.convergence_time.map_or("-".to_string(), |t| format!("{t:.3}")),
            r.control_effort_j
        );
    }
    println!(
        "analytic reaching time at S(0) = {:.6}: t_r1 = {t_r1:.4} s, t_r2 = {t_r2:.4} s",
        diag.s_val
    );
    println!("output: {}", out.display());

    let (std, exp) = (&rows[0], &rows[1]);
    for r in &rows {
        if !r.intercepted {
            return Err(Failure::Check(format!("{} run did not intercept", r.label)));
        }
    }
    match (exp.convergence_time, std.convergence_time) {
        (Some(te), Some(ts)) if te <= ts => Ok(()),
        (Some(te), Some(ts)) => Err(Failure::Check(format!(
            "exponential convergence {te:.3} s is slower than standard {ts:.3} s"
        ))),
        _ => Err(Failure::Check("a variant never converged".into())),
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let spec = match &args.config {
        Some(path) => load_scenario(path)
            .with_context(|| format!("loading {}", path.display()))
            .map_err(Failure::Config)?,
        None => ScenarioSpec::default(),
    };
    let rows = read_trajectory_csv(&args.csv)
        .with_context(|| format!("reading {}", args.csv.display()))
        .map_err(Failure::Config)?;
    let limits = CheckLimits {
        a_min: spec.saturation.a_min,
        a_max: spec.saturation.a_max,
        alpha: spec.guidance.surface_gain,
        reaching_gain: spec.guidance.reaching_gain,
        decay_tolerance: args.decay_tolerance,
    };
    let reports = run_checks(&rows, &limits);
    for r in &reports {
        println!("{:<5} {:<17} {}", r.status, r.name, r.detail);
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| r.status == CheckStatus::Fail)
        .map(|r| r.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}
