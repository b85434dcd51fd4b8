//! `spinforge` — synthesize, verify, and stress-test pulse schedules that
//! steer a single excitation into a target state on an XX spin network.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spinforge_core::{
    coupling_bounds_check, custom_profile_from_file, evolve_virtual_closed_form, fidelity,
    formats, gaussian_state_profile, propagate_full, sample_evolution, synthesize, target_state,
    tolerance_threshold, w_state_profile, FidelityCurve, ProfileFamily, SingleExcitationState,
    SiteProbabilityProfile, SweepContext,
};

/// Engine agreement and verification fidelity gates; a verified schedule
/// must generate its target to better than one part in 10⁹.
const FIDELITY_GATE: f64 = 1e-9;
const ENGINE_GATE: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "spinforge",
    version,
    about = "Exact pulse-schedule synthesis for single-excitation state generation",
    after_help = "Set SPINFORGE_THREADS to cap sweep parallelism (output is identical either way)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a schedule for a target profile and write it as JSON.
    Synth(SynthArgs),
    /// Re-simulate a schedule with both engines and check it against a target.
    Verify(VerifyArgs),
    /// Fidelity versus accumulated pulse-timing error, as CSV.
    Sweep(SweepArgs),
    /// Tolerance thresholds across chain sizes, as CSV.
    Scaling(ScalingArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StateKind {
    W,
    Gaussian,
    File,
}

#[derive(Args)]
struct TargetSpec {
    /// Target profile family.
    #[arg(long, value_enum)]
    state: StateKind,
    /// Number of virtual chains N (the network has 2N sites).
    #[arg(long)]
    n: Option<usize>,
    /// Gaussian width σ (gaussian only).
    #[arg(long)]
    sigma: Option<f64>,
    /// Profile file: one probability per line or comma-separated, `#` comments.
    #[arg(long)]
    profile: Option<PathBuf>,
}

impl TargetSpec {
    fn build(&self) -> Result<SiteProbabilityProfile> {
        match self.state {
            StateKind::W => {
                let n = self.n.context("--state w requires --n")?;
                Ok(w_state_profile(n)?)
            }
            StateKind::Gaussian => {
                let n = self.n.context("--state gaussian requires --n")?;
                let sigma = self.sigma.context("--state gaussian requires --sigma")?;
                Ok(gaussian_state_profile(n, sigma)?)
            }
            StateKind::File => {
                let path = self
                    .profile
                    .as_ref()
                    .context("--state file requires --profile")?;
                Ok(custom_profile_from_file(path)
                    .with_context(|| format!("reading profile {}", path.display()))?)
            }
        }
    }

    fn family(&self) -> Result<ProfileFamily> {
        match self.state {
            StateKind::W => Ok(ProfileFamily::W),
            StateKind::Gaussian => Ok(ProfileFamily::Gaussian {
                sigma: self.sigma.context("--state gaussian requires --sigma")?,
            }),
            StateKind::File => bail!("scaling sweeps need a size-indexed family: use w or gaussian"),
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    target: TargetSpec,
    /// Free coupling scale J₁; all times come out in units of 1/J₁.
    #[arg(long, default_value_t = 1.0)]
    j1: f64,
    /// Output path for the schedule JSON.
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV with columns k,coupling,interval,tail (plot-ready).
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Schedule JSON produced by `synth`.
    #[arg(long)]
    schedule: PathBuf,
    /// Optional target to check fidelity against.
    #[arg(long, value_enum)]
    target: Option<StateKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Per-site probability table CSV.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Full evolution trace CSV (time, p1..p2N).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Samples per pulse interval for --trace.
    #[arg(long, default_value_t = 20)]
    trace_samples: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    target: TargetSpec,
    #[arg(long, default_value_t = 1.0)]
    j1: f64,
    /// Largest scaled error J₁ε on the grid.
    #[arg(long)]
    eps_max: f64,
    /// Number of grid points; the grid spans [0, eps-max] inclusive, and
    /// steps = 1 evaluates only ε = 0.
    #[arg(long)]
    steps: usize,
    /// Fidelity level F* for the reported threshold.
    #[arg(long, default_value_t = 0.99)]
    fidelity: f64,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    /// Comma-separated chain sizes, e.g. 10,20,40.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Target family (w or gaussian).
    #[arg(long, value_enum)]
    state: StateKind,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    j1: f64,
    #[arg(long, default_value_t = 0.99)]
    fidelity: f64,
    /// Grid steps per size.
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    init_thread_pool()?;
    match Cli::parse().command {
        Command::Synth(args) => synth(args),
        Command::Verify(args) => verify(args),
        Command::Sweep(args) => sweep(args),
        Command::Scaling(args) => scaling(args),
    }
}

fn init_thread_pool() -> Result<()> {
    if let Ok(raw) = std::env::var("SPINFORGE_THREADS") {
        let threads: usize = raw
            .parse()
            .with_context(|| format!("SPINFORGE_THREADS must be a positive integer, got {raw:?}"))?;
        if threads == 0 {
            bail!("SPINFORGE_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("building thread pool")?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let profile = args.target.build()?;
    let schedule = synthesize(&profile, args.j1)?;
    let bounds = coupling_bounds_check(&schedule);
    let predicted = evolve_virtual_closed_form(&schedule)?;

    formats::write_schedule(&args.out, &schedule)?;
    if let Some(path) = &args.emit {
        formats::write_atomic(path, &formats::schedule_table_csv(&schedule))?;
    }

    println!("schedule: N = {}, J1 = {}", schedule.size().n(), schedule.j1());
    println!("total time: {:.6} (units of 1/J1)", schedule.total_time());
    println!("{:>4} {:>14} {:>14} {:>14}", "k", "J_k", "t_k", "tau_k");
    for k in 0..schedule.size().n() {
        println!(
            "{:>4} {:>14.8} {:>14.8} {:>14.8}",
            k + 1,
            schedule.couplings().values()[k],
            schedule.intervals()[k],
            schedule.tails()[k],
        );
    }
    println!(
        "coupling bounds: {}",
        if bounds.pass { "pass" } else { "FAIL" }
    );
    println!("predicted site probabilities:");
    for (site, p) in predicted.probabilities().iter().enumerate() {
        println!("{:>4} {:>14.10}", site + 1, p);
    }
    println!("schedule written to {}", args.out.display());

    if !bounds.pass {
        bail!("synthesized couplings violate the boundedness guarantee");
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let schedule = formats::read_schedule(&args.schedule)
        .with_context(|| format!("reading schedule {}", args.schedule.display()))?;
    let initial = SingleExcitationState::basis_state(schedule.size(), 1)?;

    let closed = evolve_virtual_closed_form(&schedule)?;
    let dense = propagate_full(schedule.couplings(), schedule.intervals(), true, &initial)?;
    let engine_dev = closed
        .amplitudes()
        .iter()
        .zip(dense.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let bounds = coupling_bounds_check(&schedule);

    let mut columns: Vec<(&str, Vec<f64>)> = vec![
        ("closed_form", closed.probabilities()),
        ("propagated", dense.probabilities()),
    ];

    let mut target_fidelity = None;
    if let Some(kind) = args.target {
        let spec = TargetSpec {
            state: kind,
            n: args.n,
            sigma: args.sigma,
            profile: args.profile.clone(),
        };
        let profile = spec.build()?;
        if profile.size() != schedule.size() {
            bail!(
                "target has N = {} but schedule has N = {}",
                profile.size().n(),
                schedule.size().n()
            );
        }
        let target = target_state(&profile)?;
        let corrected = dense.apply_phases(schedule.phases())?;
        target_fidelity = Some(fidelity(&target, &corrected)?);
        columns.push(("target", profile.values().to_vec()));
    }

    // Emit files before any bulk stdout so a closed pipe can't cut the
    // command short of its outputs.
    if let Some(path) = &args.emit {
        let borrowed: Vec<(&str, &[f64])> = columns
            .iter()
            .map(|(name, values)| (*name, values.as_slice()))
            .collect();
        formats::write_atomic(path, &formats::probability_table_csv(&borrowed))?;
    }
    if let Some(path) = &args.trace {
        let trace = sample_evolution(
            schedule.couplings(),
            schedule.intervals(),
            args.trace_samples,
            &initial,
        )?;
        formats::write_atomic(path, &formats::trace_csv(&trace))?;
    }

    println!("schedule: N = {}, J1 = {}", schedule.size().n(), schedule.j1());
    println!("engine agreement: max amplitude deviation {engine_dev:.3e}");
    println!(
        "coupling bounds: {}",
        if bounds.pass { "pass" } else { "FAIL" }
    );
    let fidelity_ok = match target_fidelity {
        Some(f) => {
            let ok = f >= 1.0 - FIDELITY_GATE;
            println!(
                "fidelity to target after phase corrections: {f:.12} ({})",
                if ok { "pass" } else { "FAIL" }
            );
            ok
        }
        None => true,
    };

    println!("{:>4} {:>14} {:>14}", "site", "closed_form", "propagated");
    for site in 0..schedule.size().sites() {
        println!(
            "{:>4} {:>14.10} {:>14.10}",
            site + 1,
            columns[0].1[site],
            columns[1].1[site]
        );
    }

    if engine_dev > ENGINE_GATE {
        bail!("engines deviate by {engine_dev:.3e} (gate {ENGINE_GATE:.0e})");
    }
    if !bounds.pass {
        bail!("couplings violate the boundedness guarantee");
    }
    if !fidelity_ok {
        bail!("fidelity below 1 - {FIDELITY_GATE:.0e}");
    }
    Ok(())
}

/// Evaluate the sweep grid in parallel; values and order are identical to
/// the serial loop because every point is independent and collected in
/// grid order.
fn parallel_curve(
    ctx: &SweepContext,
    grid: &[f64],
    n: usize,
    label: String,
) -> Result<FidelityCurve> {
    use rayon::prelude::*;
    let points = grid
        .par_iter()
        .map(|&eps| ctx.fidelity_at(eps).map(|f| (eps, f)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(FidelityCurve { label, n, points })
}

fn sweep(args: SweepArgs) -> Result<()> {
    if args.steps == 0 {
        bail!("--steps must be at least 1");
    }
    if args.eps_max <= 0.0 || !args.eps_max.is_finite() {
        bail!("--eps-max must be positive");
    }
    let profile = args.target.build()?;
    let n = profile.size().n();
    let grid: Vec<f64> = if args.steps == 1 {
        vec![0.0]
    } else {
        (0..args.steps)
            .map(|i| args.eps_max * i as f64 / (args.steps - 1) as f64)
            .collect()
    };
    let ctx = SweepContext::new(&profile, args.j1)?;
    let curve = parallel_curve(&ctx, &grid, n, format!("N={n}"))?;
    let threshold = tolerance_threshold(&curve, args.fidelity)?;
    let csv = formats::curve_csv(&curve, Some((args.fidelity, threshold)));
    match &args.out {
        Some(path) => formats::write_atomic(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn scaling(args: ScalingArgs) -> Result<()> {
    if args.steps == 0 {
        bail!("--steps must be at least 1");
    }
    let family = TargetSpec {
        state: args.state,
        n: None,
        sigma: args.sigma,
        profile: None,
    }
    .family()?;
    let mut rows = Vec::with_capacity(args.n.len());
    for &n in &args.n {
        let profile = family.profile(n)?;
        let grid = spinforge_core::sensitivity::scaling_grid(n, args.steps);
        let ctx = SweepContext::new(&profile, args.j1)?;
        let curve = parallel_curve(&ctx, &grid, n, family.label())?;
        let th = tolerance_threshold(&curve, args.fidelity)?;
        rows.push(spinforge_core::ScalingRow {
            n,
            eps_star: th.eps_star,
            n_times_eps_star: n as f64 * th.eps_star,
            unbounded: th.unbounded,
        });
    }
    let products: Vec<f64> = rows.iter().map(|r| r.n_times_eps_star).collect();
    let ratio = products.iter().cloned().fold(f64::MIN, f64::max)
        / products.iter().cloned().fold(f64::MAX, f64::min);
    let report = spinforge_core::SensitivityReport {
        f_star: args.fidelity,
        rows,
        product_ratio: ratio,
    };
    let csv = formats::scaling_csv(&report);
    match &args.out {
        Some(path) => formats::write_atomic(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
