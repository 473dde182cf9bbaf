use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use moyal_mc::ising::{critical_beta, ising_scan, IsingSummary};
use moyal_mc::moyal::{residual_table, DEFAULT_TOLERANCE};
use moyal_mc::observables::AggregateOptions;
use moyal_mc::runner::config::{PlanSection, DEFAULT_CHECKPOINT_INTERVAL};
use moyal_mc::runner::presets::{figure_preset, FIGURE_PRESETS};
use moyal_mc::runner::{run_sweep, RunOptions, SweepReport, SweepSpec, WORKERS_ENV};
use moyal_mc::sampler::DEFAULT_PROPOSAL_AMPLITUDE;
use moyal_mc::{model::DEFAULT_HOT_AMPLITUDE, Dim, LinearTermConvention, RunPlan, Start};

const DEFAULT_OUT: &str = "moyal-out";

#[derive(Parser)]
#[command(name = "moyal-mc", version, about = "Monte Carlo for the harmonic spectral matrix model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single parameter point.
    Simulate(SimulateArgs),
    /// Run a grid of points from a config file or a figure preset.
    Sweep(SweepArgs),
    /// Scan the 2D Ising model over a range of couplings.
    Ising(IsingArgs),
    /// Check the trace and orthogonality identities of the Moyal basis.
    MoyalCheck(MoyalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Hot,
    Cold,
}

impl From<StartArg> for Start {
    fn from(s: StartArg) -> Start {
        match s {
            StartArg::Hot => Start::Hot,
            StartArg::Cold => Start::Cold,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Measurement sweeps.
    #[arg(long)]
    sweeps: Option<u64>,
    /// Thermalization sweeps (default depends on N).
    #[arg(long)]
    therm: Option<u64>,
    /// Sweeps between measurements.
    #[arg(long)]
    interval: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    start: Option<StartArg>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue interrupted points and skip completed ones.
    #[arg(long)]
    resume: bool,
    /// Print the resolved configuration and the job list without running.
    #[arg(long)]
    dry_run: bool,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Stop each point after this many sweeps, leaving a checkpoint.
    #[arg(long, hide = true)]
    halt_after_sweeps: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = ["2", "4"], default_value = "4")]
    dim: String,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    omega: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    /// Use the Hermitian linear term instead of the default one.
    #[arg(long)]
    hermitian_linear_term: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep config.
    #[arg(long, conflicts_with = "figure", required_unless_present_any = ["figure", "list_figures"])]
    config: Option<PathBuf>,
    /// Named preset grid.
    #[arg(long)]
    figure: Option<String>,
    /// List the presets and exit.
    #[arg(long)]
    list_figures: bool,
    /// Override the matrix sizes.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct IsingArgs {
    /// Linear lattice size.
    #[arg(long, default_value_t = 16)]
    l: usize,
    #[arg(long, default_value_t = 0.30)]
    beta_start: f64,
    #[arg(long, default_value_t = 0.55)]
    beta_stop: f64,
    #[arg(long, default_value_t = 0.01)]
    beta_step: f64,
    #[arg(long, default_value_t = 20_000)]
    sweeps: u64,
    #[arg(long, default_value_t = 2_000)]
    therm: u64,
    #[arg(long, default_value_t = 1)]
    interval: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "hot")]
    start: StartArg,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MoyalArgs {
    #[arg(long, default_value_t = 4)]
    max_index: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    theta: Vec<f64>,
    /// Residual above which the check fails.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn apply_run_args(spec: &mut SweepSpec, run: &RunArgs) {
    let plan = &mut spec.plan;
    if let Some(v) = run.sweeps {
        plan.meas_sweeps = v;
    }
    if run.therm.is_some() {
        plan.therm_sweeps = run.therm;
    }
    if let Some(v) = run.interval {
        plan.meas_interval = v;
    }
    if let Some(v) = run.seed {
        plan.seed = v;
    }
    if let Some(v) = run.start {
        plan.start = v.into();
    }
    if run.out.is_some() {
        spec.output = run.out.clone();
    }
}

fn execute(spec: SweepSpec, run: &RunArgs) -> anyhow::Result<ExitCode> {
    spec.validate()?;
    let jobs = spec.jobs()?;
    let out = spec.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    if run.dry_run {
        let mut stdout = std::io::stdout().lock();
        write!(stdout, "{}", spec.to_toml())?;
        writeln!(stdout, "\n# {} job(s), output {}", jobs.len(), out.display())?;
        for j in &jobs {
            writeln!(stdout, "# {} therm={} stream={:#018x}", j.name, j.plan.therm_sweeps, j.plan.stream)?;
        }
        return Ok(ExitCode::SUCCESS);
    }
    let options = RunOptions {
        out,
        resume: run.resume,
        workers: run.workers,
        halt_after_sweeps: run.halt_after_sweeps,
    };
    let report = run_sweep(&spec, &options)?;
    Ok(finish(&report))
}

fn finish(report: &SweepReport) -> ExitCode {
    eprintln!(
        "completed {}, skipped {}, interrupted {}, failed {}; summary at {}",
        report.completed,
        report.skipped,
        report.interrupted,
        report.failed.len(),
        report.summary.display()
    );
    for (point, message) in &report.failed {
        eprintln!("error: {point}: {message}");
    }
    if report.success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let dim = Dim::from_int(args.dim.parse()?)?;
    let mut spec = SweepSpec {
        dim,
        n_list: vec![args.n],
        omega_grid: vec![args.omega],
        mu_grid: vec![args.mu],
        alpha_grid: vec![args.alpha],
        linear_term: if args.hermitian_linear_term {
            LinearTermConvention::Hermitian
        } else {
            LinearTermConvention::Standard
        },
        allow_large_omega: false,
        plan: PlanSection {
            therm_sweeps: None,
            meas_sweeps: 10_000,
            meas_interval: 1,
            seed: 0,
            start: Start::Hot,
            proposal_amplitude: DEFAULT_PROPOSAL_AMPLITUDE,
            hot_amplitude: DEFAULT_HOT_AMPLITUDE,
            checkpoint_interval: DEFAULT_CHECKPOINT_INTERVAL,
        },
        aggregate: AggregateOptions::default(),
        output: None,
    };
    apply_run_args(&mut spec, &args.run);
    execute(spec, &args.run)
}

fn sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    if args.list_figures {
        for (name, about) in FIGURE_PRESETS {
            println!("{name:<14} {about}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let mut spec = match (&args.config, &args.figure) {
        (Some(path), _) => SweepSpec::parse_config(path)?,
        (None, Some(name)) => match figure_preset(name) {
            Some(s) => s,
            None => bail!("unknown figure preset `{name}`; try --list-figures"),
        },
        (None, None) => bail!("one of --config or --figure is required"),
    };
    if !args.n.is_empty() {
        spec.n_list = args.n.clone();
    }
    apply_run_args(&mut spec, &args.run);
    execute(spec, &args.run)
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => Ok(std::io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn ising_line(s: &IsingSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        s.l,
        s.beta,
        s.energy.mean,
        s.energy.sigma,
        s.specific_heat.mean,
        s.specific_heat.sigma,
        s.magnetization.mean,
        s.magnetization.sigma,
        s.susceptibility.mean,
        s.susceptibility.sigma,
        s.energy.tau,
        s.acceptance
    )
}

fn ising(args: IsingArgs) -> anyhow::Result<ExitCode> {
    if !(args.beta_step > 0.0) || args.beta_stop < args.beta_start {
        bail!("need beta_step > 0 and beta_stop >= beta_start");
    }
    let count = ((args.beta_stop - args.beta_start) / args.beta_step + 1e-9).floor() as usize + 1;
    let betas: Vec<f64> = (0..count)
        .map(|i| ((args.beta_start + i as f64 * args.beta_step) * 1e12).round() / 1e12)
        .collect();
    let plan = RunPlan::new(args.therm, args.sweeps, args.interval, args.seed, args.start.into());
    let rows = ising_scan(args.l, &betas, &plan)?;

    let mut text = String::from("L,beta,e,e_sigma,C,C_sigma,m,m_sigma,chi,chi_sigma,tau_e,acceptance\n");
    for r in &rows {
        text.push_str(&ising_line(r));
        text.push('\n');
    }
    write_output(args.out.as_deref(), &text)?;
    if let Some(peak) = rows.iter().max_by(|a, b| a.specific_heat.mean.total_cmp(&b.specific_heat.mean)) {
        eprintln!("specific heat peak at beta = {} (exact critical beta {:.4})", peak.beta, critical_beta());
    }
    Ok(ExitCode::SUCCESS)
}

fn moyal_check(args: MoyalArgs) -> anyhow::Result<ExitCode> {
    let rows = residual_table(args.max_index, &args.theta)?;
    let mut text = String::from("kind,indices,theta,residual,n_rho,n_phi,rho_max\n");
    for r in &rows {
        let idx: Vec<String> = r.indices.iter().map(|i| i.to_string()).collect();
        text.push_str(&format!(
            "{},{},{},{:e},{},{},{}\n",
            r.kind,
            idx.join(" "),
            r.theta,
            r.residual,
            r.n_rho,
            r.n_phi,
            r.rho_max
        ));
    }
    write_output(args.out.as_deref(), &text)?;
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    eprintln!("{} checks, worst residual {worst:e}", rows.len());
    if worst > args.tolerance {
        eprintln!("error: residual exceeds tolerance {:e}", args.tolerance);
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Ising(a) => ising(a),
        Command::MoyalCheck(a) => moyal_check(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
