//! Parameter sweeps, output files and checkpoints.
//!
//! Every grid point gets its own directory under the output root:
//!
//! - `series.csv`: one row per measurement, `index` then the raw observables.
//! - `aggregate.csv`: one row per observable with its error analysis.
//! - `state.ckpt`: binary snapshot (see [`checkpoint`]) for resuming.
//! - `meta.json`: parameters, plan, generator, status and the aggregate rows.
//!
//! `summary.csv` at the root collects the aggregate rows of all completed
//! points, ordered by `(dim, N, omega, mu, alpha)`.

pub mod checkpoint;
pub mod config;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Job, SweepSpec};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::{aggregate, AggregateOptions, SummaryRow, TimeSeriesBundle};
use crate::sampler::{MatrixChain, RunPlan, RNG_NAME};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "MOYAL_MC_WORKERS";

pub const META_VERSION: u32 = 1;

pub const AGGREGATE_HEADER: &str = "observable,mean,sigma,tau,t_eff,method,k_max,block_length,flags";

pub const SUMMARY_HEADER: &str =
    "dim,N,omega,mu,alpha,observable,mean,sigma,tau,t_eff,sweeps,seed,method,k_max,flags";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Continue interrupted points and skip completed ones.
    pub resume: bool,
    pub workers: Option<usize>,
    /// Stop every point after this many sweeps in this invocation, as if killed
    /// right after a checkpoint. Used to exercise resume.
    pub halt_after_sweeps: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Complete,
    Partial,
}

/// Contents of `meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMeta {
    pub version: u32,
    pub status: PointStatus,
    pub params: ModelParams,
    pub plan: RunPlan,
    pub aggregate_options: AggregateOptions,
    pub rng: String,
    pub sweeps_done: u64,
    pub measurements: usize,
    pub acceptance: f64,
    pub max_drift: f64,
    pub rows: Vec<SummaryRow>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub completed: usize,
    pub skipped: usize,
    pub interrupted: usize,
    pub failed: Vec<(String, String)>,
    pub summary: PathBuf,
}

impl SweepReport {
    pub fn success(&self) -> bool {
        self.failed.is_empty() && self.interrupted == 0
    }
}

enum Outcome {
    Done { rows: Vec<SummaryRow>, skipped: bool },
    Interrupted,
}

/// Worker count: explicit option, then the environment, then all cores.
pub fn worker_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn aggregate_line(row: &SummaryRow) -> String {
    let e = &row.estimate;
    format!(
        "{},{},{},{},{},{},{},{},{}",
        row.observable,
        e.mean,
        e.sigma,
        e.tau,
        e.t_eff,
        e.method.as_str(),
        opt(e.k_max),
        opt(e.block_length),
        row.flags.join(";")
    )
}

fn summary_line(job: &Job, row: &SummaryRow) -> String {
    let p = &job.params;
    let e = &row.estimate;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        p.dim.as_int(),
        p.n,
        p.omega,
        p.mu,
        p.alpha,
        row.observable,
        e.mean,
        e.sigma,
        e.tau,
        e.t_eff,
        job.plan.meas_sweeps,
        job.plan.seed,
        e.method.as_str(),
        opt(e.k_max),
        row.flags.join(";")
    )
}

fn write_series(path: &Path, chain: &MatrixChain) -> Result<()> {
    let gauge = chain.params().dim.num_gauge();
    let mut out = String::from("index,");
    out.push_str(&TimeSeriesBundle::column_names(gauge).join(","));
    out.push('\n');
    for (i, r) in chain.records.iter().enumerate() {
        out.push_str(&i.to_string());
        for v in TimeSeriesBundle::row(r) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_aggregate(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for r in rows {
        out.push_str(&aggregate_line(r));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn meta_for(chain: &MatrixChain, status: PointStatus, options: AggregateOptions, rows: Vec<SummaryRow>) -> PointMeta {
    PointMeta {
        version: META_VERSION,
        status,
        params: *chain.params(),
        plan: chain.plan,
        aggregate_options: options,
        rng: RNG_NAME.to_string(),
        sweeps_done: chain.sweeps_done(),
        measurements: chain.records.len(),
        acceptance: chain.state.acceptance(),
        max_drift: chain.state.max_drift,
        rows,
    }
}

fn write_meta(path: &Path, meta: &PointMeta) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta).map_err(|e| Error::Checkpoint(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_meta(path: &Path) -> Option<PointMeta> {
    serde_json::from_str(&fs::read_to_string(path).ok()?).ok()
}

fn run_point(job: &Job, options: AggregateOptions, checkpoint_every: u64, run: &RunOptions) -> Result<Outcome> {
    let dir = run.out.join(&job.name);
    fs::create_dir_all(&dir)?;
    let ckpt = dir.join("state.ckpt");
    let meta_path = dir.join("meta.json");

    let mut chain = None;
    if run.resume {
        if let Some(meta) = read_meta(&meta_path) {
            let same = meta.params == job.params && meta.plan == job.plan && meta.aggregate_options == options;
            if same && meta.status == PointStatus::Complete {
                return Ok(Outcome::Done {
                    rows: meta.rows,
                    skipped: true,
                });
            }
        }
        if ckpt.exists() {
            let restored = checkpoint::read(&ckpt)?;
            if *restored.params() != job.params || restored.plan != job.plan {
                return Err(Error::Checkpoint(format!("{} belongs to a different run", ckpt.display())));
            }
            chain = Some(restored);
        }
    }
    let mut chain = match chain {
        Some(c) => c,
        None => MatrixChain::new(job.params, job.plan)?,
    };

    let mut budget = run.halt_after_sweeps.unwrap_or(u64::MAX);
    while !chain.is_finished() {
        if budget == 0 {
            checkpoint::write(&ckpt, &chain)?;
            write_meta(&meta_path, &meta_for(&chain, PointStatus::Partial, options, Vec::new()))?;
            return Ok(Outcome::Interrupted);
        }
        let chunk = checkpoint_every.min(budget);
        chain.advance(Some(chunk), &mut |_| {});
        budget -= chunk;
        checkpoint::write(&ckpt, &chain)?;
    }

    let rows = if chain.records.is_empty() {
        Vec::new()
    } else {
        let bundle = chain.clone().into_bundle();
        aggregate(&bundle, options)?
            .rows
    };
    write_series(&dir.join("series.csv"), &chain)?;
    write_aggregate(&dir.join("aggregate.csv"), &rows)?;
    checkpoint::write(&ckpt, &chain)?;
    write_meta(&meta_path, &meta_for(&chain, PointStatus::Complete, options, rows.clone()))?;
    Ok(Outcome::Done { rows, skipped: false })
}

/// Runs every point of `spec` on a worker pool and writes `summary.csv`.
///
/// Failed points are reported, not fatal; the summary holds whatever completed.
pub fn run_sweep(spec: &SweepSpec, run: &RunOptions) -> Result<SweepReport> {
    let jobs = spec.jobs()?;
    fs::create_dir_all(&run.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(run.workers))
        .build()
        .map_err(|e| Error::Chain {
            point: "pool".into(),
            message: e.to_string(),
        })?;
    let checkpoint_every = spec.plan.checkpoint_interval.max(1);
    let outcomes: Vec<Result<Outcome>> =
        pool.install(|| jobs.par_iter().map(|j| run_point(j, spec.aggregate, checkpoint_every, run)).collect());

    let mut report = SweepReport {
        summary: run.out.join("summary.csv"),
        ..Default::default()
    };
    let mut summary = format!("{SUMMARY_HEADER}\n");
    for (job, outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(Outcome::Done { rows, skipped }) => {
                if skipped {
                    report.skipped += 1;
                } else {
                    report.completed += 1;
                }
                for r in &rows {
                    summary.push_str(&summary_line(job, r));
                    summary.push('\n');
                }
            }
            Ok(Outcome::Interrupted) => report.interrupted += 1,
            Err(e) => report.failed.push((job.name.clone(), e.to_string())),
        }
    }
    let tmp = report.summary.with_extension("csv.tmp");
    fs::write(&tmp, summary)?;
    fs::rename(&tmp, &report.summary)?;
    Ok(report)
}
