//! Sweep configuration files (TOML).
//!
//! ```toml
//! version = 1
//! dim = 4
//! n = [5, 10, 15, 20]
//! omega = { start = 0.0, stop = 1.0, step = 0.1 }
//! mu = 1.0
//! alpha = [0.0]
//!
//! [plan]
//! meas_sweeps = 10000
//! seed = 42
//! ```
//!
//! Grids accept a single number, a list, or an inclusive `{start, stop, step}`
//! range. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dim, LinearTermConvention, ModelParams, DEFAULT_HOT_AMPLITUDE};
use crate::observables::AggregateOptions;
use crate::sampler::{RunPlan, Start, DEFAULT_PROPOSAL_AMPLITUDE};

pub const CONFIG_VERSION: u32 = 1;

/// Default sweep count between checkpoint writes.
pub const DEFAULT_CHECKPOINT_INTERVAL: u64 = 1000;

/// Thermalization used when the config leaves it out.
pub fn default_therm_sweeps(n: usize) -> u64 {
    if n <= 10 {
        500
    } else {
        2000
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Single(f64),
    List(Vec<f64>),
    Range(RangeSpec),
}

impl Grid {
    pub fn values(&self, field: &'static str) -> Result<Vec<f64>> {
        let values = match self {
            Grid::Single(x) => vec![*x],
            Grid::List(v) => v.clone(),
            Grid::Range(r) => {
                if !(r.step > 0.0) || !r.step.is_finite() || !r.start.is_finite() || !r.stop.is_finite() {
                    return Err(Error::invalid(field, "range needs finite bounds and a positive step"));
                }
                if r.stop < r.start {
                    return Err(Error::invalid(field, "range stop is below start"));
                }
                let count = ((r.stop - r.start) / r.step + 1e-9).floor() as usize + 1;
                // Round to 12 decimals so 0.1 steps print as 0.3, not 0.30000000000000004.
                (0..count)
                    .map(|i| ((r.start + i as f64 * r.step) * 1e12).round() / 1e12)
                    .collect()
            }
        };
        if values.is_empty() {
            return Err(Error::invalid(field, "grid is empty"));
        }
        Ok(values)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeList {
    Single(usize),
    List(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub therm_sweeps: Option<u64>,
    pub meas_sweeps: u64,
    #[serde(default = "one")]
    pub meas_interval: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "hot")]
    pub start: Start,
    #[serde(default = "proposal")]
    pub proposal_amplitude: f64,
    #[serde(default = "hot_amplitude")]
    pub hot_amplitude: f64,
    #[serde(default = "checkpoint_interval")]
    pub checkpoint_interval: u64,
}

fn one() -> u64 {
    1
}
fn hot() -> Start {
    Start::Hot
}
fn proposal() -> f64 {
    DEFAULT_PROPOSAL_AMPLITUDE
}
fn hot_amplitude() -> f64 {
    DEFAULT_HOT_AMPLITUDE
}
fn checkpoint_interval() -> u64 {
    DEFAULT_CHECKPOINT_INTERVAL
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    /// Divide extensive observables by `N^2`.
    #[serde(default = "yes")]
    pub density: bool,
    /// Report `D` without its `2(1 + Omega^2)` factor.
    #[serde(default = "yes")]
    pub ignore_d_prefactor: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: None,
            density: true,
            ignore_d_prefactor: true,
        }
    }
}

/// On-disk layout of a sweep config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: u32,
    pub dim: u32,
    pub n: SizeList,
    pub omega: Grid,
    pub mu: Grid,
    pub alpha: Grid,
    #[serde(default)]
    pub linear_term: LinearTermConvention,
    #[serde(default)]
    pub allow_large_omega: bool,
    pub plan: PlanSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated parameter sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub dim: Dim,
    pub n_list: Vec<usize>,
    pub omega_grid: Vec<f64>,
    pub mu_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub linear_term: LinearTermConvention,
    pub allow_large_omega: bool,
    pub plan: PlanSection,
    pub aggregate: AggregateOptions,
    pub output: Option<PathBuf>,
}

/// One chain of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub params: ModelParams,
    pub plan: RunPlan,
    /// Directory name of the point, unique within the sweep.
    pub name: String,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream id derived from the parameters, so a point gets the same random
/// numbers regardless of which other points share the sweep.
pub fn stream_id(params: &ModelParams) -> u64 {
    let words = [
        params.dim.as_int() as u64,
        params.n as u64,
        params.omega.to_bits(),
        params.mu.to_bits(),
        params.alpha.to_bits(),
    ];
    words.iter().fold(0u64, |h, &w| splitmix(h ^ w))
}

fn line_of(source: &str, key: &str) -> Option<usize> {
    source.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
}

impl SweepSpec {
    pub fn from_file(file: ConfigFile) -> Result<Self> {
        if file.version != CONFIG_VERSION {
            return Err(Error::invalid(
                "version",
                format!("unsupported config version {}, expected {CONFIG_VERSION}", file.version),
            ));
        }
        let dim = Dim::from_int(file.dim)?;
        let n_list = match file.n {
            SizeList::Single(n) => vec![n],
            SizeList::List(v) => v,
        };
        if n_list.is_empty() {
            return Err(Error::invalid("n", "grid is empty"));
        }
        let spec = SweepSpec {
            dim,
            n_list,
            omega_grid: file.omega.values("omega")?,
            mu_grid: file.mu.values("mu")?,
            alpha_grid: file.alpha.values("alpha")?,
            linear_term: file.linear_term,
            allow_large_omega: file.allow_large_omega,
            aggregate: AggregateOptions {
                density: file.output.density,
                ignore_d_prefactor: file.output.ignore_d_prefactor,
            },
            output: file.output.directory,
            plan: file.plan,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn parse(source: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(source).map_err(|e| Error::Config {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })?;
        Self::from_file(file).map_err(|e| match e {
            Error::InvalidParam { field, reason } => {
                let key = field.split(['[', '.']).next().unwrap_or(field);
                let at = line_of(source, key).map(|l| format!(" (line {})", l + 1)).unwrap_or_default();
                Error::Config {
                    path: PathBuf::from("<config>"),
                    message: format!("invalid `{field}`{at}: {reason}"),
                }
            }
            other => other,
        })
    }

    pub fn parse_config(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path)?;
        Self::parse(&source).map_err(|e| match e {
            Error::Config { message, .. } => Error::Config {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let plan = &self.plan;
        if plan.meas_interval == 0 {
            return Err(Error::invalid("plan.meas_interval", "must be at least 1"));
        }
        if plan.checkpoint_interval == 0 {
            return Err(Error::invalid("plan.checkpoint_interval", "must be at least 1"));
        }
        for j in self.jobs_unchecked() {
            j.params.validate()?;
            j.plan.validate().map_err(|e| match e {
                Error::InvalidParam { field, reason } => Error::InvalidParam {
                    field: plan_field(field),
                    reason,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    fn jobs_unchecked(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for &n in &self.n_list {
            for &omega in &self.omega_grid {
                for &mu in &self.mu_grid {
                    for &alpha in &self.alpha_grid {
                        let params = ModelParams {
                            dim: self.dim,
                            n,
                            omega,
                            mu,
                            alpha,
                            allow_large_omega: self.allow_large_omega,
                            linear_term: self.linear_term,
                        };
                        let plan = RunPlan {
                            therm_sweeps: self.plan.therm_sweeps.unwrap_or_else(|| default_therm_sweeps(n)),
                            meas_sweeps: self.plan.meas_sweeps,
                            meas_interval: self.plan.meas_interval,
                            seed: self.plan.seed,
                            stream: stream_id(&params),
                            start: self.plan.start,
                            proposal_amplitude: self.plan.proposal_amplitude,
                            hot_amplitude: self.plan.hot_amplitude,
                        };
                        let name = format!("d{}_n{}_omega{}_mu{}_alpha{}", self.dim.as_int(), n, omega, mu, alpha);
                        jobs.push(Job { params, plan, name });
                    }
                }
            }
        }
        jobs
    }

    /// All chains, ordered by `(N, omega, mu, alpha)`.
    pub fn jobs(&self) -> Result<Vec<Job>> {
        self.validate()?;
        let mut jobs = self.jobs_unchecked();
        jobs.sort_by(|a, b| sort_key(&a.params).partial_cmp(&sort_key(&b.params)).expect("validated values are finite"));
        for pair in jobs.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(Error::invalid("grid", format!("duplicate point {}", pair[0].name)));
            }
        }
        Ok(jobs)
    }

    /// The config with every grid written out explicitly.
    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            version: CONFIG_VERSION,
            dim: self.dim.as_int(),
            n: SizeList::List(self.n_list.clone()),
            omega: Grid::List(self.omega_grid.clone()),
            mu: Grid::List(self.mu_grid.clone()),
            alpha: Grid::List(self.alpha_grid.clone()),
            linear_term: self.linear_term,
            allow_large_omega: self.allow_large_omega,
            plan: self.plan.clone(),
            output: OutputSection {
                directory: self.output.clone(),
                density: self.aggregate.density,
                ignore_d_prefactor: self.aggregate.ignore_d_prefactor,
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes")
    }
}

pub(crate) fn sort_key(p: &ModelParams) -> (u32, f64, f64, f64, f64) {
    (p.dim.as_int(), p.n as f64, p.omega, p.mu, p.alpha)
}

fn plan_field(field: &'static str) -> &'static str {
    match field {
        "meas_interval" => "plan.meas_interval",
        "proposal_amplitude" => "plan.proposal_amplitude",
        "hot_amplitude" => "plan.hot_amplitude",
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1
dim = 2
n = 3
omega = 0.5
mu = 1
alpha = 0

[plan]
meas_sweeps = 100
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let spec = SweepSpec::parse(MINIMAL).unwrap();
        assert_eq!(spec.plan.meas_interval, 1);
        assert_eq!(spec.plan.start, Start::Hot);
        assert_eq!(spec.plan.proposal_amplitude, 2.0);
        assert!(spec.aggregate.density && spec.aggregate.ignore_d_prefactor);
        let jobs = spec.jobs().unwrap();
        assert_eq!(jobs.len(), 1);
        assert_eq!(jobs[0].plan.therm_sweeps, 500);
        // The echoed config parses back to the same spec.
        assert_eq!(SweepSpec::parse(&spec.to_toml()).unwrap(), spec);
    }

    #[test]
    fn negative_mu_names_the_field() {
        let src = MINIMAL.replace("mu = 1", "mu = -1");
        let msg = SweepSpec::parse(&src).unwrap_err().to_string();
        assert!(msg.contains("mu"), "{msg}");
        assert!(msg.contains("line 6"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let src = MINIMAL.replace("alpha = 0", "alpha = 0\nbeta = 3");
        assert!(SweepSpec::parse(&src).is_err());
        let src = MINIMAL.replace("meas_sweeps = 100", "meas_sweeps = 100\nsweeps = 4");
        assert!(SweepSpec::parse(&src).is_err());
    }

    #[test]
    fn figure_scan_has_44_jobs() {
        let src = r#"
version = 1
dim = 4
n = [5, 10, 15, 20]
omega = { start = 0.0, stop = 1.0, step = 0.1 }
mu = 1.0
alpha = 0.0

[plan]
meas_sweeps = 1000
seed = 1
"#;
        let jobs = SweepSpec::parse(src).unwrap().jobs().unwrap();
        assert_eq!(jobs.len(), 44);
        assert_eq!(jobs[3].params.omega, 0.3);
        assert_eq!(jobs.last().unwrap().params.omega, 1.0);
        assert_eq!(jobs.last().unwrap().plan.therm_sweeps, 2000);
        let mut streams: Vec<u64> = jobs.iter().map(|j| j.plan.stream).collect();
        streams.sort();
        streams.dedup();
        assert_eq!(streams.len(), 44);
    }

    #[test]
    fn bad_values_rejected() {
        for (from, to) in [
            ("dim = 2", "dim = 3"),
            ("version = 1", "version = 7"),
            ("omega = 0.5", "omega = 1.5"),
            ("omega = 0.5", "omega = { start = 1.0, stop = 0.0, step = 0.1 }"),
            ("meas_sweeps = 100", "meas_sweeps = 100\nmeas_interval = 0"),
            ("n = 3", "n = []"),
        ] {
            assert!(SweepSpec::parse(&MINIMAL.replace(from, to)).is_err(), "{to}");
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let msg = SweepSpec::parse("version = 1\ndim = = 2\n").unwrap_err().to_string();
        assert!(msg.contains("line 2") || msg.contains("2:"), "{msg}");
    }
}
