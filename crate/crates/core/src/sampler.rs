//! Single-entry Metropolis sampler.
//!
//! One Monte Carlo step changes one complex entry of one field by a uniform
//! box proposal. Entries are visited in a fixed order (field-major,
//! row-major inside each matrix), so a sweep of `num_fields * N^2` steps
//! touches every entry exactly once. The action cache is rebuilt at the end
//! of every sweep to bound round-off drift.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::MatrixAction;
use crate::error::{Error, Result};
use crate::model::{FieldConfig, ModelParams, Site, DEFAULT_HOT_AMPLITUDE};
use crate::observables::{measure, ObservableRecord, TimeSeriesBundle};

/// Half-width of the proposal box for real and imaginary parts.
pub const DEFAULT_PROPOSAL_AMPLITUDE: f64 = 2.0;

/// Generator recorded in output metadata.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9): key from seed_from_u64(seed), 64-bit stream id per chain";

/// An action that can price and apply single-entry moves.
pub trait LocalAction {
    fn num_sites(&self) -> usize;

    /// `S(after) - S(before)` for adding `delta` at linear site index `site`.
    fn propose(&mut self, site: usize, delta: Complex64) -> f64;

    fn commit(&mut self, site: usize, delta: Complex64);

    /// Called after every full sweep; returns the relative drift that was corrected.
    fn end_sweep(&mut self) -> f64 {
        0.0
    }
}

impl LocalAction for MatrixAction {
    fn num_sites(&self) -> usize {
        MatrixAction::num_sites(self)
    }

    fn propose(&mut self, site: usize, delta: Complex64) -> f64 {
        let site = Site::from_linear(site, self.params().n);
        self.propose_delta(site, delta).expect("cursor stays in range")
    }

    fn commit(&mut self, site: usize, delta: Complex64) {
        let site = Site::from_linear(site, self.params().n);
        MatrixAction::commit(self, site, delta).expect("cursor stays in range")
    }

    fn end_sweep(&mut self) -> f64 {
        self.refresh()
    }
}

/// Gaussian toy action `S = sum |x|^2` over independent complex entries.
///
/// Each real component is distributed as `exp(-x^2)`, variance `1/2`.
#[derive(Clone, Debug)]
pub struct QuadraticAction {
    pub entries: Vec<Complex64>,
}

impl QuadraticAction {
    pub fn new(sites: usize) -> Self {
        QuadraticAction {
            entries: vec![Complex64::new(0.0, 0.0); sites],
        }
    }

    pub fn action(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl LocalAction for QuadraticAction {
    fn num_sites(&self) -> usize {
        self.entries.len()
    }

    fn propose(&mut self, site: usize, delta: Complex64) -> f64 {
        let x = self.entries[site];
        (x + delta).norm_sqr() - x.norm_sqr()
    }

    fn commit(&mut self, site: usize, delta: Complex64) {
        self.entries[site] += delta;
    }
}

/// Metropolis rule: downhill moves always pass, uphill ones pass when `exp(-dS) > u`.
/// `u` is only drawn for uphill moves.
#[inline]
pub fn metropolis_accept(delta_s: f64, u: impl FnOnce() -> f64) -> bool {
    delta_s < 0.0 || (-delta_s).exp() > u()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Hot,
    Cold,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub therm_sweeps: u64,
    pub meas_sweeps: u64,
    /// Sweeps between measurements.
    pub meas_interval: u64,
    pub seed: u64,
    /// Stream id; distinct chains sharing a seed use distinct streams.
    #[serde(default)]
    pub stream: u64,
    pub start: Start,
    #[serde(default = "default_proposal")]
    pub proposal_amplitude: f64,
    #[serde(default = "default_hot")]
    pub hot_amplitude: f64,
}

fn default_proposal() -> f64 {
    DEFAULT_PROPOSAL_AMPLITUDE
}

fn default_hot() -> f64 {
    DEFAULT_HOT_AMPLITUDE
}

impl RunPlan {
    pub fn new(therm_sweeps: u64, meas_sweeps: u64, meas_interval: u64, seed: u64, start: Start) -> Self {
        RunPlan {
            therm_sweeps,
            meas_sweeps,
            meas_interval,
            seed,
            stream: 0,
            start,
            proposal_amplitude: DEFAULT_PROPOSAL_AMPLITUDE,
            hot_amplitude: DEFAULT_HOT_AMPLITUDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.meas_interval == 0 {
            return Err(Error::invalid("meas_interval", "must be at least 1"));
        }
        if !(self.proposal_amplitude >= 0.0) || !self.proposal_amplitude.is_finite() {
            return Err(Error::invalid("proposal_amplitude", "must be finite and >= 0"));
        }
        if !(self.hot_amplitude >= 0.0) || !self.hot_amplitude.is_finite() {
            return Err(Error::invalid("hot_amplitude", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Measurements the plan will record.
    pub fn num_measurements(&self) -> u64 {
        self.meas_sweeps / self.meas_interval.max(1)
    }

    pub fn total_sweeps(&self) -> u64 {
        self.therm_sweeps + self.meas_sweeps
    }
}

/// A Markov chain over any [`LocalAction`].
#[derive(Clone, Debug)]
pub struct ChainState<A> {
    pub action: A,
    pub rng: ChaCha8Rng,
    /// Next linear site index.
    pub cursor: usize,
    pub sweep_count: u64,
    pub step_count: u64,
    pub accept_count: u64,
    pub proposal_amplitude: f64,
    /// Largest drift corrected at a sweep boundary.
    pub max_drift: f64,
}

impl<A: LocalAction> ChainState<A> {
    pub fn new(action: A, rng: ChaCha8Rng, proposal_amplitude: f64) -> Self {
        ChainState {
            action,
            rng,
            cursor: 0,
            sweep_count: 0,
            step_count: 0,
            accept_count: 0,
            proposal_amplitude,
            max_drift: 0.0,
        }
    }

    pub fn acceptance(&self) -> f64 {
        if self.step_count == 0 {
            0.0
        } else {
            self.accept_count as f64 / self.step_count as f64
        }
    }

    /// One Metropolis step at the cursor; the cursor advances either way.
    pub fn metropolis_step(&mut self) -> bool {
        let a = self.proposal_amplitude;
        let delta = if a > 0.0 {
            Complex64::new(self.rng.random_range(-a..=a), self.rng.random_range(-a..=a))
        } else {
            Complex64::new(0.0, 0.0)
        };
        let site = self.cursor;
        let ds = self.action.propose(site, delta);
        let rng = &mut self.rng;
        let accepted = metropolis_accept(ds, || rng.random::<f64>());
        if accepted {
            self.action.commit(site, delta);
            self.accept_count += 1;
        }
        self.step_count += 1;
        self.cursor = (self.cursor + 1) % self.action.num_sites();
        accepted
    }

    /// A full pass over every site followed by a cache refresh; returns the acceptance fraction.
    pub fn run_sweep(&mut self) -> f64 {
        let sites = self.action.num_sites();
        let mut accepted = 0usize;
        for _ in 0..sites {
            accepted += self.metropolis_step() as usize;
        }
        let drift = self.action.end_sweep();
        self.max_drift = self.max_drift.max(drift);
        self.sweep_count += 1;
        accepted as f64 / sites as f64
    }
}

/// A matrix-model chain executing a [`RunPlan`], resumable between sweeps.
#[derive(Clone, Debug)]
pub struct MatrixChain {
    pub state: ChainState<MatrixAction>,
    pub plan: RunPlan,
    pub records: Vec<ObservableRecord>,
}

impl MatrixChain {
    pub fn new(params: ModelParams, plan: RunPlan) -> Result<Self> {
        params.validate()?;
        plan.validate()?;
        let mut rng = plan.rng();
        let config = match plan.start {
            Start::Cold => FieldConfig::zero(&params),
            Start::Hot => FieldConfig::random(&params, plan.hot_amplitude, &mut rng)?,
        };
        let action = MatrixAction::new(params, config)?;
        Ok(MatrixChain {
            state: ChainState::new(action, rng, plan.proposal_amplitude),
            plan,
            records: Vec::new(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        self.state.action.params()
    }

    pub fn sweeps_done(&self) -> u64 {
        self.state.sweep_count
    }

    pub fn is_finished(&self) -> bool {
        self.state.sweep_count >= self.plan.total_sweeps()
    }

    /// Runs up to `max_sweeps` more sweeps (all remaining when `None`), calling
    /// `observer` at every measurement. Returns whether the plan is complete.
    pub fn advance(&mut self, max_sweeps: Option<u64>, observer: &mut dyn FnMut(&MatrixAction)) -> bool {
        let mut budget = max_sweeps.unwrap_or(u64::MAX);
        while !self.is_finished() && budget > 0 {
            self.state.run_sweep();
            budget -= 1;
            let done = self.state.sweep_count;
            if done > self.plan.therm_sweeps && (done - self.plan.therm_sweeps) % self.plan.meas_interval == 0 {
                let action = &self.state.action;
                self.records.push(measure(action.config(), action.terms()));
                observer(action);
            }
        }
        self.is_finished()
    }

    pub fn into_bundle(self) -> TimeSeriesBundle {
        let acceptance = self.state.acceptance();
        let max_drift = self.state.max_drift;
        let params = *self.params();
        TimeSeriesBundle {
            params,
            meas_interval: self.plan.meas_interval,
            records: self.records,
            acceptance,
            max_drift,
            rng: RNG_NAME.to_string(),
        }
    }
}

/// Thermalizes, then measures every `meas_interval` sweeps.
pub fn run_chain(params: ModelParams, plan: RunPlan) -> Result<TimeSeriesBundle> {
    run_chain_with(params, plan, &mut |_| {})
}

pub fn run_chain_with(
    params: ModelParams,
    plan: RunPlan,
    observer: &mut dyn FnMut(&MatrixAction),
) -> Result<TimeSeriesBundle> {
    let mut chain = MatrixChain::new(params, plan)?;
    chain.advance(None, observer);
    Ok(chain.into_bundle())
}
