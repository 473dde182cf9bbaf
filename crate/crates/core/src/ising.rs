//! Two-dimensional Ising model used to calibrate the sampler and the error
//! analysis against known statistical physics.
//!
//! Updates are single spin flips at uniformly random sites, accepted with the
//! same Metropolis rule as the matrix model. A sweep is `L^2` attempted flips.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{metropolis_accept, RunPlan, Start};
use crate::stats::{self, ErrorEstimate};

/// Exact infinite-volume critical coupling, `ln(1 + sqrt 2) / 2`.
pub fn critical_beta() -> f64 {
    (1.0 + 2f64.sqrt()).ln() / 2.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsingLattice {
    l: usize,
    spins: Vec<i8>,
    pub beta: f64,
}

impl IsingLattice {
    pub fn uniform(l: usize, beta: f64) -> Self {
        IsingLattice {
            l,
            spins: vec![1; l * l],
            beta,
        }
    }

    pub fn random<R: Rng + ?Sized>(l: usize, beta: f64, rng: &mut R) -> Self {
        let spins = (0..l * l).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        IsingLattice { l, spins, beta }
    }

    pub fn from_spins(l: usize, spins: Vec<i8>, beta: f64) -> Result<Self> {
        if spins.len() != l * l {
            return Err(Error::DimensionMismatch {
                left: l * l,
                right: spins.len(),
            });
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("spins", "must be +1 or -1"));
        }
        Ok(IsingLattice { l, spins, beta })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn volume(&self) -> usize {
        self.l * self.l
    }

    pub fn spin(&self, x: usize, y: usize) -> i8 {
        self.spins[y * self.l + x]
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    fn neighbour_sum(&self, site: usize) -> i32 {
        let l = self.l;
        let (x, y) = (site % l, site / l);
        let at = |x: usize, y: usize| self.spins[y * l + x] as i32;
        at((x + 1) % l, y) + at((x + l - 1) % l, y) + at(x, (y + 1) % l) + at(x, (y + l - 1) % l)
    }

    /// Energy change from flipping `site`.
    pub fn flip_delta(&self, site: usize) -> i32 {
        2 * self.spins[site] as i32 * self.neighbour_sum(site)
    }

    pub fn flip(&mut self, site: usize) {
        self.spins[site] = -self.spins[site];
    }
}

/// `H = -sum_<ij> s_i s_j`, each bond counted once, periodic boundaries.
pub fn ising_energy(lattice: &IsingLattice) -> f64 {
    let l = lattice.l;
    let mut e = 0i64;
    for y in 0..l {
        for x in 0..l {
            let s = lattice.spin(x, y) as i64;
            e -= s * lattice.spin((x + 1) % l, y) as i64;
            e -= s * lattice.spin(x, (y + 1) % l) as i64;
        }
    }
    e as f64
}

/// `|sum s_i| / V`.
pub fn ising_magnetization(lattice: &IsingLattice) -> f64 {
    let m: i64 = lattice.spins.iter().map(|&s| s as i64).sum();
    m.unsigned_abs() as f64 / lattice.volume() as f64
}

/// Aggregated observables at one coupling. Energy and magnetization are per site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingSummary {
    pub l: usize,
    pub beta: f64,
    pub energy: ErrorEstimate,
    pub specific_heat: ErrorEstimate,
    pub magnetization: ErrorEstimate,
    pub susceptibility: ErrorEstimate,
    pub acceptance: f64,
}

/// Raw per-measurement series of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingSeries {
    pub energy: Vec<f64>,
    pub magnetization: Vec<f64>,
    pub acceptance: f64,
}

pub fn ising_series(l: usize, beta: f64, plan: &RunPlan) -> Result<IsingSeries> {
    if l < 2 {
        return Err(Error::invalid("l", "lattice size must be at least 2"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::invalid("beta", "must be finite and >= 0"));
    }
    plan.validate()?;
    let mut rng = plan.rng();
    let mut lattice = match plan.start {
        Start::Cold => IsingLattice::uniform(l, beta),
        Start::Hot => IsingLattice::random(l, beta, &mut rng),
    };
    let volume = lattice.volume();
    let mut energy = ising_energy(&lattice) as i64;
    let mut magnet: i64 = lattice.spins.iter().map(|&s| s as i64).sum();
    let mut accepted = 0u64;
    let mut attempted = 0u64;
    let mut e_series = Vec::with_capacity(plan.num_measurements() as usize);
    let mut m_series = Vec::with_capacity(plan.num_measurements() as usize);

    for sweep in 1..=plan.total_sweeps() {
        for _ in 0..volume {
            let site = rng.random_range(0..volume);
            let de = lattice.flip_delta(site);
            if metropolis_accept(beta * de as f64, || rng.random::<f64>()) {
                magnet -= 2 * lattice.spins[site] as i64;
                lattice.flip(site);
                energy += de as i64;
                accepted += 1;
            }
            attempted += 1;
        }
        if sweep > plan.therm_sweeps && (sweep - plan.therm_sweeps) % plan.meas_interval == 0 {
            e_series.push(energy as f64);
            m_series.push(magnet.unsigned_abs() as f64 / volume as f64);
        }
    }
    debug_assert_eq!(energy as f64, ising_energy(&lattice));
    Ok(IsingSeries {
        energy: e_series,
        magnetization: m_series,
        acceptance: accepted as f64 / attempted.max(1) as f64,
    })
}

/// Runs one chain and reduces it to `(e, C, m, chi)` with errors.
///
/// `C = beta^2 (<H^2> - <H>^2) / V` and `chi = beta V (<m^2> - <|m|>^2)`.
pub fn ising_run(l: usize, beta: f64, plan: &RunPlan) -> Result<IsingSummary> {
    let series = ising_series(l, beta, plan)?;
    if series.energy.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: series.energy.len(),
            min: 2,
        });
    }
    let v = (l * l) as f64;
    let per_site: Vec<f64> = series.energy.iter().map(|e| e / v).collect();
    let energy = crate::observables::estimate(&per_site)?;
    let magnetization = crate::observables::estimate(&series.magnetization)?;

    let mut specific_heat = stats::variance_error(&series.energy)?;
    specific_heat.mean *= beta * beta / v;
    specific_heat.sigma *= beta * beta / v;
    let mut susceptibility = stats::variance_error(&series.magnetization)?;
    susceptibility.mean *= beta * v;
    susceptibility.sigma *= beta * v;

    Ok(IsingSummary {
        l,
        beta,
        energy,
        specific_heat,
        magnetization,
        susceptibility,
        acceptance: series.acceptance,
    })
}

/// Independent chains over a list of couplings, each on its own stream.
pub fn ising_scan(l: usize, betas: &[f64], plan: &RunPlan) -> Result<Vec<IsingSummary>> {
    betas
        .par_iter()
        .enumerate()
        .map(|(i, &beta)| {
            let mut p = *plan;
            p.stream = plan.stream.wrapping_add(i as u64);
            ising_run(l, beta, &p)
        })
        .collect()
}
