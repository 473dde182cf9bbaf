//! Named sweep grids for the standard scans (`fig*`) and the smaller grids
//! used by the slow acceptance checks (`accept-*`).

use std::f64::consts::PI;

use super::config::{OutputSection, PlanSection, SweepSpec, DEFAULT_CHECKPOINT_INTERVAL};
use crate::model::{Dim, LinearTermConvention, DEFAULT_HOT_AMPLITUDE};
use crate::observables::AggregateOptions;
use crate::sampler::{Start, DEFAULT_PROPOSAL_AMPLITUDE};

pub const PRESET_SEED: u64 = 20_240_601;
const SIZES: [usize; 4] = [5, 10, 15, 20];

/// Preset names with a one-line description.
pub const FIGURE_PRESETS: &[(&str, &str)] = &[
    ("fig1", "4D, mu = 1, omega = 1, alpha over [0, 2pi]"),
    ("fig2", "4D, mu = 1, omega = 0.5, alpha over [0, 2pi]"),
    ("fig3-9", "4D, mu = 1, alpha = 0, omega over [0, 1]"),
    ("fig10-12", "4D, mu = 0, alpha = 0, omega over [0, 1]"),
    ("fig13-15", "4D, mu = 3, alpha = 0, omega over [0, 1]"),
    ("fig16-18", "4D, omega = 0, alpha = 0, mu over [0, 3]"),
    ("fig19-21", "4D, omega = 0.5, alpha = 0, mu over [0, 3]"),
    ("fig22-24", "4D, omega = 1, alpha = 0, mu over [0, 3]"),
    ("fig25-27", "2D, mu in {0, 0.5, 1}, alpha = 0, omega over [0, 1]"),
    ("fig28-30", "2D, mu in {1, 3}, alpha = 0, omega over [0, 1]"),
    ("fig31-34", "2D, omega in {0, 0.5, 1}, alpha = 0, mu over [0, 3]"),
    ("accept-omega", "4D, mu = 1, alpha = 0, omega 0.1..1.0, N in {5, 10}"),
    ("accept-mu", "4D, omega = 0, alpha = 0, mu 0.5..3.0, N = 10"),
    ("accept-tau", "2D, mu = 1, omega = 0.5, alpha = 0, N in {5, 10}"),
];

fn steps(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
}

fn spec(dim: Dim, n: &[usize], omega: Vec<f64>, mu: Vec<f64>, alpha: Vec<f64>, meas_sweeps: u64) -> SweepSpec {
    SweepSpec {
        dim,
        n_list: n.to_vec(),
        omega_grid: omega,
        mu_grid: mu,
        alpha_grid: alpha,
        linear_term: LinearTermConvention::Standard,
        allow_large_omega: false,
        plan: PlanSection {
            therm_sweeps: None,
            meas_sweeps,
            meas_interval: 1,
            seed: PRESET_SEED,
            start: Start::Hot,
            proposal_amplitude: DEFAULT_PROPOSAL_AMPLITUDE,
            hot_amplitude: DEFAULT_HOT_AMPLITUDE,
            checkpoint_interval: DEFAULT_CHECKPOINT_INTERVAL,
        },
        aggregate: AggregateOptions::default(),
        output: OutputSection::default().directory,
    }
}

pub fn figure_preset(name: &str) -> Option<SweepSpec> {
    let omega = || steps(0.0, 1.0, 0.1);
    let mu = || steps(0.0, 3.0, 0.1);
    let alpha = || (0..=16).map(|i| i as f64 * (PI / 8.0)).collect::<Vec<_>>();
    let zero = || vec![0.0];
    let sweeps = 20_000;
    let s = match name {
        "fig1" => spec(Dim::Four, &SIZES, vec![1.0], vec![1.0], alpha(), sweeps),
        "fig2" => spec(Dim::Four, &SIZES, vec![0.5], vec![1.0], alpha(), sweeps),
        "fig3-9" => spec(Dim::Four, &SIZES, omega(), vec![1.0], zero(), sweeps),
        "fig10-12" => spec(Dim::Four, &SIZES, omega(), vec![0.0], zero(), sweeps),
        "fig13-15" => spec(Dim::Four, &SIZES, omega(), vec![3.0], zero(), sweeps),
        "fig16-18" => spec(Dim::Four, &SIZES, vec![0.0], mu(), zero(), sweeps),
        "fig19-21" => spec(Dim::Four, &SIZES, vec![0.5], mu(), zero(), sweeps),
        "fig22-24" => spec(Dim::Four, &SIZES, vec![1.0], mu(), zero(), sweeps),
        "fig25-27" => spec(Dim::Two, &SIZES, omega(), vec![0.0, 0.5, 1.0], zero(), sweeps),
        "fig28-30" => spec(Dim::Two, &SIZES, omega(), vec![1.0, 3.0], zero(), sweeps),
        "fig31-34" => spec(Dim::Two, &SIZES, vec![0.0, 0.5, 1.0], mu(), zero(), sweeps),
        "accept-omega" => spec(Dim::Four, &[5, 10], steps(0.1, 1.0, 0.1), vec![1.0], zero(), sweeps),
        "accept-mu" => spec(Dim::Four, &[10], vec![0.0], steps(0.5, 3.0, 0.25), zero(), sweeps),
        "accept-tau" => spec(Dim::Two, &[5, 10], vec![0.5], vec![1.0], zero(), 50_000),
        _ => return None,
    };
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for (name, _) in FIGURE_PRESETS {
            let s = figure_preset(name).unwrap();
            let jobs = s.jobs().unwrap();
            assert!(!jobs.is_empty(), "{name}");
            assert_eq!(SweepSpec::parse(&s.to_toml()).unwrap(), s, "{name}");
        }
        assert!(figure_preset("fig99").is_none());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(figure_preset("fig3-9").unwrap().jobs().unwrap().len(), 44);
        assert_eq!(figure_preset("fig1").unwrap().alpha_grid.len(), 17);
        assert_eq!(figure_preset("accept-mu").unwrap().mu_grid, vec![0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0]);
    }
}
