//! Per-configuration measurements and their aggregation.

use serde::{Deserialize, Serialize};

use crate::action::ActionTerms;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{FieldConfig, ModelParams};
use crate::stats::{self, ErrorEstimate, Method};

/// Everything recorded at one measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub s_total: f64,
    pub s_f: f64,
    pub s_v0: f64,
    pub s_v1: f64,
    pub s_d: f64,
    /// `Tr(psi^dagger psi)`, the sum of all squared moduli.
    pub phi_a2: f64,
    /// Diagonal part, `sum_n |psi_nn|^2`.
    pub phi_02: f64,
    /// `|psi_10|^2 + |psi_01|^2`.
    pub phi_12: f64,
    pub z_a2: Vec<f64>,
    pub z_02: Vec<f64>,
    pub z_12: Vec<f64>,
}

pub fn full_power(m: &ComplexMatrix) -> f64 {
    m.frobenius_norm_sqr()
}

pub fn diagonal_power(m: &ComplexMatrix) -> f64 {
    (0..m.n()).map(|i| m[(i, i)].norm_sqr()).sum()
}

/// Off-diagonal power of the leading `(l+1) x (l+1)` block (cumulative in `l`).
pub fn mode_power(m: &ComplexMatrix, l: usize) -> f64 {
    let top = (l + 1).min(m.n());
    let mut sum = 0.0;
    for r in 0..top {
        for c in 0..top {
            if r != c {
                sum += m[(r, c)].norm_sqr();
            }
        }
    }
    sum
}

/// Off-diagonal power on the shell `max(r, c) == l`. Shells for `l >= 1`
/// partition the off-diagonal entries.
pub fn shell_power(m: &ComplexMatrix, l: usize) -> f64 {
    if l >= m.n() {
        return 0.0;
    }
    (0..l).map(|k| m[(l, k)].norm_sqr() + m[(k, l)].norm_sqr()).sum()
}

pub fn measure(config: &FieldConfig, terms: &ActionTerms) -> ObservableRecord {
    let psi = &config.psi;
    ObservableRecord {
        s_total: terms.total,
        s_f: terms.f_term,
        s_v0: terms.v0_term,
        s_v1: terms.v1_term,
        s_d: terms.d_term,
        phi_a2: full_power(psi),
        phi_02: diagonal_power(psi),
        phi_12: mode_power(psi, 1),
        z_a2: config.z.iter().map(full_power).collect(),
        z_02: config.z.iter().map(diagonal_power).collect(),
        z_12: config.z.iter().map(|z| mode_power(z, 1)).collect(),
    }
}

/// Recorded measurements of one chain plus its metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesBundle {
    pub params: ModelParams,
    /// Sweeps between consecutive records.
    pub meas_interval: u64,
    pub records: Vec<ObservableRecord>,
    pub acceptance: f64,
    pub max_drift: f64,
    pub rng: String,
}

impl TimeSeriesBundle {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn series(&self, f: impl Fn(&ObservableRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Column names matching [`TimeSeriesBundle::row`].
    pub fn column_names(num_gauge: usize) -> Vec<String> {
        let mut names: Vec<String> = ["s_total", "s_f", "s_v0", "s_v1", "s_d", "phi_a2", "phi_02", "phi_12"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for i in 0..num_gauge {
            names.push(format!("z{i}_a2"));
            names.push(format!("z{i}_02"));
            names.push(format!("z{i}_12"));
        }
        names
    }

    pub fn row(record: &ObservableRecord) -> Vec<f64> {
        let mut row = vec![
            record.s_total,
            record.s_f,
            record.s_v0,
            record.s_v1,
            record.s_d,
            record.phi_a2,
            record.phi_02,
            record.phi_12,
        ];
        for i in 0..record.z_a2.len() {
            row.extend([record.z_a2[i], record.z_02[i], record.z_12[i]]);
        }
        row
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateOptions {
    /// Divide extensive quantities by `N^2`.
    pub density: bool,
    /// Report the covariant-derivative term without its `2(1 + Omega^2)` factor.
    /// Sampling always uses the full action.
    pub ignore_d_prefactor: bool,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions {
            density: true,
            ignore_d_prefactor: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub observable: String,
    pub estimate: ErrorEstimate,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn get(&self, observable: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.observable == observable)
    }
}

/// Mean and error of one series, picking the estimator by length.
pub fn estimate(series: &[f64]) -> Result<ErrorEstimate> {
    match series.len() {
        0 => Err(Error::EmptySeries),
        1 => {
            let mut e = ErrorEstimate::plain(series[0], 0.0, Method::Uncorrelated, 1);
            e.unreliable = true;
            Ok(e)
        }
        2..=9 => stats::naive_error(series),
        _ => stats::corrected_error(series),
    }
}

fn flags_for(e: &ErrorEstimate) -> Vec<String> {
    let mut flags = Vec::new();
    if e.degenerate {
        flags.push("degenerate".to_string());
    }
    if e.unreliable {
        flags.push("tau_window_open".to_string());
    }
    flags
}

/// Means, errors and derived fluctuation quantities of a bundle.
///
/// Energy is the sum of the reported terms, so with `ignore_d_prefactor`
/// it differs from the sampled action. The specific heat is the variance of
/// the sampled action.
pub fn aggregate(bundle: &TimeSeriesBundle, options: AggregateOptions) -> Result<Summary> {
    if bundle.records.is_empty() {
        return Err(Error::EmptySeries);
    }
    let params = &bundle.params;
    let d_scale = if options.ignore_d_prefactor {
        1.0 / (2.0 * (1.0 + params.omega * params.omega))
    } else {
        1.0
    };
    let norm = if options.density {
        1.0 / (params.n * params.n) as f64
    } else {
        1.0
    };

    let mut rows = Vec::new();
    let mut push = |name: &str, mut e: ErrorEstimate, extra: &[&str]| {
        e.mean *= norm;
        e.sigma *= norm;
        let mut flags = flags_for(&e);
        flags.extend(extra.iter().map(|s| s.to_string()));
        rows.push(SummaryRow {
            observable: name.to_string(),
            estimate: e,
            flags,
        });
    };

    let s_d: Vec<f64> = bundle.series(|r| r.s_d * d_scale);
    let energy: Vec<f64> = bundle
        .records
        .iter()
        .zip(&s_d)
        .map(|(r, d)| r.s_f + r.s_v0 + r.s_v1 + d)
        .collect();
    push("energy", estimate(&energy)?, &[]);
    push("s_f", estimate(&bundle.series(|r| r.s_f))?, &[]);
    push("s_v0", estimate(&bundle.series(|r| r.s_v0))?, &[]);
    push("s_v1", estimate(&bundle.series(|r| r.s_v1))?, &[]);
    push("s_d", estimate(&s_d)?, &[]);
    let action = bundle.series(|r| r.s_total);
    push("action", estimate(&action)?, &[]);

    let heat = stats::variance_error(&action)?;
    let negative = if heat.mean < -2.0 * heat.sigma { &["negative"][..] } else { &[][..] };
    push("specific_heat", heat, negative);

    push("phi_a2", estimate(&bundle.series(|r| r.phi_a2))?, &[]);
    push("phi_02", estimate(&bundle.series(|r| r.phi_02))?, &[]);
    push("phi_12", estimate(&bundle.series(|r| r.phi_12))?, &[]);
    let num_gauge = bundle.records[0].z_a2.len();
    for i in 0..num_gauge {
        push(&format!("z{i}_a2"), estimate(&bundle.series(|r| r.z_a2[i]))?, &[]);
        push(&format!("z{i}_02"), estimate(&bundle.series(|r| r.z_02[i]))?, &[]);
        push(&format!("z{i}_12"), estimate(&bundle.series(|r| r.z_12[i]))?, &[]);
    }

    let phi0 = bundle.series(|r| r.phi_02.sqrt());
    push("chi_phi0", stats::variance_error(&phi0)?, &["low_precision"]);
    let phi1 = bundle.series(|r| r.phi_12.sqrt());
    push("chi_phi1", stats::variance_error(&phi1)?, &["low_precision"]);

    Ok(Summary { rows })
}
