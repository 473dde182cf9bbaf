//! Matrix-basis functions of the Moyal plane and quadrature checks of their
//! trace and product identities.
//!
//! For `n >= m`
//!
//! ```text
//! f_mn(rho, phi) = 2 (-1)^m sqrt(m!/n!) e^{i phi (n-m)} (sqrt(2/theta) rho)^(n-m)
//!                  e^{-rho^2/theta} L_m^(n-m)(2 rho^2 / theta)
//! ```
//!
//! and `f_mn = conj(f_nm)` otherwise. Integrals use Gauss-Legendre nodes in
//! `rho` and the midpoint rule in `phi`.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|f_mn|` must fall below this at the outer radius.
pub const EDGE_TOLERANCE: f64 = 1e-8;

/// Default residual tolerance for the identity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-5;

/// `ln(n! / m!)` for `n >= m`.
fn ln_factorial_ratio(n: usize, m: usize) -> f64 {
    (m + 1..=n).map(|j| (j as f64).ln()).sum()
}

/// Generalized Laguerre polynomial `L_m^alpha(x)` by the three-term recurrence.
pub fn laguerre(m: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..m {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Real radial factor of `f_mn` for `n >= m` (sign included, phase excluded).
fn radial(m: usize, n: usize, theta: f64, rho: f64) -> f64 {
    debug_assert!(n >= m);
    let d = n - m;
    let u = 2.0 * rho * rho / theta;
    let sign = if m % 2 == 0 { 2.0 } else { -2.0 };
    let lag = laguerre(m, d as f64, u);
    if lag == 0.0 {
        return 0.0;
    }
    // Power, factorial ratio and Gaussian combined in log space.
    let log_power = if d == 0 { 0.0 } else { d as f64 * 0.5 * u.ln() };
    let log_mag = log_power - 0.5 * ln_factorial_ratio(n, m) - 0.5 * u;
    sign * lag * log_mag.exp()
}

pub fn eval_fmn(m: usize, n: usize, theta: f64, rho: f64, phi: f64) -> Complex64 {
    if n >= m {
        let phase = Complex64::from_polar(1.0, phi * (n - m) as f64);
        phase * radial(m, n, theta, rho)
    } else {
        eval_fmn(n, m, theta, rho, phi).conj()
    }
}

/// Fourier transform `int d^2x e^{i p rho sin(phi - psi)} f_mn`, closed form:
///
/// ```text
/// 2 pi theta sqrt(m!/n!) e^{i (psi + pi)(n-m)} (sqrt(theta/2) p)^(n-m)
///     L_m^(n-m)(theta p^2 / 2) e^{-theta p^2 / 4}
/// ```
pub fn eval_fmn_fourier(m: usize, n: usize, theta: f64, p: f64, psi: f64) -> Complex64 {
    if n < m {
        return eval_fmn_fourier(n, m, theta, p, psi + PI).conj();
    }
    let d = n - m;
    let v = theta * p * p / 2.0;
    let lag = laguerre(m, d as f64, v);
    let log_power = if d == 0 { 0.0 } else { d as f64 * 0.5 * v.ln() };
    let mag = (log_power - 0.5 * ln_factorial_ratio(n, m) - 0.5 * v).exp();
    let phase = Complex64::from_polar(1.0, (psi + PI) * d as f64);
    phase * (TAU * theta * lag * mag)
}

/// Smallest radius, at least the index-scaled cutoff, beyond which every
/// `|f_mn|` with `m, n <= max_index` stays below [`EDGE_TOLERANCE`].
pub fn adequate_rho_max(max_index: usize, theta: f64) -> f64 {
    let mut rho = (2.0 * theta * (2 * max_index + 6) as f64).sqrt();
    let below = |r: f64| {
        (0..=max_index).all(|m| (m..=max_index).all(|n| radial(m, n, theta, r).abs() < EDGE_TOLERANCE))
    };
    loop {
        if (0..=20).all(|j| below(rho * (1.0 + j as f64 / 20.0))) {
            return rho;
        }
        rho *= 1.05;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_rho: usize,
    pub n_phi: usize,
    pub rho_max: f64,
}

impl GridSpec {
    /// A grid resolving every function with indices up to `max_index`.
    pub fn for_indices(max_index: usize, theta: f64) -> Self {
        GridSpec {
            n_rho: 64 + 8 * max_index,
            n_phi: 8 * (max_index + 1),
            rho_max: adequate_rho_max(max_index, theta),
        }
    }

    /// Doubles both resolutions.
    pub fn refined(&self) -> Self {
        GridSpec {
            n_rho: 2 * self.n_rho,
            n_phi: 2 * self.n_phi,
            rho_max: self.rho_max,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_rho == 0 || self.n_phi == 0 {
            return Err(Error::invalid("grid", "resolution must be positive"));
        }
        if !(self.rho_max > 0.0) || !self.rho_max.is_finite() {
            return Err(Error::invalid("rho_max", "must be finite and positive"));
        }
        Ok(())
    }

    /// Radial nodes with weights that include the `rho` Jacobian.
    fn radial_rule(&self) -> Vec<(f64, f64)> {
        let rule = GaussLegendre::new(NonZeroUsize::new(self.n_rho).expect("validated"));
        let half = 0.5 * self.rho_max;
        rule.as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| {
                let r = half * (x + 1.0);
                (r, w * half * r)
            })
            .collect()
    }

    fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        let h = TAU / self.n_phi as f64;
        (0..self.n_phi).map(move |j| (j as f64 + 0.5) * h)
    }

    fn phi_weight(&self) -> f64 {
        TAU / self.n_phi as f64
    }
}

/// `f_mn` sampled on the radial Gauss nodes times the angular midpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisFunctionGrid {
    pub m: usize,
    pub n: usize,
    pub theta: f64,
    pub spec: GridSpec,
    /// Row-major over `(rho, phi)`.
    pub values: Vec<Complex64>,
    weights: Vec<f64>,
}

impl BasisFunctionGrid {
    pub fn new(m: usize, n: usize, theta: f64, spec: GridSpec) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite and positive"));
        }
        spec.validate()?;
        let radial = spec.radial_rule();
        let angles: Vec<f64> = spec.angles().collect();
        let mut values = Vec::with_capacity(radial.len() * angles.len());
        let mut weights = Vec::with_capacity(values.capacity());
        for &(r, w) in &radial {
            for &phi in &angles {
                values.push(eval_fmn(m, n, theta, r, phi));
                weights.push(w * spec.phi_weight());
            }
        }
        Ok(BasisFunctionGrid {
            m,
            n,
            theta,
            spec,
            values,
            weights,
        })
    }

    /// `|f_mn|` at the outer radius (independent of the angle).
    pub fn edge_magnitude(&self) -> f64 {
        eval_fmn(self.m, self.n, self.theta, self.spec.rho_max, 0.0).norm()
    }

    pub fn is_adequate(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) && self.edge_magnitude() < EDGE_TOLERANCE
    }

    fn require_adequate(&self) -> Result<()> {
        if self.is_adequate() {
            Ok(())
        } else {
            Err(Error::InvalidParam {
                field: "rho_max",
                reason: format!(
                    "|f_{}{}| = {:.3e} at rho_max = {}, above {EDGE_TOLERANCE:e}",
                    self.m,
                    self.n,
                    self.edge_magnitude(),
                    self.spec.rho_max
                ),
            })
        }
    }

    pub fn integral(&self) -> Complex64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// `int f g` over the plane, pointwise product.
    pub fn product_integral(&self, other: &BasisFunctionGrid) -> Result<Complex64> {
        if self.spec != other.spec {
            return Err(Error::invalid("grid", "both functions must share one grid"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    pub value: Complex64,
    pub expected: f64,
    pub residual: f64,
}

/// `|int f_mn - 2 pi theta delta_mn|`.
pub fn check_trace_identity(m: usize, n: usize, theta: f64, spec: &GridSpec) -> Result<IdentityCheck> {
    let grid = BasisFunctionGrid::new(m, n, theta, *spec)?;
    grid.require_adequate()?;
    let value = grid.integral();
    let expected = if m == n { TAU * theta } else { 0.0 };
    Ok(IdentityCheck {
        value,
        expected,
        residual: (value - expected).norm(),
    })
}

/// `|int f_mn f_kl - 2 pi theta delta_nk delta_ml|`.
pub fn check_orthogonality(
    (m, n, k, l): (usize, usize, usize, usize),
    theta: f64,
    spec: &GridSpec,
) -> Result<IdentityCheck> {
    let a = BasisFunctionGrid::new(m, n, theta, *spec)?;
    let b = BasisFunctionGrid::new(k, l, theta, *spec)?;
    a.require_adequate()?;
    b.require_adequate()?;
    let value = a.product_integral(&b)?;
    let expected = if n == k && m == l { TAU * theta } else { 0.0 };
    Ok(IdentityCheck {
        value,
        expected,
        residual: (value - expected).norm(),
    })
}

/// One line of the residual table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub kind: &'static str,
    pub indices: Vec<usize>,
    pub theta: f64,
    pub residual: f64,
    pub n_rho: usize,
    pub n_phi: usize,
    pub rho_max: f64,
}

/// Every trace and orthogonality check with indices up to `max_index`.
pub fn residual_table(max_index: usize, thetas: &[f64]) -> Result<Vec<ResidualRow>> {
    use rayon::prelude::*;
    let mut rows = Vec::new();
    for &theta in thetas {
        let spec = GridSpec::for_indices(max_index, theta);
        let grids: Vec<Vec<BasisFunctionGrid>> = (0..=max_index)
            .map(|m| (0..=max_index).map(|n| BasisFunctionGrid::new(m, n, theta, spec)).collect())
            .collect::<Result<_>>()?;
        for row in &grids {
            for g in row {
                g.require_adequate()?;
            }
        }
        let row = |kind, indices: Vec<usize>, residual| ResidualRow {
            kind,
            indices,
            theta,
            residual,
            n_rho: spec.n_rho,
            n_phi: spec.n_phi,
            rho_max: spec.rho_max,
        };
        for m in 0..=max_index {
            for n in 0..=max_index {
                let expected = if m == n { TAU * theta } else { 0.0 };
                rows.push(row("trace", vec![m, n], (grids[m][n].integral() - expected).norm()));
            }
        }
        let quads: Vec<[usize; 4]> = (0..(max_index + 1).pow(4))
            .map(|i| {
                let b = max_index + 1;
                [i / (b * b * b), (i / (b * b)) % b, (i / b) % b, i % b]
            })
            .collect();
        let ortho: Vec<ResidualRow> = quads
            .par_iter()
            .map(|&[m, n, k, l]| {
                let value = grids[m][n].product_integral(&grids[k][l])?;
                let expected = if n == k && m == l { TAU * theta } else { 0.0 };
                Ok(row("orthogonality", vec![m, n, k, l], (value - expected).norm()))
            })
            .collect::<Result<_>>()?;
        rows.extend(ortho);
    }
    Ok(rows)
}
