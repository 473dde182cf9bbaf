//! The discretized two- and four-dimensional actions.
//!
//! [`eval_full`] evaluates every term directly from the fields with dense
//! products. [`ActionCache`] keeps the inner matrices of every trace term and
//! updates them with low-rank corrections when a single entry changes, which
//! is what the sampler uses in its inner loop.

mod incremental;

pub use incremental::{ActionCache, MatrixAction};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::model::{DerivedCoeffs, Dim, FieldConfig, LinearTermConvention, ModelParams};

/// Per-term breakdown of the action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionTerms {
    /// Yang-Mills part, `Tr L_F`.
    pub f_term: f64,
    pub v0_term: f64,
    pub v1_term: f64,
    /// Covariant-derivative part, `sum_j Tr(L_Dj L_Dj^dagger)`.
    pub d_term: f64,
    pub total: f64,
    /// Magnitude of the imaginary part of the summed traces.
    pub imag_residual: f64,
}

impl ActionTerms {
    pub(crate) fn from_parts(f: Complex64, v0: Complex64, v1: Complex64, d: Complex64) -> Self {
        let imag = f.im + v0.im + v1.im + d.im;
        ActionTerms {
            f_term: f.re,
            v0_term: v0.re,
            v1_term: v1.re,
            d_term: d.re,
            total: f.re + v0.re + v1.re + d.re,
            imag_residual: imag.abs(),
        }
    }
}

/// Coefficients `(a, b)` of the linear term `a Z + b Z^dagger`.
pub(crate) fn linear_pair(convention: LinearTermConvention) -> (Complex64, Complex64) {
    match convention {
        LinearTermConvention::Standard => (Complex64::new(-1.0, 1.0), Complex64::new(1.0, 1.0)),
        LinearTermConvention::Hermitian => (Complex64::new(1.0, 1.0), Complex64::new(1.0, -1.0)),
    }
}

/// Gauge indices entering `V_0` and `V_1`.
pub(crate) fn potential_groups(dim: Dim) -> (&'static [usize], &'static [usize]) {
    match dim {
        Dim::Two => (&[0], &[1]),
        Dim::Four => (&[0, 2], &[1, 3]),
    }
}

/// Gauge index pairs `(lo, hi)` of the covariant-derivative terms, in order `D_0, D_1, ...`.
/// Even terms use `Z + Z^dagger`, odd terms `Z - Z^dagger`.
pub(crate) fn covariant_pairs(dim: Dim) -> &'static [(usize, usize)] {
    match dim {
        Dim::Two => &[(0, 1), (0, 1)],
        Dim::Four => &[(0, 1), (0, 1), (2, 3), (2, 3)],
    }
}

/// Evaluates the action term by term, straight from the definitions.
pub fn eval_full(params: &ModelParams, coeffs: &DerivedCoeffs, config: &FieldConfig) -> Result<ActionTerms> {
    config.check(params)?;
    let psi = &config.psi;
    let psi_d = psi.dagger();
    let z = &config.z;
    let zd: Vec<ComplexMatrix> = z.iter().map(ComplexMatrix::dagger).collect();
    let herm: Vec<ComplexMatrix> = z.iter().zip(&zd).map(|(a, b)| a + b).collect();
    let anti: Vec<ComplexMatrix> = z.iter().zip(&zd).map(|(a, b)| a - b).collect();
    let square_trace = |m: &ComplexMatrix| m.trace_of_product(m);

    // Yang-Mills part.
    let mut f_sum = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        f_sum += square_trace(&zd[i].commutator(&z[i])?)?;
    }
    if params.dim == Dim::Four {
        let mut cross = Complex64::new(0.0, 0.0);
        for (a, b) in [(0, 2), (1, 3)] {
            cross += square_trace(&herm[a].commutator(&anti[b])?)?;
            cross -= square_trace(&herm[a].commutator(&herm[b])?)?;
            cross += square_trace(&anti[a].commutator(&herm[b])?)?;
            cross -= square_trace(&anti[a].commutator(&anti[b])?)?;
        }
        f_sum += cross * 0.25;
    }
    let f = f_sum * (coeffs.d_coeff / 2.0);

    // Potential.
    let (lin_z, lin_zd) = linear_pair(params.linear_term);
    let v_lin = Complex64::new(coeffs.v_lin, 0.0);
    let mu_cos = Complex64::new(coeffs.mu_cos, 0.0);
    let psi_sum = psi + &psi_d;
    let potential = |quadratic: ComplexMatrix, group: &[usize]| -> Result<Complex64> {
        let mut inner = quadratic;
        inner.axpy(mu_cos, &psi_sum);
        for &i in group {
            inner.axpy(Complex64::new(0.5, 0.0), &zd[i].anticommutator(&z[i])?);
            inner.axpy(v_lin * lin_z, &z[i]);
            inner.axpy(v_lin * lin_zd, &zd[i]);
        }
        square_trace(&inner)
    };
    let (group0, group1) = potential_groups(params.dim);
    let v0 = potential(psi * &psi_d, group0)?;
    let v1 = potential(&psi_d * psi, group1)?;

    // Covariant derivatives.
    let s = coeffs.d_prefactor;
    let mut d = 0.0;
    for (j, &(lo, hi)) in covariant_pairs(params.dim).iter().enumerate() {
        let x = if j % 2 == 0 { &herm } else { &anti };
        let mut inner = (&x[hi] - &x[lo]).scale_real(coeffs.mu_cos);
        inner += &(psi * &x[hi]);
        inner = &inner - &(&x[lo] * psi);
        let l = inner.scale_real(s);
        d += l.frobenius_norm_sqr();
    }

    Ok(ActionTerms::from_parts(f, v0, v1, Complex64::new(d, 0.0)))
}
