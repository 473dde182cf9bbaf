//! Model parameters, derived action coefficients and field configurations.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Default half-width of the hot-start box, matched to the proposal window.
pub const DEFAULT_HOT_AMPLITUDE: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Dim {
    Two,
    Four,
}

impl TryFrom<u32> for Dim {
    type Error = Error;

    fn try_from(d: u32) -> Result<Self> {
        Dim::from_int(d)
    }
}

impl From<Dim> for u32 {
    fn from(d: Dim) -> u32 {
        d.as_int()
    }
}

impl Dim {
    pub fn from_int(d: u32) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            4 => Ok(Dim::Four),
            other => Err(Error::invalid("dim", format!("expected 2 or 4, got {other}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Dim::Two => 2,
            Dim::Four => 4,
        }
    }

    /// Number of gauge matrices `Z_i`.
    pub fn num_gauge(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Four => 4,
        }
    }

    /// `psi` plus the gauge matrices.
    pub fn num_fields(self) -> usize {
        self.num_gauge() + 1
    }
}

/// Which coefficients multiply the linear `Z` term of the potential when `sin(alpha) != 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearTermConvention {
    /// `(-1+i) Z + (1+i) Z^dagger`, as the discretized action is written.
    #[default]
    Standard,
    /// `(1+i) Z + (1-i) Z^dagger`, which keeps the potential's inner matrix Hermitian.
    Hermitian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: Dim,
    pub n: usize,
    pub omega: f64,
    pub mu: f64,
    pub alpha: f64,
    #[serde(default)]
    pub allow_large_omega: bool,
    #[serde(default)]
    pub linear_term: LinearTermConvention,
}

impl ModelParams {
    pub fn new(dim: Dim, n: usize, omega: f64, mu: f64, alpha: f64) -> Result<Self> {
        let p = ModelParams {
            dim,
            n,
            omega,
            mu,
            alpha,
            allow_large_omega: false,
            linear_term: LinearTermConvention::Standard,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "matrix size must be at least 1, got 0"));
        }
        if !self.omega.is_finite() || self.omega < 0.0 {
            return Err(Error::invalid("omega", format!("must be finite and >= 0, got {}", self.omega)));
        }
        if self.omega > 1.0 && !self.allow_large_omega {
            return Err(Error::invalid(
                "omega",
                format!("{} > 1 requires allow_large_omega", self.omega),
            ));
        }
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::invalid("mu", format!("must be finite and >= 0, got {}", self.mu)));
        }
        if !self.alpha.is_finite() || !(0.0..=TAU).contains(&self.alpha) {
            return Err(Error::invalid("alpha", format!("must lie in [0, 2pi], got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn coeffs(&self) -> DerivedCoeffs {
        derive_coeffs(self)
    }
}

/// Coefficients of the translated action that depend only on `(Omega, mu, alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedCoeffs {
    /// `(1 + Omega^2) / (4 Omega^2)`; `+inf` at `Omega = 0`.
    pub c_coeff: f64,
    /// Yang-Mills prefactor `(1-W)^2/2 - (1-W)^4 / (6 (1+W)^2)` with `W = Omega^2`.
    pub d_coeff: f64,
    /// Coefficient of the linear `Z` term in the potential.
    pub v_lin: f64,
    /// `sqrt(2 (1 + Omega^2))`, multiplying every covariant-derivative term.
    pub d_prefactor: f64,
    /// `mu cos(alpha)`
    pub mu_cos: f64,
}

pub fn derive_coeffs(params: &ModelParams) -> DerivedCoeffs {
    let w = params.omega * params.omega;
    let one_minus = 1.0 - w;
    let one_plus = 1.0 + w;
    let c_coeff = if params.omega == 0.0 { f64::INFINITY } else { one_plus / (4.0 * w) };
    let d_coeff = one_minus * one_minus / 2.0 - one_minus.powi(4) / (6.0 * one_plus * one_plus);
    // 1/sqrt(2C) = Omega sqrt(2/(1+W)) and 1/(2 sqrt(C)) = Omega/sqrt(1+W): both vanish at Omega = 0.
    let mu_sin = params.mu * params.alpha.sin();
    let v_lin = match params.dim {
        Dim::Two => mu_sin * params.omega * (2.0 / one_plus).sqrt(),
        Dim::Four => mu_sin * params.omega / one_plus.sqrt(),
    };
    DerivedCoeffs {
        c_coeff,
        d_coeff,
        v_lin,
        d_prefactor: (2.0 * one_plus).sqrt(),
        mu_cos: params.mu * params.alpha.cos(),
    }
}

/// Addresses one complex entry of one field. Field 0 is `psi`, field `i + 1` is `Z_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Site {
    pub field: usize,
    pub row: usize,
    pub col: usize,
}

impl Site {
    pub fn new(field: usize, row: usize, col: usize) -> Self {
        Site { field, row, col }
    }

    /// Inverse of [`Site::linear_index`]: field-major, row-major inside each matrix.
    pub fn from_linear(index: usize, n: usize) -> Self {
        let per_field = n * n;
        let field = index / per_field;
        let rem = index % per_field;
        Site {
            field,
            row: rem / n,
            col: rem % n,
        }
    }

    pub fn linear_index(&self, n: usize) -> usize {
        self.field * n * n + self.row * n + self.col
    }
}

/// One point in configuration space: the translated scalar and the gauge matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldConfig {
    pub psi: ComplexMatrix,
    pub z: Vec<ComplexMatrix>,
}

impl FieldConfig {
    /// Cold start: every field at the translated minimum.
    pub fn zero(params: &ModelParams) -> Self {
        FieldConfig {
            psi: ComplexMatrix::zeros(params.n),
            z: (0..params.dim.num_gauge()).map(|_| ComplexMatrix::zeros(params.n)).collect(),
        }
    }

    /// Hot start: entries uniform in the box `[-amplitude, amplitude]^2`.
    pub fn random<R: Rng + ?Sized>(params: &ModelParams, amplitude: f64, rng: &mut R) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::invalid("amplitude", format!("must be finite and >= 0, got {amplitude}")));
        }
        let psi = ComplexMatrix::random_uniform(params.n, amplitude, rng);
        let z = (0..params.dim.num_gauge())
            .map(|_| ComplexMatrix::random_uniform(params.n, amplitude, rng))
            .collect();
        Ok(FieldConfig { psi, z })
    }

    pub fn n(&self) -> usize {
        self.psi.n()
    }

    pub fn num_fields(&self) -> usize {
        1 + self.z.len()
    }

    pub fn field(&self, index: usize) -> &ComplexMatrix {
        if index == 0 {
            &self.psi
        } else {
            &self.z[index - 1]
        }
    }

    pub fn field_mut(&mut self, index: usize) -> &mut ComplexMatrix {
        if index == 0 {
            &mut self.psi
        } else {
            &mut self.z[index - 1]
        }
    }

    pub fn check(&self, params: &ModelParams) -> Result<()> {
        if self.z.len() != params.dim.num_gauge() {
            return Err(Error::DimensionMismatch {
                left: params.dim.num_gauge(),
                right: self.z.len(),
            });
        }
        for m in std::iter::once(&self.psi).chain(&self.z) {
            if m.n() != params.n {
                return Err(Error::DimensionMismatch {
                    left: params.n,
                    right: m.n(),
                });
            }
        }
        Ok(())
    }

    /// Applies `U X U^dagger` to every field.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        let ud = u.dagger();
        let conj = |m: &ComplexMatrix| &(u * m) * &ud;
        FieldConfig {
            psi: conj(&self.psi),
            z: self.z.iter().map(conj).collect(),
        }
    }
}
