//! Dense complex matrices sized for the Monte Carlo hot loop.
//!
//! Storage is row-major and always dense: the model never goes beyond a few
//! dozen rows, where a plain triple loop beats anything sparse.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix side must be positive");
        ComplexMatrix {
            n,
            entries: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.entries[i * n + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: entries.len(),
            });
        }
        Ok(ComplexMatrix { n, entries })
    }

    /// Entries with real and imaginary parts i.i.d. uniform in `[-amplitude, amplitude]`.
    pub fn random_uniform<R: Rng + ?Sized>(n: usize, amplitude: f64, rng: &mut R) -> Self {
        let mut m = Self::zeros(n);
        if amplitude > 0.0 {
            for z in m.entries.iter_mut() {
                let re = rng.random_range(-amplitude..=amplitude);
                let im = rng.random_range(-amplitude..=amplitude);
                *z = Complex64::new(re, im);
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        let n = self.n;
        &mut self.entries[i * n..(i + 1) * n]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<Complex64> {
        (row < self.n && col < self.n).then(|| self.entries[row * self.n + col])
    }

    pub fn dagger(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zeros(self.n);
        self.matmul_into(other, &mut out);
        Ok(out)
    }

    /// `out = self * other`. All three must share the same size.
    pub fn matmul_into(&self, other: &Self, out: &mut Self) {
        let n = self.n;
        debug_assert!(other.n == n && out.n == n);
        out.entries.fill(ZERO);
        for i in 0..n {
            let out_row = &mut out.entries[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.entries[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
    }

    /// `ab - ba`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.try_matmul(other)?;
        let ba = other.try_matmul(self)?;
        Ok(ab.zip_with(&ba, |x, y| x - y))
    }

    /// `ab + ba`
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        let ab = self.try_matmul(other)?;
        let ba = other.try_matmul(self)?;
        Ok(ab.zip_with(&ba, |x, y| x + y))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            n: self.n,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix {
            n: self.n,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// Adds `s` times the identity.
    pub fn add_diagonal(&mut self, s: Complex64) {
        for i in 0..self.n {
            self.entries[i * self.n + i] += s;
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.entries[i * self.n + i]).sum()
    }

    pub fn trace_real(&self) -> f64 {
        self.trace().re
    }

    pub fn trace_imag(&self) -> f64 {
        self.trace().im
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        let n = self.n;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.entries[i * n + k] * other.entries[k * n + i];
            }
        }
        Ok(acc)
    }

    /// `Tr(self * other^dagger)`, the Frobenius inner product.
    pub fn trace_of_product_dagger(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    /// `Tr(M M^dagger) = sum |m_ij|^2`
    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Adds `delta` to a single entry.
    pub fn rank1_update(&mut self, row: usize, col: usize, delta: Complex64) -> Result<()> {
        if row >= self.n || col >= self.n {
            return Err(Error::IndexOutOfRange {
                row,
                col,
                n: self.n,
            });
        }
        self.entries[row * self.n + col] += delta;
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.n;
        (0..n).all(|i| (i..n).all(|j| (self.entries[i * n + j] - self.entries[j * n + i].conj()).norm() <= tol))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        ComplexMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|z| format!("{:.4}{:+.4}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.n + j]
    }
}

// Operator impls panic on size mismatch; the `try_*` methods are the checked path.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix size mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix size mismatch")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_matmul(rhs).expect("matrix size mismatch")
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::random_uniform(n, 1.5, &mut rng)
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn dagger_of_identity_and_upper_entry() {
        assert_eq!(ComplexMatrix::identity(3).dagger(), ComplexMatrix::identity(3));
        let m = ComplexMatrix::from_rows(2, vec![c(0., 0.), c(1., 1.), c(0., 0.), c(0., 0.)]).unwrap();
        let expected = ComplexMatrix::from_rows(2, vec![c(0., 0.), c(0., 0.), c(1., -1.), c(0., 0.)]).unwrap();
        assert_eq!(m.dagger(), expected);
    }

    #[test]
    fn self_commutator_vanishes() {
        let m = random(4, 1);
        let k = m.commutator(&m).unwrap();
        assert!(k.entries().iter().all(|z| z.norm() == 0.0));

        let a = ComplexMatrix::from_rows(1, vec![c(2., 3.)]).unwrap();
        let b = ComplexMatrix::from_rows(1, vec![c(-1., 0.5)]).unwrap();
        assert_eq!(a.commutator(&b).unwrap()[(0, 0)], c(0., 0.));
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let a = ComplexMatrix::zeros(2);
        let b = ComplexMatrix::zeros(3);
        assert!(matches!(a.commutator(&b), Err(Error::DimensionMismatch { left: 2, right: 3 })));
        assert!(a.anticommutator(&b).is_err());
        assert!(a.trace_of_product(&b).is_err());
    }

    #[test]
    fn anticommutator_examples() {
        let m = random(3, 2);
        let ac = ComplexMatrix::identity(3).anticommutator(&m).unwrap();
        assert!(ac.max_abs_diff(&m.scale_real(2.0)) < 1e-15);

        let z = ComplexMatrix::from_rows(1, vec![c(0.3, -1.2)]).unwrap();
        let ac = z.dagger().anticommutator(&z).unwrap();
        assert!((ac[(0, 0)] - c(2.0 * (0.09 + 1.44), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(ComplexMatrix::identity(5).trace_real(), 5.0);
        let sigma_z = ComplexMatrix::from_rows(2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap();
        assert_eq!(sigma_z.trace_real(), 0.0);
        let sigma_y = ComplexMatrix::from_rows(2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        assert_eq!(sigma_y.trace_real(), 0.0);
        assert_eq!(sigma_y.trace_imag(), 0.0);
    }

    #[test]
    fn rank1_update_examples() {
        let mut m = random(3, 3);
        let before = m.clone();
        m.rank1_update(1, 2, c(0., 0.)).unwrap();
        assert_eq!(m, before);

        let mut z = ComplexMatrix::zeros(3);
        z.rank1_update(0, 0, c(1., 1.)).unwrap();
        assert_eq!(z.entries().iter().filter(|e| e.norm() != 0.0).count(), 1);
        assert_eq!(z[(0, 0)], c(1., 1.));

        let d = c(0.25, -0.5);
        m.rank1_update(2, 0, d).unwrap();
        m.rank1_update(2, 0, -d).unwrap();
        assert_eq!(m, before);

        assert!(matches!(m.rank1_update(3, 0, d), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn fused_traces_match_naive() {
        for n in [1, 2, 5, 9] {
            let a = random(n, 10 + n as u64);
            let b = random(n, 20 + n as u64);
            let naive = (&a * &b).trace();
            let fused = a.trace_of_product(&b).unwrap();
            assert!((naive - fused).norm() <= 1e-12 * naive.norm().max(1.0));
            let naive_d = (&a * &b.dagger()).trace();
            let fused_d = a.trace_of_product_dagger(&b).unwrap();
            assert!((naive_d - fused_d).norm() <= 1e-12 * naive_d.norm().max(1.0));
            assert!(rel_close((&a * &a.dagger()).trace_real(), a.frobenius_norm_sqr(), 1e-12));
        }
    }

    proptest! {
        #[test]
        fn dagger_is_an_involution(seed in any::<u64>(), n in 1usize..7) {
            let m = random(n, seed);
            prop_assert_eq!(m.dagger().dagger(), m);
        }

        #[test]
        fn gauge_combinations_are_hermitian(seed in any::<u64>(), n in 1usize..8) {
            let z = random(n, seed);
            let zd = z.dagger();
            let k = zd.commutator(&z).unwrap();
            let a = zd.anticommutator(&z).unwrap();
            prop_assert!(k.max_abs_diff(&k.dagger()) <= 1e-13);
            prop_assert!(a.max_abs_diff(&a.dagger()) <= 1e-13);
            prop_assert!(a.trace_real() >= 0.0);
        }

        #[test]
        fn gram_trace_is_nonnegative(seed in any::<u64>(), n in 1usize..8) {
            let m = random(n, seed);
            prop_assert!((&m * &m.dagger()).trace_real() >= 0.0);
        }

        #[test]
        fn trace_is_cyclic(seed in any::<u64>(), n in 1usize..8) {
            let a = random(n, seed);
            let b = random(n, seed.wrapping_add(1));
            let cm = random(n, seed.wrapping_add(2));
            prop_assert!(rel_close((&a * &b).trace_real(), (&b * &a).trace_real(), 1e-12));
            let abc = (&(&a * &b) * &cm).trace_real();
            let bca = (&(&b * &cm) * &a).trace_real();
            let cab = (&(&cm * &a) * &b).trace_real();
            prop_assert!(rel_close(abc, bca, 1e-12));
            prop_assert!(rel_close(abc, cab, 1e-12));
        }

        #[test]
        fn operations_stay_finite(seed in any::<u64>(), n in 1usize..6) {
            let a = random(n, seed);
            let b = random(n, seed ^ 0xdead);
            prop_assert!(a.commutator(&b).unwrap().is_finite());
            prop_assert!(a.anticommutator(&b).unwrap().is_finite());
            prop_assert!((&a * &b).is_finite());
        }
    }
}
