//! Incremental action updates for single-entry moves.
//!
//! Every trace term of the action is `w Tr(X^2)` or `w Tr(X X^dagger)` for an
//! inner matrix `X` that is a sum of products of two field factors plus
//! linear field terms. Changing one entry `(r, c)` of one field perturbs a
//! factor in at most two entries, so each affected product changes only in a
//! couple of rows and columns. The cache keeps every `X` and represents the
//! perturbation as a set of row and column corrections, from which the
//! change of each trace follows in `O(N)` per correction pair.

use num_complex::Complex64;

use super::{covariant_pairs, linear_pair, potential_groups, ActionTerms};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{derive_coeffs, DerivedCoeffs, Dim, FieldConfig, ModelParams, Site};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A matrix built directly from one field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Factor {
    Psi,
    PsiDag,
    Z(usize),
    ZDag(usize),
    /// `Z + Z^dagger`
    Herm(usize),
    /// `Z - Z^dagger`
    Anti(usize),
}

impl Factor {
    fn field(self) -> usize {
        match self {
            Factor::Psi | Factor::PsiDag => 0,
            Factor::Z(i) | Factor::ZDag(i) | Factor::Herm(i) | Factor::Anti(i) => i + 1,
        }
    }

    fn source(self, cfg: &FieldConfig) -> &ComplexMatrix {
        cfg.field(self.field())
    }

    #[inline]
    fn entry(self, cfg: &FieldConfig, i: usize, j: usize) -> Complex64 {
        let m = self.source(cfg);
        match self {
            Factor::Psi | Factor::Z(_) => m[(i, j)],
            Factor::PsiDag | Factor::ZDag(_) => m[(j, i)].conj(),
            Factor::Herm(_) => m[(i, j)] + m[(j, i)].conj(),
            Factor::Anti(_) => m[(i, j)] - m[(j, i)].conj(),
        }
    }

    fn materialize(self, cfg: &FieldConfig) -> ComplexMatrix {
        let n = cfg.n();
        ComplexMatrix::from_fn(n, |i, j| self.entry(cfg, i, j))
    }

    /// `out[k] += scale * F[row, k]`
    fn add_row(self, cfg: &FieldConfig, row: usize, scale: Complex64, out: &mut [Complex64]) {
        let m = self.source(cfg);
        match self {
            Factor::Psi | Factor::Z(_) => {
                for (o, v) in out.iter_mut().zip(m.row(row)) {
                    *o += scale * v;
                }
            }
            _ => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o += scale * self.entry(cfg, row, k);
                }
            }
        }
    }

    /// `out[k] += scale * F[k, col]`
    fn add_col(self, cfg: &FieldConfig, col: usize, scale: Complex64, out: &mut [Complex64]) {
        let m = self.source(cfg);
        match self {
            Factor::PsiDag | Factor::ZDag(_) => {
                for (o, v) in out.iter_mut().zip(m.row(col)) {
                    *o += scale * v.conj();
                }
            }
            _ => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o += scale * self.entry(cfg, k, col);
                }
            }
        }
    }

    /// Entries of the change of this factor when `site` moves by `delta`.
    fn delta(self, site: Site, delta: Complex64) -> SparseDelta {
        let mut out = SparseDelta::default();
        if self.field() != site.field {
            return out;
        }
        let (r, c) = (site.row, site.col);
        match self {
            Factor::Psi | Factor::Z(_) => out.push(r, c, delta),
            Factor::PsiDag | Factor::ZDag(_) => out.push(c, r, delta.conj()),
            Factor::Herm(_) => {
                out.push(r, c, delta);
                out.push(c, r, delta.conj());
            }
            Factor::Anti(_) => {
                out.push(r, c, delta);
                out.push(c, r, -delta.conj());
            }
        }
        out
    }
}

/// At most two entries, merged when they coincide.
#[derive(Default, Clone, Copy)]
struct SparseDelta {
    entries: [(usize, usize, Complex64); 2],
    len: usize,
}

impl SparseDelta {
    fn push(&mut self, i: usize, j: usize, v: Complex64) {
        for e in &mut self.entries[..self.len] {
            if e.0 == i && e.1 == j {
                e.2 += v;
                return;
            }
        }
        self.entries[self.len] = (i, j, v);
        self.len += 1;
    }

    fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries[..self.len].iter().copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    F,
    V0,
    V1,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    /// `Tr(X X)`
    Square,
    /// `Tr(X X^dagger)`
    Gram,
}

#[derive(Clone, Debug)]
struct InnerSpec {
    part: Part,
    form: Form,
    weight: f64,
    products: Vec<(Complex64, Factor, Factor)>,
    linears: Vec<(Complex64, Factor)>,
    /// Bit `f` set when field `f` appears in the inner matrix.
    depends: u32,
}

impl InnerSpec {
    fn new(part: Part, form: Form, weight: f64) -> Self {
        InnerSpec {
            part,
            form,
            weight,
            products: Vec::new(),
            linears: Vec::new(),
            depends: 0,
        }
    }

    fn product(mut self, coef: f64, a: Factor, b: Factor) -> Self {
        self.products.push((Complex64::new(coef, 0.0), a, b));
        self.depends |= 1 << a.field() | 1 << b.field();
        self
    }

    fn commutator(self, coef: f64, a: Factor, b: Factor) -> Self {
        self.product(coef, a, b).product(-coef, b, a)
    }

    fn linear(mut self, coef: Complex64, a: Factor) -> Self {
        if coef != ZERO {
            self.linears.push((coef, a));
            self.depends |= 1 << a.field();
        }
        self
    }

    fn build(&self, cfg: &FieldConfig) -> ComplexMatrix {
        let n = cfg.n();
        let mut x = ComplexMatrix::zeros(n);
        let mut prod = ComplexMatrix::zeros(n);
        for &(coef, a, b) in &self.products {
            a.materialize(cfg).matmul_into(&b.materialize(cfg), &mut prod);
            x.axpy(coef, &prod);
        }
        for &(coef, a) in &self.linears {
            x.axpy(coef, &a.materialize(cfg));
        }
        x
    }

    fn value(&self, x: &ComplexMatrix) -> Complex64 {
        match self.form {
            Form::Square => x.trace_of_product(x).expect("same matrix") * self.weight,
            Form::Gram => Complex64::new(x.frobenius_norm_sqr() * self.weight, 0.0),
        }
    }
}

fn build_specs(params: &ModelParams, coeffs: &DerivedCoeffs) -> Vec<InnerSpec> {
    use Factor::*;
    let mut specs = Vec::new();

    let half_d = coeffs.d_coeff / 2.0;
    if half_d != 0.0 {
        for i in 0..2 {
            specs.push(InnerSpec::new(Part::F, Form::Square, half_d).commutator(1.0, ZDag(i), Z(i)));
        }
        if params.dim == Dim::Four {
            let w = half_d / 4.0;
            for (a, b) in [(0, 2), (1, 3)] {
                for (sign, x, y) in [
                    (1.0, Herm(a), Anti(b)),
                    (-1.0, Herm(a), Herm(b)),
                    (1.0, Anti(a), Herm(b)),
                    (-1.0, Anti(a), Anti(b)),
                ] {
                    specs.push(InnerSpec::new(Part::F, Form::Square, sign * w).commutator(1.0, x, y));
                }
            }
        }
    }

    let (lin_z, lin_zd) = linear_pair(params.linear_term);
    let v_lin = coeffs.v_lin;
    let mu_cos = Complex64::new(coeffs.mu_cos, 0.0);
    let (group0, group1) = potential_groups(params.dim);
    for (part, quadratic, group) in [(Part::V0, (Psi, PsiDag), group0), (Part::V1, (PsiDag, Psi), group1)] {
        let mut spec = InnerSpec::new(part, Form::Square, 1.0)
            .product(1.0, quadratic.0, quadratic.1)
            .linear(mu_cos, Psi)
            .linear(mu_cos, PsiDag);
        for &i in group {
            spec = spec
                .product(0.5, ZDag(i), Z(i))
                .product(0.5, Z(i), ZDag(i))
                .linear(lin_z * v_lin, Z(i))
                .linear(lin_zd * v_lin, ZDag(i));
        }
        specs.push(spec);
    }

    let s = coeffs.d_prefactor;
    let sc = Complex64::new(s * coeffs.mu_cos, 0.0);
    for (j, &(lo, hi)) in covariant_pairs(params.dim).iter().enumerate() {
        let (x_lo, x_hi) = if j % 2 == 0 { (Herm(lo), Herm(hi)) } else { (Anti(lo), Anti(hi)) };
        specs.push(
            InnerSpec::new(Part::D, Form::Gram, 1.0)
                .product(s, Psi, x_hi)
                .product(-s, x_lo, Psi)
                .linear(sc, x_hi)
                .linear(-sc, x_lo),
        );
    }
    specs
}

/// Row and column corrections `sum_p e_p a_p^T + sum_q b_q e_q^T`, with reusable storage.
#[derive(Clone, Debug)]
struct LowRank {
    n: usize,
    row_idx: Vec<usize>,
    row_val: Vec<Complex64>,
    col_idx: Vec<usize>,
    col_val: Vec<Complex64>,
}

impl LowRank {
    fn new(n: usize) -> Self {
        LowRank {
            n,
            row_idx: Vec::with_capacity(4),
            row_val: Vec::with_capacity(4 * n),
            col_idx: Vec::with_capacity(4),
            col_val: Vec::with_capacity(4 * n),
        }
    }

    fn clear(&mut self) {
        self.row_idx.clear();
        self.row_val.clear();
        self.col_idx.clear();
        self.col_val.clear();
    }

    fn row(&mut self, p: usize) -> &mut [Complex64] {
        let n = self.n;
        let slot = match self.row_idx.iter().position(|&q| q == p) {
            Some(s) => s,
            None => {
                self.row_idx.push(p);
                self.row_val.resize(self.row_val.len() + n, ZERO);
                self.row_idx.len() - 1
            }
        };
        &mut self.row_val[slot * n..(slot + 1) * n]
    }

    fn col(&mut self, q: usize) -> &mut [Complex64] {
        let n = self.n;
        let slot = match self.col_idx.iter().position(|&p| p == q) {
            Some(s) => s,
            None => {
                self.col_idx.push(q);
                self.col_val.resize(self.col_val.len() + n, ZERO);
                self.col_idx.len() - 1
            }
        };
        &mut self.col_val[slot * n..(slot + 1) * n]
    }

    fn rows(&self) -> impl Iterator<Item = (usize, &[Complex64])> {
        self.row_idx.iter().copied().zip(self.row_val.chunks_exact(self.n))
    }

    fn cols(&self) -> impl Iterator<Item = (usize, &[Complex64])> {
        self.col_idx.iter().copied().zip(self.col_val.chunks_exact(self.n))
    }

    /// Change of `Tr(X^2)` when `X -> X + self`.
    fn square_delta(&self, x: &ComplexMatrix) -> Complex64 {
        let n = self.n;
        let mut cross = ZERO;
        for (p, a) in self.rows() {
            for (j, aj) in a.iter().enumerate() {
                cross += aj * x[(j, p)];
            }
        }
        for (q, b) in self.cols() {
            for (xv, bj) in x.row(q).iter().zip(b) {
                cross += xv * bj;
            }
        }
        let mut quad = ZERO;
        for (p, a) in self.rows() {
            for (p2, a2) in self.rows() {
                quad += a[p2] * a2[p];
            }
        }
        for (q, b) in self.cols() {
            for (q2, b2) in self.cols() {
                quad += b2[q] * b[q2];
            }
        }
        for (p, a) in self.rows() {
            for (q, b) in self.cols() {
                if p == q {
                    let dot: Complex64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
                    quad += dot * 2.0;
                }
            }
        }
        debug_assert!(n == x.n());
        cross * 2.0 + quad
    }

    /// Change of `Tr(X X^dagger)` when `X -> X + self`.
    fn gram_delta(&self, x: &ComplexMatrix) -> f64 {
        let mut cross = ZERO;
        for (p, a) in self.rows() {
            for (aj, xv) in a.iter().zip(x.row(p)) {
                cross += aj * xv.conj();
            }
        }
        for (q, b) in self.cols() {
            for (j, bj) in b.iter().enumerate() {
                cross += x[(j, q)].conj() * bj;
            }
        }
        let mut quad = 0.0;
        for (_, a) in self.rows() {
            quad += a.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        for (_, b) in self.cols() {
            quad += b.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        for (p, a) in self.rows() {
            for (q, b) in self.cols() {
                quad += 2.0 * (a[q] * b[p].conj()).re;
            }
        }
        2.0 * cross.re + quad
    }

    fn apply(&self, x: &mut ComplexMatrix) {
        for (p, a) in self.rows() {
            for (xv, av) in x.row_mut(p).iter_mut().zip(a) {
                *xv += av;
            }
        }
        for (q, b) in self.cols() {
            for (j, bj) in b.iter().enumerate() {
                x[(j, q)] += bj;
            }
        }
    }
}

/// Cached inner matrices and running term values for one configuration.
#[derive(Clone, Debug)]
pub struct ActionCache {
    specs: Vec<InnerSpec>,
    inner: Vec<ComplexMatrix>,
    /// Weighted trace of each inner matrix.
    values: Vec<Complex64>,
    terms: ActionTerms,
    staleness: u64,
    // Scratch for the last proposal.
    scratch: Vec<LowRank>,
    pending_delta: Vec<Complex64>,
    pending: Option<(Site, Complex64)>,
}

impl ActionCache {
    pub fn new(params: &ModelParams, coeffs: &DerivedCoeffs, cfg: &FieldConfig) -> Result<Self> {
        cfg.check(params)?;
        let specs = build_specs(params, coeffs);
        let n = params.n;
        let count = specs.len();
        let mut cache = ActionCache {
            specs,
            inner: Vec::with_capacity(count),
            values: vec![ZERO; count],
            terms: ActionTerms::default(),
            staleness: 0,
            scratch: (0..count).map(|_| LowRank::new(n)).collect(),
            pending_delta: vec![ZERO; count],
            pending: None,
        };
        cache.refresh(cfg);
        Ok(cache)
    }

    pub fn terms(&self) -> &ActionTerms {
        &self.terms
    }

    /// Commits since the last refresh.
    pub fn staleness(&self) -> u64 {
        self.staleness
    }

    /// Rebuilds every inner matrix from the fields and returns the relative
    /// drift `|S_cached - S_fresh| / (1 + |S_fresh|)` of the running total.
    pub fn refresh(&mut self, cfg: &FieldConfig) -> f64 {
        let before = self.terms.total;
        let had_state = !self.inner.is_empty();
        self.inner = self.specs.iter().map(|s| s.build(cfg)).collect();
        for (v, (spec, x)) in self.values.iter_mut().zip(self.specs.iter().zip(&self.inner)) {
            *v = spec.value(x);
        }
        self.terms = self.sum_terms();
        self.staleness = 0;
        self.pending = None;
        if had_state {
            (before - self.terms.total).abs() / (1.0 + self.terms.total.abs())
        } else {
            0.0
        }
    }

    fn sum_terms(&self) -> ActionTerms {
        let mut parts = [ZERO; 4];
        for (spec, v) in self.specs.iter().zip(&self.values) {
            parts[spec.part as usize] += v;
        }
        ActionTerms::from_parts(parts[0], parts[1], parts[2], parts[3])
    }

    /// `S(cfg + delta e_site) - S(cfg)`. Leaves the configuration and terms untouched.
    pub fn propose_delta(&mut self, cfg: &FieldConfig, site: Site, delta: Complex64) -> f64 {
        debug_assert!(site.field < cfg.num_fields() && site.row < cfg.n() && site.col < cfg.n());
        self.pending = Some((site, delta));
        let bit = 1u32 << site.field;
        let mut total = 0.0;
        for idx in 0..self.specs.len() {
            let spec = &self.specs[idx];
            if spec.depends & bit == 0 || delta == ZERO {
                self.pending_delta[idx] = ZERO;
                self.scratch[idx].clear();
                continue;
            }
            let lr = &mut self.scratch[idx];
            fill_low_rank(spec, cfg, site, delta, lr);
            let x = &self.inner[idx];
            let dv = match spec.form {
                Form::Square => lr.square_delta(x) * spec.weight,
                Form::Gram => Complex64::new(lr.gram_delta(x) * spec.weight, 0.0),
            };
            self.pending_delta[idx] = dv;
            total += dv.re;
        }
        total
    }

    /// Applies the move to `cfg` and updates every cached matrix and term.
    pub fn commit(&mut self, cfg: &mut FieldConfig, site: Site, delta: Complex64) {
        if self.pending != Some((site, delta)) {
            self.propose_delta(cfg, site, delta);
        }
        self.pending = None;
        if delta == ZERO {
            return;
        }
        let bit = 1u32 << site.field;
        for idx in 0..self.specs.len() {
            if self.specs[idx].depends & bit == 0 {
                continue;
            }
            self.scratch[idx].apply(&mut self.inner[idx]);
            self.values[idx] += self.pending_delta[idx];
        }
        cfg.field_mut(site.field)[(site.row, site.col)] += delta;
        self.terms = self.sum_terms();
        self.staleness += 1;
    }
}

/// Writes the change of `spec`'s inner matrix under the move into `lr`.
fn fill_low_rank(spec: &InnerSpec, cfg: &FieldConfig, site: Site, delta: Complex64, lr: &mut LowRank) {
    lr.clear();
    for &(coef, a, b) in &spec.products {
        let da = a.delta(site, delta);
        let db = b.delta(site, delta);
        // (A + dA)(B + dB) - AB = dA B + A dB + dA dB
        for (i, j, x) in da.iter() {
            b.add_row(cfg, j, coef * x, lr.row(i));
        }
        for (i, j, y) in db.iter() {
            a.add_col(cfg, i, coef * y, lr.col(j));
        }
        for (i, j, x) in da.iter() {
            for (k, l, y) in db.iter() {
                if j == k {
                    lr.row(i)[l] += coef * x * y;
                }
            }
        }
    }
    for &(coef, a) in &spec.linears {
        for (i, j, x) in a.delta(site, delta).iter() {
            lr.row(i)[j] += coef * x;
        }
    }
}

/// Fields plus their action cache: the state the sampler moves through.
#[derive(Clone, Debug)]
pub struct MatrixAction {
    params: ModelParams,
    coeffs: DerivedCoeffs,
    config: FieldConfig,
    cache: ActionCache,
}

impl MatrixAction {
    pub fn new(params: ModelParams, config: FieldConfig) -> Result<Self> {
        params.validate()?;
        let coeffs = derive_coeffs(&params);
        let cache = ActionCache::new(&params, &coeffs, &config)?;
        Ok(MatrixAction {
            params,
            coeffs,
            config,
            cache,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn coeffs(&self) -> &DerivedCoeffs {
        &self.coeffs
    }

    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    pub fn terms(&self) -> &ActionTerms {
        self.cache.terms()
    }

    pub fn cache(&self) -> &ActionCache {
        &self.cache
    }

    pub fn num_sites(&self) -> usize {
        self.config.num_fields() * self.params.n * self.params.n
    }

    fn check_site(&self, site: Site) -> Result<()> {
        let n = self.params.n;
        if site.field >= self.config.num_fields() || site.row >= n || site.col >= n {
            return Err(Error::IndexOutOfRange {
                row: site.row,
                col: site.col,
                n,
            });
        }
        Ok(())
    }

    pub fn propose_delta(&mut self, site: Site, delta: Complex64) -> Result<f64> {
        self.check_site(site)?;
        Ok(self.cache.propose_delta(&self.config, site, delta))
    }

    pub fn commit(&mut self, site: Site, delta: Complex64) -> Result<()> {
        self.check_site(site)?;
        self.cache.commit(&mut self.config, site, delta);
        Ok(())
    }

    /// Recomputes the cache from the fields; returns the relative drift that had built up.
    pub fn refresh(&mut self) -> f64 {
        self.cache.refresh(&self.config)
    }

    /// Replaces the fields wholesale (checkpoint restore).
    pub fn set_config(&mut self, config: FieldConfig) -> Result<()> {
        config.check(&self.params)?;
        self.config = config;
        self.cache.refresh(&self.config);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::eval_full;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64, scale: f64) -> f64 {
        (a - b).abs() / (1.0 + scale.abs())
    }

    fn random_params<R: Rng>(rng: &mut R, dim: Dim, n: usize, alpha: f64) -> ModelParams {
        ModelParams::new(dim, n, rng.random_range(0.0..=1.0), rng.random_range(0.0..3.0), alpha).unwrap()
    }

    fn random_site<R: Rng>(rng: &mut R, p: &ModelParams) -> (Site, Complex64) {
        let site = Site::new(
            rng.random_range(0..p.dim.num_fields()),
            rng.random_range(0..p.n),
            rng.random_range(0..p.n),
        );
        let d = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        (site, d)
    }

    #[test]
    fn cached_terms_match_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [Dim::Two, Dim::Four] {
            for n in [1, 2, 3, 5] {
                for alpha in [0.0, 1.3] {
                    let p = random_params(&mut rng, dim, n, alpha);
                    let cfg = FieldConfig::random(&p, 1.5, &mut rng).unwrap();
                    let cache = ActionCache::new(&p, &p.coeffs(), &cfg).unwrap();
                    let full = eval_full(&p, &p.coeffs(), &cfg).unwrap();
                    let t = cache.terms();
                    for (a, b) in [
                        (t.f_term, full.f_term),
                        (t.v0_term, full.v0_term),
                        (t.v1_term, full.v1_term),
                        (t.d_term, full.d_term),
                        (t.total, full.total),
                    ] {
                        assert!(rel(a, b, full.total) < 1e-12, "{dim:?} n={n}: {a} vs {b}");
                    }
                    assert!((t.imag_residual - full.imag_residual).abs() < 1e-9 * (1.0 + full.total.abs()));
                }
            }
        }
    }

    #[test]
    fn proposal_matches_full_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..4000 {
            let dim = if trial % 2 == 0 { Dim::Two } else { Dim::Four };
            let n = [1, 2, 3, 5][trial % 4];
            let alpha = if trial % 3 == 0 { rng.random_range(0.0..6.28) } else { 0.0 };
            let p = random_params(&mut rng, dim, n, alpha);
            let mut cfg = FieldConfig::random(&p, 1.5, &mut rng).unwrap();
            let mut cache = ActionCache::new(&p, &p.coeffs(), &cfg).unwrap();
            let before = eval_full(&p, &p.coeffs(), &cfg).unwrap().total;
            let (site, d) = random_site(&mut rng, &p);
            let ds = cache.propose_delta(&cfg, site, d);
            cfg.field_mut(site.field)[(site.row, site.col)] += d;
            let after = eval_full(&p, &p.coeffs(), &cfg).unwrap().total;
            assert!(
                (ds - (after - before)).abs() <= 1e-8 * (1.0 + before.abs()),
                "{dim:?} n={n} {site:?}: {ds} vs {}",
                after - before
            );
        }
    }

    #[test]
    fn zero_move_is_free_and_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_params(&mut rng, Dim::Four, 4, 0.0);
        let mut cfg = FieldConfig::random(&p, 1.0, &mut rng).unwrap();
        let mut cache = ActionCache::new(&p, &p.coeffs(), &cfg).unwrap();
        let site = Site::new(2, 1, 3);
        assert_eq!(cache.propose_delta(&cfg, site, ZERO), 0.0);
        let before = *cache.terms();
        let cfg_before = cfg.clone();
        cache.commit(&mut cfg, site, ZERO);
        assert_eq!(*cache.terms(), before);
        assert_eq!(cfg, cfg_before);
    }

    #[test]
    fn commit_tracks_full_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dim in [Dim::Two, Dim::Four] {
            let p = random_params(&mut rng, dim, 5, 0.0);
            let mut cfg = FieldConfig::random(&p, 1.0, &mut rng).unwrap();
            let mut cache = ActionCache::new(&p, &p.coeffs(), &cfg).unwrap();
            for _ in 0..50 {
                let (site, d) = random_site(&mut rng, &p);
                cache.propose_delta(&cfg, site, d);
                cache.commit(&mut cfg, site, d);
                let full = eval_full(&p, &p.coeffs(), &cfg).unwrap();
                assert!(rel(cache.terms().total, full.total, full.total) < 1e-9);
            }
            assert_eq!(cache.staleness(), 50);
        }
    }

    #[test]
    fn reversed_move_negates_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_params(&mut rng, Dim::Two, 3, 0.0);
        let mut cfg = FieldConfig::random(&p, 1.0, &mut rng).unwrap();
        let mut cache = ActionCache::new(&p, &p.coeffs(), &cfg).unwrap();
        let (site, d) = random_site(&mut rng, &p);
        let first = cache.propose_delta(&cfg, site, d);
        cache.commit(&mut cfg, site, d);
        let second = cache.propose_delta(&cfg, site, -d);
        assert!((first + second).abs() <= 1e-8 * (1.0 + first.abs()));
    }

    #[test]
    fn refresh_is_idempotent_and_resets_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = random_params(&mut rng, Dim::Four, 3, 0.0);
        let mut cfg = FieldConfig::random(&p, 1.0, &mut rng).unwrap();
        let mut cache = ActionCache::new(&p, &p.coeffs(), &cfg).unwrap();
        let fresh = *cache.terms();
        assert!(cache.refresh(&cfg) <= 1e-12);
        assert!(rel(cache.terms().total, fresh.total, fresh.total) <= 1e-12);

        for _ in 0..10_000 {
            let (site, d) = random_site(&mut rng, &p);
            let d = d * 0.1;
            cache.propose_delta(&cfg, site, d);
            cache.commit(&mut cfg, site, d);
        }
        cache.refresh(&cfg);
        let once = *cache.terms();
        cache.refresh(&cfg);
        assert_eq!(*cache.terms(), once);
        let full = eval_full(&p, &p.coeffs(), &cfg).unwrap();
        assert!(rel(once.total, full.total, full.total) <= 1e-12);
        assert_eq!(cache.staleness(), 0);
    }

    #[test]
    fn out_of_range_site_is_rejected() {
        let p = ModelParams::new(Dim::Two, 3, 0.5, 1.0, 0.0).unwrap();
        let mut m = MatrixAction::new(p, FieldConfig::zero(&p)).unwrap();
        assert!(m.propose_delta(Site::new(3, 0, 0), Complex64::new(1.0, 0.0)).is_err());
        assert!(m.propose_delta(Site::new(0, 3, 0), Complex64::new(1.0, 0.0)).is_err());
        assert!(m.propose_delta(Site::new(2, 2, 2), Complex64::new(1.0, 0.0)).is_ok());
    }
}
