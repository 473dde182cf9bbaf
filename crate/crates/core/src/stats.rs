//! Error analysis for Monte Carlo time series.
//!
//! Four estimators of the error of a mean: the naive uncorrelated formula,
//! binning, jackknife (which also handles nonlinear derived quantities) and
//! the integrated autocorrelation time with a self-consistent summation
//! window. The normalized autocorrelation `A(k)` divides the lag-`k`
//! autocovariance, averaged over the `T - k` valid pairs, by the global
//! variance of the series.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window constant `c` in the stopping rule `k > c * tau'(k)`.
/// Minimum number of blocks for jackknife errors of derived quantities.
pub const MIN_JACKKNIFE_BLOCKS: usize = 20;

pub const SOKAL_WINDOW: f64 = 6.0;

/// Lags evaluated by direct summation before switching to an FFT autocovariance.
const DIRECT_LAGS: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Uncorrelated,
    Binning,
    Jackknife,
    SokalMadras,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Uncorrelated => "uncorrelated",
            Method::Binning => "binning",
            Method::Jackknife => "jackknife",
            Method::SokalMadras => "sokal_madras",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub mean: f64,
    pub sigma: f64,
    /// Integrated autocorrelation time in units of the measurement interval.
    pub tau: f64,
    pub method: Method,
    /// Effective number of independent samples, `T / (2 tau)`, at most `T`.
    pub t_eff: f64,
    /// Summation window of the autocorrelation estimate, when one was computed.
    pub k_max: Option<usize>,
    /// Block length used by binning or jackknife.
    pub block_length: Option<usize>,
    /// Zero-variance input.
    pub degenerate: bool,
    /// The autocorrelation window never closed.
    pub unreliable: bool,
}

impl ErrorEstimate {
    pub(crate) fn plain(mean: f64, sigma: f64, method: Method, len: usize) -> Self {
        ErrorEstimate {
            mean,
            sigma,
            tau: 0.5,
            method,
            t_eff: len as f64,
            k_max: None,
            block_length: None,
            degenerate: false,
            unreliable: false,
        }
    }
}

/// Result of the self-consistent window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauEstimate {
    pub tau: f64,
    pub k_max: usize,
    pub degenerate: bool,
    pub unreliable: bool,
}

pub fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

/// `<x^2> - <x>^2` computed around the mean.
pub fn population_variance(series: &[f64]) -> f64 {
    let m = mean(series);
    series.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / series.len() as f64
}

fn t_eff(len: usize, tau: f64) -> f64 {
    if tau <= 0.0 {
        len as f64
    } else {
        (len as f64 / (2.0 * tau)).min(len as f64)
    }
}

pub fn naive_error(series: &[f64]) -> Result<ErrorEstimate> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort { len: series.len(), min: 2 });
    }
    let t = series.len();
    let var = population_variance(series);
    let mut est = ErrorEstimate::plain(mean(series), (var / (t - 1) as f64).sqrt(), Method::Uncorrelated, t);
    est.degenerate = var == 0.0;
    Ok(est)
}

/// Normalized autocorrelation at lag `k`; `None` for a constant series.
pub fn autocorr_function(series: &[f64], k: usize) -> Result<Option<f64>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    if k >= series.len() {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: k + 1,
        });
    }
    let m = mean(series);
    let var = population_variance(series);
    if var == 0.0 {
        return Ok(None);
    }
    Ok(Some(lag_covariance(series, m, k) / var))
}

fn lag_covariance(series: &[f64], m: f64, k: usize) -> f64 {
    let t = series.len();
    let sum: f64 = series[..t - k]
        .iter()
        .zip(&series[k..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    sum / (t - k) as f64
}

/// Lag covariances `0..=max_lag` (each averaged over its valid pairs) via zero-padded FFT.
fn lag_covariances_fft(series: &[f64], m: f64, max_lag: usize) -> Vec<f64> {
    let t = series.len();
    let size = (2 * t).next_power_of_two();
    let mut buf: Vec<Complex64> = series
        .iter()
        .map(|x| Complex64::new(x - m, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex64::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    (0..=max_lag.min(t - 1))
        .map(|k| buf[k].re / size as f64 / (t - k) as f64)
        .collect()
}

/// Normalized autocorrelations for lags `0..=max_lag`.
pub fn autocorrelations(series: &[f64], max_lag: usize) -> Result<Option<Vec<f64>>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let m = mean(series);
    let var = population_variance(series);
    if var == 0.0 {
        return Ok(None);
    }
    let max_lag = max_lag.min(series.len() - 1);
    let cov = if max_lag > DIRECT_LAGS {
        lag_covariances_fft(series, m, max_lag)
    } else {
        (0..=max_lag).map(|k| lag_covariance(series, m, k)).collect()
    };
    Ok(Some(cov.into_iter().map(|c| c / var).collect()))
}

/// Full-sum estimate `tau = 1/2 + sum_{k=1}^{T-1} A(k) (1 - k/T)`. Noisy; reference only.
pub fn full_tau(series: &[f64]) -> Result<f64> {
    let t = series.len();
    match autocorrelations(series, t.saturating_sub(1))? {
        None => Ok(0.5),
        Some(a) => Ok(0.5
            + a.iter()
                .enumerate()
                .skip(1)
                .map(|(k, ak)| ak * (1.0 - k as f64 / t as f64))
                .sum::<f64>()),
    }
}

/// Partial sums `tau'(k) = 1/2 + sum_{j<=k} A(j)`, stopped at the first `k > 6 tau'(k)`.
///
/// If the window never closes before `T/2` the value at `T/2` is returned
/// flagged unreliable. Negative partial sums (anticorrelated data) are clamped to zero.
pub fn sokal_madras_tau(series: &[f64]) -> Result<TauEstimate> {
    let t = series.len();
    if t < 10 {
        return Err(Error::SeriesTooShort { len: t, min: 10 });
    }
    let m = mean(series);
    let var = population_variance(series);
    if var == 0.0 {
        return Ok(TauEstimate {
            tau: 0.5,
            k_max: 0,
            degenerate: true,
            unreliable: false,
        });
    }
    let half = t / 2;
    let mut tau = 0.5;
    let direct = half.min(DIRECT_LAGS);
    for k in 1..=direct {
        tau += lag_covariance(series, m, k) / var;
        if k as f64 > SOKAL_WINDOW * tau {
            return Ok(closed(tau, k));
        }
    }
    if direct < half {
        let cov = lag_covariances_fft(series, m, half);
        for (k, c) in cov.iter().enumerate().skip(direct + 1) {
            tau += c / var;
            if k as f64 > SOKAL_WINDOW * tau {
                return Ok(closed(tau, k));
            }
        }
    }
    Ok(TauEstimate {
        tau: tau.max(0.0),
        k_max: half,
        degenerate: false,
        unreliable: true,
    })
}

fn closed(tau: f64, k: usize) -> TauEstimate {
    TauEstimate {
        tau: tau.max(0.0),
        k_max: k,
        degenerate: false,
        unreliable: false,
    }
}

/// Naive error inflated by the integrated autocorrelation time.
///
/// Uncorrelated data (`tau < 1/2`) falls back to [`naive_error`].
pub fn corrected_error(series: &[f64]) -> Result<ErrorEstimate> {
    let est = sokal_madras_tau(series)?;
    let t = series.len();
    let m = mean(series);
    if est.degenerate {
        let mut e = ErrorEstimate::plain(m, 0.0, Method::SokalMadras, t);
        e.degenerate = true;
        e.k_max = Some(0);
        return Ok(e);
    }
    if est.tau < 0.5 {
        let mut e = naive_error(series)?;
        e.tau = est.tau;
        e.k_max = Some(est.k_max);
        e.unreliable = est.unreliable;
        return Ok(e);
    }
    let var = population_variance(series);
    Ok(ErrorEstimate {
        mean: m,
        sigma: (2.0 * est.tau / t as f64 * var).sqrt(),
        tau: est.tau,
        method: Method::SokalMadras,
        t_eff: t_eff(t, est.tau),
        k_max: Some(est.k_max),
        block_length: None,
        degenerate: false,
        unreliable: est.unreliable,
    })
}

/// Powers of two from 1 up to `T/4`.
pub fn default_block_lengths(len: usize) -> Vec<usize> {
    let mut out = vec![1];
    let mut k = 2;
    while k <= len / 4 {
        out.push(k);
        k *= 2;
    }
    out
}

fn block_means(series: &[f64], k: usize) -> Vec<f64> {
    series.chunks_exact(k).map(|b| b.iter().sum::<f64>() / k as f64).collect()
}

/// Binning error for one block length; trailing samples that do not fill a block are dropped.
pub fn binning_sigma(series: &[f64], k: usize) -> Result<f64> {
    let blocks = if k == 0 { 0 } else { series.len() / k };
    if blocks < 2 {
        return Err(Error::TooFewBlocks { block_length: k, blocks });
    }
    let means = block_means(series, k);
    let m = mean(&means);
    let ss: f64 = means.iter().map(|b| (b - m) * (b - m)).sum();
    Ok((ss / (blocks * (blocks - 1)) as f64).sqrt())
}

/// Maximum binning error over the candidate block lengths.
pub fn binning_error(series: &[f64], block_lengths: &[usize]) -> Result<ErrorEstimate> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut best: Option<(usize, f64)> = None;
    for &k in block_lengths {
        if let Ok(s) = binning_sigma(series, k) {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((k, s));
            }
        }
    }
    let (k, sigma) = best.ok_or(Error::TooFewBlocks {
        block_length: block_lengths.iter().copied().min().unwrap_or(0),
        blocks: series.len() / block_lengths.iter().copied().min().unwrap_or(usize::MAX).max(1),
    })?;
    let t = series.len();
    let var = population_variance(series);
    let mut est = ErrorEstimate::plain(mean(series), sigma, Method::Binning, t);
    est.block_length = Some(k);
    est.degenerate = var == 0.0;
    if var > 0.0 {
        // sigma^2 = 2 tau var / T
        est.tau = sigma * sigma * t as f64 / (2.0 * var);
        est.t_eff = t_eff(t, est.tau);
    }
    Ok(est)
}

/// Jackknife error of the mean with blocks of length `k`.
pub fn jackknife_error(series: &[f64], k: usize) -> Result<ErrorEstimate> {
    let (value, sigma) = jackknife_derived(&[series], k, |m| m[0])?;
    let t = series.len();
    let var = population_variance(series);
    let mut est = ErrorEstimate::plain(value, sigma, Method::Jackknife, t);
    est.block_length = Some(k);
    est.degenerate = var == 0.0;
    if var > 0.0 {
        est.tau = sigma * sigma * t as f64 / (2.0 * var);
        est.t_eff = t_eff(t, est.tau);
    }
    Ok(est)
}

/// Jackknife of a function of several means.
///
/// `columns` are equally long series; `estimator` maps their means to the
/// derived quantity. Returns the estimator on the full (block-truncated)
/// data and its jackknife error.
pub fn jackknife_derived<F>(columns: &[&[f64]], k: usize, estimator: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    let len = columns.first().map(|c| c.len()).ok_or(Error::EmptySeries)?;
    if columns.iter().any(|c| c.len() != len) {
        return Err(Error::DimensionMismatch {
            left: len,
            right: columns.iter().map(|c| c.len()).find(|&l| l != len).unwrap_or(len),
        });
    }
    let blocks = if k == 0 { 0 } else { len / k };
    if blocks < 2 {
        return Err(Error::TooFewBlocks { block_length: k, blocks });
    }
    let used = blocks * k;
    let totals: Vec<f64> = columns.iter().map(|c| c[..used].iter().sum()).collect();
    let block_sums: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| c[..used].chunks_exact(k).map(|b| b.iter().sum()).collect())
        .collect();

    let full_means: Vec<f64> = totals.iter().map(|s| s / used as f64).collect();
    let value = estimator(&full_means);

    let mut samples = Vec::with_capacity(blocks);
    let mut means = vec![0.0; columns.len()];
    let rest = (used - k) as f64;
    for n in 0..blocks {
        for (c, m) in means.iter_mut().enumerate() {
            *m = (totals[c] - block_sums[c][n]) / rest;
        }
        samples.push(estimator(&means));
    }
    let jm = mean(&samples);
    let ss: f64 = samples.iter().map(|s| (s - jm) * (s - jm)).sum();
    let sigma = ((blocks - 1) as f64 / blocks as f64 * ss).sqrt();
    Ok((value, sigma))
}

/// Variance `<x^2> - <x>^2` with its jackknife error.
pub fn variance_jackknife(series: &[f64], k: usize) -> Result<(f64, f64)> {
    let squares: Vec<f64> = series.iter().map(|x| x * x).collect();
    jackknife_derived(&[series, &squares], k, |m| m[1] - m[0] * m[0])
}

/// Block length for jackknife of derived quantities: the smallest power of two
/// at least `2 tau`, reduced until there are at least `min_blocks` blocks.
pub fn jackknife_block_length(len: usize, tau: f64, min_blocks: usize) -> usize {
    let target = (2.0 * tau).ceil().max(1.0) as usize;
    let mut k = target.next_power_of_two();
    while k > 1 && len / k < min_blocks {
        k /= 2;
    }
    k
}

/// Variance `<x^2> - <x>^2` with a blocked jackknife error. The series is
/// centred first, which leaves the variance unchanged but avoids cancellation.
pub fn variance_error(series: &[f64]) -> Result<ErrorEstimate> {
    let m = mean(series);
    let centred: Vec<f64> = series.iter().map(|x| x - m).collect();
    let tau = if series.len() >= 10 {
        sokal_madras_tau(series)?.tau
    } else {
        0.5
    };
    let k = jackknife_block_length(series.len(), tau, MIN_JACKKNIFE_BLOCKS);
    let (value, sigma) = if series.len() >= 2 {
        variance_jackknife(&centred, k)?
    } else {
        (0.0, 0.0)
    };
    let mut e = ErrorEstimate::plain(value, sigma, Method::Jackknife, series.len());
    e.tau = tau;
    e.block_length = Some(k);
    e.t_eff = (series.len() as f64 / (2.0 * tau).max(1.0)).min(series.len() as f64);
    // The blocked truncation can leave a tiny nonzero value for a constant input.
    if population_variance(series) == 0.0 {
        e.mean = 0.0;
        e.sigma = 0.0;
        e.degenerate = true;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr_free::ar1;

    /// Test-only series generators.
    mod rand_distr_free {
        use super::*;

        pub fn normal<R: Rng>(rng: &mut R) -> f64 {
            // Box-Muller; independent of any library sampler.
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        }

        pub fn ar1(rho: f64, len: usize, seed: u64) -> Vec<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = (1.0 - rho * rho).sqrt();
            let mut x = normal(&mut rng);
            (0..len)
                .map(|_| {
                    x = rho * x + scale * normal(&mut rng);
                    x
                })
                .collect()
        }
    }

    fn uniform(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random::<f64>()).collect()
    }

    fn alternating(len: usize) -> Vec<f64> {
        (0..len).map(|i| (i % 2) as f64).collect()
    }

    #[test]
    fn naive_error_examples() {
        let e = naive_error(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!((e.mean, e.sigma), (1.0, 0.0));
        let e = naive_error(&[0.0, 2.0]).unwrap();
        assert_eq!((e.mean, e.sigma), (1.0, 1.0));
        assert!(naive_error(&[1.0]).is_err());

        let t = 100_000;
        let e = naive_error(&uniform(t, 1)).unwrap();
        let expected = (1.0 / 12.0 / t as f64).sqrt();
        assert!((e.sigma / expected - 1.0).abs() < 0.1);
    }

    #[test]
    fn autocorrelation_examples() {
        let s = uniform(1000, 2);
        assert!((autocorr_function(&s, 0).unwrap().unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(autocorr_function(&alternating(20), 1).unwrap(), Some(-1.0));
        assert_eq!(autocorr_function(&[3.0; 12], 1).unwrap(), None);
        assert!(autocorr_function(&s, 1000).is_err());

        let iid = uniform(100_000, 3);
        assert!(autocorr_function(&iid, 10).unwrap().unwrap().abs() < 0.02);
    }

    #[test]
    fn fft_autocovariance_matches_direct_sum() {
        let s = ar1(0.7, 3000, 4);
        let m = mean(&s);
        let fft = lag_covariances_fft(&s, m, 1500);
        for (k, c) in fft.iter().enumerate() {
            assert!((c - lag_covariance(&s, m, k)).abs() < 1e-10, "lag {k}");
        }
    }

    #[test]
    fn tau_of_uncorrelated_data() {
        let t = sokal_madras_tau(&uniform(100_000, 5)).unwrap();
        assert!((0.4..=0.6).contains(&t.tau), "{t:?}");
        assert!(!t.unreliable);
    }

    #[test]
    fn tau_of_ar1() {
        let t = sokal_madras_tau(&ar1(0.9, 1_000_000, 6)).unwrap();
        assert!((t.tau / 9.5 - 1.0).abs() < 0.15, "{t:?}");
    }

    #[test]
    fn tau_of_alternating_series_closes_immediately() {
        let t = sokal_madras_tau(&alternating(1000)).unwrap();
        assert_eq!(t.k_max, 1);
        assert!(t.tau.abs() < 1e-12);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s = [2.5; 50];
        let t = sokal_madras_tau(&s).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.tau, 0.5);
        let e = corrected_error(&s).unwrap();
        assert_eq!(e.sigma, 0.0);
        assert!(e.degenerate);
        assert_eq!(jackknife_error(&s, 5).unwrap().sigma, 0.0);
    }

    #[test]
    fn window_that_never_closes_is_flagged() {
        let s: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let t = sokal_madras_tau(&s).unwrap();
        assert!(t.unreliable);
        assert_eq!(t.k_max, 100);
    }

    #[test]
    fn corrected_error_branches() {
        let iid = uniform(50_000, 7);
        let naive = naive_error(&iid).unwrap();
        let corr = corrected_error(&iid).unwrap();
        if corr.tau < 0.5 {
            assert!((corr.sigma - naive.sigma).abs() < 1e-12);
            assert_eq!(corr.method, Method::Uncorrelated);
        }

        let s = ar1(0.9, 1_000_000, 8);
        let naive = naive_error(&s).unwrap();
        let corr = corrected_error(&s).unwrap();
        assert_eq!(corr.method, Method::SokalMadras);
        let expected = (2.0f64 * 9.5).sqrt() * naive.sigma;
        assert!((corr.sigma / expected - 1.0).abs() < 0.2, "{} vs {}", corr.sigma, expected);
    }

    #[test]
    fn binning_examples() {
        let iid = uniform(65_536, 9);
        let naive = naive_error(&iid).unwrap().sigma;
        for k in [1, 4, 16, 64] {
            let s = binning_sigma(&iid, k).unwrap();
            assert!((s / naive - 1.0).abs() < 0.25, "k={k}: {s} vs {naive}");
        }
        assert!(binning_sigma(&iid, iid.len()).is_err());
        assert!(binning_error(&iid, &[iid.len()]).is_err());

        let s = ar1(0.9, 1 << 20, 10);
        let corrected = corrected_error(&s).unwrap().sigma;
        let small = binning_sigma(&s, 1).unwrap();
        let plateau = binning_sigma(&s, 1024).unwrap();
        assert!(plateau > 3.0 * small);
        assert!((plateau / corrected - 1.0).abs() < 0.25, "{plateau} vs {corrected}");
        let best = binning_error(&s, &default_block_lengths(s.len())).unwrap();
        assert!(best.sigma >= plateau);
    }

    #[test]
    fn jackknife_of_mean_equals_binning() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let len = rng.random_range(20..2000);
            let s: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
            let k = rng.random_range(1..=len / 2);
            let jk = jackknife_error(&s, k).unwrap().sigma;
            let bin = binning_sigma(&s, k).unwrap();
            assert!((jk - bin).abs() <= 1e-10 * bin.max(1.0), "{jk} vs {bin}");
        }
    }

    #[test]
    fn jackknife_variance_of_gaussian() {
        let s = ar1(0.0, 100_000, 12);
        let (v, err) = variance_jackknife(&s, 100).unwrap();
        assert!((v - 1.0).abs() < 2.0 * err, "{v} +- {err}");
        assert!(jackknife_error(&s, s.len()).is_err());
    }

    #[test]
    fn scale_and_shift_behaviour() {
        let s = ar1(0.6, 20_000, 13);
        let scaled: Vec<f64> = s.iter().map(|x| 2.0 * x).collect();
        let shifted: Vec<f64> = s.iter().map(|x| x + 7.25).collect();
        let base = corrected_error(&s).unwrap();
        let sc = corrected_error(&scaled).unwrap();
        assert_eq!(sc.mean, 2.0 * base.mean);
        assert_eq!(sc.sigma, 2.0 * base.sigma);
        assert_eq!(sc.tau, base.tau);
        let sh = corrected_error(&shifted).unwrap();
        assert!((sh.sigma - base.sigma).abs() < 1e-12);
        assert!((sh.tau - base.tau).abs() < 1e-12);

        let b = binning_error(&s, &default_block_lengths(s.len())).unwrap();
        let bs = binning_error(&scaled, &default_block_lengths(s.len())).unwrap();
        assert_eq!(bs.sigma, 2.0 * b.sigma);
        let j = jackknife_error(&s, 64).unwrap();
        let js = jackknife_error(&scaled, 64).unwrap();
        assert_eq!(js.sigma, 2.0 * j.sigma);
        assert_eq!(js.mean, 2.0 * j.mean);
    }

    #[test]
    fn full_tau_reference_is_close_for_short_correlations() {
        let s = ar1(0.5, 4000, 14);
        let full = full_tau(&s).unwrap();
        assert!(full.is_finite());
        assert_eq!(full_tau(&[1.0; 20]).unwrap(), 0.5);
    }

    #[test]
    fn block_length_helpers() {
        assert_eq!(default_block_lengths(64), vec![1, 2, 4, 8, 16]);
        assert_eq!(default_block_lengths(3), vec![1]);
        assert_eq!(jackknife_block_length(10_000, 9.5, 20), 32);
        assert_eq!(jackknife_block_length(100, 40.0, 20), 4);
    }
}
