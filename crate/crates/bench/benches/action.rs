use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use moyal_mc::action::MatrixAction;
use moyal_mc::observables::measure;
use moyal_mc::sampler::{ChainState, DEFAULT_PROPOSAL_AMPLITUDE};
use moyal_mc::{derive_coeffs, eval_full, Dim, FieldConfig, ModelParams, Site};

const SIZES: [usize; 3] = [5, 10, 20];

fn setup(dim: Dim, n: usize) -> (ModelParams, FieldConfig, ChaCha8Rng) {
    let params = ModelParams::new(dim, n, 0.5, 1.0, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = FieldConfig::random(&params, 1.0, &mut rng).unwrap();
    (params, cfg, rng)
}

fn label(dim: Dim) -> &'static str {
    match dim {
        Dim::Two => "2d",
        Dim::Four => "4d",
    }
}

fn propose_delta(c: &mut Criterion) {
    let mut group = c.benchmark_group("propose_delta");
    for dim in [Dim::Two, Dim::Four] {
        for n in SIZES {
            let (params, cfg, mut rng) = setup(dim, n);
            let fields = dim.num_fields();
            let mut action = MatrixAction::new(params, cfg).unwrap();
            group.bench_function(BenchmarkId::new(label(dim), n), |b| {
                b.iter(|| {
                    let site = Site::new(rng.random_range(0..fields), rng.random_range(0..n), rng.random_range(0..n));
                    let delta = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    action.propose_delta(site, delta).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn full_evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval_full");
    for dim in [Dim::Two, Dim::Four] {
        for n in SIZES {
            let (params, cfg, _) = setup(dim, n);
            let coeffs = derive_coeffs(&params);
            group.bench_function(BenchmarkId::new(label(dim), n), |b| b.iter(|| eval_full(&params, &coeffs, &cfg).unwrap()));
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for dim in [Dim::Two, Dim::Four] {
        for n in SIZES {
            let (params, cfg, rng) = setup(dim, n);
            let action = MatrixAction::new(params, cfg).unwrap();
            let mut chain = ChainState::new(action, rng, DEFAULT_PROPOSAL_AMPLITUDE);
            group.bench_function(BenchmarkId::new(label(dim), n), |b| b.iter(|| chain.run_sweep()));
        }
    }
    group.finish();
}

fn observables(c: &mut Criterion) {
    let mut group = c.benchmark_group("measure");
    for n in SIZES {
        let (params, cfg, _) = setup(Dim::Four, n);
        let action = MatrixAction::new(params, cfg).unwrap();
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| measure(action.config(), action.terms())));
    }
    group.finish();
}

criterion_group!(benches, propose_delta, full_evaluation, sweep, observables);
criterion_main!(benches);
