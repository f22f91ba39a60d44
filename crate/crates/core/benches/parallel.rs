//! Benchmarks for the data-parallel inner loops against their sequential
//! execution.
//!
//! With the default `parallel` feature each workload runs twice: once on the
//! global rayon pool ("par") and once inside a single-threaded pool ("seq").
//! Built with `--no-default-features` the crate compiles its sequential
//! fallback and only that variant is measured; either way the numeric results
//! are bit-identical, only the wall time changes.

use criterion::{criterion_group, criterion_main, Criterion};
use nyskit::kernels::{gram, KernelSpec};
use nyskit::landmark::{clustered_landmarks, randomized_clustered_landmarks, uniform_landmarks};
use nyskit::matrix::{sym_eig, DenseMatrix};
use nyskit::nystrom::{low_rank_factor, normalized_error, nystrom_qr, NystromInputs};
use nyskit::rng::rng_from_seed;
use rand::Rng;
use std::hint::black_box;

fn mixture(p: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng_from_seed(seed);
    DenseMatrix::from_fn(p, n, |_, j| {
        let center = (j % 8) as f64 * 3.0;
        center + rng.random::<f64>() * 2.0 - 1.0
    })
}

/// Run `f` once per variant: on the global pool and on a one-thread pool.
fn per_variant<F: Fn() + Sync>(c: &mut Criterion, name: &str, f: F) {
    #[cfg(feature = "parallel")]
    {
        c.bench_function(&format!("{name}/par"), |b| b.iter(&f));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool");
        c.bench_function(&format!("{name}/seq"), |b| b.iter(|| pool.install(&f)));
    }
    #[cfg(not(feature = "parallel"))]
    {
        c.bench_function(&format!("{name}/seq-build"), |b| b.iter(&f));
    }
}

fn bench_gram(c: &mut Criterion) {
    let x = mixture(64, 1200, 1);
    let spec = KernelSpec::gaussian(80.0).unwrap();
    per_variant(c, "gram_1200x1200_p64", || {
        black_box(gram(black_box(&x), &spec).unwrap());
    });
}

fn bench_sym_eig(c: &mut Criterion) {
    let x = mixture(16, 320, 2);
    let spec = KernelSpec::gaussian(30.0).unwrap();
    let k = gram(&x, &spec).unwrap();
    per_variant(c, "sym_eig_320", || {
        black_box(sym_eig(black_box(&k)).unwrap());
    });
}

fn bench_kmeans(c: &mut Criterion) {
    let x = mixture(64, 2000, 3);
    per_variant(c, "clustered_landmarks_n2000_p64_m8", || {
        black_box(clustered_landmarks(black_box(&x), 8, 7, 10).unwrap());
    });
    per_variant(c, "randomized_clustered_n2000_p64_m8_g0.15", || {
        black_box(randomized_clustered_landmarks(black_box(&x), 8, 0.15, 7, 10).unwrap());
    });
}

fn bench_normalized_error(c: &mut Criterion) {
    let x = mixture(64, 1000, 4);
    let spec = KernelSpec::gaussian(80.0).unwrap();
    let lm = uniform_landmarks(&x, 12, 5).unwrap();
    let inputs = NystromInputs::from_data(&x, lm, spec.clone()).unwrap();
    let l = low_rank_factor(&nystrom_qr(&inputs, 4).unwrap()).unwrap();
    per_variant(c, "normalized_error_n1000", || {
        black_box(normalized_error(black_box(&x), &spec, &l, 128).unwrap());
    });
}

fn bench_nystrom_qr(c: &mut Criterion) {
    let x = mixture(64, 1500, 6);
    let spec = KernelSpec::gaussian(80.0).unwrap();
    per_variant(c, "nystrom_qr_end_to_end_n1500_m24_r6", || {
        let lm = uniform_landmarks(&x, 24, 9).unwrap();
        let inputs = NystromInputs::from_data(&x, lm, spec.clone()).unwrap();
        black_box(low_rank_factor(&nystrom_qr(&inputs, 6).unwrap()).unwrap());
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_gram, bench_sym_eig, bench_kmeans, bench_normalized_error, bench_nystrom_qr
}
criterion_main!(benches);
