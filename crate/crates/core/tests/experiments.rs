//! Desk-scale kernel ridge regression experiments: landmark methods compared
//! through the solution error against the exact dual solve.

use nyskit::dataio::{duplicate_features, Dataset};
use nyskit::kernels::{bandwidth_heuristic, KernelSpec};
use nyskit::krr::{alpha_error, krr_exact, krr_lowrank, RidgeProblem};
use nyskit::landmark::{randomized_clustered_landmarks, uniform_landmarks};
use nyskit::matrix::DenseMatrix;
use nyskit::nystrom::{low_rank_factor, nystrom_qr, NystromInputs};
use nyskit::rng::{derive_seed, rng_from_seed};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A regression set shaped like the small-computer benchmark: 12 raw
/// features duplicated 4x to p = 48, many clusters of skewed sizes, and a
/// smooth nonlinear response.
fn cpusmall_style(n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let normal = StandardNormal;
    let comps = 40usize;
    let mut means = vec![0.0; 12 * comps];
    for v in &mut means {
        let g: f64 = normal.sample(&mut rng);
        *v = 4.0 * g;
    }
    let mut assign = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        assign.push(((u * u) * comps as f64) as usize % comps);
    }
    let mut x = DenseMatrix::zeros(12, n);
    let mut y = Vec::with_capacity(n);
    for j in 0..n {
        let comp = assign[j];
        let col = x.col_mut(j);
        let mut s = 0.0;
        for (i, slot) in col.iter_mut().enumerate() {
            let g: f64 = normal.sample(&mut rng);
            *slot = means[comp * 12 + i] + g;
            s += *slot * *slot;
        }
        let noise: f64 = normal.sample(&mut rng);
        y.push((s / 12.0).sin() * 3.0 + 0.2 * s.sqrt() + 0.05 * noise);
    }
    let base = Dataset {
        x,
        y: Some(y),
        name: "cpusmall-style".into(),
    };
    duplicate_features(&base, 4)
}

#[test]
fn krr_randomized_clustered_vs_uniform() {
    let ds = cpusmall_style(2048, 100);
    assert_eq!(ds.dim(), 48);
    let c = bandwidth_heuristic(&ds.x).unwrap();
    let spec = KernelSpec::gaussian(c).unwrap();
    let y = ds.y.clone().unwrap();
    let problem = RidgeProblem::new(ds.x.clone(), y.clone(), 0.25, spec.clone()).unwrap();
    let alpha_star = krr_exact(&problem).unwrap();

    let r = 20;
    let trials = 20u64;
    let ms = [20usize, 40, 80];
    let mut mean_uniform = Vec::new();
    let mut mean_rand = Vec::new();
    for &m in &ms {
        let mut e_u = 0.0;
        let mut e_r = 0.0;
        for t in 0..trials {
            let seed = derive_seed(900 + m as u64, t);
            for (is_uniform, lm) in [
                (true, uniform_landmarks(&ds.x, m, seed).unwrap()),
                (
                    false,
                    // gamma 0.2: sketch dimension p' = 10
                    randomized_clustered_landmarks(&ds.x, m, 0.2, seed, 10).unwrap(),
                ),
            ] {
                let inputs = NystromInputs::from_data(&ds.x, lm, spec.clone()).unwrap();
                let l = low_rank_factor(&nystrom_qr(&inputs, r).unwrap()).unwrap();
                let alpha = krr_lowrank(&l, &y, 0.25).unwrap();
                let e = alpha_error(&alpha, &alpha_star).unwrap();
                if is_uniform {
                    e_u += e;
                } else {
                    e_r += e;
                }
            }
        }
        mean_uniform.push(e_u / trials as f64);
        mean_rand.push(e_r / trials as f64);
    }
    println!("mean alpha error, uniform:       {mean_uniform:?}");
    println!("mean alpha error, randclustered: {mean_rand:?}");

    // sketched clustering beats uniform sampling at every landmark budget
    for i in 0..ms.len() {
        assert!(
            mean_rand[i] < mean_uniform[i],
            "m = {}: randclustered {} vs uniform {}",
            ms[i],
            mean_rand[i],
            mean_uniform[i]
        );
    }
    // error decreases in the mean as the landmark budget grows: strictly
    // from m = r to m = 2r, and from there stays at the floor (independent
    // K-means runs wobble within a couple percent)
    assert!(mean_rand[1] < mean_rand[0]);
    assert!(mean_rand[2] <= mean_rand[1] * 1.02);
    assert!(mean_rand[2] < mean_rand[0]);
    assert!(mean_uniform[2] < mean_uniform[0]);
}

#[test]
fn krr_large_regularizer_limit() {
    // with lambda huge, the solution collapses to y / lambda whatever the
    // landmarks were
    let ds = cpusmall_style(256, 7);
    let c = bandwidth_heuristic(&ds.x).unwrap();
    let spec = KernelSpec::gaussian(c).unwrap();
    let y = ds.y.clone().unwrap();
    let lambda = 1e6;
    for (name, lm) in [
        ("uniform", uniform_landmarks(&ds.x, 8, 3).unwrap()),
        (
            "randclustered",
            randomized_clustered_landmarks(&ds.x, 8, 0.2, 3, 10).unwrap(),
        ),
    ] {
        let inputs = NystromInputs::from_data(&ds.x, lm, spec.clone()).unwrap();
        let l = low_rank_factor(&nystrom_qr(&inputs, 4).unwrap()).unwrap();
        let alpha = krr_lowrank(&l, &y, lambda).unwrap();
        let rel: f64 = {
            let num: f64 = alpha
                .iter()
                .zip(&y)
                .map(|(a, yi)| (a - yi / lambda) * (a - yi / lambda))
                .sum();
            let den: f64 = y.iter().map(|yi| (yi / lambda) * (yi / lambda)).sum();
            (num / den).sqrt()
        };
        assert!(rel <= 1e-3, "{name}: relative deviation {rel}");
    }
}
