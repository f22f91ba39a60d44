//! Landmark-point selection for Nystrom approximations.
//!
//! Five strategies: uniform sampling without replacement, column-norm
//! sampling on the full kernel matrix, diagonal sampling, K-means centroids
//! on the original data (clustered), and K-means on random sign sketches with
//! centroids lifted back to the original space (randomized clustered). Also
//! hosts the quantization-error functional the clustered variants minimize
//! and an exhaustive optimal-clustering oracle for tiny instances.

mod kmeans;
mod projection;

pub use kmeans::{kmeans_pp_init, lloyd_kmeans, ClusteringResult};
pub use projection::{random_sign_matrix, ProjectionConfig};

use crate::matrix::{axpy, sqdist, DataMatrix, DenseMatrix};
use crate::par::*;
use crate::rng::{rng_from_seed, SeedRng};
use crate::{Error, Result};
use rand::Rng;

/// Maximum instance size accepted by [`brute_force_optimal_clustering`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandmarkMethod {
    Uniform,
    ColumnNorm,
    Diagonal,
    Clustered,
    RandomizedClustered,
}

/// Selected landmark points plus provenance.
#[derive(Debug, Clone)]
pub struct LandmarkSet {
    /// Landmarks as columns, in the original `p`-dimensional space.
    pub z: DataMatrix,
    pub method: LandmarkMethod,
    pub seed: u64,
    /// Compression factor; only set by the randomized clustered method.
    pub gamma: Option<f64>,
}

impl LandmarkSet {
    pub fn count(&self) -> usize {
        self.z.cols()
    }
}

fn check_sample(m: usize, n: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Degenerate("at least one landmark is required".into()));
    }
    if m > n {
        return Err(Error::SampleSize { m, n });
    }
    Ok(())
}

/// `m` distinct columns of `X`, each with equal probability, in draw order.
pub fn uniform_landmarks(x: &DataMatrix, m: usize, seed: u64) -> Result<LandmarkSet> {
    check_sample(m, x.cols())?;
    let mut rng = rng_from_seed(seed);
    let indices = rand::seq::index::sample(&mut rng, x.cols(), m).into_vec();
    Ok(LandmarkSet {
        z: x.select_columns(&indices),
        method: LandmarkMethod::Uniform,
        seed,
        gamma: None,
    })
}

/// Sample `m` columns without replacement with probabilities proportional to
/// the squared column norms of the full kernel matrix `K`,
/// `p_i = ||k_i||^2 / ||K||_F^2`. Requires the entire kernel matrix.
pub fn column_norm_landmarks(
    k: &DenseMatrix,
    x: &DataMatrix,
    m: usize,
    seed: u64,
) -> Result<LandmarkSet> {
    let n = x.cols();
    if k.rows() != n || k.cols() != n {
        return Err(Error::dim(format!(
            "kernel matrix is {}x{}, expected {n}x{n}",
            k.rows(),
            k.cols()
        )));
    }
    check_sample(m, n)?;
    let weights: Vec<f64> = (0..n).map(|j| crate::matrix::dot(k.col(j), k.col(j))).collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Degenerate("zero kernel matrix".into()));
    }
    let mut rng = rng_from_seed(seed);
    let indices = weighted_sample_without_replacement(&weights, m, &mut rng);
    Ok(LandmarkSet {
        z: x.select_columns(&indices),
        method: LandmarkMethod::ColumnNorm,
        seed,
        gamma: None,
    })
}

/// Sample `m` columns without replacement with probabilities proportional to
/// the squared diagonal entries, `p_i = K_ii^2 / sum_j K_jj^2`. For
/// shift-invariant kernels the diagonal is constant and this reduces to
/// uniform sampling.
pub fn diagonal_landmarks(
    k_diag: &[f64],
    x: &DataMatrix,
    m: usize,
    seed: u64,
) -> Result<LandmarkSet> {
    let n = x.cols();
    if k_diag.len() != n {
        return Err(Error::dim(format!(
            "diagonal has length {}, expected {n}",
            k_diag.len()
        )));
    }
    check_sample(m, n)?;
    let weights: Vec<f64> = k_diag.iter().map(|&d| d * d).collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Degenerate("all-zero kernel diagonal".into()));
    }
    let mut rng = rng_from_seed(seed);
    let indices = weighted_sample_without_replacement(&weights, m, &mut rng);
    Ok(LandmarkSet {
        z: x.select_columns(&indices),
        method: LandmarkMethod::Diagonal,
        seed,
        gamma: None,
    })
}

/// Sequential weighted draws; a drawn index gets weight zero and the total is
/// refreshed, so no index repeats. Should the remaining mass vanish before
/// `m` draws (only possible with zero weights), the smallest unpicked indices
/// fill the rest.
fn weighted_sample_without_replacement(
    weights: &[f64],
    m: usize,
    rng: &mut SeedRng,
) -> Vec<usize> {
    let n = weights.len();
    let mut w = weights.to_vec();
    let mut picked = Vec::with_capacity(m);
    for _ in 0..m {
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            let t = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = None;
            for (i, &wi) in w.iter().enumerate() {
                if wi > 0.0 {
                    last_positive = Some(i);
                    acc += wi;
                    if t < acc {
                        pick = Some(i);
                        break;
                    }
                }
            }
            let idx = pick.or(last_positive).expect("positive total mass");
            picked.push(idx);
            w[idx] = 0.0;
        } else {
            let idx = (0..n).find(|i| !picked.contains(i)).expect("m <= n");
            picked.push(idx);
        }
    }
    picked
}

/// Clustered landmarks: K-means++ seeding followed by Lloyd iterations on the
/// original data; the centroids become the landmarks.
pub fn clustered_landmarks(
    x: &DataMatrix,
    m: usize,
    seed: u64,
    max_iter: usize,
) -> Result<LandmarkSet> {
    clustered_details(x, m, seed, max_iter).map(|(lm, _)| lm)
}

/// As [`clustered_landmarks`], also returning the clustering run.
pub fn clustered_details(
    x: &DataMatrix,
    m: usize,
    seed: u64,
    max_iter: usize,
) -> Result<(LandmarkSet, ClusteringResult)> {
    check_sample(m, x.cols())?;
    let mut rng = rng_from_seed(seed);
    let init = kmeans::pp_init_with_rng(x, m, &mut rng)?;
    let res = lloyd_kmeans(x, &init, max_iter)?;
    let lm = LandmarkSet {
        z: res.centroids.clone(),
        method: LandmarkMethod::Clustered,
        seed,
        gamma: None,
    };
    Ok((lm, res))
}

/// Randomized clustered landmarks: sketch `X_hat = H X` with a random sign
/// matrix, cluster the sketches, and lift each cluster to its original-space
/// sample mean. Exactly two passes over `X`: the sketch product and the mean
/// computation. `gamma = 1` bypasses the projection entirely and matches
/// [`clustered_landmarks`] for the same seed.
pub fn randomized_clustered_landmarks(
    x: &DataMatrix,
    m: usize,
    gamma: f64,
    seed: u64,
    max_iter: usize,
) -> Result<LandmarkSet> {
    randomized_clustered_details(x, m, gamma, seed, max_iter).map(|(lm, _)| lm)
}

/// As [`randomized_clustered_landmarks`], also returning the clustering run.
/// The clustering result lives in the sketch space (centroids `p' x m`)
/// unless `gamma = 1`, where it is the plain clustered run on `X`.
pub fn randomized_clustered_details(
    x: &DataMatrix,
    m: usize,
    gamma: f64,
    seed: u64,
    max_iter: usize,
) -> Result<(LandmarkSet, ClusteringResult)> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Gamma(gamma));
    }
    check_sample(m, x.cols())?;
    let mut rng = rng_from_seed(seed);

    if gamma == 1.0 {
        // Identity-projection hook: same stream as the clustered path.
        let init = kmeans::pp_init_with_rng(x, m, &mut rng)?;
        let res = lloyd_kmeans(x, &init, max_iter)?;
        let lm = LandmarkSet {
            z: res.centroids.clone(),
            method: LandmarkMethod::RandomizedClustered,
            seed,
            gamma: Some(gamma),
        };
        return Ok((lm, res));
    }

    let p = x.rows();
    let cfg = ProjectionConfig::new(gamma, p, seed)?;
    let h = projection::sign_matrix_with_rng(cfg.p_prime, p, &mut rng);
    let xhat = h.matmul(x); // pass 1
    let init = kmeans::pp_init_with_rng(&xhat, m, &mut rng)?;
    let res = lloyd_kmeans(&xhat, &init, max_iter)?;
    let z = lift_to_original(x, &res.assignments, m); // pass 2
    let lm = LandmarkSet {
        z,
        method: LandmarkMethod::RandomizedClustered,
        seed,
        gamma: Some(gamma),
    };
    Ok((lm, res))
}

/// Original-space sample means of the given partition.
fn lift_to_original(x: &DataMatrix, assignments: &[usize], m: usize) -> DataMatrix {
    let p = x.rows();
    let n = x.cols();
    let mut sums = vec![0.0; p * m];
    let mut counts = vec![0usize; m];
    for i in 0..n {
        let j = assignments[i];
        counts[j] += 1;
        axpy(&mut sums[j * p..(j + 1) * p], 1.0, x.col(i));
    }
    let mut z = DenseMatrix::zeros(p, m);
    for j in 0..m {
        if counts[j] > 0 {
            let inv = 1.0 / counts[j] as f64;
            for (zj, s) in z.col_mut(j).iter_mut().zip(&sums[j * p..(j + 1) * p]) {
                *zj = s * inv;
            }
        } else {
            // only reachable with duplicated sketches; park at the data mean
            let inv = 1.0 / n as f64;
            let col = z.col_mut(j);
            for i in 0..n {
                axpy(col, inv, x.col(i));
            }
        }
    }
    z
}

/// Total quantization error `sum_i min_j ||x_i - z_j||^2`.
pub fn quantization_error(x: &DataMatrix, landmarks: &LandmarkSet) -> f64 {
    assert_eq!(
        x.rows(),
        landmarks.z.rows(),
        "landmark dimension must match data dimension"
    );
    let n = x.cols();
    let m = landmarks.z.cols();
    let z = &landmarks.z;
    let parts: Vec<f64> = chunk_ranges(n, POINT_CHUNK)
        .into_par_iter()
        .map(|rg| {
            let mut e = 0.0;
            for i in rg {
                let xi = x.col(i);
                let mut best = f64::INFINITY;
                for j in 0..m {
                    let d = sqdist(xi, z.col(j));
                    if d < best {
                        best = d;
                    }
                }
                e += best;
            }
            e
        })
        .collect();
    parts.iter().sum()
}

/// Quantization error of a *fixed* partition: each point pays the distance to
/// the centroid of the cluster it is assigned to, with no reassignment.
pub fn partition_error(x: &DataMatrix, assignments: &[usize], centroids: &DataMatrix) -> f64 {
    assert_eq!(x.cols(), assignments.len());
    let mut e = 0.0;
    for (i, &j) in assignments.iter().enumerate() {
        e += sqdist(x.col(i), centroids.col(j));
    }
    e
}

/// Exhaustively enumerate every partition of the points into at most `m`
/// non-empty clusters and return a global minimizer of the quantization
/// error. Only for tiny instances (`n <= 12`); used as the oracle the
/// heuristic clusterings are tested against.
pub fn brute_force_optimal_clustering(x: &DataMatrix, m: usize) -> Result<ClusteringResult> {
    let n = x.cols();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    check_sample(m, n)?;
    let p = x.rows();
    let total_sq: f64 = (0..n).map(|i| crate::matrix::dot(x.col(i), x.col(i))).sum();

    struct Search<'a> {
        x: &'a DataMatrix,
        n: usize,
        p: usize,
        m: usize,
        total_sq: f64,
        assign: Vec<usize>,
        sums: Vec<f64>,
        counts: Vec<usize>,
        // running sum of ||s_j||^2 / c_j over non-empty clusters
        explained: f64,
        best_e: f64,
        best_assign: Vec<usize>,
    }

    impl Search<'_> {
        fn place(&mut self, i: usize, j: usize) -> f64 {
            let old = self.cluster_term(j);
            self.counts[j] += 1;
            let col = self.x.col(i);
            axpy(&mut self.sums[j * self.p..(j + 1) * self.p], 1.0, col);
            let new = self.cluster_term(j);
            let delta = new - old;
            self.explained += delta;
            delta
        }

        fn unplace(&mut self, i: usize, j: usize, delta: f64) {
            self.explained -= delta;
            let col = self.x.col(i);
            axpy(&mut self.sums[j * self.p..(j + 1) * self.p], -1.0, col);
            self.counts[j] -= 1;
        }

        fn cluster_term(&self, j: usize) -> f64 {
            if self.counts[j] == 0 {
                0.0
            } else {
                let s = &self.sums[j * self.p..(j + 1) * self.p];
                crate::matrix::dot(s, s) / self.counts[j] as f64
            }
        }

        fn recurse(&mut self, i: usize, used: usize) {
            if i == self.n {
                let e = self.total_sq - self.explained;
                if e < self.best_e {
                    self.best_e = e;
                    self.best_assign.copy_from_slice(&self.assign);
                }
                return;
            }
            let top = (used + 1).min(self.m);
            for j in 0..top {
                self.assign[i] = j;
                let delta = self.place(i, j);
                self.recurse(i + 1, used.max(j + 1));
                self.unplace(i, j, delta);
            }
        }
    }

    let mut search = Search {
        x,
        n,
        p,
        m,
        total_sq,
        assign: vec![0; n],
        sums: vec![0.0; p * m],
        counts: vec![0; m],
        explained: 0.0,
        best_e: f64::INFINITY,
        best_assign: vec![0; n],
    };
    search.recurse(0, 0);

    // Rebuild the minimizer cleanly: means and exact quantization error.
    let assignments = search.best_assign;
    let used = assignments.iter().max().map_or(1, |&j| j + 1);
    let centroids = {
        let full = lift_to_original(x, &assignments, used);
        full
    };
    let e = partition_error(x, &assignments, &centroids);
    Ok(ClusteringResult {
        assignments,
        centroids,
        quantization_error: e,
        iterations: 0,
        objective_history: vec![e],
    })
}
