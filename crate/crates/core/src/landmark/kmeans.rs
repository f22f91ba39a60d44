//! K-means clustering: K-means++ seeding and Lloyd iterations.
//!
//! Assignment and centroid accumulation run over fixed-size point chunks with
//! partials combined in chunk order, so the outcome is independent of the
//! worker-pool size.

use crate::matrix::{axpy, sqdist, DataMatrix};
use crate::par::*;
use crate::rng::{rng_from_seed, SeedRng};
use crate::{Error, Result};
use rand::Rng;

/// Outcome of a clustering run.
#[derive(Debug, Clone)]
pub struct ClusteringResult {
    /// Cluster index per point, each in `[0, m)`; every point is assigned to
    /// its nearest returned centroid (lowest index wins ties).
    pub assignments: Vec<usize>,
    /// Cluster centers as columns.
    pub centroids: DataMatrix,
    /// Total squared distance of each point to its assigned centroid.
    pub quantization_error: f64,
    /// Number of centroid-update steps performed.
    pub iterations: usize,
    /// Objective after the initial assignment and after every update step;
    /// non-increasing.
    pub objective_history: Vec<f64>,
}

/// K-means++ seeding: first center uniform, each further center drawn with
/// probability proportional to the squared distance to the nearest chosen
/// center.
pub fn kmeans_pp_init(y: &DataMatrix, m: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = rng_from_seed(seed);
    pp_init_with_rng(y, m, &mut rng)
}

pub(crate) fn pp_init_with_rng(
    y: &DataMatrix,
    m: usize,
    rng: &mut SeedRng,
) -> Result<DataMatrix> {
    let n = y.cols();
    if m == 0 {
        return Err(Error::Degenerate("at least one center is required".into()));
    }
    if m > n {
        return Err(Error::SampleSize { m, n });
    }
    let mut chosen = Vec::with_capacity(m);
    let first = rng.random_range(0..n);
    chosen.push(first);
    let mut d2: Vec<f64> = (0..n).map(|i| sqdist(y.col(i), y.col(first))).collect();
    while chosen.len() < m {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let t = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = None;
            for (i, &wi) in d2.iter().enumerate() {
                if wi > 0.0 {
                    last_positive = Some(i);
                    acc += wi;
                    if t < acc {
                        pick = Some(i);
                        break;
                    }
                }
            }
            pick.or(last_positive).expect("positive total mass")
        } else {
            // Remaining mass is zero (duplicate points); fall back to a
            // uniform draw among the unchosen indices.
            let unchosen: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unchosen[rng.random_range(0..unchosen.len())]
        };
        chosen.push(idx);
        for (i, d) in d2.iter_mut().enumerate() {
            let nd = sqdist(y.col(i), y.col(idx));
            if nd < *d {
                *d = nd;
            }
        }
    }
    Ok(y.select_columns(&chosen))
}

/// Lloyd iterations from the given initial centroids. Alternates nearest
/// assignment and sample-mean updates; stops when assignments are unchanged
/// or after `max_iter` update steps. The returned assignments always refer to
/// the returned centroids.
pub fn lloyd_kmeans(
    y: &DataMatrix,
    init: &DataMatrix,
    max_iter: usize,
) -> Result<ClusteringResult> {
    if init.rows() != y.rows() {
        return Err(Error::dim(format!(
            "centroid dimension {} does not match data dimension {}",
            init.rows(),
            y.rows()
        )));
    }
    let m = init.cols();
    let n = y.cols();
    if m == 0 {
        return Err(Error::Degenerate("at least one cluster is required".into()));
    }
    if m > n {
        return Err(Error::SampleSize { m, n });
    }

    let mut centroids = init.clone();
    let (mut assignments, mut objective) = assign_points(y, &centroids);
    let mut history = vec![objective];
    let mut iterations = 0;

    for it in 1..=max_iter {
        update_centroids(y, &assignments, &mut centroids);
        let (next, obj) = assign_points(y, &centroids);
        history.push(obj);
        iterations = it;
        let unchanged = next == assignments;
        assignments = next;
        objective = obj;
        if unchanged {
            break;
        }
    }

    Ok(ClusteringResult {
        assignments,
        centroids,
        quantization_error: objective,
        iterations,
        objective_history: history,
    })
}

pub(crate) fn assign_points(y: &DataMatrix, centroids: &DataMatrix) -> (Vec<usize>, f64) {
    let n = y.cols();
    let m = centroids.cols();
    let parts: Vec<(Vec<usize>, f64)> = chunk_ranges(n, POINT_CHUNK)
        .into_par_iter()
        .map(|rg| {
            let mut local = Vec::with_capacity(rg.len());
            let mut e = 0.0;
            for i in rg {
                let yi = y.col(i);
                let mut best_j = 0;
                let mut best_d = f64::INFINITY;
                for j in 0..m {
                    let d = sqdist(yi, centroids.col(j));
                    if d < best_d {
                        best_d = d;
                        best_j = j;
                    }
                }
                local.push(best_j);
                e += best_d;
            }
            (local, e)
        })
        .collect();
    let mut assignments = Vec::with_capacity(n);
    let mut objective = 0.0;
    for (local, e) in parts {
        assignments.extend(local);
        objective += e;
    }
    (assignments, objective)
}

/// Replace every centroid by the sample mean of its cluster. A cluster left
/// empty is reseeded at the point farthest from its own assigned centroid
/// (repair preserves the Lloyd monotonicity: the empty cluster contributes
/// nothing to the current objective, and the next assignment pass can only
/// lower it). With exactly duplicated inputs a repaired centroid may
/// coincide with another one and stay empty.
fn update_centroids(y: &DataMatrix, assignments: &[usize], centroids: &mut DataMatrix) {
    let p = y.rows();
    let n = y.cols();
    let m = centroids.cols();
    let parts: Vec<(Vec<f64>, Vec<usize>)> = chunk_ranges(n, POINT_CHUNK)
        .into_par_iter()
        .map(|rg| {
            let mut sums = vec![0.0; p * m];
            let mut counts = vec![0usize; m];
            for i in rg {
                let j = assignments[i];
                counts[j] += 1;
                axpy(&mut sums[j * p..(j + 1) * p], 1.0, y.col(i));
            }
            (sums, counts)
        })
        .collect();
    let mut sums = vec![0.0; p * m];
    let mut counts = vec![0usize; m];
    for (ls, lc) in &parts {
        axpy(&mut sums, 1.0, ls);
        for (c, l) in counts.iter_mut().zip(lc) {
            *c += l;
        }
    }

    let mut empty = Vec::new();
    for j in 0..m {
        if counts[j] > 0 {
            let inv = 1.0 / counts[j] as f64;
            for (cj, s) in centroids.col_mut(j).iter_mut().zip(&sums[j * p..(j + 1) * p]) {
                *cj = s * inv;
            }
        } else {
            empty.push(j);
        }
    }
    if empty.is_empty() {
        return;
    }
    let mut used = vec![false; n];
    for j in empty {
        let mut best_i = 0;
        let mut best_d = -1.0;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let d = sqdist(y.col(i), centroids.col(assignments[i]));
            if d > best_d {
                best_d = d;
                best_i = i;
            }
        }
        used[best_i] = true;
        let point = y.col(best_i).to_vec();
        centroids.col_mut(j).copy_from_slice(&point);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DenseMatrix;

    fn line(points: &[f64]) -> DataMatrix {
        DenseMatrix::new(1, points.len(), points.to_vec()).unwrap()
    }

    #[test]
    fn pp_init_single_center_is_uniform() {
        let y = line(&[0.0, 1.0, 2.0, 3.0]);
        let mut counts = [0usize; 4];
        for seed in 0..8000 {
            let c = kmeans_pp_init(&y, 1, seed).unwrap();
            let v = c.get(0, 0) as usize;
            counts[v] += 1;
        }
        for c in counts {
            let freq = c as f64 / 8000.0;
            assert!((freq - 0.25).abs() < 0.02, "freq {freq}");
        }
    }

    #[test]
    fn pp_init_outlier_forced() {
        // all mass at one location plus a single outlier: with m = 2 the
        // outlier carries all the D^2 weight
        let y = line(&[1.0, 1.0, 1.0, 1.0, 50.0]);
        for seed in 0..200 {
            let c = kmeans_pp_init(&y, 2, seed).unwrap();
            let vals = [c.get(0, 0), c.get(0, 1)];
            assert!(vals.contains(&50.0), "outlier must be selected: {vals:?}");
        }
    }

    #[test]
    fn pp_init_prefers_far_cluster() {
        // two well-separated clusters; the second center should land in the
        // opposite cluster nearly always under D^2 weighting
        let y = line(&[0.0, 0.1, 0.2, 10.0, 10.1, 10.2]);
        let mut opposite = 0;
        for seed in 0..1000 {
            let c = kmeans_pp_init(&y, 2, seed).unwrap();
            let (a, b) = (c.get(0, 0), c.get(0, 1));
            if (a < 5.0) != (b < 5.0) {
                opposite += 1;
            }
        }
        // D^2 weighting puts ~0.99 of the mass on the far cluster
        assert!(opposite >= 950, "opposite-cluster count {opposite}");
    }

    #[test]
    fn pp_init_bounds() {
        let y = line(&[0.0, 1.0]);
        assert!(kmeans_pp_init(&y, 3, 0).is_err());
        assert!(kmeans_pp_init(&y, 0, 0).is_err());
    }

    #[test]
    fn lloyd_hand_fixed_point() {
        let y = line(&[0.0, 2.0, 10.0, 12.0]);
        let init = line(&[1.0, 11.0]);
        let res = lloyd_kmeans(&y, &init, 10).unwrap();
        assert_eq!(res.assignments, vec![0, 0, 1, 1]);
        assert!((res.centroids.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((res.centroids.get(0, 1) - 11.0).abs() < 1e-15);
        assert!((res.quantization_error - 4.0).abs() < 1e-12);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn lloyd_converges_immediately_on_exact_centroids() {
        let y = line(&[3.0, 7.0]);
        let init = line(&[3.0, 7.0]);
        let res = lloyd_kmeans(&y, &init, 10).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.quantization_error, 0.0);
    }

    #[test]
    fn lloyd_objective_monotone() {
        use rand::Rng;
        for seed in 0..30 {
            let mut rng = crate::rng::rng_from_seed(seed);
            let y = DenseMatrix::from_fn(3, 40, |_, _| rng.random::<f64>() * 10.0);
            let init = kmeans_pp_init(&y, 5, seed).unwrap();
            let res = lloyd_kmeans(&y, &init, 10).unwrap();
            for w in res.objective_history.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0),
                    "objective increased: {w:?}"
                );
            }
            // final objective is recomputable from the returned fields
            let mut e = 0.0;
            for i in 0..40 {
                e += sqdist(y.col(i), res.centroids.col(res.assignments[i]));
            }
            assert!((e - res.quantization_error).abs() <= 1e-9 * e.max(1.0));
        }
    }

    #[test]
    fn lloyd_repairs_empty_cluster() {
        let y = line(&[0.0, 1.0]);
        let init = line(&[0.4, 100.0]);
        let res = lloyd_kmeans(&y, &init, 10).unwrap();
        let mut seen = vec![false; 2];
        for &a in &res.assignments {
            seen[a] = true;
        }
        assert!(seen.iter().all(|&s| s), "repair must fill both clusters");
        assert!(res.quantization_error < 0.2);
    }

    #[test]
    fn lloyd_rejects_bad_dims() {
        let y = line(&[0.0, 1.0]);
        let init = DenseMatrix::zeros(2, 1);
        assert!(lloyd_kmeans(&y, &init, 5).is_err());
        let too_many = line(&[0.0, 1.0, 2.0]);
        assert!(lloyd_kmeans(&y, &too_many, 5).is_err());
    }
}
