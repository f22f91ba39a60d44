//! Rank-restricted Nystrom approximations.
//!
//! Given the cross-kernel block `C` (n x m) and the landmark Gram matrix `W`
//! (m x m), the full Nystrom approximation is `G = C W^+ C^T`. Restricting it
//! to rank `r <= m` can be done two ways:
//!
//! * [`standard_nystrom`] truncates the inner matrix: eigendecompose `W`,
//!   build `L = C V_r (S_r^+)^{1/2}`, and re-orthogonalize through the
//!   eigendecomposition of `L^T L`. Cheap, but blind to the structure of `C`.
//! * [`nystrom_qr`] truncates `G` itself: thin-QR `C = Q R`, eigendecompose
//!   the small matrix `R W^+ R^T`, and keep its top-r eigenpairs. The result
//!   is exactly the best rank-r approximation of `G`, so its error is never
//!   worse than the standard route and strictly better whenever truncation
//!   discards information.
//!
//! [`naive_eig_estimates`] provides the first-approach eigenpair estimates
//! with the n/m rescaling; its eigenvectors are not orthonormal in general,
//! which is the reason the re-orthogonalized routes exist.

use crate::kernels::{cross_kernel, gram, KernelSpec};
use crate::landmark::LandmarkSet;
use crate::matrix::{
    default_pinv_tol, dot, pinv_psd, sym_eig, thin_qr, DataMatrix, DenseMatrix, RankRApprox,
};
use crate::par::*;
use crate::{Error, Result};

/// The matrices a Nystrom approximation is computed from, with provenance.
#[derive(Debug, Clone)]
pub struct NystromInputs {
    /// Cross-kernel block, `n x m`.
    pub c: DenseMatrix,
    /// Landmark Gram matrix, `m x m` symmetric PSD.
    pub w: DenseMatrix,
    pub spec: KernelSpec,
    pub landmarks: LandmarkSet,
}

impl NystromInputs {
    /// Build `C` and `W` from data and landmarks.
    pub fn from_data(x: &DataMatrix, landmarks: LandmarkSet, spec: KernelSpec) -> Result<Self> {
        let c = cross_kernel(x, &landmarks.z, &spec)?;
        let w = gram(&landmarks.z, &spec)?;
        Self::from_parts(c, w, spec, landmarks)
    }

    /// Wrap precomputed matrices. `W` must be square and symmetric within
    /// `1e-9` relative, with `C` tall (`n >= m`).
    pub fn from_parts(
        c: DenseMatrix,
        w: DenseMatrix,
        spec: KernelSpec,
        landmarks: LandmarkSet,
    ) -> Result<Self> {
        let m = w.rows();
        if w.cols() != m || c.cols() != m {
            return Err(Error::dim(format!(
                "W is {}x{}, C is {}x{}; need W m x m and C n x m",
                w.rows(),
                w.cols(),
                c.rows(),
                c.cols()
            )));
        }
        if c.rows() < m {
            return Err(Error::dim(format!(
                "need at least as many points as landmarks, got n = {} < m = {m}",
                c.rows()
            )));
        }
        let mut asym = 0.0f64;
        for j in 0..m {
            for i in 0..j {
                let d = w.get(i, j) - w.get(j, i);
                asym += 2.0 * d * d;
            }
        }
        let norm = w.frob_norm();
        if asym.sqrt() > 1e-9 * norm.max(1e-300) {
            return Err(Error::Asymmetric {
                rel: asym.sqrt() / norm,
            });
        }
        Ok(Self {
            c,
            w,
            spec,
            landmarks,
        })
    }

    pub fn points(&self) -> usize {
        self.c.rows()
    }

    pub fn landmark_count(&self) -> usize {
        self.w.rows()
    }
}

fn check_rank(r: usize, m: usize) -> Result<()> {
    if r > m {
        return Err(Error::Rank { r, n: m });
    }
    Ok(())
}

/// Keep the eigenpairs with value above `1e-12 * lambda_max`; tiny and
/// negative roundoff modes carry nothing and would break orthonormality of
/// the assembled eigenvector blocks.
fn surviving_modes(values: &[f64], r: usize) -> (Vec<usize>, f64) {
    let lmax = values.first().copied().unwrap_or(0.0).max(0.0);
    let cut = 1e-12 * lmax;
    let kept: Vec<usize> = (0..r.min(values.len()))
        .filter(|&k| values[k] > cut)
        .collect();
    (kept, lmax)
}

/// Standard rank-r Nystrom: truncate `W` to its top-r eigenpairs, form
/// `L = C V_r (S_r^+)^{1/2}`, and eigendecompose `L^T L` to recover
/// orthonormal eigenvector estimates. Rank-deficient modes below the
/// spectral cutoff are dropped, so the returned rank can be less than `r`.
pub fn standard_nystrom(inputs: &NystromInputs, r: usize) -> Result<RankRApprox> {
    let m = inputs.landmark_count();
    let n = inputs.points();
    check_rank(r, m)?;
    if r == 0 {
        return Ok(RankRApprox::empty(n));
    }

    let eig_w = sym_eig(&inputs.w)?;
    let lmax = eig_w.values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&lmin) = eig_w.values.last() {
        if lmin < -1e-8 * lmax.max(1.0) {
            return Err(Error::Degenerate(format!(
                "landmark matrix W is numerically indefinite (lambda_min = {lmin:.3e})"
            )));
        }
    }
    // Pseudo-inverted square root of the truncated spectrum, spectral cutoff
    // matching pinv_psd's default so both restriction routes filter alike.
    let cut = default_pinv_tol(m) * lmax;
    let kept: Vec<usize> = (0..r).filter(|&k| eig_w.values[k] > cut).collect();
    if kept.is_empty() {
        return Ok(RankRApprox::empty(n));
    }
    let mut v = eig_w.vectors.select_columns(&kept);
    for (idx, &k) in kept.iter().enumerate() {
        let scale = 1.0 / eig_w.values[k].sqrt();
        for entry in v.col_mut(idx) {
            *entry *= scale;
        }
    }
    let l_nys = inputs.c.matmul(&v);

    let small = l_nys.tr_matmul(&l_nys);
    let eig_s = sym_eig(&small)?;
    let (kept2, _) = surviving_modes(&eig_s.values, kept.len());
    if kept2.is_empty() {
        return Ok(RankRApprox::empty(n));
    }
    let mut vt = eig_s.vectors.select_columns(&kept2);
    let lambda: Vec<f64> = kept2.iter().map(|&k| eig_s.values[k]).collect();
    for (idx, &lam) in lambda.iter().enumerate() {
        let scale = 1.0 / lam.sqrt();
        for entry in vt.col_mut(idx) {
            *entry *= scale;
        }
    }
    let u = l_nys.matmul(&vt);
    Ok(RankRApprox { u, lambda })
}

/// First-approach eigenpair estimates `U = sqrt(m/n) C V_r S_r^+` and
/// `lambda = (n/m) S_r`. Provided for completeness: the estimated
/// eigenvectors are not orthonormal in general.
pub fn naive_eig_estimates(inputs: &NystromInputs, r: usize) -> Result<(DenseMatrix, Vec<f64>)> {
    let m = inputs.landmark_count();
    let n = inputs.points();
    check_rank(r, m)?;
    let eig_w = sym_eig(&inputs.w)?;
    let lmax = eig_w.values.first().copied().unwrap_or(0.0).max(0.0);
    let cut = default_pinv_tol(m) * lmax;
    let mut v = eig_w.vectors.select_columns(&(0..r).collect::<Vec<_>>());
    let scale = (m as f64 / n as f64).sqrt();
    for k in 0..r {
        let lam = eig_w.values[k];
        let f = if lam > cut { scale / lam } else { 0.0 };
        for entry in v.col_mut(k) {
            *entry *= f;
        }
    }
    let u = inputs.c.matmul(&v);
    let lambda: Vec<f64> = eig_w.values[..r]
        .iter()
        .map(|&lam| lam * n as f64 / m as f64)
        .collect();
    Ok((u, lambda))
}

/// Optimal rank-r Nystrom restriction: thin-QR the cross block `C = Q R`,
/// eigendecompose `R W^+ R^T`, and return `U = Q V'_r` with the top-r
/// eigenvalues. This is exactly the best rank-r truncation of
/// `G = C W^+ C^T`. Modes below the spectral cutoff are dropped.
pub fn nystrom_qr(inputs: &NystromInputs, r: usize) -> Result<RankRApprox> {
    let m = inputs.landmark_count();
    let n = inputs.points();
    check_rank(r, m)?;
    if r == 0 {
        return Ok(RankRApprox::empty(n));
    }

    let (q, rr) = thin_qr(&inputs.c)?;
    let wdag = pinv_psd(&inputs.w, default_pinv_tol(m))?;
    let core = rr.matmul(&wdag).matmul_tr(&rr);
    // symmetrize roundoff before factorizing
    let mut sym = core.clone();
    for j in 0..m {
        for i in 0..m {
            sym.set(i, j, 0.5 * (core.get(i, j) + core.get(j, i)));
        }
    }
    let eig = sym_eig(&sym)?;
    let (kept, _) = surviving_modes(&eig.values, r);
    if kept.is_empty() {
        return Ok(RankRApprox::empty(n));
    }
    let vr = eig.vectors.select_columns(&kept);
    let u = q.matmul(&vr);
    let lambda: Vec<f64> = kept.iter().map(|&k| eig.values[k]).collect();
    Ok(RankRApprox { u, lambda })
}

/// `L = U diag(lambda)^{1/2}`, so `L L^T` reproduces the approximation.
/// Eigenvalues below `-1e-10` are an error; smaller negatives clamp to zero.
pub fn low_rank_factor(approx: &RankRApprox) -> Result<DenseMatrix> {
    if let Some(&bad) = approx.lambda.iter().find(|&&l| l < -1e-10) {
        return Err(Error::Degenerate(format!(
            "negative eigenvalue {bad:.3e} in low-rank factor"
        )));
    }
    let mut l = approx.u.clone();
    for (j, &lam) in approx.lambda.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        for entry in l.col_mut(j) {
            *entry *= s;
        }
    }
    Ok(l)
}

/// Normalized kernel approximation error `||K - L L^T||_F / ||K||_F`,
/// streamed over row blocks of height `block` so the full `n x n` kernel
/// matrix is never materialized. Entries are accumulated row by row, left to
/// right, so the result is independent of the block size and of the
/// worker-pool size.
pub fn normalized_error(
    x: &DataMatrix,
    spec: &KernelSpec,
    l: &DenseMatrix,
    block: usize,
) -> Result<f64> {
    let n = x.cols();
    if l.rows() != n {
        return Err(Error::dim(format!(
            "factor has {} rows but the data has {n} points",
            l.rows()
        )));
    }
    let block = block.max(1);
    // transpose of L: column i holds row i of L contiguously
    let lt = l.transpose();
    let norms: Vec<f64> = (0..n).map(|j| dot(x.col(j), x.col(j))).collect();

    // One partial per row of K, combined in row order afterwards: the block
    // size and the worker-pool size only set the parallel grain, never the
    // reduction tree, so the result is bit-identical for every blocking.
    let mut row_partials = vec![(0.0f64, 0.0f64); n];
    row_partials
        .par_chunks_mut(block)
        .enumerate()
        .for_each(|(bi, chunk)| {
            let base = bi * block;
            for (off, slot) in chunk.iter_mut().enumerate() {
                let i = base + off;
                let xi = x.col(i);
                let li = lt.col(i);
                let mut diff2 = 0.0;
                let mut ksq = 0.0;
                for j in 0..n {
                    let kij = eval_entry(spec, dot(xi, x.col(j)), norms[i], norms[j]);
                    let gij = dot(li, lt.col(j));
                    let d = kij - gij;
                    diff2 += d * d;
                    ksq += kij * kij;
                }
                *slot = (diff2, ksq);
            }
        });
    let (mut diff2, mut ksq) = (0.0, 0.0);
    for &(d, k) in &row_partials {
        diff2 += d;
        ksq += k;
    }
    if ksq == 0.0 {
        return Ok(0.0);
    }
    Ok(diff2.sqrt() / ksq.sqrt())
}

#[inline]
fn eval_entry(spec: &KernelSpec, dotxy: f64, nx: f64, ny: f64) -> f64 {
    match *spec {
        KernelSpec::Gaussian { c } => {
            let d2 = (nx + ny - 2.0 * dotxy).max(0.0);
            (-d2 / c).exp()
        }
        KernelSpec::Polynomial { c, d } => (dotxy + c).powi(d as i32),
        KernelSpec::Linear => dotxy,
    }
}
