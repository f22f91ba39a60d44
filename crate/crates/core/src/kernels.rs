//! Kernel functions, Gram and cross-kernel matrices, and the Gaussian
//! bandwidth heuristic.
//!
//! Gaussian squared distances go through `||x||^2 + ||y||^2 - 2<x,y>` with a
//! clamp at zero, so an `n x m` block costs one pass of dot products instead
//! of per-pair subtraction loops. Gram matrices are built upper triangle
//! first and mirrored, which makes them symmetric by construction.

use crate::matrix::{dot, sqdist, DataMatrix, DenseMatrix};
use crate::par::*;
use crate::{Error, Result};

/// Kernel family plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `exp(-||x - y||^2 / c)` with width `c > 0`.
    Gaussian { c: f64 },
    /// `(<x, y> + c)^d` with offset `c >= 0` and degree `d >= 1`.
    Polynomial { c: f64, d: u32 },
    /// `<x, y>`
    Linear,
}

impl KernelSpec {
    pub fn gaussian(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Degenerate(format!(
                "Gaussian width must be positive, got {c}"
            )));
        }
        Ok(KernelSpec::Gaussian { c })
    }

    pub fn polynomial(c: f64, d: u32) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Degenerate(format!(
                "polynomial offset must be non-negative, got {c}"
            )));
        }
        if d < 1 {
            return Err(Error::Degenerate("polynomial degree must be >= 1".into()));
        }
        Ok(KernelSpec::Polynomial { c, d })
    }

    pub fn linear() -> Self {
        KernelSpec::Linear
    }

    #[inline]
    fn eval_from_parts(&self, dotxy: f64, nx: f64, ny: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { c } => {
                let d2 = (nx + ny - 2.0 * dotxy).max(0.0);
                (-d2 / c).exp()
            }
            KernelSpec::Polynomial { c, d } => (dotxy + c).powi(d as i32),
            KernelSpec::Linear => dotxy,
        }
    }
}

/// Evaluate the kernel on a single pair of points.
pub fn kernel_eval(x: &[f64], y: &[f64], spec: &KernelSpec) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dim(format!(
            "kernel arguments have dimensions {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(match *spec {
        KernelSpec::Gaussian { c } => (-sqdist(x, y) / c).exp(),
        KernelSpec::Polynomial { c, d } => (dot(x, y) + c).powi(d as i32),
        KernelSpec::Linear => dot(x, y),
    })
}

fn column_sq_norms(x: &DataMatrix) -> Vec<f64> {
    (0..x.cols()).map(|j| dot(x.col(j), x.col(j))).collect()
}

/// Cross-kernel matrix: entry `(i, j) = kernel(x_i, z_j)`, shape `n x m`.
/// With `Z` the landmarks this is the cross block `C` of a Nystrom
/// approximation; with `Z = X` it is the full Gram matrix (prefer [`gram`]
/// there, which mirrors the triangle).
pub fn cross_kernel(x: &DataMatrix, z: &DataMatrix, spec: &KernelSpec) -> Result<DenseMatrix> {
    if x.rows() != z.rows() {
        return Err(Error::dim(format!(
            "point dimensions differ: {} vs {}",
            x.rows(),
            z.rows()
        )));
    }
    let (n, m) = (x.cols(), z.cols());
    let xn = column_sq_norms(x);
    let zn = column_sq_norms(z);
    let mut out = DenseMatrix::zeros(n, m);
    out.data_mut()
        .par_chunks_mut(n * COL_CHUNK)
        .enumerate()
        .for_each(|(ci, chunk)| {
            for (cj, col) in chunk.chunks_mut(n).enumerate() {
                let j = ci * COL_CHUNK + cj;
                let zj = z.col(j);
                for (i, out_ij) in col.iter_mut().enumerate() {
                    *out_ij = spec.eval_from_parts(dot(x.col(i), zj), xn[i], zn[j]);
                }
            }
        });
    Ok(out)
}

/// Gram matrix of `X` with itself; exactly symmetric by construction.
pub fn gram(x: &DataMatrix, spec: &KernelSpec) -> Result<DenseMatrix> {
    let n = x.cols();
    let norms = column_sq_norms(x);
    let mut out = DenseMatrix::zeros(n, n);
    out.data_mut()
        .par_chunks_mut(n * COL_CHUNK)
        .enumerate()
        .for_each(|(ci, chunk)| {
            for (cj, col) in chunk.chunks_mut(n).enumerate() {
                let j = ci * COL_CHUNK + cj;
                let xj = x.col(j);
                for (i, out_ij) in col.iter_mut().enumerate().take(j + 1) {
                    *out_ij = spec.eval_from_parts(dot(x.col(i), xj), norms[i], norms[j]);
                }
            }
        });
    for j in 0..n {
        for i in 0..j {
            let v = out.get(i, j);
            out.set(j, i, v);
        }
    }
    Ok(out)
}

/// Diagonal of the Gram matrix without forming it.
pub fn gram_diagonal(x: &DataMatrix, spec: &KernelSpec) -> Vec<f64> {
    let norms = column_sq_norms(x);
    norms
        .iter()
        .map(|&n2| spec.eval_from_parts(n2, n2, n2))
        .collect()
}

/// Gaussian width heuristic: the averaged squared distance between the data
/// points and their sample mean, `c = (1/n) sum_i ||x_i - mean||^2`.
pub fn bandwidth_heuristic(x: &DataMatrix) -> Result<f64> {
    let (p, n) = (x.rows(), x.cols());
    if n == 0 {
        return Err(Error::Degenerate("empty data matrix".into()));
    }
    let mut mean = vec![0.0; p];
    for j in 0..n {
        for (mi, xi) in mean.iter_mut().zip(x.col(j)) {
            *mi += xi;
        }
    }
    for mi in &mut mean {
        *mi /= n as f64;
    }
    let mut total = 0.0;
    let mut scale = 0.0;
    for j in 0..n {
        total += sqdist(x.col(j), &mean);
        scale += dot(x.col(j), x.col(j));
    }
    let c = total / n as f64;
    let floor = 1e-12 * (scale / n as f64).max(1.0);
    if c <= floor {
        return Err(Error::Degenerate(
            "bandwidth heuristic is zero: all points identical".into(),
        ));
    }
    Ok(c)
}
