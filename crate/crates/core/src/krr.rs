//! Kernel ridge regression: the exact dual solve and the low-rank Woodbury
//! solve that consumes a Nystrom factor.

use crate::kernels::{cross_kernel, gram, KernelSpec};
use crate::matrix::{chol_solve, dot, DataMatrix, DenseMatrix};
use crate::{Error, Result};

/// A ridge regression instance in dual form.
#[derive(Debug, Clone)]
pub struct RidgeProblem {
    pub x: DataMatrix,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub spec: KernelSpec,
}

impl RidgeProblem {
    pub fn new(x: DataMatrix, y: Vec<f64>, lambda: f64, spec: KernelSpec) -> Result<Self> {
        if y.len() != x.cols() {
            return Err(Error::dim(format!(
                "{} responses for {} points",
                y.len(),
                x.cols()
            )));
        }
        if !(lambda > 0.0) {
            return Err(Error::Degenerate(format!(
                "regularizer must be positive, got {lambda}"
            )));
        }
        Ok(Self { x, y, lambda, spec })
    }
}

/// Exact dual solution `alpha* = (K + lambda I)^{-1} y` through a dense SPD
/// solve. Desk scale only: materializes the full kernel matrix.
pub fn krr_exact(problem: &RidgeProblem) -> Result<Vec<f64>> {
    let n = problem.x.cols();
    let mut k = gram(&problem.x, &problem.spec)?;
    for i in 0..n {
        let v = k.get(i, i) + problem.lambda;
        k.set(i, i, v);
    }
    // K is PSD and lambda > 0, so the factorization cannot fail for valid
    // input; a failure here means the kernel matrix itself was broken.
    let alpha = chol_solve(&k, &problem.y)?;
    debug_assert!({
        let r = k.matvec(&alpha);
        let res: f64 = r
            .iter()
            .zip(&problem.y)
            .map(|(ri, yi)| (ri - yi) * (ri - yi))
            .sum();
        let ynorm: f64 = dot(&problem.y, &problem.y);
        res.sqrt() <= 1e-8 * ynorm.sqrt().max(1e-300)
    });
    Ok(alpha)
}

/// Low-rank dual solution through the Woodbury identity:
/// `alpha = (y - L (L^T L + lambda I_r)^{-1} L^T y) / lambda`.
/// Never forms an n x n matrix; the only dense solve is r x r.
pub fn krr_lowrank(l: &DenseMatrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let n = l.rows();
    if y.len() != n {
        return Err(Error::dim(format!(
            "{} responses for a factor with {n} rows",
            y.len()
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::Degenerate(format!(
            "regularizer must be positive, got {lambda}"
        )));
    }
    let r = l.cols();
    if r == 0 {
        return Ok(y.iter().map(|v| v / lambda).collect());
    }
    let mut inner = l.tr_matmul(l); // r x r
    for k in 0..r {
        let v = inner.get(k, k) + lambda;
        inner.set(k, k, v);
    }
    let lty: Vec<f64> = (0..r).map(|k| dot(l.col(k), y)).collect();
    let z = chol_solve(&inner, &lty)?;
    let lz = l.matvec(&z);
    Ok(y
        .iter()
        .zip(&lz)
        .map(|(yi, li)| (yi - li) / lambda)
        .collect())
}

/// Relative solution error `||alpha_hat - alpha*||_2 / ||alpha*||_2`.
pub fn alpha_error(alpha_hat: &[f64], alpha_star: &[f64]) -> Result<f64> {
    if alpha_hat.len() != alpha_star.len() {
        return Err(Error::dim(format!(
            "solution lengths differ: {} vs {}",
            alpha_hat.len(),
            alpha_star.len()
        )));
    }
    let denom = dot(alpha_star, alpha_star).sqrt();
    if denom == 0.0 {
        return Err(Error::Degenerate("reference solution is zero".into()));
    }
    let num: f64 = alpha_hat
        .iter()
        .zip(alpha_star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(num.sqrt() / denom)
}

/// Dual-form prediction `y_hat_q = sum_i alpha_i kernel(x_i, x_q)`.
pub fn predict(
    alpha: &[f64],
    x_train: &DataMatrix,
    x_query: &DataMatrix,
    spec: &KernelSpec,
) -> Result<Vec<f64>> {
    if alpha.len() != x_train.cols() {
        return Err(Error::dim(format!(
            "{} coefficients for {} training points",
            alpha.len(),
            x_train.cols()
        )));
    }
    let c = cross_kernel(x_query, x_train, spec)?; // n_q x n_t
    Ok(c.matvec(alpha))
}
