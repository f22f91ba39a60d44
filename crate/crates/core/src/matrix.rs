//! Dense column-major matrices and the factorizations everything else is
//! built on: thin QR, symmetric eigendecomposition, PSD pseudo-inverse, best
//! rank-r truncation, and a Cholesky solve for SPD systems.
//!
//! The eigensolver reduces to tridiagonal form with Householder reflections
//! (keeping the full symmetric storage so every inner loop runs over
//! contiguous rows) and diagonalizes with the implicit-shift QL iteration.
//! Rotation sweeps are applied to the accumulated transform in batches, in
//! parallel over row blocks; the arithmetic per element is identical to the
//! sequential formulation, so results do not depend on the worker-pool size.

use crate::par::*;
use crate::{Error, Result};

/// Column-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Data matrices hold `n` points in `R^p` as columns (`p x n`).
pub type DataMatrix = DenseMatrix;

impl DenseMatrix {
    /// Build from column-major entries. Rejects length mismatches and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Stack column slices (each of equal length) into a matrix.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let rows = cols.first().map_or(0, |c| c.len());
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::dim("columns of unequal length".to_string()));
        }
        Self::new(rows, cols.len(), cols.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Copy of the selected columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, indices.len());
        for (dst, &src) in indices.iter().enumerate() {
            out.col_mut(dst).copy_from_slice(self.col(src));
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `self * b`
    pub fn matmul(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, b.rows, "matmul: inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.rows, b.cols);
        let n = self.rows;
        out.data
            .par_chunks_mut(n * COL_CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                for (cj, col) in chunk.chunks_mut(n).enumerate() {
                    let j = ci * COL_CHUNK + cj;
                    for l in 0..self.cols {
                        let blj = b.get(l, j);
                        if blj != 0.0 {
                            axpy(col, blj, self.col(l));
                        }
                    }
                }
            });
        out
    }

    /// `self^T * b`
    pub fn tr_matmul(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, b.rows, "tr_matmul: row counts differ");
        let mut out = DenseMatrix::zeros(self.cols, b.cols);
        let n = self.cols;
        out.data
            .par_chunks_mut(n * COL_CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                for (cj, col) in chunk.chunks_mut(n).enumerate() {
                    let j = ci * COL_CHUNK + cj;
                    let bj = b.col(j);
                    for (i, out_ij) in col.iter_mut().enumerate() {
                        *out_ij = dot(self.col(i), bj);
                    }
                }
            });
        out
    }

    /// `self * b^T`
    pub fn matmul_tr(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, b.cols, "matmul_tr: column counts differ");
        let mut out = DenseMatrix::zeros(self.rows, b.rows);
        let n = self.rows;
        out.data
            .par_chunks_mut(n * COL_CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                for (cj, col) in chunk.chunks_mut(n).enumerate() {
                    let j = ci * COL_CHUNK + cj;
                    for l in 0..self.cols {
                        let bjl = b.get(j, l);
                        if bjl != 0.0 {
                            axpy(col, bjl, self.col(l));
                        }
                    }
                }
            });
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec: dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(&mut out, vj, self.col(j));
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn frob_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn frob_distance(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        sqdist(&self.data, &other.data).sqrt()
    }

    pub fn scaled(&self, a: f64) -> DenseMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= a;
        }
        out
    }
}

/// Symmetric eigendecomposition `A = V diag(values) V^T`, eigenvalues in
/// descending order, eigenvectors as orthonormal columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub vectors: DenseMatrix,
    pub values: Vec<f64>,
}

/// Truncated eigendecomposition: orthonormal columns `u` (n x r) and
/// non-negative eigenvalues `lambda` in descending order. The associated
/// low-rank reconstruction is `u diag(lambda) u^T`.
#[derive(Debug, Clone)]
pub struct RankRApprox {
    pub u: DenseMatrix,
    pub lambda: Vec<f64>,
}

impl RankRApprox {
    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    pub fn empty(n: usize) -> Self {
        Self {
            u: DenseMatrix::zeros(n, 0),
            lambda: Vec::new(),
        }
    }

    /// Dense reconstruction `u diag(lambda) u^T`; intended for small test
    /// problems.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut ul = self.u.clone();
        for (j, &l) in self.lambda.iter().enumerate() {
            for v in ul.col_mut(j) {
                *v *= l;
            }
        }
        ul.matmul_tr(&self.u)
    }
}

/// `||U_a U_a^T - U_b U_b^T||_F` through the trace identity
/// `tr(P) + tr(Q) - 2 tr(PQ)`; exact for orthonormal column blocks.
pub fn projector_distance(a: &RankRApprox, b: &RankRApprox) -> f64 {
    let cross = a.u.tr_matmul(&b.u);
    let c2 = dot(cross.data(), cross.data());
    let val = a.rank() as f64 + b.rank() as f64 - 2.0 * c2;
    val.max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// low-level kernels
// ---------------------------------------------------------------------------

/// Four-accumulator dot product. Fixed bracketing, independent of callers.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let split = a.len() - a.len() % 4;
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in a[split..].iter().zip(&b[split..]) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Squared Euclidean distance between two slices.
#[inline]
pub(crate) fn sqdist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let split = a.len() - a.len() % 4;
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        let d0 = ca[0] - cb[0];
        let d1 = ca[1] - cb[1];
        let d2 = ca[2] - cb[2];
        let d3 = ca[3] - cb[3];
        acc[0] += d0 * d0;
        acc[1] += d1 * d1;
        acc[2] += d2 * d2;
        acc[3] += d3 * d3;
    }
    let mut tail = 0.0;
    for (x, y) in a[split..].iter().zip(&b[split..]) {
        let d = x - y;
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

// ---------------------------------------------------------------------------
// thin QR
// ---------------------------------------------------------------------------

/// Thin QR factorization of an `n x m` matrix with `n >= m`: `A = Q R` with
/// `Q` having orthonormal columns and `R` upper triangular with non-negative
/// diagonal.
pub fn thin_qr(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (n, m) = (a.rows(), a.cols());
    if n < m {
        return Err(Error::dim(format!("thin QR needs n >= m, got {n}x{m}")));
    }
    let mut work = a.clone();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m);

    for k in 0..m {
        let colk = work.col(k);
        let tail = &colk[k..];
        let norm = dot(tail, tail).sqrt();
        if norm == 0.0 {
            reflectors.push((vec![0.0; n - k], 0.0));
            continue;
        }
        let alpha = if tail[0] >= 0.0 { -norm } else { norm };
        let mut v = tail.to_vec();
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        let beta = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };

        {
            let colk = work.col_mut(k);
            colk[k] = alpha;
            for entry in &mut colk[k + 1..] {
                *entry = 0.0;
            }
        }
        for j in k + 1..m {
            let colj = &mut work.col_mut(j)[k..];
            let g = beta * dot(&v, colj);
            axpy(colj, -g, &v);
        }
        reflectors.push((v, beta));
    }

    // Accumulate Q = H_0 ... H_{m-1} applied to the first m identity columns.
    let mut q = DenseMatrix::zeros(n, m);
    for j in 0..m {
        q.set(j, j, 1.0);
    }
    for k in (0..m).rev() {
        let (v, beta) = &reflectors[k];
        if *beta == 0.0 {
            continue;
        }
        for j in 0..m {
            let colj = &mut q.col_mut(j)[k..];
            let g = beta * dot(v, colj);
            axpy(colj, -g, v);
        }
    }

    let mut r = DenseMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            r.set(i, j, work.get(i, j));
        }
    }
    // Sign convention: R has a non-negative diagonal.
    for k in 0..m {
        if r.get(k, k) < 0.0 {
            for j in k..m {
                let v = r.get(k, j);
                r.set(k, j, -v);
            }
            for v in q.col_mut(k) {
                *v = -*v;
            }
        }
    }
    Ok((q, r))
}

// ---------------------------------------------------------------------------
// symmetric eigendecomposition
// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric matrix. The input may deviate from exact
/// symmetry by at most `1e-8 * ||A||_F`; it is symmetrized as `(A + A^T)/2`
/// before factorization. Eigenvalues come back in descending order.
pub fn sym_eig(a: &DenseMatrix) -> Result<SymEig> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::dim(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if n == 0 {
        return Ok(SymEig {
            vectors: DenseMatrix::zeros(0, 0),
            values: Vec::new(),
        });
    }

    let norm = a.frob_norm();
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            let d = a.get(i, j) - a.get(j, i);
            asym += 2.0 * d * d;
        }
    }
    let asym = asym.sqrt();
    if asym > 1e-8 * norm.max(1e-300) && asym > 0.0 {
        return Err(Error::Asymmetric { rel: asym / norm });
    }

    // Row-major workspace; for the symmetrized input the layout is identical
    // either way, and row-contiguity is what the reduction loops want.
    let mut w = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 0.5 * (a.get(i, j) + a.get(j, i));
        }
    }
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tred2(&mut w, n, &mut d, &mut e);
    tql2(&mut d, &mut e, &mut w, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].total_cmp(&d[x]).then(x.cmp(&y)));

    let mut vectors = DenseMatrix::zeros(n, n);
    for (jj, &src) in order.iter().enumerate() {
        let col = vectors.col_mut(jj);
        for (k, slot) in col.iter_mut().enumerate() {
            *slot = w[k * n + src];
        }
    }
    let values: Vec<f64> = order.iter().map(|&src| d[src]).collect();
    Ok(SymEig { vectors, values })
}

/// Householder reduction to tridiagonal form, accumulating the transform.
/// Full symmetric storage is maintained so inner loops stay row-contiguous.
fn tred2(w: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += w[i * n + k].abs();
            }
            if scale == 0.0 {
                e[i] = w[i * n + l];
            } else {
                for k in 0..=l {
                    w[i * n + k] /= scale;
                    h += w[i * n + k] * w[i * n + k];
                }
                let f = w[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                w[i * n + l] = f - g;

                let u: Vec<f64> = w[i * n..i * n + l + 1].to_vec();
                // Column i keeps u/h for the back-accumulation below.
                for (j, &uj) in u.iter().enumerate() {
                    w[j * n + i] = uj / h;
                }

                // p = A u / h over the leading (l+1) block.
                let mut p = vec![0.0f64; l + 1];
                {
                    let wr: &[f64] = w;
                    p.par_chunks_mut(ROW_CHUNK)
                        .enumerate()
                        .for_each(|(ci, chunk)| {
                            let base = ci * ROW_CHUNK;
                            for (off, pj) in chunk.iter_mut().enumerate() {
                                let j = base + off;
                                *pj = dot(&wr[j * n..j * n + l + 1], &u) / h;
                            }
                        });
                }
                let f: f64 = p.iter().zip(&u).map(|(pj, uj)| pj * uj).sum();
                let hh = f / (h + h);
                let wv: Vec<f64> = p.iter().zip(&u).map(|(pj, uj)| pj - hh * uj).collect();

                // Rank-2 update A -= u w^T + w u^T on the leading block.
                w[..(l + 1) * n]
                    .par_chunks_mut(ROW_CHUNK * n)
                    .enumerate()
                    .for_each(|(ci, rows)| {
                        let base = ci * ROW_CHUNK;
                        for (off, row) in rows.chunks_mut(n).enumerate() {
                            let j = base + off;
                            let (uj, wj) = (u[j], wv[j]);
                            for ((rk, &wk), &uk) in
                                row[..l + 1].iter_mut().zip(&wv).zip(&u)
                            {
                                *rk -= uj * wk + wj * uk;
                            }
                        }
                    });
            }
        } else {
            e[i] = w[i * n + l];
        }
        d[i] = h;
    }

    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            // s = u^T Z over the leading i x i block, then Z -= (u/h) s^T.
            let mut s = vec![0.0f64; i];
            {
                let wr: &[f64] = w;
                let ranges = chunk_ranges(i, ROW_CHUNK);
                let partials: Vec<Vec<f64>> = ranges
                    .into_par_iter()
                    .map(|rg| {
                        let mut loc = vec![0.0f64; i];
                        for k in rg {
                            let uk = wr[i * n + k];
                            if uk != 0.0 {
                                axpy(&mut loc, uk, &wr[k * n..k * n + i]);
                            }
                        }
                        loc
                    })
                    .collect();
                for loc in &partials {
                    for (sj, lj) in s.iter_mut().zip(loc) {
                        *sj += lj;
                    }
                }
            }
            w[..i * n]
                .par_chunks_mut(ROW_CHUNK * n)
                .for_each(|rows| {
                    for row in rows.chunks_mut(n) {
                        let c = row[i];
                        if c != 0.0 {
                            axpy(&mut row[..i], -c, &s);
                        }
                    }
                });
        }
        d[i] = w[i * n + i];
        w[i * n + i] = 1.0;
        for j in 0..i {
            w[j * n + i] = 0.0;
            w[i * n + j] = 0.0;
        }
    }
}

/// Implicit-shift QL iteration on the tridiagonal (d, e), accumulating the
/// plane rotations into `w` (row-major). Rotation sweeps are applied in
/// batches, in parallel over row blocks.
fn tql2(d: &mut [f64], e: &mut [f64], w: &mut [f64], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    // Absolute deflation floor at the scale of the whole tridiagonal matrix
    // (Gershgorin bound on |lambda|). The relative test below stalls on
    // trailing blocks of pure roundoff noise, where d and e are comparably
    // tiny; dropping e entries at this floor perturbs eigenvalues by at most
    // O(eps ||T||), the backward error the reduction already carries.
    let mut anorm = 0.0f64;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        anorm = anorm.max(d[i].abs() + e[i].abs() + left);
    }
    let floor = f64::EPSILON * anorm;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 30 {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + copysign_nr(r, g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut rots: Vec<(usize, f64, f64)> = Vec::with_capacity(m - l);
            let mut early = false;

            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let t = (d[i] - g) * s + 2.0 * c * b;
                p = s * t;
                d[i + 1] = g + p;
                g = c * t - b;
                rots.push((i, c, s));
            }
            apply_rotations(w, n, &rots);
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn apply_rotations(w: &mut [f64], n: usize, rots: &[(usize, f64, f64)]) {
    if rots.is_empty() {
        return;
    }
    w.par_chunks_mut(ROW_CHUNK * n).for_each(|rows| {
        for row in rows.chunks_mut(n) {
            for &(i, c, s) in rots {
                let f = row[i + 1];
                row[i + 1] = s * row[i] + c * f;
                row[i] = c * row[i] - s * f;
            }
        }
    });
}

/// `sqrt(a^2 + b^2)` without overflow; deterministic formula, no libm hypot.
fn pythag(a: f64, b: f64) -> f64 {
    let (absa, absb) = (a.abs(), b.abs());
    if absa > absb {
        let q = absb / absa;
        absa * (1.0 + q * q).sqrt()
    } else if absb == 0.0 {
        0.0
    } else {
        let q = absa / absb;
        absb * (1.0 + q * q).sqrt()
    }
}

/// |a| carrying the sign of b.
fn copysign_nr(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

// ---------------------------------------------------------------------------
// derived factorizations
// ---------------------------------------------------------------------------

/// Default relative spectral cutoff for [`pinv_psd`] on an `m x m` matrix.
pub fn default_pinv_tol(m: usize) -> f64 {
    1e-12 * m as f64
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Eigenvalues at or
/// below `rel_tol * lambda_max` are treated as zero; rank-deficient input is
/// the normal case, not an error.
pub fn pinv_psd(a: &DenseMatrix, rel_tol: f64) -> Result<DenseMatrix> {
    let eig = sym_eig(a)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let cut = rel_tol * lmax;
    let mut scaled = eig.vectors.clone();
    for (j, &lambda) in eig.values.iter().enumerate() {
        let inv = if lambda > cut { 1.0 / lambda } else { 0.0 };
        for v in scaled.col_mut(j) {
            *v *= inv;
        }
    }
    Ok(scaled.matmul_tr(&eig.vectors))
}

/// Best rank-r approximation of a symmetric PSD matrix: the top-r truncation
/// of its eigendecomposition. Serves as the exact baseline the Nystrom
/// variants are measured against. `r = 0` returns an empty approximation.
pub fn best_rank_r(a: &DenseMatrix, r: usize) -> Result<RankRApprox> {
    let n = a.rows();
    if r > n {
        return Err(Error::Rank { r, n });
    }
    if r == 0 {
        return Ok(RankRApprox::empty(n));
    }
    let eig = sym_eig(a)?;
    let u = eig.vectors.select_columns(&(0..r).collect::<Vec<_>>());
    let lambda: Vec<f64> = eig.values[..r].iter().map(|&l| l.max(0.0)).collect();
    Ok(RankRApprox { u, lambda })
}

/// Cholesky factor (lower triangular) of an SPD matrix.
pub(crate) fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::dim("Cholesky needs a square matrix".to_string()));
    }
    let mut l = a.clone();
    for j in 0..n {
        for k in 0..j {
            let ljk = l.get(j, k);
            if ljk != 0.0 {
                let (head, tail) = l.data.split_at_mut(j * n);
                let colk = &head[k * n + j..(k + 1) * n];
                let colj = &mut tail[j..n];
                axpy(colj, -ljk, colk);
            }
        }
        let pivot = l.get(j, j);
        if !(pivot > 0.0) {
            return Err(Error::Degenerate(format!(
                "matrix is not positive definite (pivot {pivot:.3e} at {j})"
            )));
        }
        let s = pivot.sqrt();
        l.set(j, j, s);
        let inv = 1.0 / s;
        for v in &mut l.col_mut(j)[j + 1..] {
            *v *= inv;
        }
        for i in 0..j {
            l.set(i, j, 0.0);
        }
    }
    Ok(l)
}

/// Solve `A x = b` for symmetric positive-definite `A`.
pub fn chol_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if b.len() != n {
        return Err(Error::dim(format!(
            "rhs length {} does not match system size {n}",
            b.len()
        )));
    }
    let l = cholesky(a)?;
    let mut y = b.to_vec();
    for k in 0..n {
        y[k] /= l.get(k, k);
        let yk = y[k];
        let colk = &l.col(k)[k + 1..];
        axpy(&mut y[k + 1..], -yk, colk);
    }
    for i in (0..n).rev() {
        let colk = &l.col(i)[i + 1..];
        y[i] = (y[i] - dot(colk, &y[i + 1..])) / l.get(i, i);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = rng_from_seed(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    fn random_spd(n: usize, seed: u64) -> DenseMatrix {
        let b = random_matrix(n + 2, n, seed);
        b.tr_matmul(&b)
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(2, 1, vec![1.0, f64::NAN]).is_err());
        assert!(matches!(
            DenseMatrix::new(1, 1, vec![f64::INFINITY]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn matmul_agrees_with_naive() {
        let a = random_matrix(7, 5, 1);
        let b = random_matrix(5, 6, 2);
        let c = a.matmul(&b);
        for i in 0..7 {
            for j in 0..6 {
                let want: f64 = (0..5).map(|k| a.get(i, k) * b.get(k, j)).sum();
                assert!((c.get(i, j) - want).abs() < 1e-12);
            }
        }
        let d = a.tr_matmul(&a);
        for i in 0..5 {
            for j in 0..5 {
                let want: f64 = (0..7).map(|k| a.get(k, i) * a.get(k, j)).sum();
                assert!((d.get(i, j) - want).abs() < 1e-12);
            }
        }
        let e = b.matmul_tr(&b);
        for i in 0..5 {
            for j in 0..5 {
                let want: f64 = (0..6).map(|k| b.get(i, k) * b.get(j, k)).sum();
                assert!((e.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frob_norm_identity_is_sqrt3() {
        assert!((DenseMatrix::identity(3).frob_norm() - 3.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(DenseMatrix::zeros(4, 2).frob_norm(), 0.0);
    }

    #[test]
    fn qr_identity() {
        let (q, r) = thin_qr(&DenseMatrix::identity(3)).unwrap();
        assert!(q.frob_distance(&DenseMatrix::identity(3)) < 1e-14);
        assert!(r.frob_distance(&DenseMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn qr_rejects_wide() {
        assert!(thin_qr(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn qr_toy_cross_block() {
        // C with columns (1,0,10) and (0,1.01,0).
        let c = DenseMatrix::new(3, 2, vec![1.0, 0.0, 10.0, 0.0, 1.01, 0.0]).unwrap();
        let (q, r) = thin_qr(&c).unwrap();
        let s = 101.0f64.sqrt();
        assert!((q.get(0, 0) - 1.0 / s).abs() < 1e-14);
        assert!((q.get(2, 0) - 10.0 / s).abs() < 1e-14);
        assert!((q.get(1, 1) - 1.0).abs() < 1e-14);
        assert!((r.get(0, 0) - s).abs() < 1e-12);
        assert!((r.get(1, 1) - 1.01).abs() < 1e-14);
        assert!(r.get(1, 0).abs() < 1e-15 && r.get(0, 1).abs() < 1e-15);
    }

    #[test]
    fn qr_reconstruction_random() {
        for seed in 0..20 {
            let n = 4 + (seed as usize % 9);
            let m = 1 + (seed as usize % n.min(5));
            let a = random_matrix(n, m, 100 + seed);
            let (q, r) = thin_qr(&a).unwrap();
            let qr = q.matmul(&r);
            assert!(qr.frob_distance(&a) <= 1e-10 * a.frob_norm().max(1.0));
            let qtq = q.tr_matmul(&q);
            assert!(qtq.frob_distance(&DenseMatrix::identity(m)) <= 1e-10 * m as f64);
            for j in 0..m {
                assert!(r.get(j, j) >= 0.0);
                for i in j + 1..m {
                    assert_eq!(r.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn eig_diagonal() {
        let a = DenseMatrix::new(2, 2, vec![101.0, 0.0, 0.0, 1.01]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert!((eig.values[0] - 101.0).abs() < 1e-12);
        assert!((eig.values[1] - 1.01).abs() < 1e-14);
        assert!(eig.vectors.get(0, 0).abs() > 0.999);
    }

    #[test]
    fn eig_zero_matrix() {
        let eig = sym_eig(&DenseMatrix::zeros(4, 4)).unwrap();
        assert!(eig.values.iter().all(|&v| v == 0.0));
        let vtv = eig.vectors.tr_matmul(&eig.vectors);
        assert!(vtv.frob_distance(&DenseMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn eig_rejects_asymmetric_and_rectangular() {
        assert!(sym_eig(&DenseMatrix::zeros(2, 3)).is_err());
        let a = DenseMatrix::new(2, 2, vec![1.0, 5.0, 0.0, 1.0]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn eig_reconstruction_random_spd() {
        for seed in 0..15 {
            let n = 2 + (seed as usize % 12);
            let a = random_spd(n, 300 + seed);
            let eig = sym_eig(&a).unwrap();
            // descending, PSD up to roundoff
            for k in 1..n {
                assert!(eig.values[k - 1] >= eig.values[k]);
            }
            assert!(eig.values[n - 1] >= -1e-10 * eig.values[0].max(1.0));
            let mut vl = eig.vectors.clone();
            for (j, &l) in eig.values.iter().enumerate() {
                for v in vl.col_mut(j) {
                    *v *= l;
                }
            }
            let rec = vl.matmul_tr(&eig.vectors);
            assert!(rec.frob_distance(&a) <= 1e-9 * a.frob_norm().max(1.0));
            let vtv = eig.vectors.tr_matmul(&eig.vectors);
            assert!(vtv.frob_distance(&DenseMatrix::identity(n)) <= 1e-10 * n as f64);
        }
    }

    #[test]
    fn eig_reconstruction_indefinite() {
        // General symmetric (indefinite) input must also reconstruct.
        for seed in 0..10 {
            let n = 3 + (seed as usize % 10);
            let b = random_matrix(n, n, 500 + seed);
            let mut a = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a.set(i, j, 0.5 * (b.get(i, j) + b.get(j, i)));
                }
            }
            let eig = sym_eig(&a).unwrap();
            let mut vl = eig.vectors.clone();
            for (j, &l) in eig.values.iter().enumerate() {
                for v in vl.col_mut(j) {
                    *v *= l;
                }
            }
            let rec = vl.matmul_tr(&eig.vectors);
            assert!(rec.frob_distance(&a) <= 1e-9 * a.frob_norm().max(1.0));
        }
    }

    #[test]
    fn pinv_diagonal_cases() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.01]).unwrap();
        let p = pinv_psd(&a, default_pinv_tol(2)).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((p.get(1, 1) - 1.0 / 1.01).abs() < 1e-12);

        let b = DenseMatrix::new(2, 2, vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        let pb = pinv_psd(&b, default_pinv_tol(2)).unwrap();
        assert!((pb.get(0, 0) - 0.5).abs() < 1e-12);
        assert!(pb.get(1, 1).abs() < 1e-15);
    }

    #[test]
    fn pinv_moore_penrose_low_rank() {
        for seed in 0..8 {
            // rank-2 PSD 5x5
            let b = random_matrix(2, 5, 700 + seed);
            let a = b.tr_matmul(&b);
            let p = pinv_psd(&a, default_pinv_tol(5)).unwrap();
            let apa = a.matmul(&p).matmul(&a);
            let pap = p.matmul(&a).matmul(&p);
            let tol = 1e-8 * a.frob_norm().max(1.0);
            assert!(apa.frob_distance(&a) <= tol);
            assert!(pap.frob_distance(&p) <= tol);
        }
    }

    #[test]
    fn best_rank_r_bounds_and_residuals() {
        let a = random_spd(10, 42);
        assert!(best_rank_r(&a, 11).is_err());
        let full = best_rank_r(&a, 10).unwrap();
        assert!(full.reconstruct().frob_distance(&a) <= 1e-9 * a.frob_norm());

        let eig = sym_eig(&a).unwrap();
        let r3 = best_rank_r(&a, 3).unwrap();
        let resid = r3.reconstruct().frob_distance(&a);
        let expect: f64 = eig.values[3..].iter().map(|l| l * l).sum::<f64>().sqrt();
        assert!((resid - expect).abs() <= 1e-9 * a.frob_norm().max(1.0));

        // residual non-increasing in r
        let mut prev = f64::INFINITY;
        for r in 0..=10 {
            let ap = best_rank_r(&a, r).unwrap();
            let res = ap.reconstruct().frob_distance(&a);
            assert!(res <= prev + 1e-10);
            prev = res;
        }
        // r = 0 is an empty approximation
        assert_eq!(best_rank_r(&a, 0).unwrap().rank(), 0);
    }

    #[test]
    fn chol_solves_spd() {
        for seed in 0..6 {
            let n = 3 + (seed as usize % 8);
            let mut a = random_spd(n, 900 + seed);
            for i in 0..n {
                a.set(i, i, a.get(i, i) + 0.5);
            }
            let mut rng = rng_from_seed(1000 + seed);
            let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let x = chol_solve(&a, &b).unwrap();
            let r = a.matvec(&x);
            let err: f64 = r.iter().zip(&b).map(|(ri, bi)| (ri - bi).powi(2)).sum();
            assert!(err.sqrt() <= 1e-9);
        }
        let not_pd = DenseMatrix::new(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(chol_solve(&not_pd, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn projector_distance_detects_subspace() {
        let a = random_spd(6, 5);
        let x = best_rank_r(&a, 2).unwrap();
        let y = best_rank_r(&a, 2).unwrap();
        assert!(projector_distance(&x, &y) < 1e-12);
        let z = best_rank_r(&a, 3).unwrap();
        assert!(projector_distance(&x, &z) > 0.9);
    }
}
