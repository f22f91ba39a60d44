//! Dataset ingestion, synthetic generators, dataset transforms, and CSV
//! result output.
//!
//! Everything is dense: points are columns of a `p x n` matrix. LIBSVM sparse
//! text input is densified on load, with absent features set to zero.

use crate::kernels::{gram, KernelSpec};
use crate::matrix::{DataMatrix, DenseMatrix};
use crate::rng::rng_from_seed;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// A dataset: points as columns, optional per-point responses.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DataMatrix,
    pub y: Option<Vec<f64>>,
    pub name: String,
}

impl Dataset {
    pub fn points(&self) -> usize {
        self.x.cols()
    }

    pub fn dim(&self) -> usize {
        self.x.rows()
    }
}

/// Parse a LIBSVM sparse text file: one point per line,
/// `<label> <index>:<value> ...` with 1-based strictly ascending indices.
/// Missing features are zero. `expected_dim` fixes the dimension; otherwise
/// the largest index seen wins.
pub fn parse_libsvm(path: &Path, expected_dim: Option<usize>) -> Result<Dataset> {
    let display = path.display().to_string();
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: display.clone(),
        line,
        msg,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::Parse {
        path: display.clone(),
        line: 0,
        msg: e.to_string(),
    })?;
    let reader = BufReader::new(file);

    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad label {label_tok:?}")))?;
        let mut features = Vec::new();
        let mut prev_index = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature index {idx_s:?}")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based".into()));
            }
            if idx <= prev_index {
                return Err(parse_err(
                    lineno,
                    format!("feature indices must ascend, got {idx} after {prev_index}"),
                ));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature value {val_s:?}")))?;
            if let Some(dim) = expected_dim {
                if idx > dim {
                    return Err(parse_err(
                        lineno,
                        format!("feature index {idx} exceeds the expected dimension {dim}"),
                    ));
                }
            }
            prev_index = idx;
            features.push((idx, val));
        }
        max_index = max_index.max(prev_index);
        labels.push(label);
        rows.push(features);
    }

    let p = expected_dim.unwrap_or(max_index);
    let n = rows.len();
    let mut x = DenseMatrix::zeros(p, n);
    for (j, features) in rows.iter().enumerate() {
        let col = x.col_mut(j);
        for &(idx, val) in features {
            col[idx - 1] = val;
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(Dataset {
        x,
        y: Some(labels),
        name,
    })
}

/// Write a dataset in LIBSVM format. Zero entries are omitted; values are
/// printed with Rust's shortest round-trip formatting, so a parse of the
/// written file recovers them exactly. Missing responses write label 0.
pub fn write_libsvm(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    let n = dataset.points();
    for j in 0..n {
        let label = dataset.y.as_ref().map_or(0.0, |y| y[j]);
        write!(out, "{label}").expect("string write");
        for (i, &v) in dataset.x.col(j).iter().enumerate() {
            if v != 0.0 {
                write!(out, " {}:{}", i + 1, v).expect("string write");
            }
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Two concentric noisy rings in the plane, `n/2` points per ring, labels
/// -1 (inner) and +1 (outer). Radial noise is Gaussian with the given
/// standard deviation; `noise = 0` puts every point exactly on its circle.
pub fn synth_two_rings(
    n: usize,
    seed: u64,
    radii: (f64, f64),
    noise: f64,
) -> Result<Dataset> {
    let (r_in, r_out) = radii;
    if n == 0 || n % 2 != 0 {
        return Err(Error::Degenerate(format!(
            "two-rings needs a positive even point count, got {n}"
        )));
    }
    if !(r_in < r_out) {
        return Err(Error::Degenerate(format!(
            "inner radius must be smaller, got ({r_in}, {r_out})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let normal = StandardNormal;
    let half = n / 2;
    let mut x = DenseMatrix::zeros(2, n);
    let mut y = Vec::with_capacity(n);
    for j in 0..n {
        let base = if j < half { r_in } else { r_out };
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let jitter: f64 = normal.sample(&mut rng);
        let r = base + noise * jitter;
        let col = x.col_mut(j);
        col[0] = r * theta.cos();
        col[1] = r * theta.sin();
        y.push(if j < half { -1.0 } else { 1.0 });
    }
    Ok(Dataset {
        x,
        y: Some(y),
        name: "two-rings".into(),
    })
}

/// The worked 3x3 example: data columns `(1,0,1)/sqrt(2)`,
/// `(0,sqrt(2.02),0)/sqrt(2)`, `(10,0,10)/sqrt(2)` and the kernel matrix they
/// induce under the degree-1 polynomial kernel with zero offset.
pub fn toy_example() -> (DataMatrix, DenseMatrix) {
    let s = 1.0 / 2.0f64.sqrt();
    let x = DenseMatrix::new(
        3,
        3,
        vec![
            s,
            0.0,
            s,
            0.0,
            (2.0 * 1.01f64).sqrt() * s,
            0.0,
            10.0 * s,
            0.0,
            10.0 * s,
        ],
    )
    .expect("static entries");
    let k = DenseMatrix::new(
        3,
        3,
        vec![1.0, 0.0, 10.0, 0.0, 1.01, 0.0, 10.0, 0.0, 100.0],
    )
    .expect("static entries");
    let check = gram(&x, &KernelSpec::Polynomial { c: 0.0, d: 1 }).expect("gram of fixed data");
    debug_assert!(
        check.frob_distance(&k) <= 1e-12 * k.frob_norm(),
        "toy Gram matrix drifted from its kernel matrix"
    );
    (x, k)
}

/// Repeat each point `k` times (adjacent copies); responses repeat alongside.
pub fn duplicate_points(dataset: &Dataset, k: usize) -> Dataset {
    assert!(k >= 1, "duplication factor must be at least 1");
    let n = dataset.points();
    let mut x = DenseMatrix::zeros(dataset.dim(), n * k);
    let mut y = dataset.y.as_ref().map(|_| Vec::with_capacity(n * k));
    for j in 0..n {
        for copy in 0..k {
            x.col_mut(j * k + copy).copy_from_slice(dataset.x.col(j));
            if let (Some(dst), Some(src)) = (y.as_mut(), dataset.y.as_ref()) {
                dst.push(src[j]);
            }
        }
    }
    Dataset {
        x,
        y,
        name: dataset.name.clone(),
    }
}

/// Repeat each feature `k` times (adjacent copies); pairwise squared
/// distances scale by exactly `k`.
pub fn duplicate_features(dataset: &Dataset, k: usize) -> Dataset {
    assert!(k >= 1, "duplication factor must be at least 1");
    let (p, n) = (dataset.dim(), dataset.points());
    let mut x = DenseMatrix::zeros(p * k, n);
    for j in 0..n {
        let src = dataset.x.col(j).to_vec();
        let dst = x.col_mut(j);
        for (i, &v) in src.iter().enumerate() {
            for copy in 0..k {
                dst[i * k + copy] = v;
            }
        }
    }
    Dataset {
        x,
        y: dataset.y.clone(),
        name: dataset.name.clone(),
    }
}

/// Uniform without-replacement subsample of `n_keep` points, seed
/// deterministic; the kept columns stay in their original order.
pub fn subsample(dataset: &Dataset, n_keep: usize, seed: u64) -> Result<Dataset> {
    let n = dataset.points();
    if n_keep > n {
        return Err(Error::SampleSize { m: n_keep, n });
    }
    let mut rng = rng_from_seed(seed);
    let mut indices = rand::seq::index::sample(&mut rng, n, n_keep).into_vec();
    indices.sort_unstable();
    Ok(Dataset {
        x: dataset.x.select_columns(&indices),
        y: dataset
            .y
            .as_ref()
            .map(|y| indices.iter().map(|&i| y[i]).collect()),
        name: dataset.name.clone(),
    })
}

/// One experiment measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub m: usize,
    pub r: usize,
    pub gamma: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub error: f64,
    pub elapsed_seconds: f64,
}

/// Write experiment rows as CSV: a header plus one row per record.
/// Measurements are printed with 13 significant digits.
pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut out = String::from("method,m,r,gamma,trial,seed,error,elapsed_seconds\n");
    for row in rows {
        let gamma = row.gamma.map_or(String::new(), |g| format!("{g}"));
        writeln!(
            out,
            "{},{},{},{},{},{},{:.12e},{:.12e}",
            row.method, row.m, row.r, gamma, row.trial, row.seed, row.error, row.elapsed_seconds
        )
        .expect("string write");
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}
