//! Kernel low-rank approximation toolkit.
//!
//! `nyskit` builds Nystrom-type low-rank approximations `K ~ L L^T` of kernel
//! (Gram) matrices from a small set of landmark points. Two rank-restriction
//! routes are provided: the classical one that truncates the inner landmark
//! matrix, and an optimal one that QR-factors the cross-kernel block and
//! truncates the full approximation itself. Landmarks can be drawn uniformly,
//! by column norms, by diagonal weights, from K-means centroids, or from
//! K-means centroids computed on random sign sketches of the data and lifted
//! back to the original space. A small kernel ridge regression solver consumes
//! the resulting factors through the Woodbury identity.
//!
//! ```
//! use nyskit::{DenseMatrix, KernelSpec};
//! use nyskit::landmark::uniform_landmarks;
//! use nyskit::nystrom::{low_rank_factor, normalized_error, nystrom_qr, NystromInputs};
//!
//! // 40 points on a noisy line in R^2, columns are points.
//! let pts: Vec<f64> = (0..40)
//!     .flat_map(|i| {
//!         let t = i as f64 / 10.0;
//!         [t, 2.0 * t + (i as f64 * 0.37).sin() * 0.05]
//!     })
//!     .collect();
//! let x = DenseMatrix::new(2, 40, pts).unwrap();
//! let spec = KernelSpec::gaussian(16.0).unwrap();
//!
//! let lm = uniform_landmarks(&x, 8, 7).unwrap();
//! let inputs = NystromInputs::from_data(&x, lm, spec.clone()).unwrap();
//! let approx = nystrom_qr(&inputs, 4).unwrap();
//! let l = low_rank_factor(&approx).unwrap();
//! let err = normalized_error(&x, &spec, &l, 16).unwrap();
//! assert!(err < 0.01);
//! ```

pub mod dataio;
pub mod kernels;
pub mod krr;
pub mod landmark;
pub mod matrix;
pub mod nystrom;
pub mod par;
pub mod rng;

mod error;

pub use error::{Error, Result};
pub use kernels::KernelSpec;
pub use matrix::{DataMatrix, DenseMatrix, RankRApprox, SymEig};
