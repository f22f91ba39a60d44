//! Data-parallel iteration with a sequential fallback.
//!
//! With the default `parallel` feature these names re-export the rayon traits
//! used throughout the crate. Without it they resolve to thin shims over the
//! standard sequential iterators, so every call site compiles unchanged.
//!
//! Hot loops are written so that floating-point reductions always combine
//! fixed-size chunk partials in index order. Chunk boundaries never depend on
//! the worker-pool size, which makes every result bit-identical across thread
//! counts and across the parallel/sequential builds.

#[cfg(feature = "parallel")]
pub use rayon::prelude::{
    IndexedParallelIterator, IntoParallelIterator, ParallelIterator, ParallelSlice,
    ParallelSliceMut,
};

#[cfg(not(feature = "parallel"))]
pub use seq::{IntoParallelIterator, ParallelSlice, ParallelSliceMut};

#[cfg(not(feature = "parallel"))]
mod seq {
    //! Sequential stand-ins exposing the subset of rayon's API this crate uses.

    pub trait IntoParallelIterator: IntoIterator + Sized {
        fn into_par_iter(self) -> Self::IntoIter {
            self.into_iter()
        }
    }

    impl<T: IntoIterator + Sized> IntoParallelIterator for T {}

    pub trait ParallelSlice<T> {
        fn par_chunks(&self, chunk_size: usize) -> std::slice::Chunks<'_, T>;
    }

    impl<T> ParallelSlice<T> for [T] {
        fn par_chunks(&self, chunk_size: usize) -> std::slice::Chunks<'_, T> {
            self.chunks(chunk_size)
        }
    }

    pub trait ParallelSliceMut<T> {
        fn par_chunks_mut(&mut self, chunk_size: usize) -> std::slice::ChunksMut<'_, T>;
    }

    impl<T> ParallelSliceMut<T> for [T] {
        fn par_chunks_mut(&mut self, chunk_size: usize) -> std::slice::ChunksMut<'_, T> {
            self.chunks_mut(chunk_size)
        }
    }
}

/// Fixed chunk length for loops over data points.
pub(crate) const POINT_CHUNK: usize = 256;

/// Fixed chunk length (in rows) for loops over matrix rows.
pub(crate) const ROW_CHUNK: usize = 64;

/// Fixed chunk length (in columns) for loops over matrix columns.
pub(crate) const COL_CHUNK: usize = 16;

/// Split `0..n` into the fixed chunks used by deterministic reductions.
pub(crate) fn chunk_ranges(n: usize, chunk: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::with_capacity(n / chunk + 1);
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        out.push(start..end);
        start = end;
    }
    out
}
