//! Chunked execution. With the `parallel` feature chunks run on rayon;
//! otherwise sequentially. Output order is the chunk order in both cases.

use alloc::vec::Vec;
use core::ops::Range;

pub(crate) const CHUNK: usize = 4096;

pub(crate) fn chunk_ranges(n: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..n.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(n))
        .collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Range<usize>) -> T + Sync + Send,
{
    use rayon::prelude::*;
    chunk_ranges(n, chunk)
        .into_par_iter()
        .enumerate()
        .map(|(i, r)| f(i, r))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    F: Fn(usize, Range<usize>) -> T,
{
    chunk_ranges(n, chunk)
        .into_iter()
        .enumerate()
        .map(|(i, r)| f(i, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_partition() {
        let r = chunk_ranges(10, 4);
        assert_eq!(r, alloc::vec![0..4, 4..8, 8..10]);
        assert!(chunk_ranges(0, 4).is_empty());
    }
}
