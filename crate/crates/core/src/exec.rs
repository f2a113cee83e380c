//! Data-parallel helpers with a sequential fallback.
//!
//! With the default `parallel` feature the indexed maps below fan out on
//! rayon; without it they compile to plain loops. Two rules keep results
//! bitwise-deterministic regardless of thread scheduling:
//!
//! 1. only *indexed maps* are parallel — element `i` of the output depends on
//!    `i` alone;
//! 2. reductions over mapped values are always performed sequentially, in
//!    index order.
//!
//! The `*_seq` variants are always compiled; the benchmark suite uses them to
//! compare the two execution modes on identical workloads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_collect<U: Send>(n: usize, f: impl Fn(usize) -> U + Send + Sync) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_collect_seq(n, f)
    }
}

/// Sequential twin of [`map_collect`].
pub fn map_collect_seq<U>(n: usize, f: impl Fn(usize) -> U) -> Vec<U> {
    (0..n).map(f).collect()
}

/// Sum `f(i)` over `0..n` with a deterministic (sequential, index-ordered)
/// final reduction; the map itself may run in parallel.
pub fn sum(n: usize, f: impl Fn(usize) -> f64 + Send + Sync) -> f64 {
    map_collect(n, f).iter().sum()
}

/// Sequential twin of [`sum`].
pub fn sum_seq(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    (0..n).map(f).sum()
}

/// Maximum of `f(i)` over `0..n` (deterministic; NaN-free inputs assumed).
pub fn max(n: usize, f: impl Fn(usize) -> f64 + Send + Sync) -> f64 {
    map_collect(n, f).iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Sequential twin of [`max`].
pub fn max_seq(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.1).sin() / (1.0 + i as f64);
        assert_eq!(sum(1000, f).to_bits(), sum_seq(1000, f).to_bits());
        assert_eq!(max(1000, f).to_bits(), max_seq(1000, f).to_bits());
        assert_eq!(map_collect(257, |i| i * i), map_collect_seq(257, |i| i * i));
    }
}
