//! Data-parallel map with a sequential fallback.
//!
//! Everything batch-shaped in this crate (corpus re-checks, n-range sweeps,
//! truth-table scans) funnels through [`maybe_par_map`] so the `parallel`
//! feature flips one switch instead of many call sites.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential variant, kept for benchmark comparison.
pub fn seq_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_and_seq_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = maybe_par_map(xs.clone(), |x| x * x + 1);
        let b = seq_map(xs, |x| x * x + 1);
        assert_eq!(a, b);
    }
}
