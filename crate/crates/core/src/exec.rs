//! Execution strategy for the data-parallel loops (orbit grids, per-point
//! displacement work, catalog enumeration).
//!
//! With the `parallel` feature the [`Exec::Parallel`] strategy dispatches to
//! rayon; without it every strategy runs sequentially. Results always come
//! back in input order, so outputs are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// `all` with short-circuit; order of evaluation is unspecified.
    pub fn all<T, F>(self, items: &[T], f: F) -> bool
    where
        T: Sync,
        F: Fn(&T) -> bool + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().all(f),
            _ => items.iter().all(f),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let seq = Exec::Sequential.map(&xs, |x| x * 3);
        let par = Exec::Parallel.map(&xs, |x| x * 3);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 2997);
    }

    #[test]
    fn all_agrees() {
        let xs: Vec<u32> = (1..500).collect();
        assert!(Exec::Parallel.all(&xs, |&x| x > 0));
        assert!(!Exec::Sequential.all(&xs, |&x| x != 250));
    }
}
