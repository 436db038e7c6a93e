//! Data-parallel helpers. With the `parallel` feature the default strategy
//! uses rayon; without it everything runs sequentially.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

static STRATEGY: AtomicU8 = AtomicU8::new(if cfg!(feature = "parallel") { 1 } else { 0 });

impl Strategy {
    /// Falls back to `Sequential` when built without the `parallel` feature.
    pub fn effective(self) -> Strategy {
        if cfg!(feature = "parallel") {
            self
        } else {
            Strategy::Sequential
        }
    }
}

pub fn set_strategy(s: Strategy) {
    STRATEGY.store(if s.effective() == Strategy::Parallel { 1 } else { 0 }, Ordering::Relaxed);
}

pub fn strategy() -> Strategy {
    if STRATEGY.load(Ordering::Relaxed) == 1 {
        Strategy::Parallel
    } else {
        Strategy::Sequential
    }
}

/// Order-preserving map under an explicit strategy.
pub fn map_with<T, R, F>(s: Strategy, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match s.effective() {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_with(strategy(), items, f)
}

pub fn try_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(items, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_keep_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map_with(Strategy::Sequential, &xs, |x| x * x);
        let b = map_with(Strategy::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
    }
}
