//! Value-oracle access to a set function.
//!
//! Algorithms only see `f` through [`ValueOracle::value`], which counts every
//! black-box evaluation. The counter is atomic so agents evaluating
//! concurrently share it safely.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::set::StrategySet;

/// A normalized, nonnegative set function over `{0, .., n-1}`.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn eval(&self, set: &StrategySet) -> f64;
}

/// Black-box oracle around a [`SetFunction`] with call accounting.
pub struct ValueOracle {
    func: Arc<dyn SetFunction>,
    calls: AtomicU64,
}

impl ValueOracle {
    pub fn new<F: SetFunction + 'static>(func: F) -> Self {
        Self::from_arc(Arc::new(func))
    }

    pub fn from_arc(func: Arc<dyn SetFunction>) -> Self {
        ValueOracle {
            func,
            calls: AtomicU64::new(0),
        }
    }

    /// A second oracle over the same function with its own counter.
    pub fn fresh(&self) -> Self {
        Self::from_arc(Arc::clone(&self.func))
    }

    pub fn function(&self) -> &Arc<dyn SetFunction> {
        &self.func
    }

    pub fn ground_size(&self) -> usize {
        self.func.ground_size()
    }

    pub fn value(&self, set: &StrategySet) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.func.eval(set)
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// `f(S ∪ {p}) − f(S)`. Zero without any oracle call when `p ∈ S`.
    pub fn marginal_gain(&self, p: usize, set: &StrategySet) -> Result<f64> {
        let n = self.ground_size();
        if p >= n || set.ground_size() != n {
            return Err(Error::StrategyOutOfRange {
                strategy: p,
                size: n,
            });
        }
        if set.contains(p) {
            return Ok(0.0);
        }
        let mut with = set.clone();
        with.insert(p);
        Ok(self.value(&with) - self.value(set))
    }
}

impl std::fmt::Debug for ValueOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValueOracle")
            .field("ground_size", &self.ground_size())
            .field("calls", &self.calls())
            .finish()
    }
}
