//! Resource limits shared by the enumeration routines.

use std::env;

/// Default dimension cap for exact minima and enumeration.
pub const DEFAULT_CAP_N: usize = 8;

/// Default ceiling on the number of lattice vectors a single enumeration may visit.
pub const DEFAULT_MAX_VECTORS: u64 = 40_000_000;

/// Default working precision, in decimal digits, for the asymptotic constants.
pub const DEFAULT_PRECISION_DIGITS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Largest lattice rank accepted by exact enumeration.
    pub max_rank: usize,
    /// Largest number of vectors one short-vector enumeration may produce.
    pub max_vectors: u64,
    /// Run the subset loop of sublattice enumeration on the rayon pool.
    pub parallel: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_rank: DEFAULT_CAP_N,
            max_vectors: DEFAULT_MAX_VECTORS,
            parallel: true,
        }
    }
}

impl Limits {
    /// Reads `GRASSCOUNT_CAP_N`, falling back to the defaults.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = env::var("GRASSCOUNT_CAP_N").ok().and_then(|v| v.trim().parse().ok()) {
            limits.max_rank = cap;
        }
        limits
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// Decimal digits requested through `GRASSCOUNT_PRECISION`.
pub fn precision_digits_from_env() -> usize {
    env::var("GRASSCOUNT_PRECISION")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&d: &usize| d > 0)
        .unwrap_or(DEFAULT_PRECISION_DIGITS)
}
