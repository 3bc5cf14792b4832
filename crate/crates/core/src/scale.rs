//! Global size caps for brute-force work.
//!
//! The polynomial-degree cap bounds every iterate the oracle builds; the
//! enumeration cap bounds the number of field elements walked by the curve
//! and cycle-census code. Both can be lowered at runtime (the CLI does this
//! from an environment variable) but never raised above their defaults.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEGREE: u64 = 10_000;
pub const DEFAULT_MAX_ENUMERATION: u64 = 1_000_000;
pub const MAX_EXTENSION_DEGREE: usize = 12;

static MAX_DEGREE: AtomicU64 = AtomicU64::new(DEFAULT_MAX_DEGREE);
static MAX_ENUMERATION: AtomicU64 = AtomicU64::new(DEFAULT_MAX_ENUMERATION);

pub fn max_degree() -> u64 {
    MAX_DEGREE.load(Ordering::Relaxed)
}

pub fn max_enumeration() -> u64 {
    MAX_ENUMERATION.load(Ordering::Relaxed)
}

/// Lowers the degree cap. Values above the default are clamped.
pub fn set_max_degree(cap: u64) {
    MAX_DEGREE.store(cap.min(DEFAULT_MAX_DEGREE), Ordering::Relaxed);
}

/// Lowers the enumeration cap. Values above the default are clamped.
pub fn set_max_enumeration(cap: u64) {
    MAX_ENUMERATION.store(cap.min(DEFAULT_MAX_ENUMERATION), Ordering::Relaxed);
}

pub(crate) fn check_degree(what: &'static str, degree: u64) -> Result<()> {
    let limit = max_degree();
    if degree > limit {
        return Err(Error::ScaleExceeded { what, value: degree as u128, limit: limit as u128 });
    }
    Ok(())
}

pub(crate) fn check_enumeration(what: &'static str, size: u128) -> Result<()> {
    let limit = max_enumeration() as u128;
    if size > limit {
        return Err(Error::ScaleExceeded { what, value: size, limit });
    }
    Ok(())
}
