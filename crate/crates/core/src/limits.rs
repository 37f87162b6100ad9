//! Process-wide size guards.
//!
//! Every group order is exact, so nothing breaks numerically at large
//! levels, but factorization and enumeration costs grow quickly. The guards
//! reject inputs well before that happens.

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_MAX_LEVEL_DEGREE: u64 = 64;
pub const DEFAULT_MAX_ENUMERATION: u64 = 1 << 22;

pub const MAX_LEVEL_ENV: &str = "JLRES_MAX_LEVEL";
pub const MAX_ENUMERATION_ENV: &str = "JLRES_MAX_ENUMERATION";

static MAX_LEVEL_DEGREE: AtomicU64 = AtomicU64::new(DEFAULT_MAX_LEVEL_DEGREE);
static MAX_ENUMERATION: AtomicU64 = AtomicU64::new(DEFAULT_MAX_ENUMERATION);

/// Largest admissible degree of a field level over `e`.
pub fn max_level_degree() -> u64 {
    MAX_LEVEL_DEGREE.load(Ordering::Relaxed)
}

pub fn set_max_level_degree(deg: u64) {
    MAX_LEVEL_DEGREE.store(deg.max(1), Ordering::Relaxed);
}

/// Largest group order `M` for which all exponents may be enumerated.
pub fn max_enumeration() -> u64 {
    MAX_ENUMERATION.load(Ordering::Relaxed)
}

pub fn set_max_enumeration(size: u64) {
    MAX_ENUMERATION.store(size.max(1), Ordering::Relaxed);
}

/// Applies overrides from `JLRES_MAX_LEVEL` / `JLRES_MAX_ENUMERATION`.
/// Unparseable values are ignored.
pub fn apply_env_overrides() {
    if let Some(v) = std::env::var(MAX_LEVEL_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        set_max_level_degree(v);
    }
    if let Some(v) = std::env::var(MAX_ENUMERATION_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        set_max_enumeration(v);
    }
}
