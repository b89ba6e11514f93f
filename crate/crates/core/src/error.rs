// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;

/// Errors raised by the correlation-dynamics engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty set where a nonempty one is required")]
    EmptySet,
    #[error("duplicate element at position {0}")]
    DuplicateElement(usize),
    #[error("invalid particle label {0}: labels are positive integers")]
    InvalidLabel(u32),
    #[error("cluster elements overlap on label {0}")]
    OverlappingElements(u32),
    #[error("{what}: requested {requested} exceeds cap {cap}")]
    ResourceCap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("statistics of operands differ")]
    StatisticsMismatch,
    #[error("label {0} is not part of the ground set")]
    NotInGround(u32),
    #[error("cannot keep {keep} particles of a {count}-particle operator")]
    ParticleCount { keep: usize, count: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("{what} is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { what: String, deviation: f64 },
    #[error("no {k}-body potential supplied")]
    MissingPotential { k: usize },
    #[error("no evolution data cached for {particles} particles")]
    MissingCacheEntry { particles: usize },
    #[error("blocks overlap or do not cover the ground set")]
    InvalidBlocks,
    #[error("order {requested} exceeds the truncation order {n_max}")]
    Truncation { requested: usize, n_max: usize },
    #[error("integration produced non-finite values at step {step}")]
    IntegrationFailure { step: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
