// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the state algebra, estimators, optimizer and Fock oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode {0} has an empty term list")]
    EmptyTerms(usize),

    #[error("invalid mode index {0} (expected 1 or 2)")]
    InvalidMode(usize),

    #[error("damping constant must be non-negative and finite, got {0}")]
    InvalidKappa(f64),

    #[error("invalid probe parameter: {0}")]
    InvalidProbe(String),

    #[error("state is not normalized: trace = {0}")]
    NotNormalized(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too narrow: tail mass {0:e} outside the grid")]
    GridTooNarrow(f64),

    #[error("zero signal: first moment insensitive to kappa")]
    ZeroSignal,

    #[error("empty sample set")]
    EmptySamples,

    #[error("infeasible budget: {0}")]
    Infeasible(String),

    #[error("cutoff too small: dim {dim} leaves tail mass {tail:e}")]
    CutoffTooSmall { dim: usize, tail: f64 },

    #[error("trace drift {0:e} during integration (step size too large)")]
    TraceDrift(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
