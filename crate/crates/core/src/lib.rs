// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Estimation of an amplitude-damping constant with two-mode cat-state probes.
//!
//! States are finite mixtures of coherent dyads `|k₁,k₂⟩⟨b₁,b₂|`, which stay
//! closed under the beam splitter, displacements and the loss channel. Homodyne
//! statistics of the EPR observables `X̂`, `P̂` come from normal-ordered moments
//! and closed-form quadrature wavefunctions. A truncated Fock-space integrator
//! in [`fock`] cross-checks the whole pipeline.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix it to `f64`. The Fock oracle works in `f64` only.

pub mod error;
pub mod estimation;
pub mod fock;
pub mod observables;
pub mod optimizer;
pub mod oracle;
pub mod probes;
pub mod response;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use probes::ProbeClass;
pub use scalar::Real;
pub use state::{Mode, Splitter};

pub type C64 = num_complex::Complex<f64>;
pub type Dyad = state::CoherentDyad<f64>;
pub type Mix = state::DyadMix<f64>;
pub type Mix32 = state::DyadMix<f32>;
pub type Poly = observables::NormalOrderedPoly<f64>;
pub type Spec = probes::ProbeSpec<f64>;
pub type Spec32 = probes::ProbeSpec<f32>;
pub type Moments = response::DampedMoments<f64>;
pub type Coeffs = estimation::EstimatorCoeffs<f64>;
pub type Config = estimation::RunConfig<f64>;
pub type Report = estimation::ErrorReport<f64>;
pub type Optimum = optimizer::OptimumRecord<f64>;
pub type Improvement = optimizer::ImprovementPoint<f64>;
pub type Density = fock::FockDensity;
