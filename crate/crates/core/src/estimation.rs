// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Linearized κ estimator, its analytic error, and Monte Carlo homodyne runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::{marginal_x_default, GridDensity, DEFAULT_GRID_POINTS};
use crate::probes::{make_probe, photon_number, ProbeSpec};
use crate::response::{mean_x_damped, slope_at_zero, var_x_damped};
use crate::scalar::Real;
use crate::state::{apply_damping, DyadMix};

/// Relative slack allowed on `N·⟨n⟩ ≤ n_tot`.
pub const BUDGET_TOL: f64 = 1e-9;

/// Affine estimator `κ_est = c0 + c1·mean(X)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimatorCoeffs<T> {
    pub c0: T,
    pub c1: T,
}

impl<T: Real> EstimatorCoeffs<T> {
    pub fn new(c0: T, c1: T) -> Result<Self> {
        if !c0.is_finite() || !c1.is_finite() || c1 == T::zero() {
            return Err(Error::ZeroSignal);
        }
        Ok(Self { c0, c1 })
    }
}

/// First-order expansion of `⟨X̂⟩(κ)` around `κ = 0`.
pub fn linearize<T: Real>(spec: &ProbeSpec<T>) -> Result<EstimatorCoeffs<T>> {
    let slope = slope_at_zero(spec.x0);
    if slope == T::zero() {
        return Err(Error::ZeroSignal);
    }
    let c1 = slope.recip();
    EstimatorCoeffs::new(-c1 * mean_x_damped(spec.x0, T::zero())?, c1)
}

pub fn estimate_kappa<T: Real>(coeffs: &EstimatorCoeffs<T>, samples: &[T]) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mean = samples.iter().copied().sum::<T>() / T::from_usize_lossy(samples.len());
    Ok(coeffs.c0 + coeffs.c1 * mean)
}

/// `Δκ² = (⟨n⟩/n_tot)·ΔX²(κ)·(d⟨X̂⟩/dκ|₀)⁻²`.
pub fn analytic_mse<T: Real>(spec: &ProbeSpec<T>, kappa: T, n_tot: T) -> Result<T> {
    if !(n_tot > T::zero()) || !n_tot.is_finite() {
        return Err(Error::InvalidArgument(format!("n_tot must be positive, got {n_tot}")));
    }
    let slope = slope_at_zero(spec.x0);
    if slope == T::zero() {
        return Err(Error::ZeroSignal);
    }
    let var = var_x_damped(spec.class, spec.alpha, kappa)?;
    Ok(photon_number(spec) / n_tot * var / (slope * slope))
}

/// `Var(κ_est) = c1²·ΔX²(κ)/N` for `N` independent readings.
pub fn estimator_variance<T: Real>(spec: &ProbeSpec<T>, kappa: T, n_meas: usize) -> Result<T> {
    if n_meas == 0 {
        return Err(Error::InvalidArgument("n_meas must be at least 1".into()));
    }
    let c1 = linearize(spec)?.c1;
    Ok(c1 * c1 * var_x_damped(spec.class, spec.alpha, kappa)? / T::from_usize_lossy(n_meas))
}

/// Inverse-CDF sampler over a tabulated `X` marginal.
#[derive(Clone, Debug)]
pub struct XSampler<T> {
    xs: Vec<T>,
    cdf: Vec<T>,
}

impl<T: Real> XSampler<T> {
    pub fn from_density(density: &GridDensity<T>) -> Self {
        Self { xs: density.points(), cdf: density.cdf() }
    }

    pub fn from_state(state: &DyadMix<T>, grid_points: usize) -> Result<Self> {
        Ok(Self::from_density(&marginal_x_default(state, grid_points)?))
    }

    /// Maps a uniform variate in `[0, 1)` to `X`.
    pub fn quantile(&self, u: T) -> T {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c_lo, c_hi) = (self.cdf[i - 1], self.cdf[i]);
        if c_hi <= c_lo {
            return self.xs[i];
        }
        let t = (u - c_lo) / (c_hi - c_lo);
        self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.quantile(T::lit(rng.random::<f64>()))
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<T> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

/// Draws `count` homodyne readings of `X̂` from `state`.
pub fn sample_x<T: Real>(state: &DyadMix<T>, count: usize, seed: u64) -> Result<Vec<T>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let sampler = XSampler::from_state(state, DEFAULT_GRID_POINTS)?;
    Ok(sampler.sample_n(&mut ChaCha8Rng::seed_from_u64(seed), count))
}

/// Seed of run `run`: the `(run + 1)`-th output of a splitmix64 stream started at `seed`.
pub fn run_seed(seed: u64, run: u64) -> u64 {
    let mut z = seed.wrapping_add(run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunConfig<T> {
    pub spec: ProbeSpec<T>,
    pub kappa_true: T,
    /// Photon budget per run.
    pub n_tot: T,
    /// Measurements per run.
    pub n_meas: usize,
    pub runs: usize,
    pub seed: u64,
    pub grid_points: usize,
    /// Reject configurations with `N·⟨n⟩ > n_tot`.
    pub enforce_budget: bool,
}

impl<T: Real> RunConfig<T> {
    pub fn new(spec: ProbeSpec<T>, kappa_true: T, n_tot: T, n_meas: usize, runs: usize, seed: u64) -> Result<Self> {
        let config = Self {
            spec,
            kappa_true,
            n_tot,
            n_meas,
            runs,
            seed,
            grid_points: DEFAULT_GRID_POINTS,
            enforce_budget: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_true >= T::zero()) || !self.kappa_true.is_finite() {
            return Err(Error::InvalidKappa(self.kappa_true.as_f64()));
        }
        if !(self.n_tot > T::zero()) || !self.n_tot.is_finite() {
            return Err(Error::InvalidArgument(format!("n_tot must be positive, got {}", self.n_tot)));
        }
        if self.n_meas == 0 || self.runs == 0 {
            return Err(Error::InvalidArgument("n_meas and runs must be at least 1".into()));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {}", self.grid_points)));
        }
        if self.spec.x0 == T::zero() {
            return Err(Error::ZeroSignal);
        }
        if self.enforce_budget {
            let spent = T::from_usize_lossy(self.n_meas) * photon_number(&self.spec);
            if spent > self.n_tot * (T::one() + T::lit(BUDGET_TOL)) {
                return Err(Error::Infeasible(format!(
                    "{} measurements use {spent} photons, budget is {}",
                    self.n_meas, self.n_tot
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorReport<T> {
    /// `c1²·ΔX²(κ)/N`; equals `Δκ²` when the budget is spent exactly.
    pub analytic_mse: T,
    pub empirical_mse: T,
    /// `None` for a single run.
    pub empirical_stderr: Option<T>,
    pub runs: usize,
    pub kappa_true: T,
    pub mean_estimate: T,
    /// Sample variance of `κ_est` over runs; `None` for a single run.
    pub estimate_variance: Option<T>,
}

impl<T: Real> ErrorReport<T> {
    /// `|empirical − analytic| < sigmas·stderr`, or `None` without a stderr.
    pub fn agrees_within(&self, sigmas: T) -> Option<bool> {
        self.empirical_stderr.map(|se| (self.empirical_mse - self.analytic_mse).abs() < sigmas * se)
    }

    pub fn bias(&self) -> T {
        self.mean_estimate - self.kappa_true
    }

    pub fn bias_stderr(&self) -> Option<T> {
        self.estimate_variance.map(|v| (v / T::from_usize_lossy(self.runs)).sqrt())
    }
}

/// Monte Carlo average of `(κ − κ_est)²` over independent runs.
pub fn empirical_mse<T: Real>(config: &RunConfig<T>) -> Result<ErrorReport<T>> {
    config.validate()?;
    let coeffs = linearize(&config.spec)?;
    let state = apply_damping(&make_probe(&config.spec), config.kappa_true)?;
    let sampler = XSampler::from_state(&state, config.grid_points)?;

    let mut estimates = Vec::with_capacity(config.runs);
    let mut samples = Vec::with_capacity(config.n_meas);
    for run in 0..config.runs {
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed(config.seed, run as u64));
        samples.clear();
        samples.extend((0..config.n_meas).map(|_| sampler.sample(&mut rng)));
        estimates.push(estimate_kappa(&coeffs, &samples)?);
    }

    let runs = T::from_usize_lossy(config.runs);
    let sq: Vec<T> = estimates.iter().map(|&k| (k - config.kappa_true).powi(2)).collect();
    let mse = sq.iter().copied().sum::<T>() / runs;
    let mean_estimate = estimates.iter().copied().sum::<T>() / runs;
    let (stderr, est_var) = if config.runs > 1 {
        let dof = T::from_usize_lossy(config.runs - 1);
        let sq_var = sq.iter().map(|&s| (s - mse).powi(2)).sum::<T>() / dof;
        let est_var = estimates.iter().map(|&k| (k - mean_estimate).powi(2)).sum::<T>() / dof;
        (Some((sq_var / runs).sqrt()), Some(est_var))
    } else {
        (None, None)
    };

    Ok(ErrorReport {
        analytic_mse: estimator_variance(&config.spec, config.kappa_true, config.n_meas)?,
        empirical_mse: mse,
        empirical_stderr: stderr,
        runs: config.runs,
        kappa_true: config.kappa_true,
        mean_estimate,
        estimate_variance: est_var,
    })
}
