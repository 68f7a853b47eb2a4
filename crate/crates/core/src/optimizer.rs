// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Budget-constrained minimization of `Δκ²` and the relative improvement curves.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::analytic_mse;
use crate::probes::{superposition_cost, ProbeClass, ProbeSpec};
use crate::scalar::Real;

/// Relative tolerance under which two objective values count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Search parameters for [`minimize_mse_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchOptions {
    pub alpha_max: f64,
    pub alpha_step: f64,
    /// Smallest useful photon number per measurement; caps `N` at `n_tot/n_min`.
    pub n_min: f64,
    /// Final bracket width of the golden-section refinement.
    pub alpha_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { alpha_max: 6.0, alpha_step: 0.01, n_min: 0.05, alpha_tol: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimumRecord<T> {
    pub class: ProbeClass,
    pub alpha_star: T,
    pub x0_star: T,
    pub n_meas_star: usize,
    pub mse_star: T,
    pub n_tot: T,
    pub kappa: T,
}

impl<T: Real> OptimumRecord<T> {
    pub fn spec(&self) -> ProbeSpec<T> {
        ProbeSpec { class: self.class, alpha: self.alpha_star, x0: self.x0_star }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImprovementPoint<T> {
    pub n_tot: T,
    #[serde(rename = "delta_I")]
    pub delta_i: Option<T>,
    #[serde(rename = "delta_II")]
    pub delta_ii: Option<T>,
    pub optimum_i: Option<OptimumRecord<T>>,
    pub optimum_ii: Option<OptimumRecord<T>>,
    pub optimum_iii: Option<OptimumRecord<T>>,
}

impl<T> ImprovementPoint<T> {
    pub fn is_feasible(&self) -> bool {
        self.optimum_i.is_some() && self.optimum_ii.is_some() && self.optimum_iii.is_some()
    }
}

/// `X₀ = √(n_tot/N − s(α))`, or `None` when no photons are left for the displacement.
pub fn solve_x0<T: Real>(class: ProbeClass, alpha: T, n_tot: T, n_meas: usize) -> Option<T> {
    if n_meas == 0 || !(n_tot > T::zero()) {
        return None;
    }
    let left = n_tot / T::from_usize_lossy(n_meas) - superposition_cost(class, alpha);
    (left > T::zero()).then(|| left.sqrt())
}

fn objective<T: Real>(class: ProbeClass, alpha: T, n_tot: T, n_meas: usize, kappa: T) -> Option<(T, T)> {
    let x0 = solve_x0(class, alpha, n_tot, n_meas)?;
    let spec = ProbeSpec { class, alpha, x0 };
    analytic_mse(&spec, kappa, n_tot).ok().map(|mse| (mse, x0))
}

fn strictly_better<T: Real>(candidate: T, incumbent: T) -> bool {
    candidate < incumbent - incumbent.abs() * T::lit(TIE_RTOL)
}

/// Minimizes a unimodal `f` on `[lo, hi]`; returns the best abscissa seen and its value.
pub fn golden_section<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

pub fn minimize_mse<T: Real>(class: ProbeClass, n_tot: T, kappa: T) -> Result<OptimumRecord<T>> {
    minimize_mse_with(class, n_tot, kappa, &SearchOptions::default())
}

/// Grid search over `(α, N)` followed by golden-section refinement of `α` at the best `N`.
pub fn minimize_mse_with<T: Real>(
    class: ProbeClass,
    n_tot: T,
    kappa: T,
    opts: &SearchOptions,
) -> Result<OptimumRecord<T>> {
    if !(n_tot > T::zero()) || !n_tot.is_finite() {
        return Err(Error::InvalidArgument(format!("n_tot must be positive, got {n_tot}")));
    }
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return Err(Error::InvalidKappa(kappa.as_f64()));
    }
    if !(opts.alpha_step > 0.0) || !(opts.n_min > 0.0) || !(opts.alpha_tol > 0.0) || !(opts.alpha_max >= 0.0) {
        return Err(Error::InvalidArgument(format!("bad search options {opts:?}")));
    }
    let alpha_cells =
        if class.is_superposition() { (opts.alpha_max / opts.alpha_step + 1e-9).floor() as usize } else { 0 };
    let n_max = ((n_tot.as_f64() / opts.n_min).floor() as usize).max(1);

    let mut best: Option<(T, T, usize, T)> = None;
    for i in 0..=alpha_cells {
        let alpha = T::lit(i as f64 * opts.alpha_step);
        for n in 1..=n_max {
            let Some((mse, x0)) = objective(class, alpha, n_tot, n, kappa) else {
                break;
            };
            if best.is_none_or(|(m, ..)| strictly_better(mse, m)) {
                best = Some((mse, alpha, n, x0));
            }
        }
    }
    let (mut mse, mut alpha, n, mut x0) =
        best.ok_or_else(|| Error::Infeasible(format!("no feasible {class} probe for n_tot = {n_tot}")))?;

    if class.is_superposition() {
        let step = T::lit(opts.alpha_step);
        let lo = (alpha - step).max(T::zero());
        let hi = (alpha + step).min(T::lit(opts.alpha_max));
        let f = |a: T| objective(class, a, n_tot, n, kappa).map_or(T::infinity(), |(m, _)| m);
        let (a_ref, m_ref) = golden_section(f, lo, hi, T::lit(opts.alpha_tol));
        if strictly_better(m_ref, mse) {
            let (m, x) = objective(class, a_ref, n_tot, n, kappa).expect("refined point is feasible");
            (mse, alpha, x0) = (m, a_ref, x);
        }
    }

    Ok(OptimumRecord { class, alpha_star: alpha, x0_star: x0, n_meas_star: n, mse_star: mse, n_tot, kappa })
}

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `δ = (Δκ²_III − Δκ²_{I/II}) / Δκ²_III` per budget, each from its class minimum.
pub fn improvement_curve<T: Real>(n_tot_values: &[T], kappa: T) -> Result<Vec<ImprovementPoint<T>>> {
    improvement_curve_with(n_tot_values, kappa, &SearchOptions::default())
}

pub fn improvement_curve_with<T: Real>(
    n_tot_values: &[T],
    kappa: T,
    opts: &SearchOptions,
) -> Result<Vec<ImprovementPoint<T>>> {
    if n_tot_values.is_empty() {
        return Err(Error::InvalidArgument("empty n_tot list".into()));
    }
    n_tot_values
        .iter()
        .map(|&n_tot| {
            let opt_i = optional(minimize_mse_with(ProbeClass::I, n_tot, kappa, opts))?;
            let opt_ii = optional(minimize_mse_with(ProbeClass::II, n_tot, kappa, opts))?;
            let opt_iii = optional(minimize_mse_with(ProbeClass::III, n_tot, kappa, opts))?;
            let delta = |o: &Option<OptimumRecord<T>>| {
                let base = opt_iii?.mse_star;
                o.map(|r| (base - r.mse_star) / base)
            };
            Ok(ImprovementPoint {
                n_tot,
                delta_i: delta(&opt_i),
                delta_ii: delta(&opt_ii),
                optimum_i: opt_i,
                optimum_ii: opt_ii,
                optimum_iii: opt_iii,
            })
        })
        .collect()
}
