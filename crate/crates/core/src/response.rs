// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form damped moments of `X̂`.
//!
//! These are the fast kernels used by the estimator and the optimizer. They
//! carry no `X₀` dependence in the variance; the dyad pipeline confirms that
//! damping commutes with the `X` displacement up to the `e^{−κ/2}` rescaling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probes::{ProbeClass, ProbeSpec};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DampedMoments<T> {
    pub mean: T,
    pub variance: T,
    /// `d⟨X̂⟩/dκ` at `κ = 0`.
    pub slope_at_zero: T,
}

fn check_kappa<T: Real>(kappa: T) -> Result<()> {
    if kappa >= T::zero() && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidKappa(kappa.as_f64()))
    }
}

/// `⟨X̂⟩(κ) = X₀ e^{−κ/2}`, the same for every probe class.
pub fn mean_x_damped<T: Real>(x0: T, kappa: T) -> Result<T> {
    check_kappa(kappa)?;
    Ok(x0 * (-kappa * T::lit(0.5)).exp())
}

/// `ΔX²(κ)` per probe class.
pub fn var_x_damped<T: Real>(class: ProbeClass, alpha: T, kappa: T) -> Result<T> {
    check_kappa(kappa)?;
    let half = T::lit(0.5);
    let a2 = alpha * alpha;
    let denom = T::one() + (a2 * half).exp();
    Ok(match class {
        ProbeClass::I => {
            let f = T::one() + (-kappa * half).exp();
            half - a2 * f * f / (T::lit(8.0) * denom)
        }
        ProbeClass::II => half - a2 * (T::one() + (-kappa).exp()) / (T::lit(4.0) * denom),
        ProbeClass::III | ProbeClass::IV => half,
    })
}

/// `d⟨X̂⟩/dκ |₀ = −X₀/2`.
pub fn slope_at_zero<T: Real>(x0: T) -> T {
    -x0 * T::lit(0.5)
}

/// The `α` of maximal noise reduction in `X` before damping (about 1.6).
pub fn alpha_min_variance<T: Real>() -> T {
    let f = |a: T| var_x_damped(ProbeClass::I, a, T::zero()).unwrap_or(T::infinity());
    crate::optimizer::golden_section(f, T::lit(0.5), T::lit(3.0), T::lit(1e-9)).0
}

pub fn damped_moments<T: Real>(spec: &ProbeSpec<T>, kappa: T) -> Result<DampedMoments<T>> {
    Ok(DampedMoments {
        mean: mean_x_damped(spec.x0, kappa)?,
        variance: var_x_damped(spec.class, spec.alpha, kappa)?,
        slope_at_zero: slope_at_zero(spec.x0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::mean_var_x;
    use crate::probes::make_probe;
    use crate::state::apply_damping;

    fn dyad_moments(class: ProbeClass, alpha: f64, x0: f64, kappa: f64) -> (f64, f64) {
        let probe = make_probe(&ProbeSpec::new(class, alpha, x0).unwrap());
        mean_var_x(&apply_damping(&probe, kappa).unwrap()).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_x_damped(2.5, 0.0).unwrap(), 2.5);
        let m = mean_x_damped(2.0, 0.01).unwrap();
        assert!((m - 2.0 * (-0.005f64).exp()).abs() < 1e-15);
        assert!((m - 1.990025).abs() < 1e-6);
        assert_eq!(mean_x_damped(0.0, 3.0).unwrap(), 0.0);
        assert!(mean_x_damped(1.0, -1.0).is_err());
        for class in ProbeClass::ALL {
            let (m, _) = dyad_moments(class, 1.6, 2.0, 0.01);
            assert!((m - mean_x_damped(2.0, 0.01).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn variance_examples() {
        for class in ProbeClass::ALL.iter().take(2) {
            let v: f64 = var_x_damped(*class, 1.6, 0.0).unwrap();
            assert!((v - 0.22).abs() < 0.005);
        }
        let alpha: f64 = 1.6;
        let denom = 1.0 + (alpha * alpha / 2.0).exp();
        let limit_i = var_x_damped(ProbeClass::I, alpha, 200.0).unwrap();
        let limit_ii = var_x_damped(ProbeClass::II, alpha, 200.0).unwrap();
        assert!((limit_i - (0.5 - alpha * alpha / (8.0 * denom))).abs() < 1e-14);
        assert!((limit_ii - (0.5 - alpha * alpha / (4.0 * denom))).abs() < 1e-14);
        assert!(limit_i > limit_ii);
        for kappa in [0.0, 0.3, 10.0] {
            assert_eq!(var_x_damped(ProbeClass::III, 1.6, kappa).unwrap(), 0.5);
            assert_eq!(var_x_damped(ProbeClass::IV, 0.0, kappa).unwrap(), 0.5);
        }
    }

    #[test]
    fn slope_examples() {
        assert_eq!(slope_at_zero(0.0f64), 0.0);
        assert_eq!(slope_at_zero(2.0f64), -1.0);
        // Forward difference on the dyad pipeline.
        let h = 1e-6;
        let (m0, _) = dyad_moments(ProbeClass::I, 1.6, 2.0, 0.0);
        let (mh, _) = dyad_moments(ProbeClass::I, 1.6, 2.0, h);
        assert!(((mh - m0) / h - slope_at_zero(2.0)).abs() < 1e-6);
    }

    #[test]
    fn closed_forms_match_dyad_pipeline() {
        for class in ProbeClass::ALL {
            for alpha in [0.0, 0.8, 1.6, 3.0] {
                for kappa in [0.0, 0.01, 0.1, 1.0, 5.0] {
                    let (_, v) = dyad_moments(class, alpha, 0.0, kappa);
                    let closed = var_x_damped(class, alpha, kappa).unwrap();
                    assert!((v - closed).abs() < 1e-10, "{class} α={alpha} κ={kappa}: {v} vs {closed}");
                }
            }
        }
    }

    #[test]
    fn closed_forms_hold_for_displaced_probes() {
        for class in ProbeClass::ALL {
            for x0 in [1.0, 3.0] {
                for alpha in [0.8, 1.6, 3.0] {
                    for kappa in [0.01, 0.1, 1.0] {
                        let (m, v) = dyad_moments(class, alpha, x0, kappa);
                        assert!((m - mean_x_damped(x0, kappa).unwrap()).abs() < 1e-10);
                        assert!((v - var_x_damped(class, alpha, kappa).unwrap()).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn variance_is_monotone_and_ordered() {
        for alpha in [0.8, 1.6, 3.0] {
            let kappas: Vec<f64> = (0..=400).map(|i| i as f64 * 0.025).collect();
            for w in kappas.windows(2) {
                for class in [ProbeClass::I, ProbeClass::II] {
                    assert!(var_x_damped(class, alpha, w[1]).unwrap() >= var_x_damped(class, alpha, w[0]).unwrap());
                }
            }
            for &k in &kappas[1..] {
                assert!(
                    var_x_damped(ProbeClass::I, alpha, k).unwrap() >= var_x_damped(ProbeClass::II, alpha, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn maximal_noise_reduction() {
        let a: f64 = alpha_min_variance();
        assert!((a - 1.6).abs() < 0.01);
        let v = var_x_damped(ProbeClass::I, a, 0.0).unwrap();
        assert!((v - 0.22).abs() < 0.005);
        // Stationarity of 1/2 − a²/(2(1 + e^{a²/2})): 1 + e^{u} = u e^{u} with u = a²/2.
        let u = a * a / 2.0;
        assert!((1.0 + u.exp() - u * u.exp()).abs() < 1e-7);
    }

    #[test]
    fn damped_moments_bundle() {
        let s = ProbeSpec::new(ProbeClass::I, 1.6, -2.0).unwrap();
        let m = damped_moments(&s, 0.2).unwrap();
        assert!(m.mean < 0.0 && m.variance > 0.0);
        assert_eq!(m.slope_at_zero, 1.0);
    }
}
