// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! The four probe classes, represented as they enter the damping channel.
//!
//! * I: `|0⟩₁ ⊗ N_α(|iα/2⟩ + |−iα/2⟩)₂`, displaced by `D₁(X₀/√2) D₂(−X₀/√2)`, then beam-split.
//! * II: `N_α²(|iα/2⟩ + |−iα/2⟩)₁ ⊗ (|iα/2⟩ + |−iα/2⟩)₂`, displaced by `D₁(X₀)`.
//! * III: `|X₀/√2⟩₁ ⊗ |−X₀/√2⟩₂`, beam-split.
//! * IV: `|X₀⟩₁ ⊗ |0⟩₂`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{apply_beam_splitter, apply_displacement, pure_product_state, DyadMix, Mode, Splitter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProbeClass {
    /// Entangled cat (superposition in mode 2, through the beam splitter).
    I,
    /// Separable two-mode cat, no beam splitter.
    II,
    /// Coherent reference through the beam splitter.
    III,
    /// Coherent reference without beam splitter.
    IV,
}

impl ProbeClass {
    pub const ALL: [ProbeClass; 4] = [ProbeClass::I, ProbeClass::II, ProbeClass::III, ProbeClass::IV];

    pub fn uses_beam_splitter(self) -> bool {
        matches!(self, ProbeClass::I | ProbeClass::III)
    }

    pub fn is_superposition(self) -> bool {
        matches!(self, ProbeClass::I | ProbeClass::II)
    }
}

impl fmt::Display for ProbeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProbeClass::I => "I",
            ProbeClass::II => "II",
            ProbeClass::III => "III",
            ProbeClass::IV => "IV",
        };
        f.write_str(s)
    }
}

impl FromStr for ProbeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(ProbeClass::I),
            "II" | "2" => Ok(ProbeClass::II),
            "III" | "3" => Ok(ProbeClass::III),
            "IV" | "4" => Ok(ProbeClass::IV),
            _ => Err(Error::InvalidProbe(format!("unknown probe class {s:?}"))),
        }
    }
}

/// Probe class with superposition size `alpha` and displacement `x0` along `X`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec<T> {
    pub class: ProbeClass,
    pub alpha: T,
    pub x0: T,
}

impl<T: Real> ProbeSpec<T> {
    /// Validates the parameters; `alpha` is forced to zero for the coherent classes.
    pub fn new(class: ProbeClass, alpha: T, x0: T) -> Result<Self> {
        if !alpha.is_finite() || alpha < T::zero() {
            return Err(Error::InvalidProbe(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidProbe(format!("x0 must be finite, got {x0}")));
        }
        let alpha = if class.is_superposition() { alpha } else { T::zero() };
        Ok(Self { class, alpha, x0 })
    }
}

/// `N_α = [2(1 + e^{−α²/2})]^{−1/2}`, from `⟨iα/2|−iα/2⟩ = e^{−α²/2}`.
pub fn normalization_constant<T: Real>(alpha: T) -> T {
    (T::lit(2.0) * (T::one() + (-alpha * alpha * T::lit(0.5)).exp())).sqrt().recip()
}

/// Photons spent on the superposition part: `s(α)` in `⟨n⟩ = X₀² + s(α)`.
pub fn superposition_cost<T: Real>(class: ProbeClass, alpha: T) -> T {
    let q = alpha * alpha * T::lit(0.25);
    match class {
        ProbeClass::I => q * q.tanh(),
        ProbeClass::II => T::lit(2.0) * q * q.tanh(),
        ProbeClass::III | ProbeClass::IV => T::zero(),
    }
}

/// Mean photon number per measurement, `⟨n̂₁ + n̂₂⟩`.
pub fn photon_number<T: Real>(spec: &ProbeSpec<T>) -> T {
    spec.x0 * spec.x0 + superposition_cost(spec.class, spec.alpha)
}

fn cat_terms<T: Real>(alpha: T) -> [(Complex<T>, Complex<T>); 2] {
    let n = Complex::from(normalization_constant(alpha));
    let half = alpha * T::lit(0.5);
    [(Complex::new(T::zero(), half), n), (Complex::new(T::zero(), -half), n)]
}

/// The probe state immediately before damping.
pub fn make_probe<T: Real>(spec: &ProbeSpec<T>) -> DyadMix<T> {
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::default();
    let along = |v: T| Complex::new(v, T::zero());
    let split_shift = spec.x0 * T::FRAC_1_SQRT_2();
    let built = match spec.class {
        ProbeClass::I => pure_product_state(&[(zero, one)], &cat_terms(spec.alpha)).map(|psi| {
            let shifted = apply_displacement(&psi, Mode::One, along(split_shift));
            let shifted = apply_displacement(&shifted, Mode::Two, along(-split_shift));
            apply_beam_splitter(&shifted, Splitter::Forward)
        }),
        ProbeClass::II => pure_product_state(&cat_terms(spec.alpha), &cat_terms(spec.alpha))
            .map(|psi| apply_displacement(&psi, Mode::One, along(spec.x0))),
        ProbeClass::III => pure_product_state(&[(along(split_shift), one)], &[(along(-split_shift), one)])
            .map(|psi| apply_beam_splitter(&psi, Splitter::Forward)),
        ProbeClass::IV => pure_product_state(&[(along(spec.x0), one)], &[(zero, one)]),
    };
    built.expect("probe term lists are never empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{mean_photons, mean_var_p, mean_var_x};
    use crate::state::prune;
    use proptest::prelude::*;

    fn spec(class: ProbeClass, alpha: f64, x0: f64) -> ProbeSpec<f64> {
        ProbeSpec::new(class, alpha, x0).unwrap()
    }

    #[test]
    fn normalization_examples() {
        assert!((normalization_constant(0.0f64) - 0.5).abs() < 1e-15);
        assert!((normalization_constant(10.0f64) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        // Fock-series oracle for the cat overlap ⟨iα/2|−iα/2⟩ at α = 1.6.
        let alpha: f64 = 1.6;
        let (mut term, mut overlap) = ((-alpha * alpha / 8.0).exp(), 0.0);
        for n in 0..60 {
            overlap += term * term * if n % 2 == 0 { 1.0 } else { -1.0 };
            term *= (alpha / 2.0) / ((n + 1) as f64).sqrt();
        }
        let expected = (2.0 * (1.0 + overlap)).powf(-0.5);
        assert!((normalization_constant(alpha) - expected).abs() < 1e-14);
        assert!((expected - 0.625480).abs() < 1e-6);
    }

    #[test]
    fn spec_validation() {
        assert!(ProbeSpec::new(ProbeClass::I, -0.1, 1.0).is_err());
        assert!(ProbeSpec::new(ProbeClass::I, 1.0, f64::NAN).is_err());
        assert_eq!(ProbeSpec::new(ProbeClass::III, 1.2, 2.0).unwrap().alpha, 0.0);
        assert_eq!(ProbeSpec::new(ProbeClass::II, 1.2, 2.0).unwrap().alpha, 1.2);
        assert_eq!("ii".parse::<ProbeClass>().unwrap(), ProbeClass::II);
        assert!("V".parse::<ProbeClass>().is_err());
        for class in ProbeClass::ALL {
            assert_eq!(class.to_string().parse::<ProbeClass>().unwrap(), class);
        }
    }

    #[test]
    fn coherent_classes_coincide() {
        let iv = make_probe(&spec(ProbeClass::IV, 0.0, 2.0));
        assert_eq!(iv.len(), 1);
        let (m, v) = mean_var_x(&iv).unwrap();
        assert!((m - 2.0).abs() < 1e-15 && (v - 0.5).abs() < 1e-14);

        let iii = make_probe(&spec(ProbeClass::III, 0.0, 2.0));
        assert!(iii.terms()[0].amplitude_distance(&iv.terms()[0]) < 1e-15);
        assert!((iii.terms()[0].weight - iv.terms()[0].weight).norm() < 1e-15);
    }

    #[test]
    fn class_one_noise_reduction() {
        let probe = make_probe(&spec(ProbeClass::I, 1.6, 0.0));
        assert_eq!(probe.len(), 4);
        let (_, vx) = mean_var_x(&probe).unwrap();
        let (_, vp) = mean_var_p(&probe).unwrap();
        assert!((vx - 0.22).abs() < 0.005);
        assert!((vp - 0.5).abs() < 1e-12);
    }

    #[test]
    fn class_two_broadens_p() {
        let probe = make_probe(&spec(ProbeClass::II, 1.6, 0.0));
        let (_, vx) = mean_var_x(&probe).unwrap();
        let (_, vp) = mean_var_p(&probe).unwrap();
        assert!((vx - 0.22).abs() < 0.005);
        assert!((vp - 1.5).abs() < 0.01);
    }

    #[test]
    fn photon_number_examples() {
        assert_eq!(photon_number(&spec(ProbeClass::III, 0.0, 3.0)), 9.0);
        let n1 = photon_number(&spec(ProbeClass::I, 1.6, 0.0));
        assert!((n1 - 0.64 * 0.64f64.tanh()).abs() < 1e-15);
        assert!((n1 - 0.361536).abs() < 1e-6);
        let n1 = photon_number(&spec(ProbeClass::I, 1.6, 2.0));
        assert!((n1 - 4.361536).abs() < 1e-6);
        for alpha in [0.3, 1.6, 4.0] {
            let diff =
                photon_number(&spec(ProbeClass::II, alpha, 1.0)) - photon_number(&spec(ProbeClass::I, alpha, 1.0));
            let q: f64 = alpha * alpha / 4.0;
            assert!((diff - q * q.tanh()).abs() < 1e-14 && diff > 0.0);
        }
    }

    #[test]
    fn zero_alpha_reduces_to_coherent_classes() {
        for x0 in [0.0, 1.0, 3.5] {
            for (sup, coh) in [(ProbeClass::I, ProbeClass::III), (ProbeClass::II, ProbeClass::IV)] {
                let a = prune(&make_probe(&spec(sup, 0.0, x0)).coalesce(1e-12), 1e-14);
                let b = make_probe(&spec(coh, 0.0, x0));
                assert_eq!(a.len(), 1, "{sup} at x0={x0}");
                assert!(a.terms()[0].amplitude_distance(&b.terms()[0]) < 1e-14);
                assert!((a.terms()[0].weight - b.terms()[0].weight).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let probe = make_probe(&ProbeSpec::new(ProbeClass::I, 1.6f32, 1.0).unwrap());
        let (m, v) = mean_var_x(&probe).unwrap();
        assert!((m - 1.0).abs() < 1e-5);
        assert!((v - 0.2215).abs() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn probes_are_normalized_and_centered(alpha in 0.0f64..6.0, x0 in 0.0f64..10.0, k in 0usize..4) {
            let s = spec(ProbeClass::ALL[k], alpha, x0);
            let probe = make_probe(&s);
            prop_assert!((probe.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(probe.trace().im.abs() < 1e-12);
            let (mx, _) = mean_var_x(&probe).unwrap();
            let (mp, _) = mean_var_p(&probe).unwrap();
            prop_assert!((mx - x0).abs() < 1e-10 * x0.max(1.0));
            prop_assert!(mp.abs() < 1e-10);
            let n = mean_photons(&probe);
            prop_assert!((n - photon_number(&s)).abs() < 1e-10 * n.max(1.0));
        }

        #[test]
        fn superposition_classes_share_x_variance(alpha in 0.0f64..6.0, x0 in 0.0f64..3.0) {
            let (_, v1) = mean_var_x(&make_probe(&spec(ProbeClass::I, alpha, x0))).unwrap();
            let (_, v2) = mean_var_x(&make_probe(&spec(ProbeClass::II, alpha, x0))).unwrap();
            prop_assert!((v1 - v2).abs() < 1e-10);
        }
    }
}
