// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-mode density operators as finite sums of coherent-state dyads.
//!
//! A term `w |α⟩⟨α′| ⊗ |β⟩⟨β′|` stays a single term under a 50:50 beam
//! splitter, a single-mode displacement and zero-temperature amplitude damping
//! of mode 1, so every state this crate handles is represented exactly by a
//! [`DyadMix`].

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One of the two field modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            other => Err(Error::InvalidMode(other)),
        }
    }
}

/// Exponent of the coherent-state overlap `⟨bra|ket⟩`.
///
/// `ln⟨bra|ket⟩ = −|bra|²/2 − |ket|²/2 + conj(bra)·ket`, taken as the analytic
/// branch (no principal-value logarithm is ever evaluated).
#[inline]
pub fn overlap_exponent<T: Real>(bra: Complex<T>, ket: Complex<T>) -> Complex<T> {
    bra.conj() * ket - T::lit(0.5) * (bra.norm_sqr() + ket.norm_sqr())
}

/// Coherent-state overlap `⟨bra|ket⟩`.
#[inline]
pub fn overlap<T: Real>(bra: Complex<T>, ket: Complex<T>) -> Complex<T> {
    overlap_exponent(bra, ket).exp()
}

/// Weighted two-mode dyad `weight · |ket1⟩⟨bra1| ⊗ |ket2⟩⟨bra2|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentDyad<T> {
    pub ket1: Complex<T>,
    pub bra1: Complex<T>,
    pub ket2: Complex<T>,
    pub bra2: Complex<T>,
    pub weight: Complex<T>,
}

impl<T: Real> CoherentDyad<T> {
    pub fn new(ket1: Complex<T>, bra1: Complex<T>, ket2: Complex<T>, bra2: Complex<T>, weight: Complex<T>) -> Self {
        Self { ket1, bra1, ket2, bra2, weight }
    }

    /// Diagonal product dyad `|a1⟩⟨a1| ⊗ |a2⟩⟨a2|` with unit weight.
    pub fn coherent(a1: Complex<T>, a2: Complex<T>) -> Self {
        Self::new(a1, a1, a2, a2, Complex::new(T::one(), T::zero()))
    }

    /// Exponent of the product of both mode overlaps.
    #[inline]
    pub fn overlap_exponent(&self) -> Complex<T> {
        overlap_exponent(self.bra1, self.ket1) + overlap_exponent(self.bra2, self.ket2)
    }

    /// `weight · ⟨bra1|ket1⟩⟨bra2|ket2⟩`, the term's share of the trace.
    #[inline]
    pub fn trace_contribution(&self) -> Complex<T> {
        self.weight * self.overlap_exponent().exp()
    }

    /// The Hermitian adjoint term.
    pub fn adjoint(&self) -> Self {
        Self::new(self.bra1, self.ket1, self.bra2, self.ket2, self.weight.conj())
    }

    pub fn is_finite(&self) -> bool {
        [self.ket1, self.bra1, self.ket2, self.bra2, self.weight].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest amplitude distance to `other`, ignoring weights.
    pub fn amplitude_distance(&self, other: &Self) -> T {
        [self.ket1 - other.ket1, self.bra1 - other.bra1, self.ket2 - other.ket2, self.bra2 - other.bra2]
            .iter()
            .map(|d| d.norm())
            .fold(T::zero(), T::max)
    }

    /// Largest coherent amplitude magnitude appearing in the term.
    pub fn max_amplitude(&self) -> T {
        [self.ket1, self.bra1, self.ket2, self.bra2].iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }
}

/// Finite ordered sum of [`CoherentDyad`] terms. Terms are never merged
/// implicitly; see [`DyadMix::coalesce`] and [`prune`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DyadMix<T> {
    terms: Vec<CoherentDyad<T>>,
}

impl<T: Real> DyadMix<T> {
    pub fn new(terms: Vec<CoherentDyad<T>>) -> Self {
        Self { terms }
    }

    /// `|a1⟩⟨a1| ⊗ |a2⟩⟨a2|`.
    pub fn coherent(a1: Complex<T>, a2: Complex<T>) -> Self {
        Self::new(vec![CoherentDyad::coherent(a1, a2)])
    }

    /// Two-mode vacuum.
    pub fn vacuum() -> Self {
        Self::coherent(Complex::default(), Complex::default())
    }

    pub fn terms(&self) -> &[CoherentDyad<T>] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<CoherentDyad<T>> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CoherentDyad<T>> {
        self.terms.iter()
    }

    /// `Tr ρ`.
    pub fn trace(&self) -> Complex<T> {
        self.terms.iter().map(CoherentDyad::trace_contribution).sum()
    }

    /// `Tr ρ²`, evaluated from pairwise dyad overlaps.
    pub fn purity(&self) -> Complex<T> {
        let mut acc = Complex::default();
        for s in &self.terms {
            for t in &self.terms {
                // Tr(|k_s⟩⟨b_s|k_t⟩⟨b_t|) = ⟨b_s|k_t⟩⟨b_t|k_s⟩ per mode.
                let e = overlap_exponent(s.bra1, t.ket1)
                    + overlap_exponent(t.bra1, s.ket1)
                    + overlap_exponent(s.bra2, t.ket2)
                    + overlap_exponent(t.bra2, s.ket2);
                acc += s.weight * t.weight * e.exp();
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(CoherentDyad::is_finite)
    }

    /// Every term has its adjoint partner in the mix (amplitudes and weight within `tol`).
    pub fn is_hermitian(&self, tol: T) -> bool {
        self.terms.iter().all(|term| {
            let adj = term.adjoint();
            self.terms
                .iter()
                .any(|other| adj.amplitude_distance(other) <= tol && (adj.weight - other.weight).norm() <= tol)
        })
    }

    /// Merges terms whose four amplitudes agree within `tol`, summing their weights.
    /// The first occurrence fixes the amplitudes and the position of the merged term.
    pub fn coalesce(&self, tol: T) -> Self {
        let mut merged: Vec<CoherentDyad<T>> = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            match merged.iter_mut().find(|m| m.amplitude_distance(term) <= tol) {
                Some(m) => m.weight += term.weight,
                None => merged.push(*term),
            }
        }
        Self::new(merged)
    }

    /// Largest coherent amplitude magnitude appearing anywhere in the mix.
    pub fn max_amplitude(&self) -> T {
        self.terms.iter().map(CoherentDyad::max_amplitude).fold(T::zero(), T::max)
    }

    fn map_terms(&self, f: impl Fn(&CoherentDyad<T>) -> CoherentDyad<T>) -> Self {
        Self::new(self.terms.iter().map(f).collect())
    }
}

impl<'a, T> IntoIterator for &'a DyadMix<T> {
    type Item = &'a CoherentDyad<T>;
    type IntoIter = std::slice::Iter<'a, CoherentDyad<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.terms.iter()
    }
}

/// Builds `|Ψ⟩⟨Ψ|` for `|Ψ⟩ = (Σ c_i |a_i⟩)₁ ⊗ (Σ d_j |b_j⟩)₂`.
///
/// Each slice holds `(amplitude, coefficient)` pairs. The result has
/// `(n₁·n₂)²` terms and is not renormalized.
pub fn pure_product_state<T: Real>(
    mode1: &[(Complex<T>, Complex<T>)],
    mode2: &[(Complex<T>, Complex<T>)],
) -> Result<DyadMix<T>> {
    if mode1.is_empty() {
        return Err(Error::EmptyTerms(1));
    }
    if mode2.is_empty() {
        return Err(Error::EmptyTerms(2));
    }
    let kets: Vec<(Complex<T>, Complex<T>, Complex<T>)> =
        mode1.iter().flat_map(|&(a, c)| mode2.iter().map(move |&(b, d)| (a, b, c * d))).collect();
    let mut terms = Vec::with_capacity(kets.len() * kets.len());
    for &(k1, k2, ck) in &kets {
        for &(b1, b2, cb) in &kets {
            terms.push(CoherentDyad::new(k1, b1, k2, b2, ck * cb.conj()));
        }
    }
    Ok(DyadMix::new(terms))
}

/// Direction of the 50:50 beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitter {
    /// `U|α,β⟩ = |(α−β)/√2, (α+β)/√2⟩`.
    Forward,
    /// `U†|α,β⟩ = |(α+β)/√2, (β−α)/√2⟩`.
    Inverse,
}

#[inline]
fn split<T: Real>(a: Complex<T>, b: Complex<T>, dir: Splitter) -> (Complex<T>, Complex<T>) {
    let r = T::FRAC_1_SQRT_2();
    match dir {
        Splitter::Forward => ((a - b) * r, (a + b) * r),
        Splitter::Inverse => ((a + b) * r, (b - a) * r),
    }
}

/// Conjugates the state with the 50:50 beam splitter `exp(π/4 (a₁a₂† − a₁†a₂))`.
pub fn apply_beam_splitter<T: Real>(state: &DyadMix<T>, dir: Splitter) -> DyadMix<T> {
    state.map_terms(|t| {
        let (ket1, ket2) = split(t.ket1, t.ket2, dir);
        let (bra1, bra2) = split(t.bra1, t.bra2, dir);
        CoherentDyad::new(ket1, bra1, ket2, bra2, t.weight)
    })
}

/// Conjugates the state with `D_mode(δ) = exp(δ a† − δ* a)`, using
/// `D(δ)|α⟩ = e^{i Im(δ ᾱ)} |α+δ⟩`.
pub fn apply_displacement<T: Real>(state: &DyadMix<T>, mode: Mode, delta: Complex<T>) -> DyadMix<T> {
    let shift = |amp: Complex<T>| (amp + delta, (delta * amp.conj()).im);
    state.map_terms(|t| {
        let mut out = *t;
        let (ket_phase, bra_phase) = match mode {
            Mode::One => {
                let (k, pk) = shift(t.ket1);
                let (b, pb) = shift(t.bra1);
                out.ket1 = k;
                out.bra1 = b;
                (pk, pb)
            }
            Mode::Two => {
                let (k, pk) = shift(t.ket2);
                let (b, pb) = shift(t.bra2);
                out.ket2 = k;
                out.bra2 = b;
                (pk, pb)
            }
        };
        out.weight = t.weight * Complex::from_polar(T::one(), ket_phase - bra_phase);
        out
    })
}

/// Zero-temperature amplitude damping of mode 1 for a scaled time `κ = γt`.
///
/// `|α⟩⟨α′| ↦ ⟨α′|α⟩^{1−e^{−κ}} |αe^{−κ/2}⟩⟨α′e^{−κ/2}|`, with the power taken
/// on the analytic overlap exponent.
pub fn apply_damping<T: Real>(state: &DyadMix<T>, kappa: T) -> Result<DyadMix<T>> {
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return Err(Error::InvalidKappa(kappa.as_f64()));
    }
    let shrink = (-kappa * T::lit(0.5)).exp();
    let loss = -(-kappa).exp_m1();
    Ok(state.map_terms(|t| {
        let decay = (overlap_exponent(t.bra1, t.ket1) * loss).exp();
        CoherentDyad::new(t.ket1 * shrink, t.bra1 * shrink, t.ket2, t.bra2, t.weight * decay)
    }))
}

/// Drops exactly-zero-weight terms and terms whose trace contribution bound
/// `|w|·|⟨bra1|ket1⟩⟨bra2|ket2⟩|` lies below `tol`.
pub fn prune<T: Real>(state: &DyadMix<T>, tol: T) -> DyadMix<T> {
    let tol = tol.max(T::zero());
    DyadMix::new(
        state
            .terms
            .iter()
            .filter(|t| {
                let bound = t.weight.norm() * t.overlap_exponent().re.exp();
                t.weight != Complex::default() && bound >= tol
            })
            .copied()
            .collect(),
    )
}
