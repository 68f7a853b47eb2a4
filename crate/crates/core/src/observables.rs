// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Expectation values and measurement statistics of the EPR observables
//! `X̂ = (x̂₁ − x̂₂)/√2` and `P̂ = (p̂₁ + p̂₂)/√2` on [`DyadMix`] states.
//!
//! Quadratures follow `x̂(θ) = (a e^{−iθ} + a† e^{iθ})/√2`, so the vacuum
//! variance of every quadrature is 1/2.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{apply_beam_splitter, overlap_exponent, DyadMix, Mode, Splitter};

/// Trace deviation tolerated by the moment functions.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Tail mass a marginal grid may leave outside its window.
pub const MAX_TAIL_MASS: f64 = 1e-8;
/// Default number of points of a marginal grid.
pub const DEFAULT_GRID_POINTS: usize = 16384;
/// Default half-width of a marginal grid, in units of the standard deviation.
pub const DEFAULT_GRID_SIGMAS: f64 = 8.0;

/// `(a₁†)^p1 a₁^q1 (a₂†)^p2 a₂^q2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub p1: u32,
    pub q1: u32,
    pub p2: u32,
    pub q2: u32,
}

impl Monomial {
    pub const IDENTITY: Monomial = Monomial { p1: 0, q1: 0, p2: 0, q2: 0 };

    pub fn new(p1: u32, q1: u32, p2: u32, q2: u32) -> Self {
        Self { p1, q1, p2, q2 }
    }
}

/// Normally ordered polynomial in the ladder operators of both modes.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct NormalOrderedPoly<T> {
    monomials: BTreeMap<Monomial, Complex<T>>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Normal ordering of `(a†)^p a^q (a†)^r a^s` for a single mode:
/// `Σ_k C(q,k) C(r,k) k! (a†)^{p+r−k} a^{q+s−k}`.
fn reorder(p: u32, q: u32, r: u32, s: u32) -> impl Iterator<Item = (u32, u32, f64)> {
    (0..=q.min(r)).map(move |k| (p + r - k, q + s - k, binomial(q, k) * binomial(r, k) * factorial(k)))
}

impl<T: Real> NormalOrderedPoly<T> {
    pub fn zero() -> Self {
        Self { monomials: BTreeMap::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::zero().with_term(Monomial::IDENTITY, c)
    }

    pub fn monomial(m: Monomial, c: Complex<T>) -> Self {
        Self::zero().with_term(m, c)
    }

    pub fn annihilator(mode: Mode) -> Self {
        let m = match mode {
            Mode::One => Monomial::new(0, 1, 0, 0),
            Mode::Two => Monomial::new(0, 0, 0, 1),
        };
        Self::monomial(m, Complex::new(T::one(), T::zero()))
    }

    pub fn creator(mode: Mode) -> Self {
        let m = match mode {
            Mode::One => Monomial::new(1, 0, 0, 0),
            Mode::Two => Monomial::new(0, 0, 1, 0),
        };
        Self::monomial(m, Complex::new(T::one(), T::zero()))
    }

    /// `n̂₁ + n̂₂`.
    pub fn total_number() -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self::monomial(Monomial::new(1, 1, 0, 0), one).sum(&Self::monomial(Monomial::new(0, 0, 1, 1), one))
    }

    fn with_term(mut self, m: Monomial, c: Complex<T>) -> Self {
        self.add_term(m, c);
        self
    }

    fn add_term(&mut self, m: Monomial, c: Complex<T>) {
        let entry = self.monomials.entry(m).or_default();
        *entry += c;
        if *entry == Complex::default() {
            self.monomials.remove(&m);
        }
    }

    pub fn coefficient(&self, m: Monomial) -> Complex<T> {
        self.monomials.get(&m).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex<T> {
        self.coefficient(Monomial::IDENTITY)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Complex<T>)> {
        self.monomials.iter()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&m, &c) in &other.monomials {
            out.add_term(m, c);
        }
        out
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = Self::zero();
        for (&m, &v) in &self.monomials {
            out.add_term(m, v * c);
        }
        out
    }

    /// Operator product `self · other`, brought back to normal order.
    pub fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, &ca) in &self.monomials {
            for (b, &cb) in &other.monomials {
                for (p1, q1, w1) in reorder(a.p1, a.q1, b.p1, b.q1) {
                    for (p2, q2, w2) in reorder(a.p2, a.q2, b.p2, b.q2) {
                        out.add_term(Monomial::new(p1, q1, p2, q2), ca * cb * T::lit(w1 * w2));
                    }
                }
            }
        }
        out
    }
}

/// `Tr{ρ Ω̂}` using `⟨α′|(a†)^p a^q|α⟩ = conj(α′)^p α^q ⟨α′|α⟩` per mode.
pub fn dyad_expectation<T: Real>(state: &DyadMix<T>, poly: &NormalOrderedPoly<T>) -> Complex<T> {
    state
        .iter()
        .map(|t| {
            let (b1, b2) = (t.bra1.conj(), t.bra2.conj());
            let element: Complex<T> = poly
                .iter()
                .map(|(m, &c)| c * b1.powu(m.p1) * t.ket1.powu(m.q1) * b2.powu(m.p2) * t.ket2.powu(m.q2))
                .sum();
            t.trace_contribution() * element
        })
        .sum()
}

/// `X̂`, `X̂²`, `P̂`, `P̂²` in normal order.
#[derive(Clone, Debug, PartialEq)]
pub struct EprOperators<T> {
    pub x: NormalOrderedPoly<T>,
    pub x_squared: NormalOrderedPoly<T>,
    pub p: NormalOrderedPoly<T>,
    pub p_squared: NormalOrderedPoly<T>,
}

/// Builds `X̂ = (a₁ + a₁† − a₂ − a₂†)/2`, `P̂ = (a₁ − a₁† + a₂ − a₂†)/(2i)` and
/// their squares.
pub fn normal_order_x_ops<T: Real>() -> EprOperators<T> {
    let half = Complex::new(T::lit(0.5), T::zero());
    let minus = Complex::new(-T::one(), T::zero());
    let a1 = NormalOrderedPoly::annihilator(Mode::One);
    let c1 = NormalOrderedPoly::creator(Mode::One);
    let a2 = NormalOrderedPoly::annihilator(Mode::Two);
    let c2 = NormalOrderedPoly::creator(Mode::Two);

    let x = a1.sum(&c1).sum(&a2.sum(&c2).scaled(minus)).scaled(half);
    // 1/(2i) = −i/2
    let p = a1.sum(&c1.scaled(minus)).sum(&a2).sum(&c2.scaled(minus)).scaled(Complex::new(T::zero(), T::lit(-0.5)));
    EprOperators { x_squared: x.product(&x), p_squared: p.product(&p), x, p }
}

fn check_normalized<T: Real>(state: &DyadMix<T>) -> Result<()> {
    let tr = state.trace();
    if (tr - Complex::new(T::one(), T::zero())).norm().as_f64() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(tr.re.as_f64()));
    }
    Ok(())
}

fn mean_var<T: Real>(
    state: &DyadMix<T>,
    first: &NormalOrderedPoly<T>,
    second: &NormalOrderedPoly<T>,
) -> Result<(T, T)> {
    check_normalized(state)?;
    let mean = dyad_expectation(state, first).re;
    let second = dyad_expectation(state, second).re;
    Ok((mean, second - mean * mean))
}

/// `(⟨X̂⟩, ΔX²)`.
pub fn mean_var_x<T: Real>(state: &DyadMix<T>) -> Result<(T, T)> {
    let ops = normal_order_x_ops();
    mean_var(state, &ops.x, &ops.x_squared)
}

/// `(⟨P̂⟩, ΔP²)`.
pub fn mean_var_p<T: Real>(state: &DyadMix<T>) -> Result<(T, T)> {
    let ops = normal_order_x_ops();
    mean_var(state, &ops.p, &ops.p_squared)
}

/// `⟨n̂₁⟩ + ⟨n̂₂⟩`.
pub fn mean_photons<T: Real>(state: &DyadMix<T>) -> T {
    dyad_expectation(state, &NormalOrderedPoly::total_number()).re
}

/// `ln ⟨x_θ|α⟩` for a single-mode quadrature eigenstate, given `β = α e^{−iθ}`.
#[inline]
fn log_amplitude_rotated<T: Real>(x: T, beta: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let norm = -T::PI().ln() * T::lit(0.25);
    Complex::from(norm - half * x * x) + beta * (T::SQRT_2() * x) - beta * beta * half - half * beta.norm_sqr()
}

/// Quadrature wavefunction
/// `⟨x_θ|α⟩ = π^{−1/4} exp(−x²/2 + √2 x α e^{−iθ} − (α e^{−iθ})²/2 − |α|²/2)`.
pub fn quadrature_amplitude<T: Real>(x: T, theta: T, alpha: Complex<T>) -> Complex<T> {
    log_amplitude_rotated(x, alpha * Complex::from_polar(T::one(), -theta)).exp()
}

fn p_rotation<T: Real>(alpha: Complex<T>) -> Complex<T> {
    // e^{−iπ/2} = −i
    Complex::new(alpha.im, -alpha.re)
}

fn check_grid<T: Real>(grid: &[T], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} grid has non-finite points")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(format!("{name} grid is not strictly increasing")));
    }
    Ok(())
}

/// `W(X,P)` sampled on a rectangular grid, `values[ix * p.len() + ip]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDensity<T> {
    pub x: Vec<T>,
    pub p: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> JointDensity<T> {
    pub fn at(&self, ix: usize, ip: usize) -> T {
        self.values[ix * self.p.len() + ip]
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Two-dimensional trapezoidal integral.
    pub fn integral(&self) -> T {
        let np = self.p.len();
        let row: Vec<T> =
            (0..self.x.len()).map(|ix| trapezoid(&self.p, &self.values[ix * np..(ix + 1) * np])).collect();
        trapezoid(&self.x, &row)
    }

    /// `(⟨X⟩, ⟨P⟩, ⟨XP⟩ − ⟨X⟩⟨P⟩)` from trapezoidal grid moments.
    pub fn covariance(&self) -> (T, T, T) {
        let np = self.p.len();
        let weighted = |f: &dyn Fn(T, T) -> T| -> T {
            let row: Vec<T> = (0..self.x.len())
                .map(|ix| {
                    let vals: Vec<T> = (0..np).map(|ip| self.at(ix, ip) * f(self.x[ix], self.p[ip])).collect();
                    trapezoid(&self.p, &vals)
                })
                .collect();
            trapezoid(&self.x, &row)
        };
        let norm = self.integral();
        let mx = weighted(&|x, _| x) / norm;
        let mp = weighted(&|_, p| p) / norm;
        let mxp = weighted(&|x, p| x * p) / norm;
        (mx, mp, mxp - mx * mp)
    }
}

fn trapezoid<T: Real>(x: &[T], y: &[T]) -> T {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) * T::lit(0.5)).sum()
}

/// Evaluates `W(X,P) = ⟨X,P|ρ|X,P⟩` with `|X,P⟩ = U_BS |p=P⟩₁ |x=−X⟩₂`.
pub fn joint_distribution<T: Real>(state: &DyadMix<T>, x_grid: &[T], p_grid: &[T]) -> Result<JointDensity<T>> {
    check_grid(x_grid, "X")?;
    check_grid(p_grid, "P")?;
    let inner = apply_beam_splitter(state, Splitter::Inverse);
    let np = p_grid.len();
    let mut values = vec![T::zero(); x_grid.len() * np];
    for t in &inner {
        let (k1, b1) = (p_rotation(t.ket1), p_rotation(t.bra1));
        let mode1: Vec<Complex<T>> =
            p_grid.iter().map(|&p| log_amplitude_rotated(p, k1) + log_amplitude_rotated(p, b1).conj()).collect();
        for (ix, &x) in x_grid.iter().enumerate() {
            let mode2 = log_amplitude_rotated(-x, t.ket2) + log_amplitude_rotated(-x, t.bra2).conj();
            let row = &mut values[ix * np..(ix + 1) * np];
            for (v, &m1) in row.iter_mut().zip(&mode1) {
                *v += (t.weight * (m1 + mode2).exp()).re;
            }
        }
    }
    Ok(JointDensity { x: x_grid.to_vec(), p: p_grid.to_vec(), values })
}

/// Probability density tabulated on a uniform grid over `[x_min, x_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity<T> {
    pub x_min: T,
    pub x_max: T,
    pub values: Vec<T>,
}

impl<T: Real> GridDensity<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> T {
        (self.x_max - self.x_min) / T::from_usize_lossy(self.values.len() - 1)
    }

    pub fn point(&self, i: usize) -> T {
        self.x_min + self.spacing() * T::from_usize_lossy(i)
    }

    pub fn points(&self) -> Vec<T> {
        uniform_points(self.x_min, self.x_max, self.values.len())
    }

    /// Trapezoidal integral.
    pub fn integral(&self) -> T {
        let v = &self.values;
        let inner: T = v.iter().copied().sum();
        (inner - T::lit(0.5) * (v[0] + v[v.len() - 1])) * self.spacing()
    }

    /// Trapezoidal mean and variance.
    pub fn moments(&self) -> (T, T) {
        let pts = self.points();
        let norm = self.integral();
        let moment = |f: &dyn Fn(T) -> T| -> T {
            let vals: Vec<T> = pts.iter().zip(&self.values).map(|(&x, &w)| w * f(x)).collect();
            trapezoid(&pts, &vals) / norm
        };
        let mean = moment(&|x| x);
        let var = moment(&|x| (x - mean) * (x - mean));
        (mean, var)
    }

    /// Cumulative trapezoid, scaled so the last entry is exactly 1.
    pub fn cdf(&self) -> Vec<T> {
        let h = self.spacing() * T::lit(0.5);
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = T::zero();
        out.push(acc);
        for w in self.values.windows(2) {
            acc += (w[0] + w[1]) * h;
            out.push(acc);
        }
        for c in &mut out {
            *c /= acc;
        }
        out
    }
}

pub(crate) fn uniform_points<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let h = (hi - lo) / T::from_usize_lossy(n - 1);
    (0..n).map(|i| lo + h * T::from_usize_lossy(i)).collect()
}

/// Marginal `W(X) = ∫dP W(X,P)` on a uniform grid.
///
/// The `P` integral is done per dyad term in closed form (completeness of the
/// `p̂₁` eigenstates turns it into the mode-1 overlap). The result is clamped
/// at zero and renormalized to unit trapezoidal mass.
pub fn marginal_x<T: Real>(state: &DyadMix<T>, x_min: T, x_max: T, points: usize) -> Result<GridDensity<T>> {
    if points < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {points}")));
    }
    if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::InvalidGrid(format!("bad window [{x_min}, {x_max}]")));
    }
    let trace = state.trace().re;
    let inner = apply_beam_splitter(state, Splitter::Inverse);
    let xs = uniform_points(x_min, x_max, points);
    let mut values = vec![T::zero(); points];
    for t in &inner {
        let e1 = overlap_exponent(t.bra1, t.ket1);
        for (v, &x) in values.iter_mut().zip(&xs) {
            let e = e1 + log_amplitude_rotated(-x, t.ket2) + log_amplitude_rotated(-x, t.bra2).conj();
            *v += (t.weight * e.exp()).re;
        }
    }
    let mut density = GridDensity { x_min, x_max, values };
    let tail = T::one() - density.integral() / trace;
    if tail.as_f64() > MAX_TAIL_MASS {
        return Err(Error::GridTooNarrow(tail.as_f64()));
    }
    for v in &mut density.values {
        *v = v.max(T::zero());
    }
    let mass = density.integral();
    for v in &mut density.values {
        *v /= mass;
    }
    Ok(density)
}

/// Default marginal window: mean ± 8·max(σ, 1/√2).
pub fn default_x_window<T: Real>(state: &DyadMix<T>) -> Result<(T, T)> {
    let (mean, var) = mean_var_x(state)?;
    let half = T::lit(DEFAULT_GRID_SIGMAS) * var.max(T::zero()).sqrt().max(T::FRAC_1_SQRT_2());
    Ok((mean - half, mean + half))
}

/// [`marginal_x`] over [`default_x_window`].
pub fn marginal_x_default<T: Real>(state: &DyadMix<T>, points: usize) -> Result<GridDensity<T>> {
    let (lo, hi) = default_x_window(state)?;
    marginal_x(state, lo, hi, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{apply_damping, apply_displacement, pure_product_state, CoherentDyad};
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn cat_input(alpha: f64) -> DyadMix<f64> {
        let n = C::from((2.0 * (1.0 + (-alpha * alpha / 2.0).exp())).powf(-0.5));
        pure_product_state(&[(C::default(), C::from(1.0))], &[(c(0.0, alpha / 2.0), n), (c(0.0, -alpha / 2.0), n)])
            .unwrap()
    }

    #[test]
    fn expectation_examples() {
        let vac = DyadMix::<f64>::vacuum();
        assert_eq!(dyad_expectation(&vac, &NormalOrderedPoly::total_number()), C::default());

        let alpha = c(1.3, -0.4);
        let coh = DyadMix::coherent(alpha, C::default());
        let got = dyad_expectation(&coh, &NormalOrderedPoly::annihilator(Mode::One));
        assert!((got - alpha).norm() < 1e-15);

        let ops = normal_order_x_ops::<f64>();
        assert!((dyad_expectation(&vac, &ops.x_squared) - C::from(0.5)).norm() < 1e-15);
        assert!((dyad_expectation(&vac, &ops.p_squared) - C::from(0.5)).norm() < 1e-15);
    }

    #[test]
    fn epr_operator_structure() {
        let ops = normal_order_x_ops::<f64>();
        assert_eq!(ops.x.constant_term(), C::default());
        assert_eq!(ops.x.len(), 4);
        assert!((ops.x_squared.constant_term() - C::from(0.5)).norm() < 1e-15);
        assert!((ops.p_squared.constant_term() - C::from(0.5)).norm() < 1e-15);
        // X̂² contains 2·(1/4) a₁†a₁ and cross terms −(1/2) a₁ a₂.
        assert!((ops.x_squared.coefficient(Monomial::new(1, 1, 0, 0)) - C::from(0.5)).norm() < 1e-15);
        assert!((ops.x_squared.coefficient(Monomial::new(0, 1, 0, 1)) - C::from(-0.5)).norm() < 1e-15);
        // P̂² has a₁² with coefficient −1/4.
        assert!((ops.p_squared.coefficient(Monomial::new(0, 2, 0, 0)) - C::from(-0.25)).norm() < 1e-15);
    }

    #[test]
    fn normal_ordering_of_a_adag() {
        let a = NormalOrderedPoly::<f64>::annihilator(Mode::One);
        let ad = NormalOrderedPoly::<f64>::creator(Mode::One);
        // a a† = a†a + 1
        let prod = a.product(&ad);
        assert_eq!(prod.coefficient(Monomial::new(1, 1, 0, 0)), C::from(1.0));
        assert_eq!(prod.constant_term(), C::from(1.0));
        // a² a†² = a†²a² + 4 a†a + 2
        let prod = a.product(&a).product(&ad.product(&ad));
        assert_eq!(prod.coefficient(Monomial::new(2, 2, 0, 0)), C::from(1.0));
        assert_eq!(prod.coefficient(Monomial::new(1, 1, 0, 0)), C::from(4.0));
        assert_eq!(prod.constant_term(), C::from(2.0));
    }

    #[test]
    fn moment_examples() {
        let (m, v) = mean_var_x(&DyadMix::<f64>::vacuum()).unwrap();
        assert!(m.abs() < 1e-15 && (v - 0.5).abs() < 1e-15);

        let probe = apply_beam_splitter(&cat_input(1.6), Splitter::Forward);
        let (m, v) = mean_var_x(&probe).unwrap();
        assert!(m.abs() < 1e-14);
        assert!((v - 0.22).abs() < 0.005, "var {v}");
        let (_, vp) = mean_var_p(&probe).unwrap();
        assert!((vp - 0.5).abs() < 1e-12);

        let unnormalized = DyadMix::new(vec![CoherentDyad::coherent(C::default(), C::default()); 2]);
        assert!(matches!(mean_var_x(&unnormalized), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn photon_examples() {
        assert_eq!(mean_photons(&DyadMix::<f64>::vacuum()), 0.0);
        let coh = DyadMix::coherent(c(3.0, 0.0), C::default());
        assert!((mean_photons(&coh) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn displacement_shifts_x_mean() {
        let x0: f64 = 1.7;
        let shifted = apply_displacement(&DyadMix::vacuum(), Mode::One, c(x0 / 2f64.sqrt(), 0.0));
        let (m, v) = mean_var_x(&shifted).unwrap();
        assert!((m - x0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quadrature_amplitude_is_normalized() {
        let alpha = c(0.8, -1.1);
        for theta in [0.0, 0.7, std::f64::consts::FRAC_PI_2] {
            let xs = uniform_points(-12.0, 12.0, 4001);
            let dens: Vec<f64> = xs.iter().map(|&x| quadrature_amplitude(x, theta, alpha).norm_sqr()).collect();
            assert!((trapezoid(&xs, &dens) - 1.0).abs() < 1e-12);
        }
        // The exact −i rotation agrees with the generic one at θ = π/2.
        let x = 0.37;
        let generic = quadrature_amplitude(x, std::f64::consts::FRAC_PI_2, alpha);
        let exact = log_amplitude_rotated(x, p_rotation(alpha)).exp();
        assert!((generic - exact).norm() < 1e-14);
    }

    #[test]
    fn joint_distribution_of_beam_split_cat() {
        let alpha: f64 = 1.6;
        let n2 = 1.0 / (2.0 * (1.0 + (-alpha * alpha / 2.0).exp()));
        let probe = apply_beam_splitter(&cat_input(alpha), Splitter::Forward);
        let xs = uniform_points(-3.0, 3.0, 61);
        let ps = uniform_points(-3.0, 3.0, 41);
        let w = joint_distribution(&probe, &xs, &ps).unwrap();
        for (ix, &x) in xs.iter().enumerate() {
            for (ip, &p) in ps.iter().enumerate() {
                let expected =
                    2.0 * n2 / std::f64::consts::PI * (-x * x - p * p).exp() * (1.0 + (2f64.sqrt() * alpha * x).cos());
                assert!((w.at(ix, ip) - expected).abs() < 1e-13);
            }
        }
        let origin = joint_distribution(&probe, &[0.0], &[0.0]).unwrap();
        assert!((origin.values[0] - 4.0 * n2 / std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn joint_distribution_of_vacuum_and_normalization() {
        let xs = uniform_points(-7.0, 7.0, 141);
        let w = joint_distribution(&DyadMix::<f64>::vacuum(), &xs, &xs).unwrap();
        for (ix, &x) in xs.iter().enumerate() {
            for (ip, &p) in xs.iter().enumerate() {
                let expected = (-x * x - p * p).exp() / std::f64::consts::PI;
                assert!((w.at(ix, ip) - expected).abs() < 1e-14);
            }
        }
        assert!((w.integral() - 1.0).abs() < 1e-6);

        assert!(joint_distribution(&DyadMix::<f64>::vacuum(), &[1.0, 0.0], &[0.0]).is_err());
        assert!(joint_distribution(&DyadMix::<f64>::vacuum(), &[], &[0.0]).is_err());
    }

    #[test]
    fn joint_distribution_factorizes_for_product_inputs() {
        // U_BS applied to a product input: X depends on mode 2 only, P on mode 1 only.
        let n = C::from((2.0 * (1.0 + (-1.0f64).exp())).powf(-0.5));
        let input = pure_product_state(
            &[(c(0.3, 0.8), C::from(1.0))],
            &[(c(0.5, 2f64.sqrt() / 2.0), n), (c(0.5, -(2f64.sqrt()) / 2.0), n)],
        )
        .unwrap();
        let probe = apply_beam_splitter(&input, Splitter::Forward);
        let xs = uniform_points(-6.0, 6.0, 241);
        let ps = uniform_points(-6.0, 6.0, 241);
        let w = joint_distribution(&probe, &xs, &ps).unwrap();
        assert!(w.min_value() >= -1e-12);
        let (_, _, cov) = w.covariance();
        assert!(cov.abs() < 1e-10, "cov {cov}");
    }

    #[test]
    fn marginal_matches_closed_form_and_moments() {
        let vac = marginal_x_default(&DyadMix::<f64>::vacuum(), DEFAULT_GRID_POINTS).unwrap();
        let (m, v) = vac.moments();
        assert!(m.abs() < 1e-10 && (v - 0.5).abs() < 1e-10);
        for (x, &w) in vac.points().iter().zip(&vac.values).step_by(997) {
            let expected = (-x * x).exp() / std::f64::consts::PI.sqrt();
            assert!((w - expected).abs() < 1e-12);
        }

        let alpha = 1.6;
        let probe = apply_beam_splitter(&cat_input(alpha), Splitter::Forward);
        let dens = marginal_x_default(&probe, DEFAULT_GRID_POINTS).unwrap();
        let shape = |x: f64| (-x * x).exp() * (1.0 + (2f64.sqrt() * alpha * x).cos());
        let ratio = dens.values[DEFAULT_GRID_POINTS / 2] / shape(dens.point(DEFAULT_GRID_POINTS / 2));
        for (x, &w) in dens.points().iter().zip(&dens.values).step_by(501) {
            assert!((w - ratio * shape(*x)).abs() < 1e-12);
        }
        let (gm, gv) = dens.moments();
        let (m, v) = mean_var_x(&probe).unwrap();
        assert!((gm - m).abs() < 1e-4 && (gv - v).abs() < 1e-4);
        assert!((dens.integral() - 1.0).abs() < 1e-12);
        assert!(dens.values.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn marginal_rejects_narrow_or_bad_grids() {
        let vac = DyadMix::<f64>::vacuum();
        assert!(matches!(marginal_x(&vac, -2.0, 2.0, 1000), Err(Error::GridTooNarrow(_))));
        assert!(matches!(marginal_x(&vac, 2.0, -2.0, 1000), Err(Error::InvalidGrid(_))));
        assert!(matches!(marginal_x(&vac, -8.0, 8.0, 1), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn marginal_of_damped_cat_matches_dyad_moments() {
        let probe = apply_beam_splitter(&cat_input(1.6), Splitter::Forward);
        let damped = apply_damping(&probe, 0.3).unwrap();
        let dens = marginal_x_default(&damped, DEFAULT_GRID_POINTS).unwrap();
        let (_, gv) = dens.moments();
        let (_, v) = mean_var_x(&damped).unwrap();
        assert!((gv - v).abs() < 1e-4);
    }

    fn random_hermitian() -> impl Strategy<Value = DyadMix<f64>> {
        let amp = (-2.5f64..2.5, -2.5f64..2.5).prop_map(|(a, b)| c(a, b));
        let coeff = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b));
        (prop::collection::vec((amp.clone(), coeff.clone()), 1..3), prop::collection::vec((amp, coeff), 1..3))
            .prop_filter_map("degenerate", |(m1, m2)| {
                let rho = pure_product_state(&m1, &m2).ok()?;
                let tr = rho.trace().re;
                (tr > 1e-2)
                    .then(|| DyadMix::new(rho.iter().map(|t| CoherentDyad { weight: t.weight / tr, ..*t }).collect()))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hermitian_observables_have_real_expectations(rho in random_hermitian()) {
            let ops = normal_order_x_ops::<f64>();
            for poly in [&ops.x, &ops.x_squared, &ops.p, &ops.p_squared, &NormalOrderedPoly::total_number()] {
                prop_assert!(dyad_expectation(&rho, poly).im.abs() < 1e-10);
            }
            let (_, v) = mean_var_x(&rho).unwrap();
            prop_assert!(v > -1e-10);
        }
    }
}
