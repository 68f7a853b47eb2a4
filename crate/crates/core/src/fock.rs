// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated two-mode Fock-space verifier.
//!
//! Basis index of `|n₁⟩⊗|n₂⟩` is `n₁·dim + n₂`. Only the mode-1 loss term of the
//! master equation is integrated (interaction picture, `κ = γt`).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::probes::{ProbeClass, ProbeSpec};
use crate::state::DyadMix;

/// Largest tolerated truncated coherent-state tail mass.
pub const MAX_COHERENT_TAIL: f64 = 1e-12;
/// Trace drift beyond which an integration is rejected.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;
/// Default RK4 resolution.
pub const STEPS_PER_UNIT_KAPPA: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FockCutoff {
    dim: usize,
}

impl FockCutoff {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("Fock dimension must be at least 2, got {dim}")));
        }
        Ok(Self { dim })
    }

    /// `dim = ⌈m² + 6m + 12⌉` for amplitudes up to `m` in magnitude.
    pub fn for_amplitude(m: f64) -> Self {
        let m = m.abs();
        Self { dim: (m * m + 6.0 * m + 12.0).ceil() as usize }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the two-mode space.
    pub fn space_dim(&self) -> usize {
        self.dim * self.dim
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.dim + n2
    }
}

/// `cₙ = e^{−|α|²/2} αⁿ/√(n!)` for `n < dim`, renormalized after truncation.
pub fn coherent_fock(alpha: Complex64, cutoff: FockCutoff) -> Result<DVector<Complex64>> {
    let dim = cutoff.dim();
    let mut c = Complex64::from((-0.5 * alpha.norm_sqr()).exp());
    let mut v = DVector::zeros(dim);
    for n in 0..dim {
        v[n] = c;
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    let mut tail = 0.0;
    let mut n = dim;
    loop {
        let p = c.norm_sqr();
        tail += p;
        if (n as f64 > alpha.norm_sqr() && p <= tail * 1e-17) || p == 0.0 || n > dim + 10_000 {
            break;
        }
        n += 1;
        c *= alpha / (n as f64).sqrt();
    }
    if tail >= MAX_COHERENT_TAIL {
        return Err(Error::CutoffTooSmall { dim, tail });
    }
    let norm = v.norm();
    Ok(v / Complex64::from(norm))
}

/// `ψ₁ ⊗ ψ₂` in the two-mode basis.
pub fn product_vector(mode1: &DVector<Complex64>, mode2: &DVector<Complex64>) -> DVector<Complex64> {
    let (d1, d2) = (mode1.len(), mode2.len());
    DVector::from_fn(d1 * d2, |i, _| mode1[i / d2] * mode2[i % d2])
}

/// `exp(π/4 (a₁a₂† − a₁†a₂))`, stored as one real block per total photon number.
#[derive(Clone, Debug)]
pub struct BeamSplitterUnitary {
    cutoff: FockCutoff,
    /// `(first n₁ of the block, block matrix)` indexed by `n₁ + n₂`.
    blocks: Vec<(usize, DMatrix<f64>)>,
}

fn expm_real(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let norm1 = (0..n).map(|j| g.column(j).abs().sum()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let a = g / 2f64.powi(squarings);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn beam_splitter_unitary(cutoff: FockCutoff) -> BeamSplitterUnitary {
    let dim = cutoff.dim();
    let theta = std::f64::consts::FRAC_PI_4;
    let blocks = (0..=2 * (dim - 1))
        .map(|total| {
            let lo = total.saturating_sub(dim - 1);
            let hi = total.min(dim - 1);
            let size = hi - lo + 1;
            let mut g = DMatrix::zeros(size, size);
            for n1 in lo..=hi {
                let n2 = total - n1;
                let col = n1 - lo;
                // a₁a₂†: |n₁, n₂⟩ → √(n₁(n₂+1)) |n₁−1, n₂+1⟩
                if n1 > lo {
                    g[(col - 1, col)] += theta * ((n1 * (n2 + 1)) as f64).sqrt();
                }
                // −a₁†a₂: |n₁, n₂⟩ → −√((n₁+1)n₂) |n₁+1, n₂−1⟩
                if n1 < hi {
                    g[(col + 1, col)] -= theta * (((n1 + 1) * n2) as f64).sqrt();
                }
            }
            (lo, expm_real(&g))
        })
        .collect();
    BeamSplitterUnitary { cutoff, blocks }
}

impl BeamSplitterUnitary {
    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn apply(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        let c = self.cutoff;
        assert_eq!(psi.len(), c.space_dim(), "state dimension mismatch");
        let mut out = DVector::zeros(psi.len());
        for (total, (lo, u)) in self.blocks.iter().enumerate() {
            for col in 0..u.ncols() {
                let src = psi[c.index(lo + col, total - lo - col)];
                if src == Complex64::default() {
                    continue;
                }
                for row in 0..u.nrows() {
                    out[c.index(lo + row, total - lo - row)] += src * u[(row, col)];
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let c = self.cutoff;
        let mut m = DMatrix::zeros(c.space_dim(), c.space_dim());
        for (total, (lo, u)) in self.blocks.iter().enumerate() {
            for col in 0..u.ncols() {
                for row in 0..u.nrows() {
                    m[(c.index(lo + row, total - lo - row), c.index(lo + col, total - lo - col))] =
                        Complex64::from(u[(row, col)]);
                }
            }
        }
        m
    }

    /// `‖U†U − 1‖` in operator norm, maximized over the number blocks.
    pub fn unitarity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(_, u)| {
                let d = u.transpose() * u - DMatrix::identity(u.nrows(), u.ncols());
                d.singular_values().max()
            })
            .fold(0.0, f64::max)
    }
}

/// `D(δ)|γ⟩ = e^{i Im(δγ̄)} |γ + δ⟩` expanded in the Fock basis.
fn displaced_coherent(gamma: Complex64, delta: Complex64, cutoff: FockCutoff) -> Result<DVector<Complex64>> {
    let phase = Complex64::from_polar(1.0, (delta * gamma.conj()).im);
    Ok(coherent_fock(gamma + delta, cutoff)? * phase)
}

/// `N_α D(δ)(|iα/2⟩ + |−iα/2⟩)`.
fn displaced_cat(alpha: f64, delta: Complex64, cutoff: FockCutoff) -> Result<DVector<Complex64>> {
    let n = crate::probes::normalization_constant(alpha);
    let up = displaced_coherent(Complex64::new(0.0, 0.5 * alpha), delta, cutoff)?;
    let down = displaced_coherent(Complex64::new(0.0, -0.5 * alpha), delta, cutoff)?;
    Ok((up + down) * Complex64::from(n))
}

/// Cutoff from the rule with `m = |X₀| + α/2`, which bounds every amplitude before and after the beam splitter.
pub fn probe_cutoff(spec: &ProbeSpec<f64>) -> FockCutoff {
    FockCutoff::for_amplitude(spec.x0.abs() + 0.5 * spec.alpha)
}

/// The probe state built directly in the Fock basis, with the beam splitter applied as a matrix.
pub fn fock_probe(spec: &ProbeSpec<f64>, cutoff: FockCutoff) -> Result<FockDensity> {
    let zero = Complex64::default();
    let shift = Complex64::from(spec.x0 * std::f64::consts::FRAC_1_SQRT_2);
    let psi = match spec.class {
        ProbeClass::I => {
            let pre = product_vector(&coherent_fock(shift, cutoff)?, &displaced_cat(spec.alpha, -shift, cutoff)?);
            beam_splitter_unitary(cutoff).apply(&pre)
        }
        ProbeClass::II => product_vector(
            &displaced_cat(spec.alpha, Complex64::from(spec.x0), cutoff)?,
            &displaced_cat(spec.alpha, zero, cutoff)?,
        ),
        ProbeClass::III => {
            let pre = product_vector(&coherent_fock(shift, cutoff)?, &coherent_fock(-shift, cutoff)?);
            beam_splitter_unitary(cutoff).apply(&pre)
        }
        ProbeClass::IV => {
            product_vector(&coherent_fock(Complex64::from(spec.x0), cutoff)?, &coherent_fock(zero, cutoff)?)
        }
    };
    FockDensity::from_pure(&psi, cutoff)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockDensity {
    pub cutoff: FockCutoff,
    pub entries: DMatrix<Complex64>,
}

impl FockDensity {
    pub fn zeros(cutoff: FockCutoff) -> Self {
        let d = cutoff.space_dim();
        Self { cutoff, entries: DMatrix::zeros(d, d) }
    }

    pub fn from_pure(psi: &DVector<Complex64>, cutoff: FockCutoff) -> Result<Self> {
        if psi.len() != cutoff.space_dim() {
            return Err(Error::InvalidArgument(format!(
                "state has {} entries, cutoff needs {}",
                psi.len(),
                cutoff.space_dim()
            )));
        }
        Ok(Self { cutoff, entries: psi * psi.adjoint() })
    }

    /// Expands a coherent-dyad mixture term by term; dyads sharing a ket are merged first.
    pub fn from_dyads(state: &DyadMix<f64>, cutoff: FockCutoff) -> Result<Self> {
        let key = |a: Complex64, b: Complex64| [a.re.to_bits(), a.im.to_bits(), b.re.to_bits(), b.im.to_bits()];
        let mut groups: Vec<([u64; 4], DVector<Complex64>, DVector<Complex64>)> = Vec::new();
        for t in state {
            let bra = product_vector(&coherent_fock(t.bra1, cutoff)?, &coherent_fock(t.bra2, cutoff)?);
            let row = bra.map(|b| t.weight * b.conj());
            let k = key(t.ket1, t.ket2);
            match groups.iter_mut().find(|g| g.0 == k) {
                Some(g) => g.2 += row,
                None => {
                    let ket = product_vector(&coherent_fock(t.ket1, cutoff)?, &coherent_fock(t.ket2, cutoff)?);
                    groups.push((k, ket, row));
                }
            }
        }
        let mut rho = Self::zeros(cutoff);
        for (_, ket, row) in &groups {
            rho.entries += ket * row.transpose();
        }
        Ok(rho)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.entries;
        let mut worst: f64 = 0.0;
        for j in 0..m.ncols() {
            for i in 0..=j {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part. Dense, so keep `dim` small.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::from(0.5);
        h.symmetric_eigenvalues().min()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `⌈200 κ⌉` RK4 steps, at least one.
pub fn default_steps(kappa: f64) -> usize {
    ((STEPS_PER_UNIT_KAPPA * kappa).ceil() as usize).max(1)
}

fn check_integration_args(kappa: f64, steps: usize) -> Result<()> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidKappa(kappa));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    Ok(())
}

fn check_trace(before: Complex64, after: Complex64) -> Result<()> {
    let drift = (after - before).norm();
    if drift > MAX_TRACE_DRIFT {
        Err(Error::TraceDrift(drift))
    } else {
        Ok(())
    }
}

/// The loss generator restricted to one diagonal `n₁ − m₁ = d` is bidiagonal in `k = min(n₁, m₁)`:
/// `(Lv)ₖ = √((k+d+1)(k+1))·vₖ₊₁ − (k + d/2)·vₖ`.
fn diagonal_generator(d: usize, len: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = (0..len).map(|k| -(k as f64 + 0.5 * d as f64)).collect();
    let upper = (0..len).map(|k| (((k + d + 1) * (k + 1)) as f64).sqrt()).collect();
    (diag, upper)
}

fn apply_bidiagonal(diag: &[f64], upper: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for k in 0..n {
        out[k] = diag[k] * v[k] + if k + 1 < n { upper[k] * v[k + 1] } else { 0.0 };
    }
}

/// Classic RK4 propagator for `steps` steps of size `h` on one diagonal, built column by column.
fn diagonal_propagator(d: usize, len: usize, h: f64, steps: usize) -> Vec<f64> {
    let (diag, upper) = diagonal_generator(d, len);
    let mut g = vec![0.0; len * len];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    for col in 0..len {
        // Entries below `col` stay zero: the generator only moves weight downward in k.
        let n = col + 1;
        let mut v = vec![0.0; n];
        v[col] = 1.0;
        for _ in 0..steps {
            apply_bidiagonal(&diag[..n], &upper[..n], &v, &mut k1[..n]);
            for i in 0..n {
                tmp[i] = v[i] + 0.5 * h * k1[i];
            }
            apply_bidiagonal(&diag[..n], &upper[..n], &tmp[..n], &mut k2[..n]);
            for i in 0..n {
                tmp[i] = v[i] + 0.5 * h * k2[i];
            }
            apply_bidiagonal(&diag[..n], &upper[..n], &tmp[..n], &mut k3[..n]);
            for i in 0..n {
                tmp[i] = v[i] + h * k3[i];
            }
            apply_bidiagonal(&diag[..n], &upper[..n], &tmp[..n], &mut k4[..n]);
            for i in 0..n {
                v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        for (k, &x) in v.iter().enumerate() {
            g[k * len + col] = x;
        }
    }
    g
}

/// Integrates `dρ/dκ = a₁ρa₁† − ½{a₁†a₁, ρ}` with classic RK4 at fixed step `κ/steps`.
///
/// The generator never mixes different `(n₂, m₂, n₁ − m₁)` chains, so the RK4
/// map is assembled once per chain and applied to every spectator block.
/// [`integrate_master_equation_stepwise`] performs the same arithmetic on the full matrix.
pub fn integrate_master_equation(rho0: &FockDensity, kappa: f64, steps: usize) -> Result<FockDensity> {
    let mut rho = rho0.clone();
    integrate_in_place(&mut rho, kappa, steps)?;
    Ok(rho)
}

pub fn integrate_in_place(rho: &mut FockDensity, kappa: f64, steps: usize) -> Result<()> {
    check_integration_args(kappa, steps)?;
    if kappa == 0.0 {
        return Ok(());
    }
    let before = rho.trace();
    let c = rho.cutoff;
    let dim = c.dim();
    let h = kappa / steps as f64;
    let mut chain = vec![Complex64::default(); dim];
    for d in 0..dim {
        let len = dim - d;
        let g = diagonal_propagator(d, len, h, steps);
        for n2 in 0..dim {
            for m2 in 0..dim {
                for (lower_is_row, active) in [(false, true), (true, d > 0)] {
                    if !active {
                        continue;
                    }
                    // `lower_is_row == false`: n₁ = k + d, m₁ = k; otherwise n₁ = k, m₁ = k + d.
                    let at = |k: usize| {
                        if lower_is_row {
                            (c.index(k, n2), c.index(k + d, m2))
                        } else {
                            (c.index(k + d, n2), c.index(k, m2))
                        }
                    };
                    for (k, slot) in chain.iter_mut().enumerate().take(len) {
                        *slot = rho.entries[at(k)];
                    }
                    for k in 0..len {
                        let row = &g[k * len..(k + 1) * len];
                        let mut acc = Complex64::default();
                        for l in k..len {
                            acc += chain[l] * row[l];
                        }
                        rho.entries[at(k)] = acc;
                    }
                }
            }
        }
    }
    check_trace(before, rho.trace())
}

/// `L(ρ)` on the full matrix.
fn lindblad(rho: &DMatrix<Complex64>, c: FockCutoff) -> DMatrix<Complex64> {
    let dim = c.dim();
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for n1 in 0..dim {
        for n2 in 0..dim {
            for m1 in 0..dim {
                for m2 in 0..dim {
                    let (i, j) = (c.index(n1, n2), c.index(m1, m2));
                    let mut v = -rho[(i, j)] * (0.5 * (n1 + m1) as f64);
                    if n1 + 1 < dim && m1 + 1 < dim {
                        v += rho[(c.index(n1 + 1, n2), c.index(m1 + 1, m2))] * (((n1 + 1) * (m1 + 1)) as f64).sqrt();
                    }
                    out[(i, j)] = v;
                }
            }
        }
    }
    out
}

/// Reference RK4 stepping on the full density matrix; `O(dim⁴)` per stage.
pub fn integrate_master_equation_stepwise(rho0: &FockDensity, kappa: f64, steps: usize) -> Result<FockDensity> {
    check_integration_args(kappa, steps)?;
    let c = rho0.cutoff;
    let h = Complex64::from(kappa / steps as f64);
    let half = Complex64::from(0.5);
    let mut rho = rho0.entries.clone();
    for _ in 0..steps {
        let k1 = lindblad(&rho, c);
        let k2 = lindblad(&(&rho + &k1 * (h * half)), c);
        let k3 = lindblad(&(&rho + &k2 * (h * half)), c);
        let k4 = lindblad(&(&rho + &k3 * h), c);
        rho += (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * (h / 6.0);
    }
    check_trace(rho0.trace(), rho.trace())?;
    Ok(FockDensity { cutoff: c, entries: rho })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FockMoments {
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub var_p: f64,
    pub mean_n: f64,
}

/// Sparse rows of a truncated two-mode ladder combination
/// `c₁a₁ + c₁†a₁† + c₂a₂ + c₂†a₂†`.
fn ladder_rows(c: FockCutoff, coef: [Complex64; 4]) -> Vec<Vec<(usize, Complex64)>> {
    let dim = c.dim();
    let mut rows = vec![Vec::new(); c.space_dim()];
    for n1 in 0..dim {
        for n2 in 0..dim {
            let i = c.index(n1, n2);
            // ⟨n₁,n₂| a₁ |n₁+1,n₂⟩ = √(n₁+1), ⟨n₁,n₂| a₁† |n₁−1,n₂⟩ = √n₁
            if n1 + 1 < dim {
                rows[i].push((c.index(n1 + 1, n2), coef[0] * ((n1 + 1) as f64).sqrt()));
            }
            if n1 > 0 {
                rows[i].push((c.index(n1 - 1, n2), coef[1] * (n1 as f64).sqrt()));
            }
            if n2 + 1 < dim {
                rows[i].push((c.index(n1, n2 + 1), coef[2] * ((n2 + 1) as f64).sqrt()));
            }
            if n2 > 0 {
                rows[i].push((c.index(n1, n2 - 1), coef[3] * (n2 as f64).sqrt()));
            }
        }
    }
    rows
}

fn sparse_mean_var(rows: &[Vec<(usize, Complex64)>], rho: &DMatrix<Complex64>) -> (f64, f64) {
    let mut first = Complex64::default();
    let mut second = Complex64::default();
    for (i, row) in rows.iter().enumerate() {
        for &(j, a_ij) in row {
            first += a_ij * rho[(j, i)];
        }
    }
    // ⟨A²⟩ = Σᵢ Σⱼₖ A_ij ρ_jk A_ki; columns of A are gathered from the rows.
    let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); rows.len()];
    for (k, row) in rows.iter().enumerate() {
        for &(i, a_ki) in row {
            cols[i].push((k, a_ki));
        }
    }
    for (i, row) in rows.iter().enumerate() {
        for &(j, a_ij) in row {
            for &(k, a_ki) in &cols[i] {
                second += a_ij * rho[(j, k)] * a_ki;
            }
        }
    }
    (first.re, second.re - first.re * first.re)
}

/// `(⟨X̂⟩, ΔX², ⟨P̂⟩, ΔP², ⟨n̂₁ + n̂₂⟩)` from matrix elements of the truncated ladder operators.
pub fn fock_moments(rho: &FockDensity) -> FockMoments {
    let c = rho.cutoff;
    let half = Complex64::new(0.5, 0.0);
    let x_rows = ladder_rows(c, [half, half, -half, -half]);
    // P̂ = (a₁ − a₁† + a₂ − a₂†)/(2i)
    let m = Complex64::new(0.0, -0.5);
    let p_rows = ladder_rows(c, [m, -m, m, -m]);
    let (mean_x, var_x) = sparse_mean_var(&x_rows, &rho.entries);
    let (mean_p, var_p) = sparse_mean_var(&p_rows, &rho.entries);
    let dim = c.dim();
    let mean_n = (0..c.space_dim()).map(|i| ((i / dim + i % dim) as f64) * rho.entries[(i, i)].re).sum();
    FockMoments { mean_x, var_x, mean_p, var_p, mean_n }
}
