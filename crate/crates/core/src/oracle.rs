// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Named cross-checks of the closed forms and the dyad algebra against the Fock oracle.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_unitary, coherent_fock, default_steps, fock_moments, fock_probe, integrate_in_place,
    integrate_master_equation, probe_cutoff, product_vector, FockCutoff, FockDensity,
};
use crate::observables::{mean_photons, mean_var_p, mean_var_x};
use crate::probes::{make_probe, ProbeClass, ProbeSpec};
use crate::response::var_x_damped;
use crate::state::{apply_damping, overlap, DyadMix};

/// Largest per-mode dimension accepted as an override (a density at 80 takes ~650 MB).
pub const MAX_ORACLE_DIM: usize = 80;

pub const CHECK_NAMES: [&str; 13] = [
    "coherent-overlap",
    "coherent-photon-number",
    "bs-vacuum",
    "bs-unitarity",
    "bs-number-conservation",
    "bs-amplitude-map",
    "trace-preservation",
    "damping-semigroup",
    "photon-decay",
    "static-moments",
    "damped-variance",
    "dyad-fock-agreement",
    "positivity",
];

/// Appended to the default suite; integrates with deliberately coarse steps.
pub const RK4_ORDER_CHECK: &str = "rk4-order";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteOptions {
    /// Per-mode dimension used instead of each check's default.
    pub cutoff: Option<usize>,
    /// Run a single named check.
    pub only: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    /// Worst measured deviation; `NaN` when the check could not run.
    pub deviation: f64,
    pub tolerance: f64,
    pub dim: usize,
    pub detail: String,
}

struct Ctx {
    cutoff: Option<usize>,
}

impl Ctx {
    fn dim(&self, default: usize) -> Result<FockCutoff> {
        FockCutoff::new(self.cutoff.unwrap_or(default))
    }

    /// Dense eigen-decompositions stay at small sizes even under an override.
    fn small_dim(&self, default: usize) -> Result<FockCutoff> {
        FockCutoff::new(self.cutoff.map_or(default, |d| d.min(default)))
    }
}

fn measure(name: &str, tolerance: f64, dim: usize, run: impl FnOnce() -> Result<(f64, String)>) -> Result<OracleCheck> {
    let (deviation, detail, passed) = match run() {
        Ok((dev, detail)) => (dev, detail, dev <= tolerance),
        Err(e @ Error::CutoffTooSmall { .. }) | Err(e @ Error::TraceDrift(_)) => (f64::NAN, e.to_string(), false),
        Err(e) => return Err(e),
    };
    Ok(OracleCheck { name: name.to_string(), passed, deviation, tolerance, dim, detail })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_coherent_overlap(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(60)?;
    measure("coherent-overlap", 1e-10, cutoff.dim(), || {
        let amps = [c(0.0, 0.0), c(3.0, 0.0), c(0.0, 3.0), c(-2.0, 2.2), c(1.1, -0.4), c(-2.9, -0.5)];
        let vecs = amps.iter().map(|&a| coherent_fock(a, cutoff)).collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for (a, va) in amps.iter().zip(&vecs) {
            for (b, vb) in amps.iter().zip(&vecs) {
                worst = worst.max((vb.dotc(va) - overlap(*b, *a)).norm());
            }
        }
        Ok((worst, format!("{} amplitude pairs, |a| <= 3", amps.len() * amps.len())))
    })
}

fn check_coherent_photons(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(60)?;
    measure("coherent-photon-number", 1e-10, cutoff.dim(), || {
        let mut worst: f64 = 0.0;
        for a in [c(0.5, 0.0), c(2.0, -1.0), c(-3.0, 0.0)] {
            let v = coherent_fock(a, cutoff)?;
            let n: f64 = v.iter().enumerate().map(|(k, x)| k as f64 * x.norm_sqr()).sum();
            worst = worst.max((n - a.norm_sqr()).abs());
        }
        Ok((worst, "<n> = |alpha|^2".into()))
    })
}

fn check_bs_vacuum(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(40)?;
    measure("bs-vacuum", 1e-10, cutoff.dim(), || {
        let vac = product_vector(&coherent_fock(c(0.0, 0.0), cutoff)?, &coherent_fock(c(0.0, 0.0), cutoff)?);
        let out = beam_splitter_unitary(cutoff).apply(&vac);
        Ok(((out - vac).norm(), "U|0,0> = |0,0>".into()))
    })
}

fn check_bs_unitarity(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(40)?;
    measure("bs-unitarity", 1e-10, cutoff.dim(), || {
        Ok((beam_splitter_unitary(cutoff).unitarity_defect(), "operator norm of U^T U - 1".into()))
    })
}

fn check_bs_number(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(40)?;
    measure("bs-number-conservation", 1e-9, cutoff.dim(), || {
        let dim = cutoff.dim();
        let bs = beam_splitter_unitary(cutoff);
        let mut worst: f64 = 0.0;
        for (n1, n2) in [(1, 0), (0, 3), (2, 5), (dim / 2, dim / 3), (dim - 1, 1)] {
            let mut psi = nalgebra::DVector::zeros(cutoff.space_dim());
            psi[cutoff.index(n1, n2)] = c(1.0, 0.0);
            let out = bs.apply(&psi);
            let leak: f64 =
                out.iter().enumerate().filter(|(i, _)| i / dim + i % dim != n1 + n2).map(|(_, x)| x.norm_sqr()).sum();
            worst = worst.max(leak.sqrt());
        }
        Ok((worst, "amplitude leaving the n1 + n2 sector".into()))
    })
}

fn check_bs_amplitudes(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(40)?;
    measure("bs-amplitude-map", 1e-8, cutoff.dim(), || {
        let bs = beam_splitter_unitary(cutoff);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut worst: f64 = 0.0;
        for (a, b) in [(c(2.0, 0.0), c(0.0, 0.0)), (c(0.0, 1.5), c(-1.0, 0.3)), (c(1.2, -1.2), c(1.0, 1.4))] {
            let psi = product_vector(&coherent_fock(a, cutoff)?, &coherent_fock(b, cutoff)?);
            let target = product_vector(&coherent_fock((a - b) * s, cutoff)?, &coherent_fock((a + b) * s, cutoff)?);
            worst = worst.max(1.0 - target.dotc(&bs.apply(&psi)).norm_sqr());
        }
        Ok((worst, "fidelity deficit of |a,b> -> |(a-b)/sqrt2,(a+b)/sqrt2>".into()))
    })
}

fn check_trace(ctx: &Ctx) -> Result<OracleCheck> {
    let spec = ProbeSpec::new(ProbeClass::II, 1.6, 1.0)?;
    let cutoff = ctx.dim(probe_cutoff(&spec).dim())?;
    measure("trace-preservation", 1e-12, cutoff.dim(), || {
        let rho0 = fock_probe(&spec, cutoff)?;
        let rho = integrate_master_equation(&rho0, 1.0, default_steps(1.0))?;
        Ok(((rho.trace() - rho0.trace()).norm(), "class II, alpha 1.6, X0 1, kappa 1".into()))
    })
}

fn check_semigroup(ctx: &Ctx) -> Result<OracleCheck> {
    let state = DyadMix::coherent(c(1.2, -0.4), c(0.0, 0.9));
    let cutoff = ctx.dim(30)?;
    measure("damping-semigroup", 1e-12, cutoff.dim(), || {
        let (k1, k2) = (0.3, 0.45);
        let once = FockDensity::from_dyads(&apply_damping(&state, k1 + k2)?, cutoff)?;
        let twice = FockDensity::from_dyads(&apply_damping(&apply_damping(&state, k1)?, k2)?, cutoff)?;
        let dyad_dev = once.max_abs_diff(&twice);
        // Equal step sizes, so the discrete propagators compose exactly.
        let rho0 = FockDensity::from_dyads(&state, cutoff)?;
        let (n1, n2) = (default_steps(k1), default_steps(k2));
        let whole = integrate_master_equation(&rho0, k1 + k2, n1 + n2)?;
        let split = integrate_master_equation(&integrate_master_equation(&rho0, k1, n1)?, k2, n2)?;
        let fock_dev = whole.max_abs_diff(&split);
        Ok((dyad_dev.max(fock_dev), format!("dyad {dyad_dev:.3e}, RK4 {fock_dev:.3e}; kappa 0.3 then 0.45")))
    })
}

fn check_photon_decay(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(30)?;
    measure("photon-decay", 1e-6, cutoff.dim(), || {
        let rho0 = FockDensity::from_dyads(&DyadMix::coherent(c(2.0, 0.0), c(0.0, 0.0)), cutoff)?;
        let rho = integrate_master_equation(&rho0, 0.5, default_steps(0.5))?;
        let n = fock_moments(&rho).mean_n;
        Ok(((n - 4.0 * (-0.5f64).exp()).abs(), format!("<n1> = {n:.12}")))
    })
}

fn check_static_moments(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(60)?;
    measure("static-moments", 2e-3, cutoff.dim(), || {
        let ii = fock_moments(&fock_probe(&ProbeSpec::new(ProbeClass::II, 1.6, 0.0)?, cutoff)?);
        let i = fock_moments(&fock_probe(&ProbeSpec::new(ProbeClass::I, 1.6, 0.0)?, cutoff)?);
        let dev = (ii.var_x - 0.22).abs().max((ii.var_p - 1.5).abs()).max((i.var_p - 0.5).abs());
        Ok((dev, format!("II: var_X {:.6} var_P {:.6}; I: var_P {:.6}", ii.var_x, ii.var_p, i.var_p)))
    })
}

fn check_damped_variance(ctx: &Ctx) -> Result<OracleCheck> {
    let cutoff = ctx.dim(60)?;
    measure("damped-variance", 1e-5, cutoff.dim(), || {
        let mut worst: f64 = 0.0;
        let mut at = String::new();
        for class in [ProbeClass::I, ProbeClass::II] {
            for alpha in [0.8, 1.6, 3.0] {
                let spec = ProbeSpec::new(class, alpha, 0.0)?;
                for kappa in [0.01, 0.1, 1.0] {
                    let mut rho = fock_probe(&spec, cutoff)?;
                    integrate_in_place(&mut rho, kappa, default_steps(kappa))?;
                    let dev = (fock_moments(&rho).var_x - var_x_damped(class, alpha, kappa)?).abs();
                    if dev >= worst {
                        worst = dev;
                        at = format!("worst at class {class}, alpha {alpha}, kappa {kappa}");
                    }
                }
            }
        }
        Ok((worst, at))
    })
}

fn check_dyad_fock(ctx: &Ctx) -> Result<OracleCheck> {
    let widest = ProbeSpec::new(ProbeClass::I, 2.0, 3.0)?;
    let default_dim = probe_cutoff(&widest).dim();
    let cutoff = ctx.dim(default_dim)?;
    measure("dyad-fock-agreement", 1e-5, cutoff.dim(), || {
        let mut worst: f64 = 0.0;
        let mut at = String::new();
        for class in ProbeClass::ALL {
            for (alpha, x0) in [(0.8, 1.0), (2.0, 3.0)] {
                let spec = ProbeSpec::new(class, alpha, x0)?;
                for kappa in [0.05, 1.0] {
                    let dyad = apply_damping(&make_probe(&spec), kappa)?;
                    let (mx, vx) = mean_var_x(&dyad)?;
                    let (mp, vp) = mean_var_p(&dyad)?;
                    let n = mean_photons(&dyad);
                    let mut rho = fock_probe(&spec, cutoff)?;
                    integrate_in_place(&mut rho, kappa, default_steps(kappa))?;
                    let f = fock_moments(&rho);
                    let dev = [f.mean_x - mx, f.var_x - vx, f.mean_p - mp, f.var_p - vp, f.mean_n - n]
                        .iter()
                        .fold(0.0f64, |m, d| m.max(d.abs()));
                    if dev >= worst {
                        worst = dev;
                        at = format!("worst at class {class}, alpha {alpha}, X0 {x0}, kappa {kappa}");
                    }
                }
            }
        }
        Ok((worst, at))
    })
}

fn check_positivity(ctx: &Ctx) -> Result<OracleCheck> {
    let spec = ProbeSpec::new(ProbeClass::I, 1.6, 0.5)?;
    let cutoff = ctx.small_dim(probe_cutoff(&spec).dim())?;
    measure("positivity", 1e-8, cutoff.dim(), || {
        let mut worst: f64 = 0.0;
        for kappa in [0.3, 2.0] {
            let rho = integrate_master_equation(&fock_probe(&spec, cutoff)?, kappa, default_steps(kappa))?;
            worst = worst.max((-rho.min_eigenvalue()).max(0.0)).max(rho.hermiticity_defect());
        }
        Ok((worst, "negative eigenvalue floor and Hermiticity defect".into()))
    })
}

fn check_rk4_order(ctx: &Ctx) -> Result<OracleCheck> {
    let state = DyadMix::coherent(c(1.0, 0.5), c(0.3, 0.0));
    let cutoff = ctx.small_dim(24)?;
    // Passes when the defect ratio reaches 8, reported as 8 / ratio against tolerance 1.
    measure(RK4_ORDER_CHECK, 1.0, cutoff.dim(), || {
        let rho0 = FockDensity::from_dyads(&state, cutoff)?;
        let exact = FockDensity::from_dyads(&apply_damping(&state, 1.0)?, cutoff)?;
        let coarse = integrate_master_equation(&rho0, 1.0, 10)?.max_abs_diff(&exact);
        let fine = integrate_master_equation(&rho0, 1.0, 20)?.max_abs_diff(&exact);
        Ok((8.0 * fine / coarse, format!("defect {coarse:.3e} at 10 steps, {fine:.3e} at 20 steps")))
    })
}

pub fn run_check(name: &str, opts: &SuiteOptions) -> Result<OracleCheck> {
    if let Some(d) = opts.cutoff {
        if d > MAX_ORACLE_DIM {
            return Err(Error::InvalidArgument(format!(
                "cutoff {d} exceeds the memory budget (at most {MAX_ORACLE_DIM})"
            )));
        }
    }
    let ctx = Ctx { cutoff: opts.cutoff };
    match name {
        "coherent-overlap" => check_coherent_overlap(&ctx),
        "coherent-photon-number" => check_coherent_photons(&ctx),
        "bs-vacuum" => check_bs_vacuum(&ctx),
        "bs-unitarity" => check_bs_unitarity(&ctx),
        "bs-number-conservation" => check_bs_number(&ctx),
        "bs-amplitude-map" => check_bs_amplitudes(&ctx),
        "trace-preservation" => check_trace(&ctx),
        "damping-semigroup" => check_semigroup(&ctx),
        "photon-decay" => check_photon_decay(&ctx),
        "static-moments" => check_static_moments(&ctx),
        "damped-variance" => check_damped_variance(&ctx),
        "dyad-fock-agreement" => check_dyad_fock(&ctx),
        "positivity" => check_positivity(&ctx),
        RK4_ORDER_CHECK => check_rk4_order(&ctx),
        other => Err(Error::InvalidArgument(format!("unknown oracle check {other:?}"))),
    }
}

/// Runs the selected check, or the default suite plus the RK4 order check.
pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<OracleCheck>> {
    match &opts.only {
        Some(name) => Ok(vec![run_check(name, opts)?]),
        None => CHECK_NAMES.iter().copied().chain([RK4_ORDER_CHECK]).map(|name| run_check(name, opts)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn only(name: &str, cutoff: Option<usize>) -> SuiteOptions {
        SuiteOptions { cutoff, only: Some(name.to_string()) }
    }

    #[test]
    fn cheap_checks_pass() {
        for name in [
            "coherent-overlap",
            "coherent-photon-number",
            "bs-vacuum",
            "bs-unitarity",
            "bs-number-conservation",
            "bs-amplitude-map",
            "trace-preservation",
            "damping-semigroup",
            "photon-decay",
            "positivity",
            RK4_ORDER_CHECK,
        ] {
            let r = run_suite(&only(name, None)).unwrap();
            assert_eq!(r.len(), 1);
            assert!(r[0].passed, "{r:?}");
            assert_eq!(r[0].name, name);
        }
    }

    #[test]
    fn tiny_cutoff_fails_cleanly() {
        let r = run_check("coherent-overlap", &SuiteOptions { cutoff: Some(4), only: None }).unwrap();
        assert!(!r.passed);
        assert!(r.detail.contains("cutoff too small"), "{}", r.detail);
        assert_eq!(r.dim, 4);
    }

    #[test]
    fn bad_requests() {
        assert!(run_check("nope", &SuiteOptions::default()).is_err());
        assert!(run_check("bs-vacuum", &SuiteOptions { cutoff: Some(MAX_ORACLE_DIM + 1), only: None }).is_err());
        assert!(run_check("bs-vacuum", &SuiteOptions { cutoff: Some(1), only: None }).is_err());
    }
}
