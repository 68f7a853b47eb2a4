// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

use dampest::estimation::{empirical_mse, RunConfig};
use dampest::fock::{fock_moments, fock_probe, integrate_in_place, probe_cutoff, FockCutoff};
use dampest::observables::{mean_var_p, mean_var_x};
use dampest::optimizer::minimize_mse;
use dampest::probes::{make_probe, photon_number};
use dampest::state::apply_damping;
use dampest::{ProbeClass, Spec, Spec32};

#[test]
fn displaced_probe_matches_fock_evolution() {
    let spec = Spec::new(ProbeClass::I, 1.2, 1.5).unwrap();
    let cutoff = FockCutoff::new(probe_cutoff(&spec).dim() + 6).unwrap();
    let mut rho = fock_probe(&spec, cutoff).unwrap();
    integrate_in_place(&mut rho, 0.4, 80).unwrap();
    let f = fock_moments(&rho);
    let dyad = apply_damping(&make_probe(&spec), 0.4).unwrap();
    let (mx, vx) = mean_var_x(&dyad).unwrap();
    let (mp, vp) = mean_var_p(&dyad).unwrap();
    for (a, b) in [(f.mean_x, mx), (f.var_x, vx), (f.mean_p, mp), (f.var_p, vp)] {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn single_precision_agrees_with_double() {
    let (_, v64) = mean_var_x(&make_probe(&Spec::new(ProbeClass::II, 1.6, 0.7).unwrap())).unwrap();
    let (_, v32) = mean_var_x(&make_probe(&Spec32::new(ProbeClass::II, 1.6, 0.7).unwrap())).unwrap();
    assert!((v64 - v32 as f64).abs() < 1e-5);
}

#[test]
fn optimum_spends_budget_and_simulates() {
    let best = minimize_mse(ProbeClass::II, 12.0, 0.01).unwrap();
    let spec = best.spec();
    assert!((best.n_meas_star as f64 * photon_number(&spec) - 12.0).abs() < 1e-9);
    let config = RunConfig::new(spec, 0.01, 12.0, best.n_meas_star, 4000, 11).unwrap();
    let report = empirical_mse(&config).unwrap();
    assert_eq!(report.agrees_within(4.0), Some(true), "{report:?}");
}
