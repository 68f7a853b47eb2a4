// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Subcommand bodies. Each returns data; argument parsing and I/O live in `main`.

use dampest::estimation::{empirical_mse, ErrorReport, RunConfig};
use dampest::observables::{mean_var_p, mean_var_x};
use dampest::optimizer::{improvement_curve, minimize_mse, solve_x0, OptimumRecord};
use dampest::oracle::{run_suite, OracleCheck, SuiteOptions};
use dampest::probes::{make_probe, ProbeClass, ProbeSpec};
use dampest::response::var_x_damped;
use dampest::Error;
use serde::Serialize;

use crate::table::{Cell, Table};

/// Largest κ for which the linearized estimator is trusted.
pub const LINEARIZATION_KAPPA: f64 = 0.05;
/// Default seed of `simulate`.
pub const DEFAULT_SEED: u64 = 20_260_101;
/// Rows allowed in a generated range.
pub const MAX_RANGE_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Rejected input; exit status 2.
    BadArgs(String),
    /// A computation or validation failed; exit status 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadArgs(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::BadArgs(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::InvalidKappa(_)
            | Error::InvalidProbe(_)
            | Error::InvalidGrid(_)
            | Error::InvalidMode(_) => CliError::BadArgs(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Inclusive arithmetic range `min, min + step, …, ≤ max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self, what: &str) -> CliResult<Vec<f64>> {
        let Range { min, max, step } = *self;
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(CliError::BadArgs(format!("{what} range must be finite")));
        }
        if !(step > 0.0) {
            return Err(CliError::BadArgs(format!("{what} step must be positive, got {step}")));
        }
        if max < min {
            return Err(CliError::BadArgs(format!("{what} range is empty: max {max} < min {min}")));
        }
        let cells = ((max - min) / step + 1e-9).floor();
        if cells >= MAX_RANGE_POINTS as f64 {
            return Err(CliError::BadArgs(format!("{what} range has more than {MAX_RANGE_POINTS} points")));
        }
        Ok((0..=cells as usize).map(|i| min + i as f64 * step).collect())
    }
}

/// `alpha, var_X, var_P_classI, var_P_classII` from the undamped, undisplaced probes.
pub fn variance_curve(alpha: Range) -> CliResult<Table> {
    let alphas = alpha.values("alpha")?;
    if alphas[0] < 0.0 {
        return Err(CliError::BadArgs("alpha must be non-negative".into()));
    }
    let mut table = Table::new(["alpha", "var_X", "var_P_classI", "var_P_classII"]);
    for a in alphas {
        let one = make_probe(&ProbeSpec::new(ProbeClass::I, a, 0.0)?);
        let two = make_probe(&ProbeSpec::new(ProbeClass::II, a, 0.0)?);
        let (_, var_x) = mean_var_x(&one)?;
        let (_, var_p1) = mean_var_p(&one)?;
        let (_, var_p2) = mean_var_p(&two)?;
        table.push(vec![a.into(), var_x.into(), var_p1.into(), var_p2.into()]);
    }
    Ok(table)
}

/// `kappa, var_I, var_II` at fixed `alpha`.
pub fn damping_curve(alpha: f64, kappa: Range) -> CliResult<Table> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(CliError::BadArgs(format!("alpha must be finite and non-negative, got {alpha}")));
    }
    let mut table = Table::new(["kappa", "var_I", "var_II"]);
    for k in kappa.values("kappa")? {
        let v1 = var_x_damped(ProbeClass::I, alpha, k)?;
        let v2 = var_x_damped(ProbeClass::II, alpha, k)?;
        table.push(vec![k.into(), v1.into(), v2.into()]);
    }
    Ok(table)
}

fn optimum_cells(r: &Option<OptimumRecord<f64>>) -> [Cell; 4] {
    match r {
        Some(r) => [r.alpha_star.into(), r.x0_star.into(), r.n_meas_star.into(), r.mse_star.into()],
        None => [Cell::Missing, Cell::Missing, Cell::Missing, Cell::Missing],
    }
}

/// Relative improvement per budget with the optimizer's arguments; infeasible rows are kept and flagged.
pub fn improvement(n_tot: Range, kappa: f64) -> CliResult<Table> {
    let budgets = n_tot.values("n_tot")?;
    if budgets[0] <= 0.0 {
        return Err(CliError::BadArgs("n_tot must be positive".into()));
    }
    let curve = improvement_curve(&budgets, kappa)?;
    let mut table = Table::new([
        "n_tot",
        "delta_I",
        "delta_II",
        "alpha_I",
        "x0_I",
        "n_meas_I",
        "mse_I",
        "alpha_II",
        "x0_II",
        "n_meas_II",
        "mse_II",
        "mse_III",
        "feasible",
    ]);
    for p in &curve {
        let mut row = vec![p.n_tot.into(), p.delta_i.into(), p.delta_ii.into()];
        row.extend(optimum_cells(&p.optimum_i));
        row.extend(optimum_cells(&p.optimum_ii));
        row.push(p.optimum_iii.map(|r| r.mse_star).into());
        row.push(p.is_feasible().into());
        table.push(row);
    }
    Ok(table)
}

/// Per-class optimum for each budget.
pub fn optimize(classes: &[ProbeClass], n_tot: Range, kappa: f64) -> CliResult<Table> {
    let budgets = n_tot.values("n_tot")?;
    if budgets[0] <= 0.0 {
        return Err(CliError::BadArgs("n_tot must be positive".into()));
    }
    let mut table = Table::new([
        "class",
        "n_tot",
        "kappa",
        "alpha_star",
        "x0_star",
        "n_meas_star",
        "mse_star",
        "mse_classical",
        "feasible",
    ]);
    for &class in classes {
        for &n in &budgets {
            let record = match minimize_mse(class, n, kappa) {
                Ok(r) => Some(r),
                Err(Error::Infeasible(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let mut row = vec![class.to_string().into(), n.into(), kappa.into()];
            let [a, x, m, e] = optimum_cells(&record);
            row.extend([a, x, m, e, (2.0 / n).into(), record.is_some().into()]);
            table.push(row);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub class: ProbeClass,
    pub n_tot: f64,
    pub kappa: f64,
    pub runs: usize,
    pub seed: u64,
    pub grid_points: usize,
    /// Superposition size; the class optimum when absent.
    pub alpha: Option<f64>,
    pub n_meas: Option<usize>,
    /// Displacement; solved from the budget when absent.
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOutcome {
    pub config: RunConfig<f64>,
    pub report: ErrorReport<f64>,
    /// `|empirical − analytic| < 3·stderr`; `None` for a single run.
    pub agrees_within_3_sigma: Option<bool>,
    pub warnings: Vec<String>,
}

impl SimulationOutcome {
    pub fn passed(&self) -> bool {
        self.agrees_within_3_sigma == Some(true)
    }

    pub fn to_table(&self) -> Table {
        let c = &self.config;
        let r = &self.report;
        let mut t = Table::new([
            "class",
            "alpha",
            "x0",
            "n_meas",
            "n_tot",
            "kappa",
            "runs",
            "seed",
            "analytic_mse",
            "empirical_mse",
            "empirical_stderr",
            "mean_estimate",
            "agrees_within_3_sigma",
        ]);
        t.push(vec![
            c.spec.class.to_string().into(),
            c.spec.alpha.into(),
            c.spec.x0.into(),
            c.n_meas.into(),
            c.n_tot.into(),
            c.kappa_true.into(),
            c.runs.into(),
            c.seed.into(),
            r.analytic_mse.into(),
            r.empirical_mse.into(),
            r.empirical_stderr.into(),
            r.mean_estimate.into(),
            self.agrees_within_3_sigma.into(),
        ]);
        t
    }
}

pub fn simulate(args: &SimulateArgs) -> CliResult<SimulationOutcome> {
    let mut warnings = Vec::new();
    if args.kappa > LINEARIZATION_KAPPA {
        warnings.push(format!(
            "kappa = {} exceeds the linearization regime (kappa <= {LINEARIZATION_KAPPA}); the analytic error is not reliable",
            args.kappa
        ));
    }
    let (alpha, n_meas) = match (args.class.is_superposition(), args.alpha, args.n_meas) {
        (false, _, n) => (0.0, n.unwrap_or(1)),
        (true, Some(a), n) => (a, n.unwrap_or(1)),
        (true, None, n) => {
            let best = minimize_mse(args.class, args.n_tot, args.kappa)?;
            (best.alpha_star, n.unwrap_or(best.n_meas_star))
        }
    };
    let x0 = match args.x0 {
        Some(x) => x,
        None => solve_x0(args.class, alpha, args.n_tot, n_meas).ok_or_else(|| {
            CliError::Failed(format!(
                "infeasible budget: n_tot = {} leaves no photons for the displacement with {n_meas} measurements",
                args.n_tot
            ))
        })?,
    };
    let spec = ProbeSpec::new(args.class, alpha, x0)?;
    let mut config = RunConfig::new(spec, args.kappa, args.n_tot, n_meas, args.runs, args.seed)?;
    config.grid_points = args.grid_points;
    let report = empirical_mse(&config)?;
    Ok(SimulationOutcome { config, report, agrees_within_3_sigma: report.agrees_within(3.0), warnings })
}

pub fn oracle_check(opts: &SuiteOptions) -> CliResult<Vec<OracleCheck>> {
    Ok(run_suite(opts)?)
}

pub fn oracle_table(checks: &[OracleCheck]) -> Table {
    let mut t = Table::new(["check", "passed", "deviation", "tolerance", "dim", "detail"]);
    for c in checks {
        let dev = if c.deviation.is_nan() { Cell::Missing } else { c.deviation.into() };
        t.push(vec![
            c.name.as_str().into(),
            c.passed.into(),
            dev,
            c.tolerance.into(),
            c.dim.into(),
            c.detail.as_str().into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range(min: f64, max: f64, step: f64) -> Range {
        Range { min, max, step }
    }

    #[test]
    fn ranges() {
        assert_eq!(range(0.0, 1.0, 0.25).values("x").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(range(0.0, 4.0, 0.01).values("x").unwrap().len(), 401);
        assert_eq!(range(2.0, 2.0, 1.0).values("x").unwrap(), vec![2.0]);
        assert!(matches!(range(0.0, 1.0, 0.0).values("x"), Err(CliError::BadArgs(_))));
        assert!(range(1.0, 0.0, 0.1).values("x").is_err());
        assert!(range(0.0, f64::NAN, 0.1).values("x").is_err());
        assert!(range(0.0, 1.0, 1e-9).values("x").is_err());
    }

    #[test]
    fn variance_curve_rows() {
        let t = variance_curve(range(0.0, 4.0, 0.01)).unwrap();
        assert_eq!(t.columns, ["alpha", "var_X", "var_P_classI", "var_P_classII"]);
        let first: Vec<f64> = t.rows[0].iter().map(|c| if let Cell::Num(v) = c { *v } else { f64::NAN }).collect();
        assert_eq!(first[0], 0.0);
        for v in &first[1..] {
            assert!((v - 0.5).abs() < 1e-14);
        }
        let var_x: Vec<f64> = t.numeric_column("var_X").unwrap().into_iter().map(Option::unwrap).collect();
        let (imin, vmin) =
            var_x.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
        let alpha_min = t.numeric_column("alpha").unwrap()[imin].unwrap();
        assert!((vmin - 0.22).abs() < 0.005);
        assert!((alpha_min - 1.6).abs() < 0.05);
        let p2 = t.numeric_column("var_P_classII").unwrap()[160].unwrap();
        assert!((p2 - 1.5).abs() < 0.01);
        assert!(variance_curve(range(-1.0, 1.0, 0.1)).is_err());
    }

    #[test]
    fn damping_curve_rows() {
        let t = damping_curve(1.6, range(0.0, 5.0, 0.5)).unwrap();
        let v1 = t.numeric_column("var_I").unwrap();
        let v2 = t.numeric_column("var_II").unwrap();
        assert!((v1[0].unwrap() - 0.22).abs() < 0.005 && v1[0] == v2[0]);
        for (a, b) in v1.iter().zip(&v2).skip(1) {
            assert!(a.unwrap() > b.unwrap() && a.unwrap() < 0.5);
        }
        let flat = damping_curve(0.0, range(0.0, 5.0, 0.5)).unwrap();
        assert!(flat.rows.iter().all(|r| r[1] == Cell::Num(0.5) && r[2] == Cell::Num(0.5)));
        assert!(damping_curve(-1.0, range(0.0, 1.0, 0.5)).is_err());
        assert!(matches!(damping_curve(1.6, range(-1.0, 1.0, 0.5)), Err(CliError::BadArgs(_))));
    }

    #[test]
    fn optimize_rows() {
        let t = optimize(&[ProbeClass::III, ProbeClass::I], range(20.0, 20.0, 1.0), 0.01).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0][6], Cell::Num(0.1));
        assert_eq!(t.rows[0][5], Cell::Int(1));
        assert_eq!(t.rows[1][5], Cell::Int(1));
    }

    #[test]
    fn simulate_classical() {
        let args = SimulateArgs {
            class: ProbeClass::IV,
            n_tot: 9.0,
            kappa: 0.01,
            runs: 2000,
            seed: 3,
            grid_points: 4096,
            alpha: None,
            n_meas: None,
            x0: None,
        };
        let out = simulate(&args).unwrap();
        assert!((out.report.analytic_mse - 2.0 / 9.0).abs() < 1e-15);
        assert!((out.config.spec.x0 - 3.0).abs() < 1e-15);
        assert!(out.warnings.is_empty());
        assert_eq!(out, simulate(&args).unwrap());

        let hot = simulate(&SimulateArgs { kappa: 0.5, runs: 10, ..args.clone() }).unwrap();
        assert_eq!(hot.warnings.len(), 1);
        let over = simulate(&SimulateArgs { n_meas: Some(2), x0: Some(3.0), ..args.clone() });
        assert!(matches!(over, Err(CliError::Failed(_))));
        let single = simulate(&SimulateArgs { runs: 1, ..args }).unwrap();
        assert_eq!(single.agrees_within_3_sigma, None);
        assert!(!single.passed());
    }
}
