//! One-parameter sweeps, run concurrently and reassembled in order.

use std::f64::consts::PI;

use rayon::prelude::*;

use photon_store::{
    design_drive, design_drive_markovian, simulate_nonmarkovian, storage_metrics, InitialState,
    TimeGrid,
};

use crate::config::{ScenarioConfig, SweepParam};
use crate::error::{CliError, Result};
use crate::output::{Summary, Table};
use crate::run::sup_diff;

/// Where `|Omega|` falls below this fraction of its peak the phase is
/// undefined and mirror checks skip the node.
pub const PHASE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PointSeries {
    pub rho_ee: Vec<f64>,
    pub rho_fee: Vec<f64>,
    pub abs_omega: Vec<f64>,
    pub abs_omega_f: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_f: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PointMetrics {
    pub big_gamma: f64,
    pub delta1: f64,
    pub sup_rho_diff: f64,
    pub min_rho_ee: f64,
    pub max_abs_omega: f64,
    pub reflected_matched: f64,
}

pub type PointOutcome = std::result::Result<(PointMetrics, PointSeries), CliError>;

fn run_point(cfg: &ScenarioConfig, grid: &TimeGrid, value: f64) -> PointOutcome {
    let params = cfg.params_at(value)?;
    let pulse = cfg.build_pulse()?;
    let d = design_drive(&*pulse, &params, grid)?;
    let f = design_drive_markovian(&*pulse, &params, grid)?;
    let sim = simulate_nonmarkovian(
        &*pulse,
        &d.drive(),
        &params,
        &InitialState::with_offset(params.rho_offset)?,
        grid,
    )?;
    let metrics = PointMetrics {
        big_gamma: params.big_gamma,
        delta1: params.delta1,
        sup_rho_diff: sup_diff(&d.rho_ee, &f.rho_ee),
        min_rho_ee: d.rho_ee.iter().copied().fold(f64::INFINITY, f64::min),
        max_abs_omega: d.omega_modulus.iter().copied().fold(0.0, f64::max),
        reflected_matched: storage_metrics(&sim).reflected,
    };
    let series = PointSeries {
        rho_ee: d.rho_ee,
        rho_fee: f.rho_ee,
        abs_omega: d.omega_modulus,
        abs_omega_f: f.omega_modulus,
        theta: d.omega_phase_principal,
        theta_f: f.omega_phase_principal,
    };
    Ok((metrics, series))
}

/// Runs every point, at most `workers` at a time, and returns outcomes in
/// the order of `values`.
pub fn sweep_points(
    cfg: &ScenarioConfig,
    grid: &TimeGrid,
    values: &[f64],
    workers: Option<usize>,
) -> Vec<PointOutcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| {
            values
                .par_iter()
                .map(|&v| run_point(cfg, grid, v))
                .collect()
        }),
        // no threads available: fall back to running in order
        Err(_) => values.iter().map(|&v| run_point(cfg, grid, v)).collect(),
    }
}

/// `max |a + b|` over nodes where both drives are resolved, with the sum
/// taken modulo `2 pi`.
pub fn mirror_residual(theta_a: &[f64], theta_b: &[f64], mod_a: &[f64], mod_b: &[f64]) -> f64 {
    let floor_a = PHASE_FLOOR * mod_a.iter().copied().fold(0.0, f64::max);
    let floor_b = PHASE_FLOOR * mod_b.iter().copied().fold(0.0, f64::max);
    (0..theta_a.len())
        .filter(|&i| mod_a[i] > floor_a && mod_b[i] > floor_b)
        .map(|i| {
            let s = theta_a[i] + theta_b[i];
            (s - 2.0 * PI * (s / (2.0 * PI)).round()).abs()
        })
        .fold(0.0, f64::max)
}

/// Aggregate table (one row per value), long-form series table, and
/// summary entries for a sweep.
pub fn run_sweep(
    cfg: &ScenarioConfig,
    grid: &TimeGrid,
    summary: &mut Summary,
) -> Result<(Table, Table)> {
    let Some(sweep) = &cfg.sweep else {
        return Err(crate::error::ConfigError::single(
            0,
            "sweep.param",
            "mode = sweep needs a sweep range",
        )
        .into());
    };
    let values = &sweep.values;
    let outcomes = sweep_points(cfg, grid, values, cfg.workers);

    let mirror = |i: usize, pick: fn(&PointSeries) -> (&[f64], &[f64])| -> f64 {
        if sweep.param != SweepParam::Delta2 {
            return f64::NAN;
        }
        let Some(j) = values.iter().position(|v| *v == -values[i]) else {
            return f64::NAN;
        };
        match (&outcomes[i], &outcomes[j]) {
            (Ok((_, a)), Ok((_, b))) => {
                let (ta, ma) = pick(a);
                let (tb, mb) = pick(b);
                mirror_residual(ta, tb, ma, mb)
            }
            _ => f64::NAN,
        }
    };

    let n = values.len();
    let mut cols: Vec<Vec<f64>> = (0..10).map(|_| Vec::with_capacity(n)).collect();
    let mut failed = 0;
    for (i, out) in outcomes.iter().enumerate() {
        let row = match out {
            Ok((m, _)) => [
                0.0,
                m.big_gamma,
                m.delta1,
                m.sup_rho_diff,
                m.min_rho_ee,
                m.max_abs_omega,
                m.reflected_matched,
                mirror(i, |s| (&s.theta, &s.abs_omega)),
                mirror(i, |s| (&s.theta_f, &s.abs_omega_f)),
            ],
            Err(e) => {
                failed += 1;
                summary.text(
                    &format!("point_{}_error", i + 1),
                    format!("{}: {e}", e.tag()),
                );
                let mut r = [f64::NAN; 9];
                r[0] = e.exit_code() as f64;
                r
            }
        };
        cols[0].push(values[i]);
        for (c, v) in cols[1..].iter_mut().zip(row) {
            c.push(v);
        }
    }
    summary
        .text("points", n.to_string())
        .text("failed_points", failed.to_string());

    let names = [
        sweep.param.key(),
        "status",
        "big_gamma",
        "delta1",
        "sup_rho_diff",
        "min_rho_ee",
        "max_abs_omega",
        "reflected_matched",
        "theta_mirror_residual",
        "theta_f_mirror_residual",
    ];
    let mut table = Table::new();
    for (name, c) in names.iter().zip(cols) {
        table = table.col(name, c);
    }

    let times = grid.times();
    let mut long: Vec<Vec<f64>> = vec![Vec::new(); 8];
    for (value, out) in values.iter().zip(&outcomes) {
        let Ok((_, s)) = out else { continue };
        for (k, t) in times.iter().enumerate() {
            let row = [
                *value,
                *t,
                s.rho_ee[k],
                s.rho_fee[k],
                s.abs_omega[k],
                s.abs_omega_f[k],
                s.theta[k],
                s.theta_f[k],
            ];
            for (c, v) in long.iter_mut().zip(row) {
                c.push(v);
            }
        }
    }
    let long_names = [
        sweep.param.key(),
        "t",
        "rho_ee",
        "rho_fee",
        "abs_omega",
        "abs_omega_f",
        "theta",
        "theta_f",
    ];
    let mut series = Table::new();
    for (name, c) in long_names.iter().zip(long) {
        series = series.col(name, c);
    }
    Ok((table, series))
}
