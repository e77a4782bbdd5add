//! Runs one scenario end to end and writes its files.

use std::path::PathBuf;

use photon_store::dark_state::{adiabatic_simulate, adiabaticity_margin, dark_comparison};
use photon_store::dynamics::bath::run_discrete_bath;
use photon_store::dynamics::excitation_budget;
use photon_store::pulse_design::{envelope_landmarks, sign_changes, sign_windows};
use photon_store::{
    adiabatic_design, design_drive, design_drive_markovian, simulate_markovian,
    simulate_nonmarkovian, storage_metrics, BathDiscretization, DesignResult, InitialState,
    InputPulse, PhysicalParams, TimeGrid,
};

use crate::config::{Mode, PulseSource, ScenarioConfig};
use crate::error::Result;
use crate::output::{fmt_num, write_summary, write_table, Summary, Table, SERIES_FILE, SWEEP_FILE};
use crate::sweep::run_sweep;

/// Everything a scenario produces, before it touches the disk.
#[derive(Debug, Clone)]
pub struct Report {
    /// File name and contents of each CSV.
    pub tables: Vec<(&'static str, Table)>,
    pub summary: Summary,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.0 == name).map(|t| &t.1)
    }

    pub fn series(&self) -> Option<&Table> {
        self.table(SERIES_FILE)
    }

    pub fn sweep(&self) -> Option<&Table> {
        self.table(SWEEP_FILE)
    }
}

/// Computes a scenario and writes its CSV files and summary to
/// `cfg.output`. Nothing is written if any step fails.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(Report, Vec<PathBuf>)> {
    let report = compute(cfg)?;
    let mut written = Vec::new();
    for (name, table) in &report.tables {
        written.push(write_table(&cfg.output, name, table)?);
    }
    written.push(write_summary(&cfg.output, &report.summary)?);
    Ok((report, written))
}

/// Computes a scenario without writing anything.
pub fn compute(cfg: &ScenarioConfig) -> Result<Report> {
    let grid = cfg.grid()?;
    let pulse = cfg.build_pulse()?;
    let mut summary = echo_config(cfg, &grid);
    let series = match cfg.mode {
        Mode::Design => design_mode(&*pulse, &cfg.params, &grid, &mut summary)?,
        Mode::Simulate => simulate_mode(&*pulse, &cfg.params, &grid, &mut summary)?,
        Mode::Markovian => markovian_mode(&*pulse, &cfg.params, &grid, &mut summary)?,
        Mode::Oracle => oracle_mode(cfg, &*pulse, &grid, &mut summary)?,
        Mode::Dark => dark_mode(&*pulse, &cfg.params, &grid, &mut summary)?,
        Mode::Sweep => {
            let (table, series) = run_sweep(cfg, &grid, &mut summary)?;
            return Ok(Report {
                tables: vec![(SWEEP_FILE, table), (SERIES_FILE, series)],
                summary,
            });
        }
    };
    Ok(Report {
        tables: vec![(SERIES_FILE, series)],
        summary,
    })
}

/// Every effective input, so the outputs describe themselves.
fn echo_config(cfg: &ScenarioConfig, grid: &TimeGrid) -> Summary {
    let p = &cfg.params;
    let mut s = Summary::new();
    s.text("mode", cfg.mode.as_str())
        .text("preset", cfg.preset.map_or("none", |p| p.tag()));
    let overrides = if cfg.preset_overrides.is_empty() {
        "none".to_string()
    } else {
        cfg.preset_overrides.join(",")
    };
    s.text("preset_overrides", overrides)
        .num("g_cav", p.g_cav)
        .num("gamma_L", p.gamma_l)
        .num("delta1", p.delta1)
        .num("delta2", p.delta2)
        .num("bandwidth_w", p.bandwidth_w)
        .num("big_gamma", p.big_gamma)
        .text(
            "big_gamma_source",
            if cfg.derive_gamma {
                "equilibrium"
            } else {
                "config"
            },
        )
        .num("rho_offset", p.rho_offset);
    match &cfg.pulse {
        PulseSource::Builtin => s.text("pulse", photon_store::DoubleLobePulse::NAME),
        PulseSource::Sampled { path, times, .. } => s
            .text("pulse", path.display().to_string())
            .text("pulse_samples", times.len().to_string()),
    };
    s.num("pulse_duration", p.pulse_duration)
        .num("grid.dt", grid.dt())
        .num("grid.span", grid.end())
        .text("grid.steps", grid.steps().to_string());
    if cfg.mode == Mode::Oracle {
        s.text("oracle.n_modes", cfg.oracle.n_modes.to_string())
            .num("oracle.band", cfg.oracle.band);
    }
    if let Some(sw) = &cfg.sweep {
        s.text("sweep.param", sw.param.key())
            .list("sweep.values", &sw.values)
            .flag("sweep.link_delta1", sw.link_delta1);
    }
    s
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Maximal stretches `(start, end)` over which `series` decreases by more
/// than `1e-9` of its peak.
pub fn decreasing_intervals(series: &[f64], grid: &TimeGrid) -> Vec<(f64, f64)> {
    let tol = 1e-9 * series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < series.len() {
        if series[i + 1] < series[i] {
            let start = i;
            while i + 1 < series.len() && series[i + 1] < series[i] {
                i += 1;
            }
            if series[start] - series[i] > tol {
                out.push((grid.t(start), grid.t(i)));
            }
        } else {
            i += 1;
        }
    }
    out
}

/// Sign of the real drive on the stretches between envelope zeros and
/// maxima.
fn regime_summary(prefix: &str, omega: &[f64], design: &DesignResult, summary: &mut Summary) {
    let marks = envelope_landmarks(&design.phi_in, &design.grid);
    let windows = sign_windows(omega, &design.grid, &marks, 0.0);
    summary
        .list(&format!("{prefix}envelope_landmarks"), &marks)
        .list(
            &format!("{prefix}omega_sign_changes"),
            &sign_changes(omega, &design.grid),
        )
        .text(&format!("{prefix}regime_count"), windows.len().to_string());
    for (k, w) in windows.iter().enumerate() {
        let sign = if w.strictly_negative() {
            "negative"
        } else if w.strictly_positive() {
            "positive"
        } else {
            "mixed"
        };
        let key = format!("{prefix}regime_{}", k + 1);
        summary
            .text(
                &key,
                format!("{},{},{sign}", fmt_num(w.start), fmt_num(w.end)),
            )
            .num(&format!("{key}_negative_fraction"), w.negative_fraction);
    }
}

fn design_columns(d: &DesignResult) -> Table {
    Table::new()
        .col("t", d.grid.times())
        .col("phi_in", d.phi_in.clone())
        .col("G", d.g.clone())
        .col("x_tilde", d.x_tilde.clone())
        .col("rho_ee", d.rho_ee.clone())
        .col("alpha", d.alpha.clone())
        .col("beta", d.beta.clone())
        .col("abs_omega", d.omega_modulus.clone())
        .col("theta", d.omega_phase.clone())
}

fn design_summary(d: &DesignResult, summary: &mut Summary) {
    let min_rho = d.rho_ee.iter().copied().fold(f64::INFINITY, f64::min);
    let max_omega = d.omega_modulus.iter().copied().fold(0.0, f64::max);
    let residual = (d.g_dot[0] - d.drive_n[0]).abs() / d.g_dot[0].abs();
    summary
        .num("equilibrium_residual", residual)
        .num("min_rho_ee", min_rho)
        .num("final_rho_ee", *d.rho_ee.last().unwrap())
        .num("max_abs_omega", max_omega);
}

fn design_mode(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
    summary: &mut Summary,
) -> Result<Table> {
    let d = design_drive(pulse, params, grid)?;
    design_summary(&d, summary);
    regime_summary("", &d.alpha, &d, summary);
    Ok(design_columns(&d))
}

fn simulate_mode(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
    summary: &mut Summary,
) -> Result<Table> {
    let d = design_drive(pulse, params, grid)?;
    let drive = d.drive();
    let matched = simulate_nonmarkovian(
        pulse,
        &drive,
        params,
        &InitialState::with_offset(params.rho_offset)?,
        grid,
    )?;
    let mismatched = simulate_nonmarkovian(pulse, &drive, params, &InitialState::empty(), grid)?;
    let m = storage_metrics(&matched);
    let mm = storage_metrics(&mismatched);
    let budget = excitation_budget(&matched, params);
    let drift = budget
        .iter()
        .map(|b| (b - budget[0]).abs())
        .fold(0.0, f64::max);
    let rho_sim = matched.rho_ee();
    design_summary(&d, summary);
    summary
        .num("reflected_matched", m.reflected)
        .num("reflected_mismatched", mm.reflected)
        .num("final_rho_ee_sim", m.final_rho_ee)
        .num("final_cavity_sim", m.final_cavity)
        .num("peak_upper_sim", m.peak_upper)
        .num("final_rho_ee_mismatched", mm.final_rho_ee)
        .num("sup_rho_design_vs_sim", sup_diff(&d.rho_ee, &rho_sim))
        .num("budget_drift", drift);
    Ok(design_columns(&d)
        .col("rho_ee_sim", rho_sim)
        .col("re_phi_out", matched.phi_out.iter().map(|p| p.re).collect())
        .col("im_phi_out", matched.phi_out.iter().map(|p| p.im).collect())
        .col(
            "abs_phi_out_sq",
            matched.phi_out.iter().map(|p| p.norm_sqr()).collect(),
        )
        .col(
            "abs_phi_out_sq_mismatched",
            mismatched.phi_out.iter().map(|p| p.norm_sqr()).collect(),
        ))
}

fn markovian_mode(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
    summary: &mut Summary,
) -> Result<Table> {
    let d = design_drive(pulse, params, grid)?;
    let f = design_drive_markovian(pulse, params, grid)?;
    let sim = simulate_markovian(
        pulse,
        &f.drive(),
        params,
        &InitialState::with_offset(params.rho_offset)?,
        grid,
    )?;
    let backflow = decreasing_intervals(&d.rho_ee, grid);
    let backflow_f = decreasing_intervals(&f.rho_ee, grid);
    design_summary(&d, summary);
    summary
        .num("sup_rho_diff", sup_diff(&d.rho_ee, &f.rho_ee))
        .num(
            "sup_abs_omega_diff",
            sup_diff(&d.omega_modulus, &f.omega_modulus),
        )
        .flag("backflow_detected", !backflow.is_empty())
        .text("backflow_intervals", backflow.len().to_string())
        .flag("backflow_detected_markovian", !backflow_f.is_empty())
        .num(
            "min_rho_fee",
            f.rho_ee.iter().copied().fold(f64::INFINITY, f64::min),
        )
        .num("reflected_markovian", storage_metrics(&sim).reflected);
    regime_summary("", &d.alpha, &d, summary);
    regime_summary("markovian_", &f.alpha, &f, summary);
    Ok(design_columns(&d)
        .col("rho_fee", f.rho_ee.clone())
        .col("alpha_f", f.alpha.clone())
        .col("beta_f", f.beta.clone())
        .col("abs_omega_f", f.omega_modulus.clone())
        .col("theta_f", f.omega_phase.clone()))
}

fn oracle_mode(
    cfg: &ScenarioConfig,
    pulse: &dyn InputPulse,
    grid: &TimeGrid,
    summary: &mut Summary,
) -> Result<Table> {
    let params = &cfg.params;
    let d = design_drive(pulse, params, grid)?;
    let drive = d.drive();
    let init = InitialState::with_offset(params.rho_offset)?;
    let reduced = simulate_nonmarkovian(pulse, &drive, params, &init, grid)?;
    let bath = BathDiscretization::new(&params.spectral(), cfg.oracle.n_modes, cfg.oracle.band)?;
    let run = run_discrete_bath(pulse, &drive, params, &init, grid, &bath)?;
    let oracle = &run.trajectory;
    let g_diff: Vec<f64> = reduced
        .g
        .iter()
        .zip(&oracle.g)
        .map(|(a, b)| (a - b).norm())
        .collect();
    let e_diff = sup_diff(&reduced.rho_ee(), &oracle.rho_ee());
    let norm = run.total_norm();
    let drift = norm.iter().map(|v| (v - norm[0]).abs()).fold(0.0, f64::max);
    summary
        .num("sup_diff_G", g_diff.iter().copied().fold(0.0, f64::max))
        .num("sup_diff_rho_ee", e_diff)
        .num("captured", run.captured)
        .num("mode_spacing", bath.spacing())
        .num("norm_drift", drift)
        .num("reflected_reduced", storage_metrics(&reduced).reflected)
        .num("reflected_oracle", storage_metrics(oracle).reflected);
    Ok(Table::new()
        .col("t", grid.times())
        .col("phi_in", reduced.phi_in.clone())
        .col("re_G", reduced.g.iter().map(|g| g.re).collect())
        .col("im_G", reduced.g.iter().map(|g| g.im).collect())
        .col("re_G_oracle", oracle.g.iter().map(|g| g.re).collect())
        .col("im_G_oracle", oracle.g.iter().map(|g| g.im).collect())
        .col("abs_G_diff", g_diff)
        .col("rho_ee", reduced.rho_ee())
        .col("rho_ee_oracle", oracle.rho_ee())
        .col(
            "abs_phi_out_sq",
            reduced.phi_out.iter().map(|p| p.norm_sqr()).collect(),
        )
        .col(
            "abs_phi_out_sq_oracle",
            oracle.phi_out.iter().map(|p| p.norm_sqr()).collect(),
        ))
}

fn dark_mode(
    pulse: &dyn InputPulse,
    params: &PhysicalParams,
    grid: &TimeGrid,
    summary: &mut Summary,
) -> Result<Table> {
    let dark = adiabatic_design(pulse, params, grid)?;
    let run = adiabatic_simulate(pulse, &dark, params, grid)?;
    let exact = design_drive(pulse, params, grid)?;
    let cmp = dark_comparison(&dark, &exact, params)?;
    summary
        .num("sup_dark_diff", cmp.sup_diff)
        .num("omega_gap_at", cmp.omega_gap_at)
        .num("adiabaticity_margin", adiabaticity_margin(params))
        .num("conservation_drift", run.conservation_drift)
        .num("reflected_adiabatic", run.reflected)
        .num("sup_d1_design_vs_sim", sup_diff(&dark.d1, &run.d1))
        .num("final_d1_sq", *dark.d1_sq.last().unwrap());
    Ok(Table::new()
        .col("t", grid.times())
        .col("phi_in", exact.phi_in.clone())
        .col("G", dark.g.clone())
        .col("d1_sq", cmp.d1_sq)
        .col("d_dark_sq", cmp.d_dark_sq)
        .col("cos_phi", dark.cos_phi.clone())
        .col("omega_adiabatic", dark.omega_adiabatic.clone())
        .col("alpha", exact.alpha.clone())
        .col("rho_ee", exact.rho_ee.clone())
        .col(
            "abs_phi_out_sq",
            run.phi_out.iter().map(|p| p * p).collect(),
        ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decreasing_stretches() {
        let g = TimeGrid::new(6.0, 6).unwrap();
        let s = [0.0, 1.0, 2.0, 1.5, 1.0, 3.0, 2.9];
        assert_eq!(decreasing_intervals(&s, &g), vec![(2.0, 4.0), (5.0, 6.0)]);
        assert!(decreasing_intervals(&[0.0, 1.0, 2.0, 3.0], &g).is_empty());
    }
}
