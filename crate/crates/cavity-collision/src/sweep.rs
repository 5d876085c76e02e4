//! Sweep orchestration: the detuning-parameter sweep (analytic vs. full
//! numeric probabilities), the Bell-signal phase scan, and the parameter
//! report, all emitted as CSV with a `#`-prefixed header block.

use rayon::prelude::*;
use std::fmt::Write as _;

use crate::analytic::{
    cavity_angle_eq3, cavity_angle_eq4, delta_from_eta, eta_for_angle, eta_from_delta,
    free_space_angle, perturbative_probabilities,
};
use crate::config::RunConfig;
use crate::dynamics::{collide_thermal, CollisionOutcome};
use crate::error::Result;
use crate::measurement::{bell_scan, phase_grid, BellCurve, DetectionModel};
use crate::model::{joint_probabilities, v0_effective, PhysicalSetup};

/// One row of the detuning sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub eta: f64,
    pub delta_a_hz: f64,
    pub theta_c_eq4: f64,
    pub p_eg_analytic: f64,
    pub p_ge_analytic: f64,
    pub p_ee_num: f64,
    pub p_eg_num: f64,
    pub p_ge_num: f64,
    pub p_gg_num: f64,
    pub norm_drift: f64,
}

/// Sweep output: successful rows in eta order plus per-point failures.
#[derive(Debug, Clone)]
pub struct Fig2Output {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<(f64, String)>,
}

/// Log-spaced eta grid from the config, with the optional eta = 0 reference
/// point prepended.
pub fn eta_grid(cfg: &RunConfig) -> Vec<f64> {
    let mut grid = Vec::with_capacity(cfg.n_points + 1);
    if cfg.include_eta_zero_reference {
        grid.push(0.0);
    }
    if cfg.n_points == 1 {
        grid.push(cfg.eta_min);
    } else {
        let ratio = cfg.eta_max / cfg.eta_min;
        for i in 0..cfg.n_points {
            grid.push(cfg.eta_min * ratio.powf(i as f64 / (cfg.n_points - 1) as f64));
        }
    }
    grid
}

fn detection_scale_of(cfg: &RunConfig) -> f64 {
    match cfg.detection_model() {
        DetectionModel::Scale(s) => s,
        DetectionModel::Confusion { .. } => 1.0,
    }
}

/// One sweep point: analytic probabilities from the closed-form angle, and
/// the thermal-averaged numerical probabilities. `eta = 0` runs with the
/// coupling switched off (the zero-collision reference).
pub fn fig2_point(cfg: &RunConfig, setup: &PhysicalSetup, eta: f64) -> Result<SweepRow> {
    let v0 = v0_effective(cfg.v1_m_per_s, cfg.v2_m_per_s)?;
    let scale = detection_scale_of(cfg);
    let (delta_a, theta);
    let mut scenario;
    if eta == 0.0 {
        // decoupled reference: detuning irrelevant, coupling off
        delta_a = std::f64::consts::TAU * cfg.delta_a_hz;
        theta = cavity_angle_eq4(setup, 0.0, v0)?;
        scenario = cfg.scenario(setup, delta_a)?;
        scenario.coupling_scale = 0.0;
    } else {
        let pt = delta_from_eta(eta, setup)?;
        delta_a = pt.delta_a;
        theta = cavity_angle_eq4(setup, eta, v0)?;
        scenario = cfg.scenario(setup, delta_a)?;
    }
    let analytic = perturbative_probabilities(theta, scale)?;
    let out: CollisionOutcome = collide_thermal(&scenario, setup)?;
    let p = crate::measurement::apply_detection(
        &joint_probabilities(&out.rho),
        &cfg.detection_model(),
    );
    Ok(SweepRow {
        eta,
        delta_a_hz: delta_a / std::f64::consts::TAU,
        theta_c_eq4: theta.theta,
        p_eg_analytic: analytic.p_eg,
        p_ge_analytic: analytic.p_ge,
        p_ee_num: p.p_ee,
        p_eg_num: p.p_eg,
        p_ge_num: p.p_ge,
        p_gg_num: p.p_gg,
        norm_drift: out.norm_drift,
    })
}

/// Run the full detuning sweep. Points are computed in parallel and gathered
/// in eta order; accuracy failures are collected per row and the run
/// continues.
pub fn run_fig2(cfg: &RunConfig) -> Result<Fig2Output> {
    let setup = cfg.setup()?;
    let grid = eta_grid(cfg);
    let results: Vec<(f64, Result<SweepRow>)> = grid
        .par_iter()
        .map(|&eta| (eta, fig2_point(cfg, &setup, eta)))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (eta, res) in results {
        match res {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((eta, e.to_string())),
        }
    }
    Ok(Fig2Output { rows, failures })
}

pub fn fig2_csv(cfg: &RunConfig, out: &Fig2Output) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# cavity-collision fig2 sweep");
    let _ = writeln!(s, "# config_hash = {}", cfg.hash());
    let _ = writeln!(
        s,
        "# columns: eta [1], delta_a [Hz], theta_c_eq4 [rad], probabilities [1], norm_drift [1]"
    );
    for (eta, msg) in &out.failures {
        let _ = writeln!(s, "# FAILED eta = {eta:.6e}: {msg}");
    }
    let _ = writeln!(
        s,
        "eta,delta_a_hz,theta_c_eq4,p_eg_analytic,p_ge_analytic,p_ee_num,p_eg_num,p_ge_num,p_gg_num,norm_drift"
    );
    for r in &out.rows {
        let _ = writeln!(
            s,
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.3e}",
            r.eta,
            r.delta_a_hz,
            r.theta_c_eq4,
            r.p_eg_analytic,
            r.p_ge_analytic,
            r.p_ee_num,
            r.p_eg_num,
            r.p_ge_num,
            r.p_gg_num,
            r.norm_drift
        );
    }
    s
}

/// Bell scan result with the operating point that produced it.
#[derive(Debug, Clone)]
pub struct Fig3Output {
    pub eta: f64,
    pub delta_a_hz: f64,
    pub curve: BellCurve,
    pub norm_drift: f64,
}

/// Collision at the eta realizing `theta_c = pi/4` for the Bell velocities,
/// followed by the analysis-pulse phase scan over `[0, 4 pi]`.
pub fn run_fig3(cfg: &RunConfig) -> Result<Fig3Output> {
    let setup = cfg.setup()?;
    let v0 = v0_effective(cfg.bell_v1_m_per_s, cfg.bell_v2_m_per_s)?;
    let eta = eta_for_angle(&setup, std::f64::consts::FRAC_PI_4, v0)?;
    let pt = delta_from_eta(eta, &setup)?;
    let scenario = cfg.scenario_at(&setup, cfg.bell_v1_m_per_s, cfg.bell_v2_m_per_s, pt.delta_a)?;
    let out = collide_thermal(&scenario, &setup)?;
    let phases = phase_grid(0.0, 4.0 * std::f64::consts::PI, cfg.bell_n_phases);
    let curve = bell_scan(&out.rho, &phases, &cfg.detection_model());
    Ok(Fig3Output {
        eta,
        delta_a_hz: pt.delta_a / std::f64::consts::TAU,
        curve,
        norm_drift: out.norm_drift,
    })
}

pub fn fig3_csv(cfg: &RunConfig, out: &Fig3Output) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# cavity-collision fig3 Bell scan");
    let _ = writeln!(s, "# config_hash = {}", cfg.hash());
    let _ = writeln!(s, "# eta = {:.8e}, delta_a = {:.8e} Hz", out.eta, out.delta_a_hz);
    let _ = writeln!(
        s,
        "# contrast = {:.6}, offset = {:.6} rad, degenerate = {}",
        out.curve.contrast, out.curve.offset, out.curve.degenerate
    );
    let _ = writeln!(s, "# columns: phi [rad], correlator [1]");
    let _ = writeln!(s, "phi,correlator");
    for (phi, v) in out.curve.phases.iter().zip(out.curve.values.iter()) {
        let _ = writeln!(s, "{phi:.8e},{v:.8e}");
    }
    s
}

/// Parameter report: derived coupling chain, collision radii, and the
/// closed-form angle through both algebraic routes.
pub fn angle_report(cfg: &RunConfig) -> Result<String> {
    use std::f64::consts::TAU;
    let setup = cfg.setup()?;
    let v0 = v0_effective(cfg.v1_m_per_s, cfg.v2_m_per_s)?;
    let delta_a = TAU * cfg.delta_a_hz;
    let pt = eta_from_delta(delta_a, &setup)?;
    let th3 = cavity_angle_eq3(&setup, delta_a, v0)?;
    let th4 = cavity_angle_eq4(&setup, pt.eta, v0)?;
    let th_free = free_space_angle(cfg.n_principal, v0, 0.5e-3)?;
    let eta_pi4 = eta_for_angle(&setup, std::f64::consts::FRAC_PI_4, v0)?;

    let mut s = String::new();
    let _ = writeln!(s, "# cavity-collision parameter report");
    let _ = writeln!(s, "# config_hash = {}", cfg.hash());
    let _ = writeln!(s, "d_eg_cm = {:.6e}", setup.d_eg);
    let _ = writeln!(s, "e0_v_per_m = {:.6e}", setup.e0);
    let _ = writeln!(s, "omega_rabi_hz = {:.6e}", setup.omega_rabi / TAU);
    let _ = writeln!(s, "b_c_m = {:.6e}", setup.b_c());
    let _ = writeln!(s, "v0_m_per_s = {:.6e}", v0);
    let _ = writeln!(s, "delta_a_hz = {:.6e}", cfg.delta_a_hz);
    let _ = writeln!(s, "delta_b_hz = {:.6e}", pt.delta_b / TAU);
    let _ = writeln!(s, "eta = {:.6e}", pt.eta);
    let _ = writeln!(s, "theta_c_eq3_rad = {:.10e}", th3.theta);
    let _ = writeln!(s, "theta_c_eq4_rad = {:.10e}", th4.theta);
    let _ = writeln!(
        s,
        "eq3_eq4_rel_diff = {:.3e}",
        ((th3.theta - th4.theta) / th4.theta).abs()
    );
    let _ = writeln!(s, "theta_free_space_0p5mm_rad = {:.6e}", th_free.theta);
    let _ = writeln!(s, "eta_for_theta_pi4 = {:.6e}", eta_pi4);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.n_points = 3;
        cfg.eta_min = 1e5;
        cfg.eta_max = 4e5;
        cfg.nbar = 0.0;
        cfg.n_fock_mix = 0;
        cfg
    }

    #[test]
    fn eta_grid_shape() {
        let cfg = tiny_cfg();
        let grid = eta_grid(&cfg);
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[0], 0.0);
        assert!((grid[1] - 1e5).abs() < 1.0);
        assert!((grid[3] - 4e5).abs() < 1.0);
        assert!(grid[1] < grid[2] && grid[2] < grid[3]);
    }

    #[test]
    fn fig2_reference_row_matches_zero_collision() {
        let cfg = tiny_cfg();
        let setup = cfg.setup().unwrap();
        let row = fig2_point(&cfg, &setup, 0.0).unwrap();
        assert!((row.p_eg_analytic - 0.89).abs() < 1e-12);
        assert_eq!(row.p_ge_analytic, 0.0);
        assert!((row.p_eg_num - 0.89).abs() < 1e-6);
        assert!(row.p_ge_num < 1e-9);
    }

    #[test]
    fn fig2_sweep_rows_are_ordered_and_finite() {
        let cfg = tiny_cfg();
        let out = run_fig2(&cfg).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert_eq!(out.rows.len(), 4);
        for pair in out.rows.windows(2) {
            assert!(pair[0].eta < pair[1].eta);
        }
        for r in &out.rows {
            for x in [
                r.theta_c_eq4,
                r.p_eg_analytic,
                r.p_ge_analytic,
                r.p_ee_num,
                r.p_eg_num,
                r.p_ge_num,
                r.p_gg_num,
                r.norm_drift,
            ] {
                assert!(x.is_finite());
            }
            for p in [r.p_ee_num, r.p_eg_num, r.p_ge_num, r.p_gg_num] {
                assert!((-1e-9..=1.0 + 1e-9).contains(&p));
            }
        }
    }

    #[test]
    fn csv_has_header_block_and_hash() {
        let cfg = tiny_cfg();
        let out = run_fig2(&cfg).unwrap();
        let csv = fig2_csv(&cfg, &out);
        assert!(csv.starts_with("# cavity-collision fig2 sweep"));
        assert!(csv.contains(&cfg.hash()));
        let data_lines = csv.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(data_lines, 1 + out.rows.len());
    }

    #[test]
    fn angle_report_contains_pinned_values() {
        let cfg = RunConfig::default();
        let report = angle_report(&cfg).unwrap();
        assert!(report.contains("e0_v_per_m = 1.568146e-3"));
        assert!(report.contains("b_c_m = 8.113290e-3"));
        assert!(report.contains("eq3_eq4_rel_diff"));
    }
}
