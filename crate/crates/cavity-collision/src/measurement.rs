//! Ramsey analysis pulses, the detection-error model, and the Bell
//! correlator scan.
//!
//! A pi/2 pulse of phase phi maps energy detection onto detection of the
//! eigenstates of `sigma_phi = cos(phi) sigma_x + sin(phi) sigma_y`. The
//! pulse unitary convention is
//! `U(tip, phi) = exp(-i (tip/2) sigma_phi)`; any other fixed convention
//! only shifts the fitted phase offset of the Bell curve.

use num_complex::Complex64 as C64;

use crate::model::{joint_probabilities, AtomPairDensity, JointProbabilities};

/// A resonant analysis pulse applied to one atom after the collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyPulse {
    /// Rotation angle; pi/2 for the standard analysis pulse, pi for full
    /// e <-> g inversion.
    pub tip_angle: f64,
    /// Pulse phase; for atom 2 this is `phi = (omega - omega_r) tau`.
    pub phase: f64,
}

impl RamseyPulse {
    pub fn pi_over_2(phase: f64) -> Self {
        Self {
            tip_angle: std::f64::consts::FRAC_PI_2,
            phase,
        }
    }

    /// 2x2 unitary in the (e, g) basis.
    pub fn unitary(&self) -> [[C64; 2]; 2] {
        let c = (self.tip_angle / 2.0).cos();
        let s = (self.tip_angle / 2.0).sin();
        // -i sin * e^{-+i phase} on the off-diagonals
        [
            [
                C64::new(c, 0.0),
                C64::from_polar(s, -self.phase) * C64::new(0.0, -1.0),
            ],
            [
                C64::from_polar(s, self.phase) * C64::new(0.0, -1.0),
                C64::new(c, 0.0),
            ],
        ]
    }
}

/// Detection-error model applied to the joint probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionModel {
    /// Single multiplier on the two exchange channels `p_eg`, `p_ge`
    /// (the normalization used for the detuning-sweep comparison).
    Scale(f64),
    /// Per-atom 2x2 confusion matrix with symmetric misassignment
    /// probability; applied to all four channels, so probabilities keep
    /// summing to 1.
    Confusion { misassign: f64 },
}

impl DetectionModel {
    pub fn identity() -> Self {
        DetectionModel::Scale(1.0)
    }

    pub fn validate(&self) -> crate::error::Result<()> {
        let ok = match self {
            DetectionModel::Scale(s) => (0.0..=1.0).contains(s),
            DetectionModel::Confusion { misassign } => (0.0..=1.0).contains(misassign),
        };
        if ok {
            Ok(())
        } else {
            Err(crate::error::Error::InvalidParameter(
                "detection parameters must be in [0, 1]".into(),
            ))
        }
    }
}

/// Bell-correlator scan over the analysis-pulse phase.
#[derive(Debug, Clone, PartialEq)]
pub struct BellCurve {
    pub phases: Vec<f64>,
    pub values: Vec<f64>,
    /// Amplitude of the least-squares cosine fit.
    pub contrast: f64,
    /// Phase offset of the fit (radians).
    pub offset: f64,
    /// Set when the curve is flat and no meaningful fit exists.
    pub degenerate: bool,
}

/// `rho' = (U1 (x) U2) rho (U1 (x) U2)^dagger`.
pub fn apply_ramsey(
    rho: &AtomPairDensity,
    pulse1: &RamseyPulse,
    pulse2: &RamseyPulse,
) -> AtomPairDensity {
    let u1 = pulse1.unitary();
    let u2 = pulse2.unitary();
    // 4x4 tensor product, canonical order (s1, s2)
    let mut u = [[C64::new(0.0, 0.0); 4]; 4];
    for i1 in 0..2 {
        for i2 in 0..2 {
            for j1 in 0..2 {
                for j2 in 0..2 {
                    u[i1 * 2 + i2][j1 * 2 + j2] = u1[i1][j1] * u2[i2][j2];
                }
            }
        }
    }
    let mut tmp = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += u[i][k] * rho.rho[k][j];
            }
            tmp[i][j] = acc;
        }
    }
    let mut out = AtomPairDensity::zero();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += tmp[i][k] * u[j][k].conj();
            }
            out.rho[i][j] = acc;
        }
    }
    out
}

/// The transverse spin correlator reconstructed from joint detections after
/// the analysis pulses: `p_ee + p_gg - p_eg - p_ge` (e maps to +, g to -).
pub fn bell_correlator(rho_after_pulses: &AtomPairDensity) -> f64 {
    let p = joint_probabilities(rho_after_pulses);
    p.p_ee + p.p_gg - p.p_eg - p.p_ge
}

/// Detection-error transformation of the joint probabilities.
pub fn apply_detection(p: &JointProbabilities, model: &DetectionModel) -> JointProbabilities {
    match *model {
        DetectionModel::Scale(s) => JointProbabilities {
            p_ee: p.p_ee,
            p_eg: s * p.p_eg,
            p_ge: s * p.p_ge,
            p_gg: p.p_gg,
        },
        DetectionModel::Confusion { misassign } => {
            let m = misassign;
            // per-atom confusion matrix rows: P(detected | true)
            let conf = [[1.0 - m, m], [m, 1.0 - m]];
            let truth = [p.p_ee, p.p_eg, p.p_ge, p.p_gg];
            let mut out = [0.0; 4];
            for (d, o) in out.iter_mut().enumerate() {
                let (d1, d2) = (d / 2, d % 2);
                for (s, pt) in truth.iter().enumerate() {
                    let (s1, s2) = (s / 2, s % 2);
                    *o += conf[d1][s1] * conf[d2][s2] * pt;
                }
            }
            JointProbabilities {
                p_ee: out[0],
                p_eg: out[1],
                p_ge: out[2],
                p_gg: out[3],
            }
        }
    }
}

/// Sweep the atom-2 analysis phase (atom 1 fixed at phase 0, defining the
/// Ox axis), apply the detection model, and fit
/// `a cos(phi) + b sin(phi) + c` by least squares.
pub fn bell_scan(
    rho_collision: &AtomPairDensity,
    phases: &[f64],
    detection: &DetectionModel,
) -> BellCurve {
    assert!(!phases.is_empty(), "bell_scan needs a nonempty phase grid");
    let pulse1 = RamseyPulse::pi_over_2(0.0);
    let values: Vec<f64> = phases
        .iter()
        .map(|&phi| {
            let rho = apply_ramsey(rho_collision, &pulse1, &RamseyPulse::pi_over_2(phi));
            let p = apply_detection(&joint_probabilities(&rho), detection);
            p.p_ee + p.p_gg - p.p_eg - p.p_ge
        })
        .collect();

    // normal equations for the 3-parameter cosine fit
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&phi, &y) in phases.iter().zip(values.iter()) {
        let f = [phi.cos(), phi.sin(), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += f[i] * f[j];
            }
            rhs[i] += f[i] * y;
        }
    }
    let sol = solve3(m, rhs);
    let (contrast, offset, degenerate) = match sol {
        Some([a, b, _c]) => {
            let amp = a.hypot(b);
            if amp < 1e-9 {
                (0.0, 0.0, true)
            } else {
                (amp, b.atan2(a), false)
            }
        }
        None => (0.0, 0.0, true),
    };
    BellCurve {
        phases: phases.to_vec(),
        values,
        contrast,
        offset,
        degenerate,
    }
}

/// Uniform phase grid of `n` points over `[lo, hi]` (inclusive).
pub fn phase_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in (col + 1)..3 {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AtomPairDensity;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    #[test]
    fn pi_pulses_invert_populations() {
        let rho = AtomPairDensity::from_diagonal([0.0, 1.0, 0.0, 0.0]);
        let p = RamseyPulse {
            tip_angle: PI,
            phase: 0.3,
        };
        let out = apply_ramsey(&rho, &p, &p);
        let probs = joint_probabilities(&out);
        assert_relative_eq!(probs.p_ge, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_tip_is_identity() {
        let rho = AtomPairDensity::mixed_angle_state(0.4, 1.1);
        let p = RamseyPulse {
            tip_angle: 0.0,
            phase: 2.0,
        };
        let out = apply_ramsey(&rho, &p, &p);
        for i in 0..4 {
            for j in 0..4 {
                assert!((out.rho[i][j] - rho.rho[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn maximally_mixed_state_is_invariant() {
        let rho = AtomPairDensity::from_diagonal([0.25; 4]);
        let out = apply_ramsey(
            &rho,
            &RamseyPulse::pi_over_2(0.0),
            &RamseyPulse::pi_over_2(1.7),
        );
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.25 } else { 0.0 };
                assert!((out.rho[i][j] - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn epr_pair_gives_unit_cosine() {
        let rho = AtomPairDensity::mixed_angle_state(FRAC_PI_4, 0.9);
        let phases = phase_grid(0.0, 2.0 * TAU, 81);
        let curve = bell_scan(&rho, &phases, &DetectionModel::identity());
        assert!(!curve.degenerate);
        assert_relative_eq!(curve.contrast, 1.0, epsilon = 1e-9);
        for v in &curve.values {
            assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn separable_state_has_no_transverse_correlation() {
        let rho = AtomPairDensity::from_diagonal([0.0, 1.0, 0.0, 0.0]);
        for phi in [0.0, 0.7, 2.9] {
            let out = apply_ramsey(
                &rho,
                &RamseyPulse::pi_over_2(0.0),
                &RamseyPulse::pi_over_2(phi),
            );
            assert!(bell_correlator(&out).abs() < 1e-12);
        }
        let phases = phase_grid(0.0, 2.0 * TAU, 41);
        let curve = bell_scan(&rho, &phases, &DetectionModel::identity());
        assert!(curve.degenerate);
        assert_eq!(curve.contrast, 0.0);
    }

    #[test]
    fn all_diagonal_input_is_flat() {
        let rho = AtomPairDensity::from_diagonal([0.1, 0.4, 0.4, 0.1]);
        let phases = phase_grid(0.0, 2.0 * TAU, 41);
        let curve = bell_scan(&rho, &phases, &DetectionModel::identity());
        assert_eq!(curve.contrast, 0.0);
        assert!(curve.degenerate);
    }

    #[test]
    fn scan_is_two_pi_periodic() {
        let rho = AtomPairDensity::mixed_angle_state(0.6, 2.2);
        let phases = [0.3, 1.9, 4.4];
        let shifted: Vec<f64> = phases.iter().map(|p| p + TAU).collect();
        let a = bell_scan(&rho, &phases, &DetectionModel::identity());
        let b = bell_scan(&rho, &shifted, &DetectionModel::identity());
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn contrast_equals_sin_two_theta_for_pure_state() {
        let phases = phase_grid(0.0, 2.0 * TAU, 61);
        for theta in [0.0, 0.2, FRAC_PI_4, 1.1, std::f64::consts::FRAC_PI_2] {
            let rho = AtomPairDensity::mixed_angle_state(theta, 0.37);
            let curve = bell_scan(&rho, &phases, &DetectionModel::identity());
            assert_relative_eq!(curve.contrast, (2.0 * theta).sin().abs(), epsilon = 1e-9);
        }
    }

    #[test]
    fn contrast_invariant_under_grid_phase_shift() {
        let rho = AtomPairDensity::mixed_angle_state(0.5, 1.3);
        let phases = phase_grid(0.0, 2.0 * TAU, 61);
        let shifted: Vec<f64> = phases.iter().map(|p| p + 0.83).collect();
        let a = bell_scan(&rho, &phases, &DetectionModel::identity());
        let b = bell_scan(&rho, &shifted, &DetectionModel::identity());
        assert_relative_eq!(a.contrast, b.contrast, epsilon = 1e-9);
    }

    #[test]
    fn detection_scale_examples() {
        let p = JointProbabilities {
            p_ee: 0.0,
            p_eg: 1.0,
            p_ge: 0.0,
            p_gg: 0.0,
        };
        let out = apply_detection(&p, &DetectionModel::Scale(0.89));
        assert_relative_eq!(out.p_eg, 0.89, epsilon = 1e-12);
        assert_eq!(out.p_ge, 0.0);

        // scale mode preserves the channel ratio
        let p = JointProbabilities {
            p_ee: 0.0,
            p_eg: 0.6,
            p_ge: 0.4,
            p_gg: 0.0,
        };
        let out = apply_detection(&p, &DetectionModel::Scale(0.89));
        assert_relative_eq!(out.p_eg / out.p_ge, 0.6 / 0.4, epsilon = 1e-12);
    }

    #[test]
    fn detection_confusion_examples() {
        let p = JointProbabilities {
            p_ee: 0.0,
            p_eg: 1.0,
            p_ge: 0.0,
            p_gg: 0.0,
        };
        let out = apply_detection(&p, &DetectionModel::Confusion { misassign: 0.0 });
        assert_eq!(out.p_eg, 1.0);

        let out = apply_detection(&p, &DetectionModel::Confusion { misassign: 0.05 });
        assert_relative_eq!(out.p_ee, 0.0475, epsilon = 1e-12);
        assert_relative_eq!(out.p_eg, 0.9025, epsilon = 1e-12);
        assert_relative_eq!(out.p_ge, 0.0025, epsilon = 1e-12);
        assert_relative_eq!(out.p_gg, 0.0475, epsilon = 1e-12);
        assert_relative_eq!(out.sum(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn correlator_bounded_for_physical_states() {
        // mixtures of the angle states stay within [-1, 1] for every phase
        for (theta, phi, mix) in [(0.3, 0.1, 0.2), (1.2, 2.0, 0.7), (0.78, 4.0, 0.5)] {
            let mut rho = AtomPairDensity::mixed_angle_state(theta, phi).scaled(mix);
            rho.add_assign_scaled(&AtomPairDensity::from_diagonal([0.25; 4]), 1.0 - mix);
            for phase in [0.0, 0.9, 2.3, 5.5] {
                let out = apply_ramsey(
                    &rho,
                    &RamseyPulse::pi_over_2(0.0),
                    &RamseyPulse::pi_over_2(phase),
                );
                let c = bell_correlator(&out);
                assert!(c.abs() <= 1.0 + 1e-12, "correlator {c}");
            }
        }
    }
}
