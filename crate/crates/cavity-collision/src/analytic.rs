//! Closed-form collision angles: the free-space van der Waals estimate, the
//! two equivalent cavity-assisted expressions, the dimensionless detuning
//! parameter eta, and the perturbative detection probabilities.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::model::{JointProbabilities, PhysicalSetup};

/// Accumulated rotation angle in the {|e1 g2>, |g1 e2>} subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle {
    pub theta: f64,
}

impl MixingAngle {
    pub fn new(theta: f64) -> Self {
        debug_assert!(theta >= 0.0);
        Self { theta }
    }
}

/// A point on the detuning axis: `delta_b = delta_a + Delta` and
/// `eta = omega/delta_a + omega/delta_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningPoint {
    pub delta_a: f64,
    pub delta_b: f64,
    pub eta: f64,
}

/// Free-space van der Waals mixing angle,
/// `theta_0 = alpha (c/v) (a0 n^2 / b0)^2`.
///
/// This is an order-of-magnitude estimate (the angular structure of the
/// dipole-dipole matrix element is not evaluated), in contrast to the exact
/// dispersive-regime cavity expressions below.
pub fn free_space_angle(n: u32, v_rel: f64, b0: f64) -> Result<MixingAngle> {
    if v_rel <= 0.0 || b0 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "free_space_angle requires v > 0 and b0 > 0, got {v_rel}, {b0}"
        )));
    }
    let k = PhysicalConstants::codata();
    let x = k.a0 * (n as f64).powi(2) / b0;
    Ok(MixingAngle::new(k.alpha * (k.c / v_rel) * x * x))
}

/// Cavity-assisted mixing angle from the Rabi frequency:
/// `theta_c = Omega^2 (1/delta_a + 1/delta_b) * sqrt(pi)/(4 sqrt(2)) * w/v0`.
pub fn cavity_angle_eq3(setup: &PhysicalSetup, delta_a: f64, v0: f64) -> Result<MixingAngle> {
    let delta_b = delta_a + setup.mode_splitting;
    if delta_a <= 0.0 || delta_b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cavity_angle_eq3 requires positive detunings, got delta_a = {delta_a}"
        )));
    }
    if v0 <= 0.0 {
        return Err(Error::InvalidParameter("v0 must be positive".into()));
    }
    let om2 = setup.omega_rabi * setup.omega_rabi;
    let geom = std::f64::consts::PI.sqrt() / (4.0 * 2.0f64.sqrt());
    Ok(MixingAngle::new(
        om2 * (1.0 / delta_a + 1.0 / delta_b) * geom * setup.waist / v0,
    ))
}

/// Cavity-assisted mixing angle in free-space form:
/// `theta_c = alpha eta (c/v0) (a0 n^2 / b_c)^2` with
/// `b_c = (L w / sqrt(2 pi))^{1/2}`.
pub fn cavity_angle_eq4(setup: &PhysicalSetup, eta: f64, v0: f64) -> Result<MixingAngle> {
    if eta < 0.0 {
        return Err(Error::InvalidParameter("eta must be >= 0".into()));
    }
    if v0 <= 0.0 {
        return Err(Error::InvalidParameter("v0 must be positive".into()));
    }
    let k = &setup.constants;
    let x = k.a0 * (setup.n_principal as f64).powi(2) / setup.b_c();
    Ok(MixingAngle::new(k.alpha * eta * (k.c / v0) * x * x))
}

/// `eta = omega/delta_a + omega/delta_b`.
pub fn eta_from_delta(delta_a: f64, setup: &PhysicalSetup) -> Result<DetuningPoint> {
    let delta_b = delta_a + setup.mode_splitting;
    if delta_a <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eta_from_delta requires delta_a > 0, got {delta_a}"
        )));
    }
    Ok(DetuningPoint {
        delta_a,
        delta_b,
        eta: setup.omega / delta_a + setup.omega / delta_b,
    })
}

/// Positive root of `eta delta_a (delta_a + Delta) = omega (2 delta_a + Delta)`,
/// the inverse of [`eta_from_delta`]. Only the positive-detuning branch is
/// returned.
pub fn delta_from_eta(eta: f64, setup: &PhysicalSetup) -> Result<DetuningPoint> {
    if eta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta_from_eta requires eta > 0, got {eta}"
        )));
    }
    let omega = setup.omega;
    let split = setup.mode_splitting;
    // eta da^2 + (eta Delta - 2 omega) da - omega Delta = 0
    let b = eta * split - 2.0 * omega;
    let c = -omega * split;
    let disc = (b * b - 4.0 * eta * c).sqrt();
    let delta_a = (-b + disc) / (2.0 * eta);
    eta_from_delta(delta_a, setup)
}

/// Inverse of Eq.-(4): the eta realizing a given mixing angle at velocity v0.
pub fn eta_for_angle(setup: &PhysicalSetup, theta: f64, v0: f64) -> Result<f64> {
    let unit = cavity_angle_eq4(setup, 1.0, v0)?.theta;
    Ok(theta / unit)
}

/// Detection probabilities predicted by the output-state form with
/// `theta = theta_c`, scaled on the two exchange channels to account for
/// detection errors: `p_eg = s cos^2(theta)`, `p_ge = s sin^2(theta)`.
pub fn perturbative_probabilities(
    theta_c: MixingAngle,
    detection_scale: f64,
) -> Result<JointProbabilities> {
    if !(0.0..=1.0).contains(&detection_scale) {
        return Err(Error::InvalidParameter(format!(
            "detection_scale must be in [0, 1], got {detection_scale}"
        )));
    }
    let c2 = theta_c.theta.cos().powi(2);
    Ok(JointProbabilities {
        p_ee: 0.0,
        p_eg: detection_scale * c2,
        p_ge: detection_scale * (1.0 - c2),
        p_gg: 0.0,
    })
}
