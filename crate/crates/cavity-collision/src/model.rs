//! Domain types: experimental setup, per-run collision parameters, joint
//! state vectors, the two-atom reduced density matrix, and detection
//! probabilities.

use num_complex::Complex64 as C64;

use crate::basis::{AtomState, Basis};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Fixed physical parameters of the apparatus, with derived coupling
/// quantities.
///
/// The derived chain is `D_eg = q a0 n^2 / 2`,
/// `E0 = (2 hbar omega / (pi eps0 L w^2))^{1/2}` and
/// `Omega = 2 D_eg E0 / hbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSetup {
    pub constants: PhysicalConstants,
    /// Principal quantum number of the upper circular state.
    pub n_principal: u32,
    /// Atomic e -> g angular frequency, rad/s.
    pub omega: f64,
    /// Mirror spacing, m.
    pub mirror_spacing: f64,
    /// Gaussian mode waist, m.
    pub waist: f64,
    /// Splitting between the two mode frequencies, rad/s.
    pub mode_splitting: f64,
    /// Dipole matrix element between e and g, C·m (derived).
    pub d_eg: f64,
    /// Vacuum field r.m.s. amplitude at cavity center, V/m (derived).
    pub e0: f64,
    /// Vacuum Rabi angular frequency at cavity center, rad/s (derived).
    pub omega_rabi: f64,
}

impl PhysicalSetup {
    pub fn new(
        n_principal: u32,
        omega: f64,
        mirror_spacing: f64,
        waist: f64,
        mode_splitting: f64,
    ) -> Result<Self> {
        if omega <= 0.0 || mirror_spacing <= 0.0 || waist <= 0.0 || mode_splitting < 0.0 {
            return Err(Error::InvalidParameter(
                "setup frequencies and geometry must be positive".into(),
            ));
        }
        let k = PhysicalConstants::codata();
        let n2 = (n_principal as f64).powi(2);
        let d_eg = k.q * k.a0 * n2 / 2.0;
        let e0 = (2.0 * k.hbar * omega
            / (std::f64::consts::PI * k.epsilon0 * mirror_spacing * waist * waist))
            .sqrt();
        let omega_rabi = 2.0 * d_eg * e0 / k.hbar;
        Ok(Self {
            constants: k,
            n_principal,
            omega,
            mirror_spacing,
            waist,
            mode_splitting,
            d_eg,
            e0,
            omega_rabi,
        })
    }

    /// The setup of the experiment: n = 51, omega/2pi = 51.1 GHz,
    /// L = 2.75 cm, w = 0.6 cm, Delta/2pi = 128 kHz.
    ///
    /// Cavity damping times are T_c,a = 1.0 ms and T_c,b = 0.9 ms; relaxation
    /// during the ~100 us crossing is negligible and is not modeled.
    pub fn reference() -> Self {
        use std::f64::consts::TAU;
        Self::new(51, TAU * 51.1e9, 0.0275, 0.006, TAU * 128e3)
            .expect("reference parameters are valid")
    }

    /// Effective collision radius `b_c = (L w / sqrt(2 pi))^{1/2}`.
    pub fn b_c(&self) -> f64 {
        (self.mirror_spacing * self.waist / (2.0 * std::f64::consts::PI).sqrt()).sqrt()
    }
}

/// Per-run collision parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionScenario {
    /// Velocity of the first (faster) atom, m/s.
    pub v1: f64,
    /// Velocity of the second atom, m/s.
    pub v2: f64,
    /// Detuning of mode a from the atomic transition, rad/s (> 0).
    pub delta_a: f64,
    /// Mean thermal photon number per mode.
    pub nbar: f64,
    /// Highest Fock state seeded in the thermal mixture.
    pub n_fock_mix: usize,
    /// Dynamical Fock truncation per mode.
    pub n_fock_dyn: usize,
    /// Half-width of the integration window, s.
    pub t_span: f64,
    /// Integrator step, s.
    pub dt: f64,
    /// Multiplier on the atom-field coupling; 0 gives the decoupled
    /// zero-collision reference, 1 the physical run.
    pub coupling_scale: f64,
}

impl CollisionScenario {
    /// Scenario with the standard window (`t_span = 4 w / v2`) and a step
    /// chosen so the fixed-step scheme keeps the norm drift well below 1e-8
    /// (capped at 2 ns).
    pub fn for_setup(setup: &PhysicalSetup, v1: f64, v2: f64, delta_a: f64) -> Result<Self> {
        let t_span = 4.0 * setup.waist / v2.min(v1);
        let mut s = Self {
            v1,
            v2,
            delta_a,
            nbar: 0.25,
            n_fock_mix: 3,
            n_fock_dyn: 5,
            t_span,
            dt: 2e-9,
            coupling_scale: 1.0,
        };
        s.dt = s.stable_dt(setup, 2e-9);
        s.validate(setup)?;
        Ok(s)
    }

    /// Same, but with an empty cavity (no thermal seeding).
    pub fn vacuum(setup: &PhysicalSetup, v1: f64, v2: f64, delta_a: f64) -> Result<Self> {
        let mut s = Self::for_setup(setup, v1, v2, delta_a)?;
        s.nbar = 0.0;
        s.n_fock_mix = 0;
        s.dt = s.stable_dt(setup, 2e-9);
        Ok(s)
    }

    pub fn delta_b(&self, setup: &PhysicalSetup) -> f64 {
        self.delta_a + setup.mode_splitting
    }

    /// Largest total excitation number reachable from the seeded initial
    /// states `|e, g; na, nb>` with `na, nb <= n_fock_mix`.
    pub fn max_excitation(&self) -> usize {
        1 + 2 * self.n_fock_mix
    }

    /// Step size keeping the accumulated fourth-order norm drift below
    /// ~1e-9 over the full window, given the largest diagonal frequency in
    /// the propagated blocks. Never larger than `base`.
    pub fn stable_dt(&self, setup: &PhysicalSetup, base: f64) -> f64 {
        let db = self.delta_b(setup);
        let n = self.max_excitation() as f64;
        // diagonal plus a bound on the coupling contribution to the spectrum
        let w_max = n * db + 4.0 * setup.omega_rabi * n.sqrt();
        let t_total = 2.0 * self.t_span;
        // drift per step ~ (w dt)^6/72; total = T/dt * (w dt)^6/72 < 1e-9
        let dt = (72.0e-9 / (t_total * w_max.powi(6))).powf(0.2);
        dt.min(base)
    }

    pub fn validate(&self, setup: &PhysicalSetup) -> Result<()> {
        if !(self.v1 > self.v2 && self.v2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "require v1 > v2 > 0, got v1 = {}, v2 = {}",
                self.v1, self.v2
            )));
        }
        if self.delta_a <= 0.0 || self.delta_b(setup) <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "require delta_a > 0 and delta_b > 0, got delta_a = {}",
                self.delta_a
            )));
        }
        if self.n_fock_dyn < self.n_fock_mix + 2 {
            return Err(Error::InvalidParameter(format!(
                "require n_fock_dyn >= n_fock_mix + 2, got {} < {} + 2",
                self.n_fock_dyn, self.n_fock_mix
            )));
        }
        if self.t_span <= 0.0 || self.dt <= 0.0 {
            return Err(Error::InvalidParameter(
                "t_span and dt must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.coupling_scale) {
            return Err(Error::InvalidParameter(
                "coupling_scale must be in [0, 1]".into(),
            ));
        }
        if self.nbar < 0.0 {
            return Err(Error::InvalidParameter("nbar must be >= 0".into()));
        }
        Ok(())
    }
}

/// Quadratic-mean collision velocity `v0 = [(v1^2 + v2^2)/2]^{1/2}`.
pub fn v0_effective(v1: f64, v2: f64) -> Result<f64> {
    if v1 <= 0.0 || v2 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "velocities must be positive, got {v1}, {v2}"
        )));
    }
    Ok(((v1 * v1 + v2 * v2) / 2.0).sqrt())
}

/// Complex amplitudes over the `|s1, s2; n_a, n_b>` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub basis: Basis,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn zero(n_fock_dyn: usize) -> Self {
        let basis = Basis::new(n_fock_dyn);
        Self {
            amplitudes: vec![C64::new(0.0, 0.0); basis.dim()],
            basis,
        }
    }

    /// Unit-amplitude basis state `|s1, s2; na, nb>`.
    pub fn basis_state(
        n_fock_dyn: usize,
        s1: AtomState,
        s2: AtomState,
        na: usize,
        nb: usize,
    ) -> Self {
        let mut psi = Self::zero(n_fock_dyn);
        let k = psi.basis.index(s1, s2, na, nb);
        psi.amplitudes[k] = C64::new(1.0, 0.0);
        psi
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn amp(&self, s1: AtomState, s2: AtomState, na: usize, nb: usize) -> C64 {
        self.amplitudes[self.basis.index(s1, s2, na, nb)]
    }
}

/// 4x4 two-atom reduced density matrix in the basis
/// `{|e1 e2>, |e1 g2>, |g1 e2>, |g1 g2>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomPairDensity {
    pub rho: [[C64; 4]; 4],
}

/// Canonical two-atom basis slots.
pub const EE: usize = 0;
pub const EG: usize = 1;
pub const GE: usize = 2;
pub const GG: usize = 3;

impl AtomPairDensity {
    pub fn zero() -> Self {
        Self {
            rho: [[C64::new(0.0, 0.0); 4]; 4],
        }
    }

    pub fn from_diagonal(d: [f64; 4]) -> Self {
        let mut m = Self::zero();
        for (i, &p) in d.iter().enumerate() {
            m.rho[i][i] = C64::new(p, 0.0);
        }
        m
    }

    /// `rho = |psi><psi|` for a two-atom pure state (amplitudes in canonical
    /// order ee, eg, ge, gg).
    pub fn pure(psi: [C64; 4]) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.rho[i][j] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    /// The output state `cos(theta) |e1 g2> + e^{i phi} sin(theta) |g1 e2>`.
    pub fn mixed_angle_state(theta: f64, phi: f64) -> Self {
        let mut psi = [C64::new(0.0, 0.0); 4];
        psi[EG] = C64::new(theta.cos(), 0.0);
        psi[GE] = C64::from_polar(theta.sin(), phi);
        Self::pure(psi)
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.rho[i][i].re).sum()
    }

    /// Smallest eigenvalue, for positivity checks.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian4_eigenvalues(&self.rho)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks hermiticity (1e-10), unit trace (1e-9) and positivity
    /// (eigenvalues >= -1e-9).
    pub fn validate(&self) -> Result<()> {
        for i in 0..4 {
            for j in 0..4 {
                let d = self.rho[i][j] - self.rho[j][i].conj();
                if d.norm() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "density matrix not Hermitian at ({i}, {j}): asymmetry {:.3e}",
                        d.norm()
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let lam = self.min_eigenvalue();
        if lam < -1e-9 {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {lam:.3e}"
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, f: f64) -> Self {
        let mut out = *self;
        for row in out.rho.iter_mut() {
            for x in row.iter_mut() {
                *x *= f;
            }
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &Self, f: f64) {
        for i in 0..4 {
            for j in 0..4 {
                self.rho[i][j] += other.rho[i][j] * f;
            }
        }
    }
}

/// The four detection probabilities in canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbabilities {
    pub p_ee: f64,
    pub p_eg: f64,
    pub p_ge: f64,
    pub p_gg: f64,
}

impl JointProbabilities {
    pub fn sum(&self) -> f64 {
        self.p_ee + self.p_eg + self.p_ge + self.p_gg
    }
}

/// Trace out both field modes:
/// `rho(s, s') = sum_{na, nb} psi(s, na, nb) conj(psi(s', na, nb))`.
pub fn partial_trace_field(state: &StateVector) -> AtomPairDensity {
    let basis = state.basis;
    let nl = basis.n_levels();
    let mut rho = AtomPairDensity::zero();
    for p in 0..4 {
        for q in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for na in 0..nl {
                let row = (p * nl + na) * nl;
                let col = (q * nl + na) * nl;
                for nb in 0..nl {
                    acc += state.amplitudes[row + nb] * state.amplitudes[col + nb].conj();
                }
            }
            rho.rho[p][q] = acc;
        }
    }
    rho
}

/// Diagonal of the two-atom density matrix in the canonical basis order.
pub fn joint_probabilities(rho: &AtomPairDensity) -> JointProbabilities {
    JointProbabilities {
        p_ee: rho.rho[EE][EE].re,
        p_eg: rho.rho[EG][EG].re,
        p_ge: rho.rho[GE][GE].re,
        p_gg: rho.rho[GG][GG].re,
    }
}

/// Eigenvalues of a 4x4 Hermitian matrix via a Jacobi sweep on the
/// equivalent 8x8 real symmetric embedding [[X, -Y], [Y, X]].
fn hermitian4_eigenvalues(m: &[[C64; 4]; 4]) -> [f64; 4] {
    let mut a = [[0.0f64; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = m[i][j].re;
            a[i + 4][j + 4] = m[i][j].re;
            a[i][j + 4] = -m[i][j].im;
            a[i + 4][j] = m[i][j].im;
        }
    }
    // cyclic Jacobi; 8x8 converges in a handful of sweeps
    for _ in 0..50 {
        let mut off = 0.0;
        for p in 0..8 {
            for q in (p + 1)..8 {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..8 {
            for q in (p + 1)..8 {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..8 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..8 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    // each complex eigenvalue appears twice in the embedding
    let mut eig: Vec<f64> = (0..8).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    [eig[0], eig[2], eig[4], eig[6]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::AtomState::{E, G};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

    #[test]
    fn v0_examples() {
        assert_relative_eq!(v0_effective(300.0, 243.0).unwrap(), 273.05, max_relative = 1e-3);
        assert_relative_eq!(v0_effective(350.0, 350.0).unwrap(), 350.0, max_relative = 1e-12);
        assert_relative_eq!(v0_effective(500.0, 319.0).unwrap(), 419.3, max_relative = 1e-3);
        assert!(v0_effective(-1.0, 300.0).is_err());
        assert!(v0_effective(300.0, 0.0).is_err());
    }

    #[test]
    fn setup_derived_chain() {
        let setup = PhysicalSetup::reference();
        // D_eg = q a0 n^2 / 2
        let k = &setup.constants;
        assert_relative_eq!(
            setup.d_eg,
            k.q * k.a0 * 51.0f64.powi(2) / 2.0,
            max_relative = 1e-12
        );
        // paper-quoted values
        assert_relative_eq!(setup.e0, 1.57e-3, max_relative = 0.01);
        let rabi_hz = setup.omega_rabi / TAU;
        assert!((49e3..=53e3).contains(&rabi_hz), "Omega/2pi = {rabi_hz}");
        assert_relative_eq!(setup.b_c(), 0.81e-2, max_relative = 0.01);
    }

    #[test]
    fn partial_trace_product_state() {
        let psi = StateVector::basis_state(5, E, G, 0, 0);
        let rho = partial_trace_field(&psi);
        rho.validate().unwrap();
        let p = joint_probabilities(&rho);
        assert_relative_eq!(p.p_eg, 1.0, max_relative = 1e-12);
        assert!(p.p_ee.abs() + p.p_ge.abs() + p.p_gg.abs() < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state_with_empty_field() {
        let mut psi = StateVector::zero(5);
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        psi.amplitudes[psi.basis.index(E, G, 0, 0)] = C64::new(inv, 0.0);
        psi.amplitudes[psi.basis.index(G, E, 0, 0)] = C64::new(inv, 0.0);
        let rho = partial_trace_field(&psi);
        rho.validate().unwrap();
        assert_relative_eq!(rho.rho[EG][GE].re, 0.5, max_relative = 1e-12);
        // rank 1: largest eigenvalue 1
        assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn partial_trace_field_record_destroys_coherence() {
        let mut psi = StateVector::zero(5);
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        psi.amplitudes[psi.basis.index(E, G, 0, 0)] = C64::new(inv, 0.0);
        psi.amplitudes[psi.basis.index(G, E, 1, 0)] = C64::new(inv, 0.0);
        let rho = partial_trace_field(&psi);
        rho.validate().unwrap();
        assert_relative_eq!(rho.rho[EG][EG].re, 0.5, max_relative = 1e-12);
        assert_relative_eq!(rho.rho[GE][GE].re, 0.5, max_relative = 1e-12);
        assert!(rho.rho[EG][GE].norm() < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        // arbitrary unnormalized state
        let mut psi = StateVector::zero(3);
        for (k, a) in psi.amplitudes.iter_mut().enumerate() {
            *a = C64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos());
        }
        let rho = partial_trace_field(&psi);
        assert_relative_eq!(rho.trace(), psi.norm().powi(2), max_relative = 1e-12);
    }

    #[test]
    fn joint_probabilities_examples() {
        let p = joint_probabilities(&AtomPairDensity::from_diagonal([0.0, 1.0, 0.0, 0.0]));
        assert_eq!((p.p_ee, p.p_eg, p.p_ge, p.p_gg), (0.0, 1.0, 0.0, 0.0));

        let p = joint_probabilities(&AtomPairDensity::mixed_angle_state(FRAC_PI_4, 0.7));
        assert_relative_eq!(p.p_eg, 0.5, max_relative = 1e-12);
        assert_relative_eq!(p.p_ge, 0.5, max_relative = 1e-12);

        let p = joint_probabilities(&AtomPairDensity::mixed_angle_state(FRAC_PI_2, 1.3));
        assert!(p.p_eg.abs() < 1e-12);
        assert_relative_eq!(p.p_ge, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn populations_independent_of_phi() {
        for phi in [0.0, 0.9, 2.4, 5.1] {
            let p = joint_probabilities(&AtomPairDensity::mixed_angle_state(0.33, phi));
            assert_relative_eq!(p.p_eg, 0.33f64.cos().powi(2), max_relative = 1e-12);
            assert_relative_eq!(p.p_ge, 0.33f64.sin().powi(2), max_relative = 1e-12);
        }
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let rho = AtomPairDensity::from_diagonal([0.4, 0.3, 0.2, 0.1]);
        let lam = hermitian4_eigenvalues(&rho.rho);
        assert_relative_eq!(lam[0], 0.1, max_relative = 1e-9);
        assert_relative_eq!(lam[3], 0.4, max_relative = 1e-9);

        // maximally entangled pure state: eigenvalues {1, 0, 0, 0}
        let rho = AtomPairDensity::mixed_angle_state(FRAC_PI_4, 1.1);
        let lam = hermitian4_eigenvalues(&rho.rho);
        assert!(lam[0].abs() < 1e-9);
        assert_relative_eq!(lam[3], 1.0, max_relative = 1e-9);
    }

    #[test]
    fn scenario_validation() {
        let setup = PhysicalSetup::reference();
        let s = CollisionScenario::for_setup(&setup, 300.0, 243.0, TAU * 470e3).unwrap();
        s.validate(&setup).unwrap();
        assert!(s.n_fock_dyn >= s.n_fock_mix + 2);

        assert!(CollisionScenario::for_setup(&setup, 243.0, 300.0, TAU * 470e3).is_err());
        assert!(CollisionScenario::for_setup(&setup, 300.0, 243.0, -1.0).is_err());
        let mut bad = s;
        bad.n_fock_dyn = bad.n_fock_mix;
        assert!(bad.validate(&setup).is_err());
    }
}
