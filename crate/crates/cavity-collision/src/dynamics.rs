//! Exact time-dependent propagation of the two-atom/two-mode system.
//!
//! In the frame rotating at the atomic frequency the Hamiltonian is
//!
//! ```text
//! H(t)/hbar = delta_a a'a + delta_b b'b
//!           + sum_{i in {1,2}} sum_{mu in {a,b}} (g_i(t)/2) (sigma_i^+ mu + mu' sigma_i^-)
//! ```
//!
//! with `g_i(t) = Omega exp(-v_i^2 t^2 / w^2)`. The factor 1/2 is fixed by
//! the convention that resonant vacuum Rabi oscillation `|e,0> <-> |g,1>`
//! has angular frequency Omega. The rotating-wave form conserves the total
//! excitation number, so propagation runs block by block.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::basis::{AtomState, Basis};
use crate::error::{Error, Result};
use crate::model::{
    partial_trace_field, AtomPairDensity, CollisionScenario, PhysicalSetup, StateVector,
};

/// Gaussian atom-mode coupling envelope `g(t) = Omega exp(-v^2 t^2 / w^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingProfile {
    /// Peak coupling at cavity center, rad/s.
    pub peak: f64,
    /// Atom velocity, m/s.
    pub v: f64,
    /// Mode waist, m.
    pub w: f64,
}

impl CouplingProfile {
    pub fn at(&self, t: f64) -> f64 {
        let x = self.v * t / self.w;
        self.peak * (-x * x).exp()
    }
}

/// Evaluate a coupling profile at time `t`.
pub fn coupling_at(profile: &CouplingProfile, t: f64) -> f64 {
    profile.at(t)
}

/// Setup plus scenario: everything needed to build `H(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub setup: PhysicalSetup,
    pub scenario: CollisionScenario,
}

impl HamiltonianSpec {
    pub fn new(setup: PhysicalSetup, scenario: CollisionScenario) -> Result<Self> {
        scenario.validate(&setup)?;
        Ok(Self { setup, scenario })
    }

    pub fn delta_b(&self) -> f64 {
        self.scenario.delta_b(&self.setup)
    }

    pub fn profile(&self, atom: usize) -> CouplingProfile {
        let v = if atom == 0 { self.scenario.v1 } else { self.scenario.v2 };
        CouplingProfile {
            peak: self.setup.omega_rabi * self.scenario.coupling_scale,
            v,
            w: self.setup.waist,
        }
    }

    fn basis(&self) -> Basis {
        Basis::new(self.scenario.n_fock_dyn)
    }

    /// Dense `H(t)/hbar` over the full basis, row-major. Test and inspection
    /// path; propagation uses the block-sparse form.
    pub fn dense_matrix(&self, t: f64) -> Vec<C64> {
        let basis = self.basis();
        let dim = basis.dim();
        let mut h = vec![C64::new(0.0, 0.0); dim * dim];
        let da = self.scenario.delta_a;
        let db = self.delta_b();
        let g = [self.profile(0).at(t), self.profile(1).at(t)];
        for k in 0..dim {
            let (_, _, na, nb) = basis.decode(k);
            h[k * dim + k] = C64::new(da * na as f64 + db * nb as f64, 0.0);
        }
        for (i, j, atom, amp) in coupling_terms(&basis, None) {
            let x = C64::new(g[atom as usize] * amp, 0.0);
            h[i as usize * dim + j as usize] += x;
            h[j as usize * dim + i as usize] += x;
        }
        h
    }
}

/// Off-diagonal structure of H: entries `(i, j, atom, amp)` meaning
/// `H[i][j] += g_atom(t) * amp` (plus the Hermitian partner), where `i` is
/// the lowered-photon side `sigma^+ mu`. When `block` is given, only pairs
/// inside that excitation block are emitted.
fn coupling_terms(basis: &Basis, block: Option<usize>) -> Vec<(u32, u32, u8, f64)> {
    let mut terms = Vec::new();
    for k in 0..basis.dim() {
        if let Some(n_exc) = block {
            if basis.excitation(k) != n_exc {
                continue;
            }
        }
        let (s1, s2, na, nb) = basis.decode(k);
        // sigma_1^+ a
        if s1 == AtomState::G && na > 0 {
            let j = basis.index(AtomState::E, s2, na - 1, nb);
            terms.push((j as u32, k as u32, 0, (na as f64).sqrt() / 2.0));
        }
        // sigma_1^+ b
        if s1 == AtomState::G && nb > 0 {
            let j = basis.index(AtomState::E, s2, na, nb - 1);
            terms.push((j as u32, k as u32, 0, (nb as f64).sqrt() / 2.0));
        }
        // sigma_2^+ a
        if s2 == AtomState::G && na > 0 {
            let j = basis.index(s1, AtomState::E, na - 1, nb);
            terms.push((j as u32, k as u32, 1, (na as f64).sqrt() / 2.0));
        }
        // sigma_2^+ b
        if s2 == AtomState::G && nb > 0 {
            let j = basis.index(s1, AtomState::E, na, nb - 1);
            terms.push((j as u32, k as u32, 1, (nb as f64).sqrt() / 2.0));
        }
    }
    terms
}

/// One excitation-number block of H, with full-basis indices remapped to
/// local ones.
struct Block {
    full_indices: Vec<usize>,
    diag: Vec<f64>,
    terms: Vec<(u32, u32, u8, f64)>,
}

impl Block {
    fn build(basis: &Basis, n_exc: usize, delta_a: f64, delta_b: f64) -> Self {
        let full_indices: Vec<usize> =
            (0..basis.dim()).filter(|&k| basis.excitation(k) == n_exc).collect();
        let mut local = vec![u32::MAX; basis.dim()];
        for (loc, &k) in full_indices.iter().enumerate() {
            local[k] = loc as u32;
        }
        let diag = full_indices
            .iter()
            .map(|&k| {
                let (_, _, na, nb) = basis.decode(k);
                delta_a * na as f64 + delta_b * nb as f64
            })
            .collect();
        let terms = coupling_terms(basis, Some(n_exc))
            .into_iter()
            .map(|(i, j, atom, amp)| (local[i as usize], local[j as usize], atom, amp))
            .collect();
        Self {
            full_indices,
            diag,
            terms,
        }
    }

    fn dim(&self) -> usize {
        self.full_indices.len()
    }

    /// `out = H(g1, g2) y` (real symmetric H applied to complex y).
    fn apply(&self, g: [f64; 2], y: &[C64], out: &mut [C64]) {
        for (o, (d, yi)) in out.iter_mut().zip(self.diag.iter().zip(y.iter())) {
            *o = yi * *d;
        }
        for &(i, j, atom, amp) in &self.terms {
            let x = g[atom as usize] * amp;
            out[i as usize] += y[j as usize] * x;
            out[j as usize] += y[i as usize] * x;
        }
    }
}

/// Outcome of a single propagation.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub final_state: StateVector,
    /// `|norm(final) - norm(initial)|`; reported, never corrected.
    pub norm_drift: f64,
    pub n_steps: usize,
}

/// Integrate `i dpsi/dt = (H(t)/hbar) psi` from `-t_span` to `+t_span` with
/// the classical fixed-step fourth-order scheme. No renormalization is
/// applied; a drift above 1e-6 is an error.
pub fn propagate(spec: &HamiltonianSpec, initial: &StateVector) -> Result<PropagationResult> {
    let basis = initial.basis;
    if basis.n_fock_dyn != spec.scenario.n_fock_dyn {
        return Err(Error::InvalidParameter(
            "initial state truncation differs from scenario n_fock_dyn".into(),
        ));
    }
    let t_span = spec.scenario.t_span;
    let n_steps = ((2.0 * t_span) / spec.scenario.dt).ceil() as usize;
    let dt = 2.0 * t_span / n_steps as f64;

    // occupied excitation blocks; unoccupied blocks stay empty
    let mut occupied: Vec<usize> = initial
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(k, _)| basis.excitation(k))
        .collect();
    occupied.sort_unstable();
    occupied.dedup();

    let p1 = spec.profile(0);
    let p2 = spec.profile(1);
    let initial_norm = initial.norm();
    let mut final_state = StateVector::zero(basis.n_fock_dyn);

    for n_exc in occupied {
        let block = Block::build(&basis, n_exc, spec.scenario.delta_a, spec.delta_b());
        let dim = block.dim();
        let mut y: Vec<C64> = block.full_indices.iter().map(|&k| initial.amplitudes[k]).collect();
        let mut hy = vec![C64::new(0.0, 0.0); dim];
        let mut k1 = vec![C64::new(0.0, 0.0); dim];
        let mut k2 = vec![C64::new(0.0, 0.0); dim];
        let mut k3 = vec![C64::new(0.0, 0.0); dim];
        let mut k4 = vec![C64::new(0.0, 0.0); dim];
        let mut tmp = vec![C64::new(0.0, 0.0); dim];
        let minus_i = C64::new(0.0, -1.0);

        for step in 0..n_steps {
            let t = -t_span + step as f64 * dt;
            let th = t + 0.5 * dt;
            let tf = t + dt;
            let g0 = [p1.at(t), p2.at(t)];
            let gh = [p1.at(th), p2.at(th)];
            let g1 = [p1.at(tf), p2.at(tf)];

            block.apply(g0, &y, &mut hy);
            for i in 0..dim {
                k1[i] = minus_i * hy[i];
                tmp[i] = y[i] + k1[i] * (0.5 * dt);
            }
            block.apply(gh, &tmp, &mut hy);
            for i in 0..dim {
                k2[i] = minus_i * hy[i];
                tmp[i] = y[i] + k2[i] * (0.5 * dt);
            }
            block.apply(gh, &tmp, &mut hy);
            for i in 0..dim {
                k3[i] = minus_i * hy[i];
                tmp[i] = y[i] + k3[i] * dt;
            }
            block.apply(g1, &tmp, &mut hy);
            for i in 0..dim {
                k4[i] = minus_i * hy[i];
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            }
        }

        for (loc, &k) in block.full_indices.iter().enumerate() {
            final_state.amplitudes[k] = y[loc];
        }
    }

    let norm_drift = (final_state.norm() - initial_norm).abs();
    if norm_drift > 1e-6 {
        return Err(Error::Accuracy {
            drift: norm_drift,
            suggested_dt: dt / 2.0,
        });
    }
    Ok(PropagationResult {
        final_state,
        norm_drift,
        n_steps,
    })
}

/// A collision result: reduced two-atom state plus integration diagnostics.
#[derive(Debug, Clone)]
pub struct CollisionOutcome {
    pub rho: AtomPairDensity,
    /// Largest norm drift among the underlying propagations.
    pub norm_drift: f64,
    pub n_steps: usize,
}

/// Full collision with a definite initial field Fock state: propagate
/// `|e1, g2; na, nb>` through the crossing and trace out both modes.
pub fn collide(
    scenario: &CollisionScenario,
    setup: &PhysicalSetup,
    field_fock: (usize, usize),
) -> Result<CollisionOutcome> {
    let (na, nb) = field_fock;
    if na > scenario.n_fock_mix || nb > scenario.n_fock_mix {
        return Err(Error::InvalidParameter(format!(
            "initial Fock state ({na}, {nb}) exceeds n_fock_mix = {}",
            scenario.n_fock_mix
        )));
    }
    let spec = HamiltonianSpec::new(*setup, *scenario)?;
    let initial =
        StateVector::basis_state(scenario.n_fock_dyn, AtomState::E, AtomState::G, na, nb);
    let result = propagate(&spec, &initial)?;
    Ok(CollisionOutcome {
        rho: partial_trace_field(&result.final_state),
        norm_drift: result.norm_drift,
        n_steps: result.n_steps,
    })
}

/// Bose-Einstein weight `nbar^n / (1 + nbar)^{n+1}`.
pub fn thermal_weight(n: usize, nbar: f64) -> f64 {
    debug_assert!(nbar >= 0.0);
    if nbar == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1)
}

/// Thermal-averaged collision: Bose-Einstein mixture over initial Fock
/// states up to `n_fock_mix` per mode, renormalized by the included weight
/// mass. Seeds run in parallel; the reduction is in fixed index order.
pub fn collide_thermal(
    scenario: &CollisionScenario,
    setup: &PhysicalSetup,
) -> Result<CollisionOutcome> {
    let n_mix = scenario.n_fock_mix;
    let seeds: Vec<(usize, usize, f64)> = (0..=n_mix)
        .flat_map(|na| (0..=n_mix).map(move |nb| (na, nb)))
        .map(|(na, nb)| {
            let w = thermal_weight(na, scenario.nbar) * thermal_weight(nb, scenario.nbar);
            (na, nb, w)
        })
        .filter(|&(_, _, w)| w > 0.0)
        .collect();

    let outcomes: Vec<Result<(f64, CollisionOutcome)>> = seeds
        .par_iter()
        .map(|&(na, nb, w)| {
            let out = collide(scenario, setup, (na, nb))?;
            Ok((w, out))
        })
        .collect();

    let mut rho = AtomPairDensity::zero();
    let mut mass = 0.0;
    let mut norm_drift: f64 = 0.0;
    let mut n_steps = 0;
    for res in outcomes {
        let (w, out) = res?;
        rho.add_assign_scaled(&out.rho, w);
        mass += w;
        norm_drift = norm_drift.max(out.norm_drift);
        n_steps = n_steps.max(out.n_steps);
    }
    Ok(CollisionOutcome {
        rho: rho.scaled(1.0 / mass),
        norm_drift,
        n_steps,
    })
}
