//! Tensor-product basis `|s1, s2; n_a, n_b>` for two two-level atoms and two
//! bosonic modes, with a frozen canonical flat-index layout.
//!
//! Ordering is `(s1, s2, n_a, n_b)` with `e < g`:
//!
//! ```text
//! flat = ((s1*2 + s2)*(n_fock_dyn+1) + n_a)*(n_fock_dyn+1) + n_b
//! ```
//!
//! This layout is shared by golden files and must not change.

/// Internal state of one atom. `E` (upper) sorts before `G` (lower).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomState {
    E,
    G,
}

impl AtomState {
    pub fn idx(self) -> usize {
        match self {
            AtomState::E => 0,
            AtomState::G => 1,
        }
    }

    pub fn from_idx(i: usize) -> Self {
        if i == 0 {
            AtomState::E
        } else {
            AtomState::G
        }
    }

    /// 1 for `e`, 0 for `g`: contribution to the total excitation number.
    pub fn excitation(self) -> usize {
        match self {
            AtomState::E => 1,
            AtomState::G => 0,
        }
    }
}

/// Basis layout for a given per-mode Fock truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub n_fock_dyn: usize,
}

impl Basis {
    pub fn new(n_fock_dyn: usize) -> Self {
        Self { n_fock_dyn }
    }

    /// Fock levels per mode, `n_fock_dyn + 1`.
    pub fn n_levels(&self) -> usize {
        self.n_fock_dyn + 1
    }

    /// Total Hilbert-space dimension, `4 * (n_fock_dyn+1)^2`.
    pub fn dim(&self) -> usize {
        4 * self.n_levels() * self.n_levels()
    }

    pub fn index(&self, s1: AtomState, s2: AtomState, na: usize, nb: usize) -> usize {
        debug_assert!(na <= self.n_fock_dyn && nb <= self.n_fock_dyn);
        let nl = self.n_levels();
        ((s1.idx() * 2 + s2.idx()) * nl + na) * nl + nb
    }

    pub fn decode(&self, k: usize) -> (AtomState, AtomState, usize, usize) {
        let nl = self.n_levels();
        let nb = k % nl;
        let rest = k / nl;
        let na = rest % nl;
        let atoms = rest / nl;
        (
            AtomState::from_idx(atoms / 2),
            AtomState::from_idx(atoms % 2),
            na,
            nb,
        )
    }

    /// Total excitation number of basis state `k`:
    /// (# atoms in `e`) + `n_a` + `n_b`.
    pub fn excitation(&self, k: usize) -> usize {
        let (s1, s2, na, nb) = self.decode(k);
        s1.excitation() + s2.excitation() + na + nb
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_decode_round_trip() {
        let basis = Basis::new(5);
        for k in 0..basis.dim() {
            let (s1, s2, na, nb) = basis.decode(k);
            assert_eq!(basis.index(s1, s2, na, nb), k);
        }
    }

    #[test]
    fn layout_is_frozen() {
        let basis = Basis::new(5);
        assert_eq!(basis.dim(), 144);
        assert_eq!(basis.index(AtomState::E, AtomState::E, 0, 0), 0);
        assert_eq!(basis.index(AtomState::E, AtomState::E, 0, 1), 1);
        assert_eq!(basis.index(AtomState::E, AtomState::E, 1, 0), 6);
        assert_eq!(basis.index(AtomState::E, AtomState::G, 0, 0), 36);
        assert_eq!(basis.index(AtomState::G, AtomState::G, 5, 5), 143);
    }

    #[test]
    fn excitation_counts_atoms_and_photons() {
        let basis = Basis::new(3);
        let k = basis.index(AtomState::E, AtomState::G, 2, 1);
        assert_eq!(basis.excitation(k), 4);
        let k = basis.index(AtomState::G, AtomState::G, 0, 0);
        assert_eq!(basis.excitation(k), 0);
    }
}
