//! Fundamental constants used throughout the simulation, CODATA-style values.

/// Fundamental physical constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Elementary charge, C.
    pub q: f64,
    /// Vacuum permittivity, F/m.
    pub epsilon0: f64,
    /// Bohr radius, m.
    pub a0: f64,
    /// Fine structure constant, dimensionless.
    pub alpha: f64,
}

impl PhysicalConstants {
    /// CODATA values. `alpha` is derived from `q`, `epsilon0`, `hbar` and `c`
    /// rather than hard-coded, so the identity alpha = q^2/(4 pi eps0 hbar c)
    /// holds exactly.
    pub fn codata() -> Self {
        let hbar = 1.054_571_817e-34;
        let c = 2.997_924_58e8;
        let q = 1.602_176_634e-19;
        let epsilon0 = 8.854_187_8128e-12;
        let alpha = q * q / (4.0 * std::f64::consts::PI * epsilon0 * hbar * c);
        Self {
            hbar,
            c,
            q,
            epsilon0,
            a0: 0.53e-10,
            alpha,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_matches_definition() {
        let k = PhysicalConstants::codata();
        let alpha = k.q * k.q
            / (4.0 * std::f64::consts::PI * k.epsilon0 * k.hbar * k.c);
        assert!((k.alpha - alpha).abs() / alpha < 1e-12);
        // the usual rounded value
        assert!((k.alpha - 1.0 / 137.0).abs() / (1.0 / 137.0) < 1e-3);
    }
}
