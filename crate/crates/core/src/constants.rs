//! Physical constants (CODATA 2018 exact and recommended values, SI units).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const H: f64 = 6.626_070_15e-34;
/// Elementary charge magnitude, C. The electron charge is `-E_CHARGE`.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Electron rest mass, kg.
pub const M_E: f64 = 9.109_383_701_5e-31;
/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Speed of light, m/s. Only used by the relativistic kinematics option.
pub const C_LIGHT: f64 = 299_792_458.0;

/// The constant set as a value, for reporting and hashing.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub e_charge: f64,
    pub m_e: f64,
    pub mu0: f64,
    pub h: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        e_charge: E_CHARGE,
        m_e: M_E,
        mu0: MU0,
        h: H,
    };

    /// Bit patterns of every constant, in a fixed order. Used to fingerprint
    /// run reports.
    pub fn bit_patterns(&self) -> [u64; 5] {
        [
            self.hbar.to_bits(),
            self.e_charge.to_bits(),
            self.m_e.to_bits(),
            self.mu0.to_bits(),
            self.h.to_bits(),
        ]
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codata_values_are_positive_and_consistent() {
        let c = PhysicalConstants::default();
        for v in [c.hbar, c.e_charge, c.m_e, c.mu0, c.h] {
            assert!(v > 0.0 && v.is_finite());
        }
        let rel = (c.h / (2.0 * std::f64::consts::PI) - c.hbar).abs() / c.hbar;
        assert!(rel < 1e-9, "h/2pi vs hbar: {rel}");
    }
}
