//! Closed-form thin-lens optics with OAM-dependent focusing.

mod column;
mod matrix;
mod stack;

use serde::Serialize;

use crate::beam::BeamParameters;
use crate::constants::{E_CHARGE, HBAR, M_E};
use crate::error::{Error, Result};
use crate::fields::{AxialFieldModel, FieldIntegrals};

pub use column::{column_matrix, Aperture, ColumnField, ColumnMatrix, LensElement, OpticalColumn};
pub use matrix::{image_solve, Imaging, RayTransferMatrix};
pub use stack::{
    afocal_pair_matrix, afocal_stack_magnification, afocal_stack_matrix,
    variable_spacing_abcd, variable_spacing_magnification, AfocalMagnification, Magnification,
};

/// `e²/(8 mₑ E)`, the thin-lens prefactor in 1/(T²·m). For a relativistic
/// beam the momentum form `e²/(4p²)` is used, which is the same expression
/// with the corrected momentum.
pub fn focusing_prefactor(beam: &BeamParameters) -> f64 {
    if beam.relativistic {
        let p = beam.momentum();
        E_CHARGE * E_CHARGE / (4.0 * p * p)
    } else {
        E_CHARGE * E_CHARGE / (8.0 * M_E * beam.kinetic_energy)
    }
}

/// Result of a focal-length evaluation. Diverging and infinite focal
/// lengths are legitimate outcomes for large `|Λm|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "metres", rename_all = "lowercase")]
pub enum FocalLength {
    Converging(f64),
    /// Negative focal length.
    Diverging(f64),
    Infinite,
}

impl FocalLength {
    fn from_power(power: f64, scale: f64) -> Self {
        if power.abs() <= 1e-13 * scale {
            FocalLength::Infinite
        } else if power > 0.0 {
            FocalLength::Converging(1.0 / power)
        } else {
            FocalLength::Diverging(1.0 / power)
        }
    }

    /// Focal length in metres; `±∞` is never produced, `Infinite` maps to
    /// `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            FocalLength::Converging(f) | FocalLength::Diverging(f) => f,
            FocalLength::Infinite => f64::INFINITY,
        }
    }

    /// Optical power `1/f`, zero for an infinite focal length.
    pub fn power(self) -> f64 {
        match self {
            FocalLength::Converging(f) | FocalLength::Diverging(f) => 1.0 / f,
            FocalLength::Infinite => 0.0,
        }
    }

    pub fn is_converging(self) -> bool {
        matches!(self, FocalLength::Converging(_))
    }
}

/// `1/f_m` from precomputed integrals.
pub fn focal_power_from_integrals(
    integrals: &FieldIntegrals,
    b: f64,
    beam: &BeamParameters,
    m: i32,
) -> f64 {
    let coupling = m as f64 * HBAR / (E_CHARGE * b * b);
    focusing_prefactor(beam) * (integrals.b1_sq - coupling * integrals.b3)
}

/// Thin-lens focal length of OAM mode `m`:
/// `1/f_m = e²/(8mₑE) · ∫[B1² − (mħ/(e b²)) B3] dz`.
pub fn focal_length(model: &AxialFieldModel, beam: &BeamParameters, m: i32) -> Result<FocalLength> {
    let integrals = model.integrals()?;
    let power = focal_power_from_integrals(&integrals, model.b(), beam, m);
    let coupling = m as f64 * HBAR / (E_CHARGE * model.b() * model.b());
    let scale = focusing_prefactor(beam) * (integrals.b1_sq + (coupling * integrals.b3).abs());
    Ok(FocalLength::from_power(power, scale))
}

/// `f0`, the OAM dispersion coefficient `Λ` and the shape factor `β0` of a
/// lens, with `1/f_m = (1 − Λm)/f0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSummary {
    pub f0: f64,
    pub lambda: f64,
    pub beta0: f64,
}

impl DispersionSummary {
    /// Exact `f_m = f0/(1 − Λm)`.
    pub fn focal_length(&self, m: i32) -> FocalLength {
        FocalLength::from_power((1.0 - self.lambda * m as f64) / self.f0, 1e-3 / self.f0)
    }
}

pub fn dispersion_summary(model: &AxialFieldModel, beam: &BeamParameters) -> Result<DispersionSummary> {
    let integrals = model.integrals()?;
    if !(integrals.b1_sq > 0.0) {
        return Err(Error::domain("degenerate lens: ∫B1² dz is zero"));
    }
    let b = model.b();
    let f0 = 1.0 / (focusing_prefactor(beam) * integrals.b1_sq);
    let lambda = HBAR / (E_CHARGE * b * b) * integrals.b3 / integrals.b1_sq;
    let beta0 = lambda * E_CHARGE * model.b0() * b * b / HBAR;
    Ok(DispersionSummary { f0, lambda, beta0 })
}

/// First-order focal length `f0(1 + Λm)`.
pub fn approx_focal_length(f0: f64, lambda: f64, m: i32) -> f64 {
    f0 * (1.0 + lambda * m as f64)
}

/// Flux-quanta form `f0(1 + β1·m/n)` for a lens threaded by `n` flux quanta.
pub fn approx_focal_length_flux(f0: f64, beta1: f64, n_flux: f64, m: i32) -> f64 {
    approx_focal_length(f0, beta1 / n_flux, m)
}

/// Larmor phase `−m·√(e/(8mₑVa))·∫B1 dz` acquired by mode `m`.
pub fn larmor_phase(model: &AxialFieldModel, beam: &BeamParameters, m: i32) -> Result<f64> {
    let integrals = model.integrals()?;
    let rate = (E_CHARGE / (8.0 * M_E * beam.accelerating_voltage)).sqrt();
    Ok(-(m as f64) * rate * integrals.b1)
}

/// Spherical-aberration coefficient `C3 = e² f⁴/(8mₑE b²) ∫B1·B3 dz` of the
/// lens used at focal length `f`.
pub fn spherical_c3(model: &AxialFieldModel, beam: &BeamParameters, f: f64) -> Result<f64> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::domain(format!("focal length must be positive, got {f}")));
    }
    let integrals = model.integrals()?;
    let b = model.b();
    Ok(focusing_prefactor(beam) * f.powi(4) / (b * b) * integrals.b1_b3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Polarity;
    use crate::make_beam;
    use std::f64::consts::PI;

    fn glaser(b: f64, pol: Polarity) -> AxialFieldModel {
        AxialFieldModel::glaser(2.0, 1e-5, b, pol).unwrap()
    }

    #[test]
    fn glaser_f0_matches_closed_form() {
        let beam = make_beam(80e3).unwrap();
        let f = focal_length(&glaser(1e-7, Polarity::Positive), &beam, 0).unwrap();
        let e = E_CHARGE * 80e3;
        let exact = 16.0 * M_E * e / (E_CHARGE * E_CHARGE * 4.0 * 1e-5 * PI);
        assert!((f.value() - exact).abs() / exact < 1e-12);
        assert!((f.value() - 57.9e-3).abs() < 0.05e-3);
    }

    #[test]
    fn dispersion_coefficient_glaser() {
        let beam = make_beam(80e3).unwrap();
        let d = dispersion_summary(&glaser(100e-9, Polarity::Positive), &beam).unwrap();
        let expect = 2.0 * HBAR / (E_CHARGE * 2.0 * 1e-14);
        assert!((d.lambda - expect).abs() < 1e-12 * expect);
        assert!((d.lambda - 0.06582).abs() < 1e-5);
        let d = dispersion_summary(&glaser(79e-9, Polarity::Positive), &beam).unwrap();
        assert!((d.lambda - 0.1055).abs() < 5e-4);
        assert!((d.beta0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn polarity_negates_lambda() {
        let beam = make_beam(80e3).unwrap();
        let p = dispersion_summary(&glaser(1e-7, Polarity::Positive), &beam).unwrap();
        let n = dispersion_summary(&glaser(1e-7, Polarity::Negative), &beam).unwrap();
        assert_eq!(p.f0, n.f0);
        assert_eq!(p.lambda, -n.lambda);
    }

    #[test]
    fn exact_dispersion_relation() {
        let beam = make_beam(80e3).unwrap();
        let model = glaser(3e-7, Polarity::Positive);
        let d = dispersion_summary(&model, &beam).unwrap();
        for m in -100..=100 {
            let direct = focal_length(&model, &beam, m).unwrap().power();
            let via = (1.0 - d.lambda * m as f64) / d.f0;
            assert!((direct - via).abs() <= 1e-12 * via.abs().max(1.0 / d.f0), "m = {m}");
        }
    }

    #[test]
    fn polarity_maps_m_to_minus_m() {
        let beam = make_beam(80e3).unwrap();
        let p = glaser(1e-7, Polarity::Positive);
        let n = glaser(1e-7, Polarity::Negative);
        for m in -5..=5 {
            let a = focal_length(&p, &beam, m).unwrap().value();
            let b = focal_length(&n, &beam, -m).unwrap().value();
            assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn large_oam_diverges_or_is_infinite() {
        let beam = make_beam(80e3).unwrap();
        let model = glaser(1e-7, Polarity::Positive);
        let d = dispersion_summary(&model, &beam).unwrap();
        let f = focal_length(&model, &beam, 20).unwrap();
        assert!(matches!(f, FocalLength::Diverging(v) if v < 0.0));
        assert!((f.power() - (1.0 - 20.0 * d.lambda) / d.f0).abs() < 1e-12 / d.f0);
        // Λ = 2ħ/(eB0b²) = 1/10 for this b, so m = 10 cancels the focusing term
        let b = (2.0 * HBAR * 10.0 / (E_CHARGE * 2.0)).sqrt();
        let model = AxialFieldModel::glaser(2.0, 1e-5, b, Polarity::Positive).unwrap();
        assert_eq!(focal_length(&model, &beam, 10).unwrap(), FocalLength::Infinite);
    }

    #[test]
    fn zero_b3_makes_focal_length_m_independent() {
        let beam = make_beam(80e3).unwrap();
        let z: Vec<f64> = (0..401).map(|i| (i as f64 - 200.0) * 1e-6).collect();
        let b1: Vec<f64> = z.iter().map(|z| 2.0 / (1.0 + (z / 1e-5).powi(2))).collect();
        let b3 = vec![0.0; z.len()];
        let model = AxialFieldModel::tabulated(z, b1, b3, 1e-7, Polarity::Positive).unwrap();
        let f0 = focal_length(&model, &beam, 0).unwrap().value();
        for m in [-3, 1, 7] {
            assert_eq!(focal_length(&model, &beam, m).unwrap().value(), f0);
        }
    }

    #[test]
    fn linear_approximation() {
        assert_eq!(approx_focal_length(1.0, 0.0, 5), 1.0);
        assert!((approx_focal_length(60e-3, 0.066, 1) - 63.96e-3).abs() < 1e-12);
        assert!((approx_focal_length(60e-3, 0.066, -1) - 56.04e-3).abs() < 1e-12);
        assert_eq!(approx_focal_length_flux(2.0, 0.5, 10.0, 2), approx_focal_length(2.0, 0.05, 2));
        for i in 1..=30 {
            let x = 0.01 * i as f64;
            let exact = 1.0 / (1.0 - x);
            let rel = (approx_focal_length(1.0, x, 1) - exact).abs() / exact;
            assert!(rel <= 1.2 * x * x, "Λm = {x}");
            let exact = 1.0 / (1.0 + x);
            let rel = (approx_focal_length(1.0, x, -1) - exact).abs() / exact;
            assert!(rel <= 1.2 * x * x, "Λm = -{x}");
        }
    }

    #[test]
    fn larmor_phase_values() {
        let beam = make_beam(80e3).unwrap();
        let model = glaser(1e-7, Polarity::Positive);
        assert_eq!(larmor_phase(&model, &beam, 0).unwrap(), 0.0);
        let phi = larmor_phase(&model, &beam, 1).unwrap();
        assert!((phi + 0.0329).abs() < 5e-5, "{phi}");
        let flipped = larmor_phase(&glaser(1e-7, Polarity::Negative), &beam, 1).unwrap();
        assert_eq!(phi, -flipped);
    }

    #[test]
    fn c3_identity_and_scaling() {
        let beam = make_beam(80e3).unwrap();
        let model = glaser(1e-7, Polarity::Positive);
        let f0 = focal_length(&model, &beam, 0).unwrap().value();
        let c3 = spherical_c3(&model, &beam, f0).unwrap();
        let expect = f0.powi(3) / 1e-14;
        assert!((c3 - expect).abs() <= 1e-9 * expect);
        assert!((c3 - 1.94e10).abs() < 0.01e10);
        let c3_2 = spherical_c3(&model, &beam, 2.0 * f0).unwrap();
        assert!((c3_2 / c3 - 16.0).abs() < 1e-12);
        assert!(spherical_c3(&model, &beam, 0.0).is_err());
    }
}
