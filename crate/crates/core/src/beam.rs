//! Electron beam kinematics.

use serde::Serialize;
use std::f64::consts::PI;

use crate::constants::{C_LIGHT, E_CHARGE, H, HBAR, M_E};
use crate::error::{Error, Result};

/// Kinematic description of a monochromatic electron beam.
///
/// By default all quantities are non-relativistic: `E = e·Va`,
/// `λ = h / √(2 mₑ E)`. [`BeamParameters::relativistic`] applies the usual
/// `(1 + E / 2mₑc²)` momentum correction instead; nothing in the lens formulas
/// is adjusted for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamParameters {
    pub accelerating_voltage: f64,
    pub kinetic_energy: f64,
    pub wavelength: f64,
    pub wavenumber: f64,
    pub speed: f64,
    pub relativistic: bool,
}

impl BeamParameters {
    /// Non-relativistic beam for accelerating voltage `va` (volts).
    pub fn new(va: f64) -> Result<Self> {
        make_beam(va)
    }

    /// Beam with relativistically corrected wavelength and speed.
    pub fn relativistic(va: f64) -> Result<Self> {
        check_voltage(va)?;
        let energy = E_CHARGE * va;
        let rest = M_E * C_LIGHT * C_LIGHT;
        let momentum = (2.0 * M_E * energy * (1.0 + energy / (2.0 * rest))).sqrt();
        let wavelength = H / momentum;
        let gamma = 1.0 + energy / rest;
        Ok(Self {
            accelerating_voltage: va,
            kinetic_energy: energy,
            wavelength,
            wavenumber: 2.0 * PI / wavelength,
            speed: momentum / (gamma * M_E),
            relativistic: true,
        })
    }

    /// Momentum `ħk`, kg·m/s.
    pub fn momentum(&self) -> f64 {
        HBAR * self.wavenumber
    }
}

fn check_voltage(va: f64) -> Result<()> {
    if !(va > 0.0) || !va.is_finite() {
        return Err(Error::domain(format!(
            "accelerating voltage must be positive and finite, got {va}"
        )));
    }
    Ok(())
}

/// Builds the non-relativistic beam for accelerating voltage `va`.
pub fn make_beam(va: f64) -> Result<BeamParameters> {
    check_voltage(va)?;
    let energy = E_CHARGE * va;
    let wavelength = H / (2.0 * M_E * energy).sqrt();
    let wavenumber = 2.0 * PI / wavelength;
    Ok(BeamParameters {
        accelerating_voltage: va,
        kinetic_energy: energy,
        wavelength,
        wavenumber,
        speed: HBAR * wavenumber / M_E,
        relativistic: false,
    })
}
