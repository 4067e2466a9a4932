//! Paraxial wave propagation in the azimuthal-spectral representation.
//!
//! A cylindrically symmetric column never couples different azimuthal orders,
//! so the wave is kept as one radial profile `u_m(ρ)` per OAM quantum number
//! `m` on a shared cell-centred grid `ρ_j = (j + ½)Δρ`. The full field is
//! `ψ(ρ, φ) = Σ_m u_m(ρ) e^{imφ}`.

mod cartesian;
mod export;
mod propagate;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{Aperture, OpticalColumn};
use crate::beam::BeamParameters;
use crate::error::{Error, Result};

pub use cartesian::{decompose, synthesize_2d, CartesianField};
pub use export::{
    write_intensity_pgm, write_phase_pgm, write_profile_csv, write_spectrum_csv, ImageSidecar,
};
pub use propagate::{
    apply_lens_slice, propagate, recommended_step, rms_radius, step, waist_position,
    AccuracyWarning, Propagation, PropagationOptions,
};

/// Uniform cell-centred radial grid `ρ_j = (j + ½)Δρ`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    pub points: usize,
    pub spacing: f64,
}

impl RadialGrid {
    pub fn new(points: usize, spacing: f64) -> Result<Self> {
        if points < 8 {
            return Err(Error::config(format!("radial grid needs at least 8 points, got {points}")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::config(format!("radial spacing must be positive, got {spacing}")));
        }
        Ok(Self { points, spacing })
    }

    /// Grid of `points` cells reaching out to `rho_max`.
    pub fn with_extent(points: usize, rho_max: f64) -> Result<Self> {
        Self::new(points, rho_max / points as f64)
    }

    pub fn rho(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing
    }

    pub fn rho_max(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    /// Area element `2πρ_jΔρ` of cell `j`.
    pub fn weight(&self, j: usize) -> f64 {
        2.0 * PI * self.rho(j) * self.spacing
    }

    pub fn power(&self, u: &[Complex64]) -> f64 {
        u.iter()
            .enumerate()
            .map(|(j, v)| v.norm_sqr() * self.weight(j))
            .sum()
    }
}

/// One Laguerre–Gaussian `p = 0` mode of a source superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LGModeSpec {
    pub m: i32,
    pub w0: f64,
    pub amplitude: Complex64,
}

impl LGModeSpec {
    pub fn new(m: i32, w0: f64) -> Self {
        Self {
            m,
            w0,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }
}

/// Radial profile of one azimuthal order together with its population.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub u: Vec<Complex64>,
    /// Share of the total probability carried by this order. Propagation
    /// through a cylindrically symmetric column cannot change it, so it is
    /// fixed when the component is created and only changes at apertures.
    pub weight: f64,
    /// Power removed from this order by the edge absorber.
    pub absorbed: f64,
}

/// Paraxial wavefunction as a set of azimuthal orders on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthalWave {
    pub grid: RadialGrid,
    pub components: BTreeMap<i32, Component>,
    pub z: f64,
    pub beam: BeamParameters,
}

impl AzimuthalWave {
    pub fn component(&self, m: i32) -> Option<&[Complex64]> {
        self.components.get(&m).map(|c| c.u.as_slice())
    }

    /// `Σ_j |u_m|²·2πρ_jΔρ` recomputed from the profile.
    pub fn component_power(&self, m: i32) -> f64 {
        self.components
            .get(&m)
            .map_or(0.0, |c| self.grid.power(&c.u))
    }

    /// Total power on the grid.
    pub fn norm(&self) -> f64 {
        self.components.values().map(|c| self.grid.power(&c.u)).sum()
    }

    /// Power taken out by the edge absorber so far.
    pub fn absorbed(&self) -> f64 {
        self.components.values().map(|c| c.absorbed).sum()
    }
}

fn lg_profile(grid: &RadialGrid, m: i32, w0: f64) -> Vec<Complex64> {
    let am = m.unsigned_abs() as i32;
    (0..grid.points)
        .map(|j| {
            let x = grid.rho(j) / w0;
            let v = (std::f64::consts::SQRT_2 * x).powi(am) * (-x * x).exp();
            Complex64::new(v, 0.0)
        })
        .collect()
}

/// Builds a normalised superposition of LG modes at plane `z`.
pub fn lg_mode(
    specs: &[LGModeSpec],
    grid: RadialGrid,
    beam: BeamParameters,
    z: f64,
) -> Result<AzimuthalWave> {
    if specs.is_empty() {
        return Err(Error::config("source needs at least one mode"));
    }
    let mut components: BTreeMap<i32, Component> = BTreeMap::new();
    for s in specs {
        if !(s.w0 > 0.0) || !s.w0.is_finite() {
            return Err(Error::config(format!("waist must be positive, got {}", s.w0)));
        }
        if grid.spacing > s.w0 / 16.0 {
            return Err(Error::config(format!(
                "radial spacing {:e} m exceeds w0/16 = {:e} m for m = {}",
                grid.spacing,
                s.w0 / 16.0,
                s.m
            )));
        }
        let needed = 4.0 * s.w0 * (s.m.unsigned_abs() as f64 / 2.0 + 1.0).sqrt();
        if grid.rho_max() < needed {
            return Err(Error::config(format!(
                "grid extent {:e} m is below 4·w0·√(|m|/2 + 1) = {:e} m for m = {}",
                grid.rho_max(),
                needed,
                s.m
            )));
        }
        let mut u = lg_profile(&grid, s.m, s.w0);
        let p = grid.power(&u);
        let scale = s.amplitude / p.sqrt();
        for v in &mut u {
            *v *= scale;
        }
        let entry = components.entry(s.m).or_insert_with(|| Component {
            u: vec![Complex64::new(0.0, 0.0); grid.points],
            weight: 0.0,
            absorbed: 0.0,
        });
        for (a, b) in entry.u.iter_mut().zip(&u) {
            *a += b;
        }
    }
    let total: f64 = components.values().map(|c| grid.power(&c.u)).sum();
    if !(total > 0.0) {
        return Err(Error::config("source superposition has zero power"));
    }
    let scale = 1.0 / total.sqrt();
    for c in components.values_mut() {
        for v in &mut c.u {
            *v *= scale;
        }
        c.weight = grid.power(&c.u);
    }
    Ok(AzimuthalWave {
        grid,
        components,
        z,
        beam,
    })
}

/// Power fraction per azimuthal order.
pub type OAMSpectrum = BTreeMap<i32, f64>;

/// Population of each azimuthal order, normalised to unit sum.
pub fn oam_spectrum(wave: &AzimuthalWave) -> OAMSpectrum {
    let total: f64 = wave.components.values().map(|c| c.weight).sum();
    wave.components
        .iter()
        .map(|(&m, c)| (m, if total > 0.0 { c.weight / total } else { 0.0 }))
        .collect()
}

/// Same quantity recomputed from the current profiles, including absorbed
/// power. Agrees with [`oam_spectrum`] up to roundoff in the propagator.
pub fn oam_spectrum_from_profiles(wave: &AzimuthalWave) -> OAMSpectrum {
    let powers: Vec<(i32, f64)> = wave
        .components
        .iter()
        .map(|(&m, c)| (m, wave.grid.power(&c.u) + c.absorbed))
        .collect();
    let total: f64 = powers.iter().map(|p| p.1).sum();
    powers
        .into_iter()
        .map(|(m, p)| (m, if total > 0.0 { p / total } else { 0.0 }))
        .collect()
}

/// Area of cell `j` inside radius `r`, as a fraction of the cell.
fn cell_fraction(grid: &RadialGrid, j: usize, r: f64) -> f64 {
    let lo = j as f64 * grid.spacing;
    let hi = lo + grid.spacing;
    if r >= hi {
        1.0
    } else if r <= lo {
        0.0
    } else {
        (r * r - lo * lo) / (hi * hi - lo * lo)
    }
}

/// Fraction of each order's current power inside `ρ ≤ radius`.
pub fn aperture_transmission(wave: &AzimuthalWave, radius: f64) -> Result<BTreeMap<i32, f64>> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("aperture radius must be positive, got {radius}")));
    }
    let g = &wave.grid;
    Ok(wave
        .components
        .iter()
        .map(|(&m, c)| {
            let total = g.power(&c.u);
            let inside: f64 = c
                .u
                .iter()
                .enumerate()
                .map(|(j, v)| v.norm_sqr() * g.weight(j) * cell_fraction(g, j, radius))
                .sum();
            (m, if total > 0.0 { inside / total } else { 0.0 })
        })
        .collect())
}

/// Hard-edge aperture: the wave is cut at `radius` and renormalised. Returns
/// the new wave and the total probability that was transmitted.
pub fn apply_aperture(wave: &AzimuthalWave, radius: f64) -> Result<(AzimuthalWave, f64)> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("aperture radius must be positive, got {radius}")));
    }
    let mut out = wave.clone();
    let g = wave.grid;
    for c in out.components.values_mut() {
        for (j, v) in c.u.iter_mut().enumerate() {
            *v *= cell_fraction(&g, j, radius).sqrt();
        }
        c.absorbed = 0.0;
    }
    let transmitted = out.norm();
    if !(transmitted > 0.0) {
        return Err(Error::NotFound("aperture transmits nothing".into()));
    }
    let scale = 1.0 / transmitted.sqrt();
    for c in out.components.values_mut() {
        for v in &mut c.u {
            *v *= scale;
        }
        c.weight = g.power(&c.u);
    }
    Ok((out, transmitted))
}

/// Aperture contrast for one lens polarity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichroismArm {
    /// Sign of the first element's polarity.
    pub polarity: f64,
    /// Probability of each order that passes the aperture.
    pub transmitted: BTreeMap<i32, f64>,
    /// `[P(+1) − P(−1)] / [P(+1) + P(−1)]` of the transmitted probabilities.
    pub contrast: f64,
}

/// Propagates `source` through `column` and its polarity-flipped twin to
/// the aperture plane and compares the transmitted `m = ±1` probability.
pub fn dichroism(
    source: &AzimuthalWave,
    column: &OpticalColumn,
    aperture: Aperture,
    options: &PropagationOptions,
) -> Result<[DichroismArm; 2]> {
    let arm = |col: &OpticalColumn| -> Result<DichroismArm> {
        let run = propagate(source, col, &[aperture.z], options)?;
        let wave = &run.final_wave;
        // the source is normalised, so power inside the aperture is probability
        let transmitted: BTreeMap<i32, f64> = aperture_transmission(wave, aperture.radius)?
            .into_iter()
            .map(|(m, t)| (m, t * wave.component_power(m)))
            .collect();
        let p = transmitted.get(&1).copied().unwrap_or(0.0);
        let n = transmitted.get(&-1).copied().unwrap_or(0.0);
        let contrast = if p + n > 0.0 { (p - n) / (p + n) } else { 0.0 };
        let polarity = col
            .elements()
            .first()
            .map_or(0.0, |e| e.model.polarity().sign());
        Ok(DichroismArm {
            polarity,
            transmitted,
            contrast,
        })
    };
    Ok([arm(column)?, arm(&column.flipped())?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_beam;

    fn grid() -> RadialGrid {
        RadialGrid::with_extent(2048, 10e-6).unwrap()
    }

    fn moment2(wave: &AzimuthalWave, m: i32) -> f64 {
        let g = wave.grid;
        let u = wave.component(m).unwrap();
        let num: f64 = u
            .iter()
            .enumerate()
            .map(|(j, v)| v.norm_sqr() * g.weight(j) * g.rho(j).powi(2))
            .sum();
        num / g.power(u)
    }

    #[test]
    fn gaussian_second_moment() {
        let beam = make_beam(80e3).unwrap();
        let w0 = 1e-6;
        let w = lg_mode(&[LGModeSpec::new(0, w0)], grid(), beam, 0.0).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-14);
        assert!((moment2(&w, 0) - w0 * w0 / 2.0).abs() < 1e-5 * w0 * w0, "{}", moment2(&w, 0) / (w0 * w0));
    }

    #[test]
    fn lg_moments_and_peak() {
        let beam = make_beam(80e3).unwrap();
        let w0 = 1e-6;
        for m in [1, -3, 8] {
            let w = lg_mode(&[LGModeSpec::new(m, w0)], grid(), beam, 0.0).unwrap();
            let expect = w0 * w0 * (m.abs() as f64 + 1.0) / 2.0;
            assert!((moment2(&w, m) - expect).abs() < 1e-6 * expect, "m = {m}");
            let u = w.component(m).unwrap();
            let jmax = (0..u.len())
                .max_by(|&a, &b| u[a].norm().total_cmp(&u[b].norm()))
                .unwrap();
            let peak = w0 * (m.abs() as f64 / 2.0).sqrt();
            assert!((w.grid.rho(jmax) - peak).abs() <= w.grid.spacing);
        }
    }

    #[test]
    fn superposition_spectrum() {
        let beam = make_beam(80e3).unwrap();
        let w = lg_mode(
            &[LGModeSpec::new(8, 1e-6), LGModeSpec::new(-8, 1e-6)],
            grid(),
            beam,
            0.0,
        )
        .unwrap();
        let s = oam_spectrum(&w);
        assert!((s[&8] - 0.5).abs() < 1e-14 && (s[&-8] - 0.5).abs() < 1e-14);
        let single = lg_mode(&[LGModeSpec::new(3, 1e-6)], grid(), beam, 0.0).unwrap();
        assert_eq!(oam_spectrum(&single)[&3], 1.0);
    }

    #[test]
    fn unresolved_grid_is_a_config_error() {
        let beam = make_beam(80e3).unwrap();
        let coarse = RadialGrid::with_extent(64, 10e-6).unwrap();
        let err = lg_mode(&[LGModeSpec::new(0, 1e-6)], coarse, beam, 0.0).unwrap_err();
        assert!(matches!(&err, Error::Config(msg) if msg.contains("w0/16")));
        let small = RadialGrid::with_extent(4096, 3e-6).unwrap();
        let err = lg_mode(&[LGModeSpec::new(8, 1e-6)], small, beam, 0.0).unwrap_err();
        assert!(matches!(&err, Error::Config(msg) if msg.contains("4·w0")));
    }

    #[test]
    fn aperture_limits() {
        let beam = make_beam(80e3).unwrap();
        let w = lg_mode(
            &[LGModeSpec::new(0, 1e-6), LGModeSpec::new(2, 1e-6)],
            grid(),
            beam,
            0.0,
        )
        .unwrap();
        let all = aperture_transmission(&w, 1.0).unwrap();
        assert!(all.values().all(|&t| (t - 1.0).abs() < 1e-14));
        let tiny = aperture_transmission(&w, 1e-12).unwrap();
        assert!(tiny[&2] < 1e-20);
        // m = 0 Gaussian: fraction inside r is 1 − exp(−2r²/w0²)
        let t = aperture_transmission(&w, 1e-6).unwrap()[&0];
        assert!((t - (1.0 - (-2.0f64).exp())).abs() < 1e-5, "{t}");
        assert!(aperture_transmission(&w, 0.0).is_err());
    }

    #[test]
    fn hard_aperture_renormalises() {
        let beam = make_beam(80e3).unwrap();
        let w = lg_mode(
            &[LGModeSpec::new(0, 1e-6), LGModeSpec::new(2, 1e-6)],
            grid(),
            beam,
            0.0,
        )
        .unwrap();
        let (cut, t) = apply_aperture(&w, 0.8e-6).unwrap();
        assert!(t > 0.0 && t < 1.0);
        assert!((cut.norm() - 1.0).abs() < 1e-14);
        let s = oam_spectrum(&cut);
        assert!(s[&0] > s[&2]);
    }
}
