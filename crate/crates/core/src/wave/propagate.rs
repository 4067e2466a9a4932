//! Strang-split Crank–Nicolson stepping of each azimuthal order.
//!
//! Per order `m` the paraxial equation is
//! `∂u/∂z = (i/2k)[∂²u/∂ρ² + (1/ρ)∂u/∂ρ − m²u/ρ²] − iV_m(ρ, z)u` with
//! `V_m = (e²/(8ħ²k))·[B1² − (mħ/e)·B3/b²]·ρ² + m·e·B1/(2ħk)`.
//! The radial operator is discretised in flux form on the cell-centred grid,
//! which makes it `−W⁻¹S/Δρ²` with `W = diag(j + ½)` and `S` real symmetric,
//! so the Crank–Nicolson step `(W + iαS)u' = (W − iαS)u` conserves
//! `Σ(j + ½)|u_j|²` exactly. The inner boundary has zero flux through `ρ = 0`;
//! the outer one is `u = 0` just beyond the grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{AzimuthalWave, Component, RadialGrid};
use crate::analytic::{focusing_prefactor, OpticalColumn};
use crate::beam::BeamParameters;
use crate::constants::{E_CHARGE, HBAR};
use crate::error::{Error, Result};
use crate::numerics::roots::parabolic_minimum;
use crate::numerics::tridiag::TridiagonalLu;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationOptions {
    /// Free-space step is `step_scale·k/⟨q²⟩`, with `⟨q²⟩` the mean squared
    /// radial wavenumber of the order.
    pub step_scale: f64,
    /// Steps per field extent inside a lens.
    pub lens_steps_per_extent: f64,
    /// Outer fraction of the grid covered by the absorbing ramp.
    pub absorber_fraction: f64,
    /// Peak absorption rate times the ramp width; zero disables the ramp.
    pub absorber_strength: f64,
    pub max_step: Option<f64>,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            step_scale: 0.05,
            lens_steps_per_extent: 50.0,
            absorber_fraction: 0.1,
            absorber_strength: 10.0,
            max_step: None,
        }
    }
}

/// Step size above the accuracy bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyWarning {
    pub requested_dz: f64,
    pub recommended_dz: f64,
}

impl std::fmt::Display for AccuracyWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "step {:e} m exceeds the accuracy bound; use dz ≤ {:e} m",
            self.requested_dz, self.recommended_dz
        )
    }
}

/// Snapshots at the requested planes and the wave at the last one.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub snapshots: Vec<(f64, AzimuthalWave)>,
    pub final_wave: AzimuthalWave,
    /// Number of Strang steps taken per order.
    pub steps: Vec<(i32, usize)>,
}

fn absorber_profile(grid: &RadialGrid, opts: &PropagationOptions) -> Vec<f64> {
    let width = opts.absorber_fraction * grid.rho_max();
    let start = grid.rho_max() - width;
    (0..grid.points)
        .map(|j| {
            let r = grid.rho(j);
            if opts.absorber_strength <= 0.0 || width <= 0.0 || r <= start {
                0.0
            } else {
                let t = (r - start) / width;
                opts.absorber_strength / width * t * t
            }
        })
        .collect()
}

/// RMS radius `√⟨ρ²⟩` of order `m`, or `None` if it is absent or empty.
pub fn rms_radius(wave: &AzimuthalWave, m: i32) -> Option<f64> {
    wave.component(m).and_then(|u| profile_rms(&wave.grid, u))
}

fn profile_rms(grid: &RadialGrid, u: &[Complex64]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (j, v) in u.iter().enumerate() {
        let w = v.norm_sqr() * grid.weight(j);
        den += w;
        num += w * grid.rho(j) * grid.rho(j);
    }
    (den > 0.0).then(|| (num / den).sqrt())
}

fn lens_step(column: &OpticalColumn, z: f64, per_extent: f64) -> f64 {
    column
        .elements()
        .iter()
        .map(|e| {
            let ext = e.model.extent();
            let d = (z - e.z_center).abs();
            if d <= 2.0 * ext {
                ext / per_extent
            } else {
                (d - ext) / per_extent
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// `⟨q²⟩ = u†Su / (u†Wu·Δρ²)`, the mean squared transverse wavenumber of one
/// order including the centrifugal part.
fn mean_q2(grid: &RadialGrid, m: i32, u: &[Complex64]) -> Option<f64> {
    let m2 = (m as f64) * (m as f64);
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..u.len() {
        let w = j as f64 + 0.5;
        den += w * u[j].norm_sqr();
        num += m2 / w * u[j].norm_sqr();
        let next = u.get(j + 1).copied().unwrap_or_default();
        num += (j + 1) as f64 * (next - u[j]).norm_sqr();
    }
    (den > 0.0 && num > 0.0).then(|| num / (den * grid.spacing * grid.spacing))
}

/// Free-space step `step_scale·k/⟨q²⟩`. For a Gaussian at its waist this is
/// `step_scale` Rayleigh ranges.
fn free_step(grid: &RadialGrid, k: f64, m: i32, u: &[Complex64], opts: &PropagationOptions) -> f64 {
    let q2 = mean_q2(grid, m, u).unwrap_or(1.0 / (grid.spacing * grid.spacing));
    let mut dz = opts.step_scale * k / q2;
    if let Some(cap) = opts.max_step {
        dz = dz.min(cap);
    }
    dz
}

fn component_step(
    grid: &RadialGrid,
    k: f64,
    m: i32,
    u: &[Complex64],
    column: &OpticalColumn,
    z: f64,
    opts: &PropagationOptions,
) -> f64 {
    free_step(grid, k, m, u, opts).min(lens_step(column, z, opts.lens_steps_per_extent))
}

/// Largest step the propagator would take from the wave's current plane.
pub fn recommended_step(
    wave: &AzimuthalWave,
    column: &OpticalColumn,
    opts: &PropagationOptions,
) -> f64 {
    wave.components
        .iter()
        .map(|(&m, c)| component_step(&wave.grid, wave.beam.wavenumber, m, &c.u, column, wave.z, opts))
        .fold(f64::INFINITY, f64::min)
}

/// Pieces of one order's evolution that do not change between steps.
struct Stepper<'a> {
    grid: RadialGrid,
    beam: BeamParameters,
    column: &'a OpticalColumn,
    m: i32,
    rho2: Vec<f64>,
    gamma: Vec<f64>,
    weight: Vec<f64>,
    s_diag: Vec<f64>,
    s_off: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    fn new(
        grid: RadialGrid,
        beam: BeamParameters,
        column: &'a OpticalColumn,
        m: i32,
        opts: &PropagationOptions,
    ) -> Self {
        let n = grid.points;
        let m2 = (m as f64) * (m as f64);
        let weight: Vec<f64> = (0..n).map(|j| j as f64 + 0.5).collect();
        let s_diag = (0..n)
            .map(|j| (2 * j + 1) as f64 + m2 / (j as f64 + 0.5))
            .collect();
        // coupling between j and j + 1
        let s_off = (0..n).map(|j| -((j + 1) as f64)).collect();
        Self {
            grid,
            beam,
            column,
            m,
            rho2: (0..n).map(|j| grid.rho(j).powi(2)).collect(),
            gamma: absorber_profile(&grid, opts),
            weight,
            s_diag,
            s_off,
            scratch: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Multiplies by `exp(−iV_m·dz − γ·dz)` with the field taken at `z`.
    /// Returns the power removed by the absorber.
    fn potential(&self, u: &mut [Complex64], z: f64, dz: f64) -> f64 {
        let f = self.column.field_at(z);
        let k = self.beam.wavenumber;
        let p = self.beam.momentum();
        let lz = self.m as f64 * HBAR;
        let quad = 0.5 * k * focusing_prefactor(&self.beam)
            * (f.b1 * f.b1 - lz * f.b3_over_b2 / E_CHARGE);
        let larmor = self.m as f64 * E_CHARGE * f.b1 / (2.0 * p);
        let mut lost = 0.0;
        for j in 0..u.len() {
            let phase = -(quad * self.rho2[j] + larmor) * dz;
            let g = self.gamma[j];
            if g > 0.0 {
                let before = u[j].norm_sqr();
                u[j] *= Complex64::from_polar((-g * dz).exp(), phase);
                lost += (before - u[j].norm_sqr()) * self.grid.weight(j);
            } else if phase != 0.0 {
                u[j] *= Complex64::from_polar(1.0, phase);
            }
        }
        lost
    }

    fn diffract(&mut self, u: &mut [Complex64], dz: f64) -> Result<()> {
        let n = u.len();
        let alpha = dz / (4.0 * self.beam.wavenumber * self.grid.spacing * self.grid.spacing);
        let ia = Complex64::new(0.0, alpha);
        // right-hand side (W − iαS)u
        for j in 0..n {
            let mut s = self.s_diag[j] * u[j];
            if j > 0 {
                s += self.s_off[j - 1] * u[j - 1];
            }
            if j + 1 < n {
                s += self.s_off[j] * u[j + 1];
            }
            self.scratch[j] = self.weight[j] * u[j] - ia * s;
        }
        let lower: Vec<Complex64> = (0..n)
            .map(|j| if j == 0 { Complex64::new(0.0, 0.0) } else { ia * self.s_off[j - 1] })
            .collect();
        let diag: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(self.weight[j], alpha * self.s_diag[j]))
            .collect();
        let upper: Vec<Complex64> = (0..n)
            .map(|j| if j + 1 < n { ia * self.s_off[j] } else { Complex64::new(0.0, 0.0) })
            .collect();
        let lu = TridiagonalLu::new(&lower, &diag, &upper)?;
        lu.solve_in_place(&mut self.scratch);
        u.copy_from_slice(&self.scratch);
        Ok(())
    }

    /// One Strang step `½V, D, ½V` with the field sampled at the midpoint.
    fn strang(&mut self, c: &mut Component, z: f64, dz: f64) -> Result<()> {
        let zm = z + 0.5 * dz;
        c.absorbed += self.potential(&mut c.u, zm, 0.5 * dz);
        self.diffract(&mut c.u, dz)?;
        c.absorbed += self.potential(&mut c.u, zm, 0.5 * dz);
        Ok(())
    }
}

/// Advances every order by `dz`. Inside a lens the step is taken as given and
/// a warning is returned if it exceeds the lens bound; the free-space
/// accuracy bound is met by splitting into sub-steps.
pub fn step(
    wave: &AzimuthalWave,
    dz: f64,
    column: &OpticalColumn,
    opts: &PropagationOptions,
) -> Result<(AzimuthalWave, Option<AccuracyWarning>)> {
    if !(dz > 0.0) || !dz.is_finite() {
        return Err(Error::domain(format!("step must be positive, got {dz}")));
    }
    let bound = lens_step(column, wave.z, opts.lens_steps_per_extent);
    let warning = (dz > bound * (1.0 + 1e-9)).then_some(AccuracyWarning {
        requested_dz: dz,
        recommended_dz: bound,
    });
    let k = wave.beam.wavenumber;
    let mut out = wave.clone();
    for (&m, c) in out.components.iter_mut() {
        let mut st = Stepper::new(wave.grid, wave.beam, column, m, opts);
        let mut z = wave.z;
        let end = wave.z + dz;
        while z < end {
            let h = free_step(&wave.grid, k, m, &c.u, opts);
            let remaining = end - z;
            let h = if remaining <= 1.01 * h { remaining } else { h };
            st.strang(c, z, h)?;
            z = if h == remaining { end } else { z + h };
        }
    }
    out.z = wave.z + dz;
    Ok((out, warning))
}

/// Applies only the lens phases accumulated between `z0` and `z1` (no
/// diffraction), using the same step schedule as [`propagate`].
pub fn apply_lens_slice(
    wave: &AzimuthalWave,
    column: &OpticalColumn,
    z1: f64,
    opts: &PropagationOptions,
) -> Result<AzimuthalWave> {
    if !(z1 >= wave.z) {
        return Err(Error::domain("lens slice must run forward in z"));
    }
    let mut out = wave.clone();
    for (&m, c) in out.components.iter_mut() {
        let st = Stepper::new(wave.grid, wave.beam, column, m, opts);
        let mut z = wave.z;
        while z < z1 {
            let mut dz = lens_step(column, z, opts.lens_steps_per_extent);
            if let Some(cap) = opts.max_step {
                dz = dz.min(cap);
            }
            let dz = dz.min(z1 - z);
            c.absorbed += st.potential(&mut c.u, z + 0.5 * dz, dz);
            z += dz;
        }
    }
    out.z = z1;
    Ok(out)
}

/// Propagates `wave` through `column`, recording the wave at each plane.
/// Orders evolve independently and in parallel; results do not depend on
/// the number of threads.
pub fn propagate(
    wave: &AzimuthalWave,
    column: &OpticalColumn,
    planes: &[f64],
    opts: &PropagationOptions,
) -> Result<Propagation> {
    if planes.is_empty() {
        return Err(Error::domain("at least one sample plane is required"));
    }
    if planes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("sample planes must be sorted"));
    }
    if planes[0] < wave.z || planes.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain(format!(
            "sample planes must be finite and not before the wave at z = {:e}",
            wave.z
        )));
    }
    let k = wave.beam.wavenumber;
    let items: Vec<(i32, Component)> = wave
        .components
        .iter()
        .map(|(&m, c)| (m, c.clone()))
        .collect();
    let per_m: Vec<Result<(i32, Vec<Component>, usize)>> = items
        .into_par_iter()
        .map(|(m, mut c)| {
            let mut st = Stepper::new(wave.grid, wave.beam, column, m, opts);
            let mut z = wave.z;
            let mut shots = Vec::with_capacity(planes.len());
            let mut steps = 0usize;
            for &target in planes {
                while z < target {
                    let dz = component_step(&wave.grid, k, m, &c.u, column, z, opts);
                    let remaining = target - z;
                    // avoid a sliver of a step just before the plane
                    let dz = if remaining <= 1.01 * dz { remaining } else { dz };
                    st.strang(&mut c, z, dz)?;
                    z = if dz == remaining { target } else { z + dz };
                    steps += 1;
                }
                shots.push(c.clone());
            }
            Ok((m, shots, steps))
        })
        .collect();
    let mut snapshots: Vec<(f64, AzimuthalWave)> = planes
        .iter()
        .map(|&z| {
            (
                z,
                AzimuthalWave {
                    grid: wave.grid,
                    components: Default::default(),
                    z,
                    beam: wave.beam,
                },
            )
        })
        .collect();
    let mut steps = Vec::new();
    for r in per_m {
        let (m, shots, n) = r?;
        steps.push((m, n));
        for (snap, c) in snapshots.iter_mut().zip(shots) {
            snap.1.components.insert(m, c);
        }
    }
    let final_wave = snapshots.last().map(|s| s.1.clone()).expect("planes not empty");
    Ok(Propagation {
        snapshots,
        final_wave,
        steps,
    })
}

/// Plane of minimum RMS radius of order `m`, refined by a parabola through
/// the smallest sample and its neighbours.
pub fn waist_position(snapshots: &[(f64, AzimuthalWave)], m: i32) -> Result<f64> {
    if snapshots.len() < 3 {
        return Err(Error::NotFound("need at least three snapshots".into()));
    }
    let radii: Vec<(f64, f64)> = snapshots
        .iter()
        .map(|(z, w)| {
            rms_radius(w, m)
                .map(|r| (*z, r))
                .ok_or_else(|| Error::NotFound(format!("order {m} missing from snapshot")))
        })
        .collect::<Result<_>>()?;
    let i = (0..radii.len())
        .min_by(|&a, &b| radii[a].1.total_cmp(&radii[b].1))
        .expect("non-empty");
    if i == 0 || i == radii.len() - 1 {
        return Err(Error::NotFound(format!(
            "RMS radius of order {m} has no bracketed minimum in the sampled range"
        )));
    }
    let x = [radii[i - 1].0, radii[i].0, radii[i + 1].0];
    let y = [radii[i - 1].1, radii[i].1, radii[i + 1].1];
    Ok(parabolic_minimum(x, y).unwrap_or(x[1]))
}
