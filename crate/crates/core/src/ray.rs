//! Semiclassical radial ray tracing with conserved canonical OAM.
//!
//! The Hamiltonian of a paraxial electron in the model potential
//! `A_φ = B1ρ/2 − B3ρ³/(8b²)` with conserved canonical angular momentum
//! `L_z = mħ` reduces, after eliminating `φ` and trading time for `z = vt`,
//! to
//!
//! ```text
//! ρ'' = (mħ/p)²/ρ³ − [e²B1² − e·mħ·B3/b²]·ρ/(4p²)
//! ```
//!
//! with `p = mₑv`. The first term is the centrifugal barrier, the second
//! collects the `(eA_φ)²` focusing term and the `L_z·A_φ` cross term to
//! leading order in `ρ/b`. Integrating the focusing term across a thin lens
//! gives a slope change `−ρ/f_m` with the thin-lens `f_m`. Several elements are
//! handled by summing `B1` and `B3/b²` over the column.

use std::io::Write;

use serde::Serialize;

use crate::analytic::{ColumnField, OpticalColumn};
use crate::beam::BeamParameters;
use crate::constants::{E_CHARGE, HBAR};
use crate::error::{Error, Result};
use crate::numerics::ode::{dopri5, rk4_fixed, Control, OdeOptions};
use crate::numerics::roots::linear_zero;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayState {
    pub z: f64,
    pub rho: f64,
    pub rho_prime: f64,
    pub m: i32,
}

/// Sampled path of one ray. `m` is the same for every sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayTrajectory {
    pub m: i32,
    pub samples: Vec<RayState>,
    /// Free-form description of the column that produced the path.
    pub provenance: String,
}

/// Launch radius for representative rays: the intensity peak `w0·√(|m|/2)` of the
/// LG mode, or `w0/√2` (the 1/e intensity radius) for `m = 0`, whose peak is
/// on the axis.
pub fn launch_radius(w0: f64, m: i32) -> f64 {
    if m == 0 {
        w0 / std::f64::consts::SQRT_2
    } else {
        w0 * (m.unsigned_abs() as f64 / 2.0).sqrt()
    }
}

fn acceleration(rho: f64, m: i32, field: ColumnField, beam: &BeamParameters) -> Result<f64> {
    let p = beam.momentum();
    let lz = m as f64 * HBAR;
    if m != 0 && !(rho > 0.0) {
        return Err(Error::Singularity(format!(
            "ray with m = {m} reached ρ = {rho:e}; the centrifugal term diverges"
        )));
    }
    let centrifugal = if m == 0 {
        0.0
    } else {
        let c = lz / p;
        c * c / (rho * rho * rho)
    };
    let focusing = (E_CHARGE * E_CHARGE * field.b1 * field.b1 - E_CHARGE * lz * field.b3_over_b2)
        / (4.0 * p * p);
    Ok(centrifugal - focusing * rho)
}

/// `d²ρ/dz²` at `state` in the summed field of `column`.
pub fn radial_rhs(state: &RayState, column: &OpticalColumn, beam: &BeamParameters) -> Result<f64> {
    acceleration(state.rho, state.m, column.field_at(state.z), beam)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stepping {
    /// Dormand–Prince 5(4) with the given relative tolerance.
    Adaptive { rel_tol: f64 },
    /// Classical RK4 with a fixed number of equal steps; reproducible
    /// bit-for-bit.
    Fixed { steps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    pub stepping: Stepping,
    /// Largest step. Near an element the step is always capped at half its
    /// extent.
    pub max_step: Option<f64>,
    /// Planes at which to record the ray (adaptive mode only). When empty,
    /// every accepted step is recorded.
    pub sample_planes: Vec<f64>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            stepping: Stepping::Adaptive { rel_tol: 1e-10 },
            max_step: None,
            sample_planes: Vec::new(),
        }
    }
}

impl TraceOptions {
    pub fn adaptive(rel_tol: f64) -> Self {
        Self {
            stepping: Stepping::Adaptive { rel_tol },
            ..Default::default()
        }
    }

    pub fn fixed(steps: usize) -> Self {
        Self {
            stepping: Stepping::Fixed { steps },
            ..Default::default()
        }
    }

    pub fn with_samples(mut self, planes: Vec<f64>) -> Self {
        self.sample_planes = planes;
        self
    }
}

fn describe(column: &OpticalColumn) -> String {
    if column.is_empty() {
        return "field-free".to_string();
    }
    column
        .elements()
        .iter()
        .map(|e| {
            format!(
                "{:?}(B0={:e} T, extent={:e} m, b={:e} m, {:?}) at z={:e} m",
                e.model.kind(),
                e.model.b0(),
                e.model.extent(),
                e.model.b(),
                e.model.polarity(),
                e.z_center
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Splits `[z0, z_end]` at the edges of each element's window
/// `z_center ± 20·extent`. Inside a window the step is capped at half the
/// extent; between windows only by the segment length.
fn segments(column: &OpticalColumn, z0: f64, z_end: f64) -> Vec<(f64, f64, f64)> {
    let windows: Vec<(f64, f64, f64)> = column
        .elements()
        .iter()
        .map(|e| {
            let ext = e.model.extent();
            let (lo, hi) = e.model.support();
            let half = (20.0 * ext).max(0.0);
            (
                (e.z_center - half).max(e.z_center + lo),
                (e.z_center + half).min(e.z_center + hi),
                0.5 * ext,
            )
        })
        .collect();
    let mut cuts = vec![z0, z_end];
    for &(lo, hi, _) in &windows {
        cuts.extend([lo, hi].into_iter().filter(|&c| c > z0 && c < z_end));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let cap = windows
                .iter()
                .filter(|&&(lo, hi, _)| lo < w[1] && hi > w[0])
                .map(|&(_, _, c)| c)
                .fold(w[1] - w[0], f64::min);
            (w[0], w[1], cap)
        })
        .collect()
}

/// Integrates a ray from `initial.z` to `z_end` through `column`.
pub fn trace(
    initial: RayState,
    column: &OpticalColumn,
    beam: &BeamParameters,
    z_end: f64,
    options: &TraceOptions,
) -> Result<RayTrajectory> {
    let z0 = initial.z;
    if !(z_end > z0) || !z_end.is_finite() || !z0.is_finite() {
        return Err(Error::domain(format!("trace range [{z0:e}, {z_end:e}] is empty")));
    }
    if !initial.rho.is_finite() || !initial.rho_prime.is_finite() {
        return Err(Error::domain("initial ray state must be finite"));
    }
    let m = initial.m;
    let rhs = |z: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        Ok([y[1], acceleration(y[0], m, column.field_at(z), beam)?])
    };
    // probe the start so a singular launch is reported as such
    rhs(z0, &[initial.rho, initial.rho_prime])?;
    let state = |z: f64, y: &[f64; 2]| RayState {
        z,
        rho: y[0],
        rho_prime: y[1],
        m,
    };
    let mut samples = Vec::new();
    match options.stepping {
        Stepping::Adaptive { rel_tol } => {
            if !(rel_tol > 1e-14 && rel_tol < 1e-3) {
                return Err(Error::domain(format!(
                    "relative tolerance must lie in (1e-14, 1e-3), got {rel_tol:e}"
                )));
            }
            let planes = &options.sample_planes;
            if planes.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::domain("sample planes must be sorted"));
            }
            if planes.iter().any(|&p| p < z0 || p > z_end) {
                return Err(Error::domain("sample planes must lie within the trace range"));
            }
            let rho_scale = initial.rho.abs().max(1e-12);
            let y0 = [initial.rho, initial.rho_prime];
            let mut next = 0;
            if planes.is_empty() {
                samples.push(state(z0, &y0));
            }
            while next < planes.len() && planes[next] == z0 {
                samples.push(state(z0, &y0));
                next += 1;
            }
            let mut y = y0;
            for (za, zb, cap) in segments(column, z0, z_end) {
                let max_step = options.max_step.map_or(cap, |m| m.min(cap));
                let opts = OdeOptions::new(
                    rel_tol,
                    [1e-3 * rel_tol * rho_scale, 1e-3 * rel_tol * rho_scale / cap.min(zb - za)],
                    max_step,
                );
                y = dopri5(rhs, za, y, zb, &opts, |dense, y| {
                    if planes.is_empty() {
                        samples.push(state(dense.z1(), y));
                    } else {
                        while next < planes.len() && planes[next] <= dense.z1() {
                            let z = planes[next];
                            let y = if z == dense.z1() { *y } else { dense.eval(z) };
                            samples.push(state(z, &y));
                            next += 1;
                        }
                    }
                    Ok(Control::Continue)
                })?
                .1;
            }
        }
        Stepping::Fixed { steps } => {
            rk4_fixed(rhs, z0, [initial.rho, initial.rho_prime], z_end, steps, |z, y| {
                samples.push(state(z, y))
            })?;
        }
    }
    Ok(RayTrajectory {
        m,
        samples,
        provenance: describe(column),
    })
}

/// Focus of a trajectory: the first axis crossing for `m = 0`, the first
/// turning point (minimum of ρ, where `ρ′` changes sign) otherwise.
pub fn focal_crossing(trajectory: &RayTrajectory) -> Result<f64> {
    let s = &trajectory.samples;
    if trajectory.m == 0 {
        for w in s.windows(2) {
            if w[0].rho == 0.0 {
                return Ok(w[0].z);
            }
            if w[0].rho.signum() != w[1].rho.signum() {
                return Ok(linear_zero(w[0].z, w[0].rho, w[1].z, w[1].rho));
            }
        }
    } else {
        for w in s.windows(2) {
            if w[0].rho_prime < 0.0 && w[1].rho_prime >= 0.0 {
                return Ok(linear_zero(w[0].z, w[0].rho_prime, w[1].z, w[1].rho_prime));
            }
        }
    }
    Err(Error::NotFound(format!(
        "no focus for m = {} within the traced range",
        trajectory.m
    )))
}

/// Writes `z,rho,rho_prime,m` rows.
pub fn write_trajectory_csv<W: Write>(trajectory: &RayTrajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z", "rho", "rho_prime", "m"])?;
    for s in &trajectory.samples {
        w.serialize((s.z, s.rho, s.rho_prime, s.m))?;
    }
    w.flush()?;
    Ok(())
}
