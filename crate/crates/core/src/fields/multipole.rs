//! Azimuthal line integrals of a multipole corrector built from radially
//! oriented solenoids.
//!
//! Each solenoid is a stack of five coaxial current loops. Solenoid `k` sits at
//! azimuth `2πk/n` on a ring of radius `ring_radius`, its axis pointing
//! radially, with alternating polarity around the ring. The `φ̂` component of
//! a radially oriented loop's potential is odd in `z`, so its integral along
//! any line parallel to the optic axis vanishes.

use std::f64::consts::PI;

use super::loops::CurrentLoop;
use crate::error::{Error, Result};
use crate::numerics::Quadrature;

const LOOPS_PER_SOLENOID: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipoleCorrector {
    pub n_poles: usize,
    /// Solenoid strength; each loop carries `μ0·I = strength / extent`. T·m².
    pub solenoid_strength: f64,
    /// Solenoid length; loop radius is half of it. m.
    pub solenoid_extent: f64,
    /// Distance from the optic axis to each solenoid centre. m.
    pub ring_radius: f64,
}

/// `∫ dz A·φ̂` along a line parallel to the optic axis, with the magnitude
/// scale it is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIntegral {
    pub value: f64,
    /// `∫ dz |A|` of a single solenoid along the same line.
    pub scale: f64,
}

impl LineIntegral {
    pub fn relative(&self) -> f64 {
        self.value.abs() / self.scale
    }
}

fn solenoid_loops(
    center_dist: f64,
    axis: [f64; 3],
    extent: f64,
    mu0_current: f64,
) -> Vec<CurrentLoop> {
    (0..LOOPS_PER_SOLENOID)
        .map(|i| {
            let offset = (i as f64 - 2.0) * extent / (LOOPS_PER_SOLENOID as f64 - 1.0);
            let d = center_dist + offset;
            CurrentLoop {
                center: [d * axis[0], d * axis[1], d * axis[2]],
                axis,
                radius: extent / 2.0,
                mu0_current,
            }
        })
        .collect()
}

impl MultipoleCorrector {
    pub fn new(
        n_poles: usize,
        solenoid_strength: f64,
        solenoid_extent: f64,
        ring_radius: f64,
    ) -> Result<Self> {
        if n_poles < 2 || n_poles % 2 != 0 {
            return Err(Error::domain(format!(
                "pole count must be even and at least 2, got {n_poles}"
            )));
        }
        if !(solenoid_extent > 0.0) || !(ring_radius > solenoid_extent / 2.0) {
            return Err(Error::domain(
                "solenoid extent must be positive and the ring must clear the axis",
            ));
        }
        if !solenoid_strength.is_finite() {
            return Err(Error::domain("solenoid strength must be finite"));
        }
        Ok(Self {
            n_poles,
            solenoid_strength,
            solenoid_extent,
            ring_radius,
        })
    }

    fn solenoid(&self, k: usize) -> Vec<CurrentLoop> {
        let theta = 2.0 * PI * k as f64 / self.n_poles as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        solenoid_loops(
            self.ring_radius,
            [theta.cos(), theta.sin(), 0.0],
            self.solenoid_extent,
            sign * self.solenoid_strength / self.solenoid_extent,
        )
    }

    /// Total Cartesian vector potential of the corrector.
    pub fn vector_potential(&self, point: [f64; 3]) -> [f64; 3] {
        let mut a = [0.0; 3];
        for k in 0..self.n_poles {
            for lp in self.solenoid(k) {
                let v = lp.vector_potential(point);
                a[0] += v[0];
                a[1] += v[1];
                a[2] += v[2];
            }
        }
        a
    }

    /// `∫ dz A·φ̂` along the line at `(ρ, φ)`.
    pub fn phi_integral(&self, rho: f64, phi: f64) -> Result<LineIntegral> {
        if !(rho > 0.0) {
            return Err(Error::domain(format!("ρ must be positive, got {rho}")));
        }
        if rho >= self.ring_radius - self.solenoid_extent / 2.0 {
            return Err(Error::domain(
                "integration line must pass inside the solenoid ring",
            ));
        }
        let (s, c) = phi.sin_cos();
        let (x, y) = (rho * c, rho * s);
        let quad = Quadrature {
            rel_tol: 1e-10,
            scale: Some(self.ring_radius),
            ..Default::default()
        };
        let first = self.solenoid(0);
        let scale = quad
            .integrate(
                |z| {
                    let mut a = [0.0; 3];
                    for lp in &first {
                        let v = lp.vector_potential([x, y, z]);
                        a[0] += v[0];
                        a[1] += v[1];
                        a[2] += v[2];
                    }
                    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
                },
                f64::NEG_INFINITY,
                f64::INFINITY,
            )?
            .value;
        // the sum is expected to cancel, so judge convergence against the scale
        let quad = Quadrature {
            abs_tol: 1e-13 * scale,
            ..quad
        };
        let value = quad
            .integrate(
                |z| {
                    let a = self.vector_potential([x, y, z]);
                    -a[0] * s + a[1] * c
                },
                f64::NEG_INFINITY,
                f64::INFINITY,
            )?
            .value;
        Ok(LineIntegral { value, scale })
    }
}

/// `∫ dz A·φ̂` of an `n_poles` corrector (ring radius `ring_radius`) along the
/// line at `(ρ, φ)`.
pub fn multipole_phi_integral(
    n_poles: usize,
    solenoid_strength: f64,
    solenoid_extent: f64,
    ring_radius: f64,
    rho: f64,
    phi: f64,
) -> Result<LineIntegral> {
    MultipoleCorrector::new(n_poles, solenoid_strength, solenoid_extent, ring_radius)?
        .phi_integral(rho, phi)
}

/// Control case: one solenoid coaxial with the optic axis. Its potential is
/// purely azimuthal and even in `z`, so the line integral does not vanish.
pub fn axial_solenoid_phi_integral(
    solenoid_strength: f64,
    solenoid_extent: f64,
    rho: f64,
) -> Result<LineIntegral> {
    if !(rho > 0.0) || !(solenoid_extent > 0.0) {
        return Err(Error::domain("ρ and solenoid extent must be positive"));
    }
    if (rho - solenoid_extent / 2.0).abs() < 1e-3 * solenoid_extent {
        return Err(Error::domain("integration line runs through the solenoid winding"));
    }
    let loops = solenoid_loops(
        0.0,
        [0.0, 0.0, 1.0],
        solenoid_extent,
        solenoid_strength / solenoid_extent,
    );
    let quad = Quadrature {
        rel_tol: 1e-12,
        scale: Some(solenoid_extent),
        ..Default::default()
    };
    let field = |z: f64| -> f64 { loops.iter().map(|lp| lp.vector_potential([rho, 0.0, z])[1]).sum() };
    let value = quad.integrate(field, f64::NEG_INFINITY, f64::INFINITY)?.value;
    let scale = quad
        .integrate(|z| field(z).abs(), f64::NEG_INFINITY, f64::INFINITY)?
        .value;
    Ok(LineIntegral { value, scale })
}
