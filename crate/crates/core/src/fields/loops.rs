//! Exact vector potential of a circular current loop.

use std::f64::consts::PI;

use crate::error::Result;
use crate::numerics::Quadrature;

/// Complete elliptic integrals `K(m)`, `E(m)` (parameter `m = k²`) by the
/// arithmetic–geometric mean.
fn elliptic_ke(m: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow2 = 0.5;
    for _ in 0..64 {
        if c.abs() < 1e-17 {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = c * c / (4.0 * an);
        pow2 *= 2.0;
        sum += pow2 * c * c;
        a = an;
        b = bn;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// Azimuthal vector potential of a loop of radius `radius` carrying current
/// `I`, at cylindrical radius `rho` and axial offset `s` from the loop plane.
/// `mu0_current` is `μ0·I` (T·m).
pub fn loop_vector_potential(mu0_current: f64, radius: f64, rho: f64, s: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let denom = (radius + rho) * (radius + rho) + s * s;
    let m = 4.0 * radius * rho / denom;
    let k = m.sqrt();
    // (1 - m/2) K - E, with a series where the difference cancels badly
    let bracket = if m < 1e-2 {
        PI * m * m / 32.0
            * (1.0
                + m * (3.0 / 4.0
                    + m * (75.0 / 128.0
                        + m * (245.0 / 512.0 + m * (6615.0 / 16384.0 + m * 22869.0 / 65536.0)))))
    } else {
        let (kk, ee) = elliptic_ke(m);
        (1.0 - 0.5 * m) * kk - ee
    };
    mu0_current / (PI * k) * (radius / rho).sqrt() * bracket
}

/// The same potential from the Biot–Savart line integral
/// `(μ0 I R / 4π) ∫ cos φ' dφ' / √(R² + ρ² + s² − 2Rρ cos φ')`, evaluated by
/// adaptive quadrature. Independent check of [`loop_vector_potential`].
pub fn loop_vector_potential_quadrature(
    mu0_current: f64,
    radius: f64,
    rho: f64,
    s: f64,
) -> Result<f64> {
    let d = radius * radius + rho * rho + s * s;
    let q = Quadrature {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        ..Default::default()
    };
    let r = q.integrate(
        |phi: f64| phi.cos() / (d - 2.0 * radius * rho * phi.cos()).sqrt(),
        0.0,
        PI,
    )?;
    Ok(mu0_current * radius / (4.0 * PI) * 2.0 * r.value)
}

/// A circular loop anywhere in space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentLoop {
    pub center: [f64; 3],
    /// Unit normal; current circulates counter-clockwise about it.
    pub axis: [f64; 3],
    pub radius: f64,
    /// `μ0·I`, T·m.
    pub mu0_current: f64,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl CurrentLoop {
    /// Cartesian vector potential at `point`.
    pub fn vector_potential(&self, point: [f64; 3]) -> [f64; 3] {
        let d = sub(point, self.center);
        let s = dot(d, self.axis);
        // axis × d has magnitude ρ and points along the loop's φ̂
        let t = cross(self.axis, d);
        let rho = dot(t, t).sqrt();
        if rho == 0.0 {
            return [0.0; 3];
        }
        let a = loop_vector_potential(self.mu0_current, self.radius, rho, s) / rho;
        [a * t[0], a * t[1], a * t[2]]
    }
}
