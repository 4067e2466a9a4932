use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{AzimuthalWave, OAMSpectrum, RadialGrid};
use crate::error::{Error, Result};

/// Complex field on an `n × n` grid, row-major, pixel centres at
/// `(i − n/2 + ½)·pitch`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianField {
    pub n: usize,
    pub pitch: f64,
    pub z: f64,
    pub values: Vec<Complex64>,
}

impl CartesianField {
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - self.n as f64 / 2.0 + 0.5) * self.pitch
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.n + col]
    }

    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.pitch * self.pitch
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn sample(&self, x: f64, y: f64) -> Complex64 {
        let fx = x / self.pitch + self.n as f64 / 2.0 - 0.5;
        let fy = y / self.pitch + self.n as f64 / 2.0 - 0.5;
        if !(fx >= 0.0 && fy >= 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let (i0, j0) = (fy.floor() as usize, fx.floor() as usize);
        if i0 + 1 >= self.n || j0 + 1 >= self.n {
            return Complex64::new(0.0, 0.0);
        }
        let (ty, tx) = (fy - i0 as f64, fx - j0 as f64);
        self.at(i0, j0) * (1.0 - tx) * (1.0 - ty)
            + self.at(i0, j0 + 1) * tx * (1.0 - ty)
            + self.at(i0 + 1, j0) * (1.0 - tx) * ty
            + self.at(i0 + 1, j0 + 1) * tx * ty
    }
}

/// `u_m(ρ)` by linear interpolation. Inside the first cell centre the
/// profile goes to zero linearly for `m ≠ 0` and is held flat for `m = 0`.
fn radial_value(grid: &RadialGrid, m: i32, u: &[Complex64], rho: f64) -> Complex64 {
    let x = rho / grid.spacing - 0.5;
    if x < 0.0 {
        return if m == 0 { u[0] } else { u[0] * (rho / grid.rho(0)) };
    }
    let j = x.floor() as usize;
    if j + 1 >= u.len() {
        return if j + 1 == u.len() && rho <= grid.rho_max() {
            // last half cell: towards the Dirichlet zero at ρ_max
            u[j] * ((grid.rho_max() - rho) / (grid.rho_max() - grid.rho(j)))
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let t = x - j as f64;
    u[j] * (1.0 - t) + u[j + 1] * t
}

/// `ψ(x, y) = Σ_m u_m(ρ)·e^{imφ}` on an `n × n` grid of spacing `pitch`.
pub fn synthesize_2d(wave: &AzimuthalWave, n: usize, pitch: f64) -> Result<CartesianField> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::config(format!("image size must be even and positive, got {n}")));
    }
    if !(pitch > 0.0) {
        return Err(Error::config("pixel pitch must be positive"));
    }
    if n as f64 * pitch / 2.0 > wave.grid.rho_max() {
        return Err(Error::config(format!(
            "image half-width {:e} m exceeds the radial grid extent {:e} m",
            n as f64 * pitch / 2.0,
            wave.grid.rho_max()
        )));
    }
    let mut field = CartesianField {
        n,
        pitch,
        z: wave.z,
        values: vec![Complex64::new(0.0, 0.0); n * n],
    };
    for row in 0..n {
        let y = field.coordinate(row);
        for col in 0..n {
            let x = field.coordinate(col);
            let rho = x.hypot(y);
            let phi = y.atan2(x);
            let mut v = Complex64::new(0.0, 0.0);
            for (&m, c) in &wave.components {
                v += radial_value(&wave.grid, m, &c.u, rho) * Complex64::from_polar(1.0, m as f64 * phi);
            }
            field.values[row * n + col] = v;
        }
    }
    Ok(field)
}

/// Azimuthal decomposition of a Cartesian field: the field is resampled on
/// `grid` × `n_phi` polar points, Fourier transformed along `φ`, and the power
/// in each order is summed over radius. Fractions are normalised to unit sum.
pub fn decompose(field: &CartesianField, grid: &RadialGrid, n_phi: usize) -> Result<OAMSpectrum> {
    if n_phi < 4 {
        return Err(Error::config("need at least four azimuthal samples"));
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(n_phi);
    let mut power = vec![0.0; n_phi];
    let mut ring = vec![Complex64::new(0.0, 0.0); n_phi];
    for j in 0..grid.points {
        let rho = grid.rho(j);
        for (l, v) in ring.iter_mut().enumerate() {
            let phi = 2.0 * PI * l as f64 / n_phi as f64;
            *v = field.sample(rho * phi.cos(), rho * phi.sin());
        }
        fft.process(&mut ring);
        let w = grid.weight(j) / (n_phi as f64 * n_phi as f64);
        for (p, c) in power.iter_mut().zip(&ring) {
            *p += c.norm_sqr() * w;
        }
    }
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NotFound("field has no power on the sampling grid".into()));
    }
    let mut out = BTreeMap::new();
    for (bin, p) in power.into_iter().enumerate() {
        let m = if bin < n_phi / 2 { bin as i32 } else { bin as i32 - n_phi as i32 };
        out.insert(m, p / total);
    }
    Ok(out)
}
