use serde::Serialize;

use crate::error::{Error, Result};

/// Paraxial ray-transfer matrix acting on `(ρ, ρ′)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayTransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RayTransferMatrix {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Thin lens `[[1, 0], [−1/f, 1]]`. An infinite `f` gives the identity.
    pub fn thin_lens(f: f64) -> Result<Self> {
        if f == 0.0 || f.is_nan() {
            return Err(Error::domain("thin lens needs a nonzero focal length"));
        }
        Ok(Self::thin_lens_power(1.0 / f))
    }

    /// Thin lens of optical power `1/f`.
    pub fn thin_lens_power(power: f64) -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: -power,
            d: 1.0,
        }
    }

    pub fn drift(length: f64) -> Self {
        Self {
            a: 1.0,
            b: length,
            c: 0.0,
            d: 1.0,
        }
    }

    /// `self` followed by `next`, i.e. the product `next · self`.
    pub fn then(&self, next: &Self) -> Self {
        Self {
            a: next.a * self.a + next.b * self.c,
            b: next.a * self.b + next.b * self.d,
            c: next.c * self.a + next.d * self.c,
            d: next.c * self.b + next.d * self.d,
        }
    }

    /// Composition of `elements` listed in propagation order.
    pub fn compose<'a>(elements: impl IntoIterator<Item = &'a Self>) -> Self {
        elements
            .into_iter()
            .fold(Self::IDENTITY, |acc, m| acc.then(m))
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, rho: f64, slope: f64) -> (f64, f64) {
        (
            self.a * rho + self.b * slope,
            self.c * rho + self.d * slope,
        )
    }
}

/// Outcome of the imaging condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Imaging {
    /// Image at `image_distance` after the system (negative for a virtual
    /// image) with lateral magnification `magnification`.
    Finite {
        image_distance: f64,
        magnification: f64,
    },
    /// No finite image. An object ray `(ρ, ρ′)` leaves with slope
    /// `angle_per_height·ρ + angular_magnification·ρ′`.
    AtInfinity {
        angle_per_height: f64,
        angular_magnification: f64,
    },
}

/// Finds the image plane of an object `object_distance` before `matrix`.
pub fn image_solve(matrix: &RayTransferMatrix, object_distance: f64) -> Result<Imaging> {
    if (matrix.det() - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "ray-transfer matrix is not unimodular (det = {})",
            matrix.det()
        )));
    }
    let sys = RayTransferMatrix::drift(object_distance).then(matrix);
    let scale = (matrix.c * object_distance).abs() + matrix.d.abs();
    if sys.d.abs() <= 1e-12 * scale {
        return Ok(Imaging::AtInfinity {
            angle_per_height: sys.c,
            angular_magnification: sys.d,
        });
    }
    let image_distance = -sys.b / sys.d;
    Ok(Imaging::Finite {
        image_distance,
        magnification: sys.a + image_distance * sys.c,
    })
}
