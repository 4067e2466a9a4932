use serde::Serialize;

use super::matrix::RayTransferMatrix;
use super::{focal_power_from_integrals, FocalLength};
use crate::beam::BeamParameters;
use crate::error::{Error, Result};
use crate::fields::AxialFieldModel;

/// A field model placed at `z_center`.
#[derive(Debug, Clone, PartialEq)]
pub struct LensElement {
    pub model: AxialFieldModel,
    pub z_center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aperture {
    pub z: f64,
    pub radius: f64,
}

/// Lens elements along the optic axis, with apertures and the object plane.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalColumn {
    elements: Vec<LensElement>,
    apertures: Vec<Aperture>,
    object_z: f64,
    exit_z: Option<f64>,
}

/// Summed fields of every element at one `z`: `ΣB1` and `Σ B3/b²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ColumnField {
    pub b1: f64,
    pub b3_over_b2: f64,
}

impl OpticalColumn {
    pub fn new(elements: Vec<LensElement>, object_z: f64) -> Result<Self> {
        if !object_z.is_finite() {
            return Err(Error::domain("object plane must be finite"));
        }
        for e in &elements {
            if !e.z_center.is_finite() {
                return Err(Error::domain("lens positions must be finite"));
            }
        }
        if elements.windows(2).any(|w| w[1].z_center <= w[0].z_center) {
            return Err(Error::domain("lens elements must be strictly increasing in z"));
        }
        Ok(Self {
            elements,
            apertures: Vec::new(),
            object_z,
            exit_z: None,
        })
    }

    /// A column without elements.
    pub fn empty(object_z: f64, exit_z: f64) -> Result<Self> {
        Self::new(Vec::new(), object_z)?.with_exit(exit_z)
    }

    pub fn with_aperture(mut self, z: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !z.is_finite() {
            return Err(Error::domain("aperture needs a finite plane and positive radius"));
        }
        self.apertures.push(Aperture { z, radius });
        self.apertures.sort_by(|a, b| a.z.total_cmp(&b.z));
        Ok(self)
    }

    /// Reference plane at which [`column_matrix`] ends. Defaults to the last
    /// element (or the object plane for an empty column).
    pub fn with_exit(mut self, exit_z: f64) -> Result<Self> {
        if !(exit_z >= self.object_z) || !exit_z.is_finite() {
            return Err(Error::domain("exit plane must lie after the object plane"));
        }
        self.exit_z = Some(exit_z);
        Ok(self)
    }

    pub fn elements(&self) -> &[LensElement] {
        &self.elements
    }

    pub fn apertures(&self) -> &[Aperture] {
        &self.apertures
    }

    pub fn object_z(&self) -> f64 {
        self.object_z
    }

    pub fn exit_z(&self) -> f64 {
        self.exit_z.unwrap_or_else(|| {
            self.elements
                .last()
                .map_or(self.object_z, |e| e.z_center.max(self.object_z))
        })
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Same column with every element's polarity flipped.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        for e in &mut out.elements {
            e.model = e.model.with_polarity(e.model.polarity().flipped());
        }
        out
    }

    pub fn field_at(&self, z: f64) -> ColumnField {
        let mut acc = ColumnField::default();
        for e in &self.elements {
            let (b1, b3) = e.model.eval_or_zero(z - e.z_center);
            let b = e.model.b();
            acc.b1 += b1;
            acc.b3_over_b2 += b3 / (b * b);
        }
        acc
    }

    /// Distance from `z` to the nearest element centre, in units of that
    /// element's extent, together with the extent. `None` for an empty column.
    pub fn nearest_element(&self, z: f64) -> Option<(f64, f64)> {
        self.elements
            .iter()
            .map(|e| {
                let ext = e.model.extent();
                ((z - e.z_center).abs() / ext, ext)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

/// Column transfer matrix together with the per-element focal lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnMatrix {
    pub matrix: RayTransferMatrix,
    pub focal_lengths: Vec<FocalLength>,
    /// Indices of elements with `|f_m| ≤ 10·extent`, where the thin-lens
    /// treatment is doubtful.
    pub thin_lens_warnings: Vec<usize>,
}

/// Thin-lens transfer matrix from the object plane to the exit plane for
/// OAM mode `m`.
pub fn column_matrix(column: &OpticalColumn, beam: &BeamParameters, m: i32) -> Result<ColumnMatrix> {
    let mut matrix = RayTransferMatrix::IDENTITY;
    let mut focal_lengths = Vec::with_capacity(column.elements.len());
    let mut thin_lens_warnings = Vec::new();
    let mut z = column.object_z;
    for (i, e) in column.elements.iter().enumerate() {
        let integrals = e.model.integrals()?;
        let power = focal_power_from_integrals(&integrals, e.model.b(), beam, m);
        let f = if power == 0.0 {
            FocalLength::Infinite
        } else if power > 0.0 {
            FocalLength::Converging(1.0 / power)
        } else {
            FocalLength::Diverging(1.0 / power)
        };
        if f.value().abs() <= 10.0 * e.model.extent() {
            thin_lens_warnings.push(i);
        }
        matrix = matrix
            .then(&RayTransferMatrix::drift(e.z_center - z))
            .then(&RayTransferMatrix::thin_lens_power(power));
        focal_lengths.push(f);
        z = e.z_center;
    }
    matrix = matrix.then(&RayTransferMatrix::drift(column.exit_z() - z));
    Ok(ColumnMatrix {
        matrix,
        focal_lengths,
        thin_lens_warnings,
    })
}
