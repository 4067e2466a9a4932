//! Axial magnetic field models and the truncated vector potential
//! `A_φ = B1(z)·ρ/2 − B3(z)·ρ³/(8b²)`.

mod loops;
mod multipole;
mod table;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::constants::MU0;
use crate::error::{Error, Result};
use crate::numerics::Quadrature;

pub use loops::{loop_vector_potential, loop_vector_potential_quadrature, CurrentLoop};
pub use multipole::{
    axial_solenoid_phi_integral, multipole_phi_integral, LineIntegral, MultipoleCorrector,
};

/// Sign of the lens excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Polarity::Positive),
            -1 => Ok(Polarity::Negative),
            other => Err(Error::domain(format!("polarity must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Glaser,
    WireLoop,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Glaser {
        a: f64,
    },
    WireLoop {
        radius: f64,
    },
    Tabulated {
        z: Vec<f64>,
        b1: Vec<f64>,
        b3: Vec<f64>,
    },
}

/// Longitudinal field profile `B1(z)`, `B3(z)` with dispersion length `b`,
/// centred at `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialFieldModel {
    shape: Shape,
    b0: f64,
    b: f64,
    polarity: Polarity,
}

/// `∫B1² dz`, `∫B3 dz`, `∫B1 dz` and `∫B1·B3 dz` over the whole axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldIntegrals {
    pub b1_sq: f64,
    pub b3: f64,
    pub b1: f64,
    pub b1_b3: f64,
}

/// Value of the model vector potential together with the soft validity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorPotential {
    pub a_phi: f64,
    /// `ρ > b`: the truncated expansion is being used outside its range.
    pub beyond_validity: bool,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl AxialFieldModel {
    /// Glaser bell field `B1 = B3 = B0/(1 + z²/a²)` with an independent
    /// dispersion length `b`.
    pub fn glaser(b0: f64, a: f64, b: f64, polarity: Polarity) -> Result<Self> {
        check_positive("B0", b0)?;
        check_positive("a", a)?;
        check_positive("b", b)?;
        Ok(Self {
            shape: Shape::Glaser { a },
            b0,
            b,
            polarity,
        })
    }

    /// Single current loop of radius `r` with peak-field scale `B0 = μ0·I0/R`.
    /// The dispersion length is pinned to the radius.
    pub fn wire_loop(b0: f64, radius: f64, polarity: Polarity) -> Result<Self> {
        check_positive("B0", b0)?;
        check_positive("R", radius)?;
        Ok(Self {
            shape: Shape::WireLoop { radius },
            b0,
            b: radius,
            polarity,
        })
    }

    /// Current loop specified by its current `i0` (amperes, magnitude).
    pub fn wire_loop_from_current(i0: f64, radius: f64, polarity: Polarity) -> Result<Self> {
        check_positive("I0", i0)?;
        check_positive("R", radius)?;
        Self::wire_loop(MU0 * i0 / radius, radius, polarity)
    }

    /// Sampled profiles, linearly interpolated. The samples are multiplied by
    /// the polarity sign; `B0` is the largest `|B1|` sample.
    pub fn tabulated(
        z: Vec<f64>,
        b1: Vec<f64>,
        b3: Vec<f64>,
        b: f64,
        polarity: Polarity,
    ) -> Result<Self> {
        check_positive("b", b)?;
        if z.len() < 2 {
            return Err(Error::domain("tabulated field needs at least two samples"));
        }
        if b1.len() != z.len() || b3.len() != z.len() {
            return Err(Error::domain(format!(
                "tabulated field arrays differ in length: z {}, B1 {}, B3 {}",
                z.len(),
                b1.len(),
                b3.len()
            )));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("tabulated z samples must be strictly increasing"));
        }
        if z.iter().chain(&b1).chain(&b3).any(|v| !v.is_finite()) {
            return Err(Error::domain("tabulated field contains non-finite values"));
        }
        let b0 = b1.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if b0 == 0.0 && b3.iter().all(|v| *v == 0.0) {
            return Err(Error::domain("tabulated field is identically zero"));
        }
        Ok(Self {
            shape: Shape::Tabulated { z, b1, b3 },
            b0,
            b,
            polarity,
        })
    }

    /// Loads a CSV with header `z,B1,B3` (SI units).
    pub fn from_csv(path: impl AsRef<Path>, b: f64, polarity: Polarity) -> Result<Self> {
        let (z, b1, b3) = table::read_field_csv(path.as_ref())?;
        Self::tabulated(z, b1, b3, b, polarity)
    }

    pub fn kind(&self) -> FieldKind {
        match self.shape {
            Shape::Glaser { .. } => FieldKind::Glaser,
            Shape::WireLoop { .. } => FieldKind::WireLoop,
            Shape::Tabulated { .. } => FieldKind::Tabulated,
        }
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// Dispersion length `b`.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// Same field with the opposite excitation.
    pub fn with_polarity(&self, polarity: Polarity) -> Self {
        Self {
            polarity,
            ..self.clone()
        }
    }

    /// Longitudinal length scale: `a` for Glaser, `R` for the loop, and the
    /// RMS half-width of `B1²` for tabulated data.
    pub fn extent(&self) -> f64 {
        match &self.shape {
            Shape::Glaser { a } => *a,
            Shape::WireLoop { radius } => *radius,
            Shape::Tabulated { z, b1, .. } => {
                let (mut w, mut wz, mut wzz) = (0.0, 0.0, 0.0);
                for i in 0..z.len() - 1 {
                    let dz = z[i + 1] - z[i];
                    let zm = 0.5 * (z[i] + z[i + 1]);
                    let bm = 0.5 * (b1[i] + b1[i + 1]);
                    let weight = bm * bm * dz;
                    w += weight;
                    wz += weight * zm;
                    wzz += weight * zm * zm;
                }
                if w == 0.0 {
                    return 0.5 * (z[z.len() - 1] - z[0]);
                }
                let mean = wz / w;
                (wzz / w - mean * mean).max(0.0).sqrt().max(f64::MIN_POSITIVE)
            }
        }
    }

    /// Sampled `z` range for tabulated fields; the whole axis otherwise.
    pub fn support(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Tabulated { z, .. } => (z[0], z[z.len() - 1]),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `(B1(z), B3(z))` including the polarity sign.
    pub fn eval(&self, z: f64) -> Result<(f64, f64)> {
        if let Shape::Tabulated { z: zs, .. } = &self.shape {
            if z < zs[0] || z > zs[zs.len() - 1] || z.is_nan() {
                return Err(Error::domain(format!(
                    "z = {z:e} outside tabulated range [{:e}, {:e}]",
                    zs[0],
                    zs[zs.len() - 1]
                )));
            }
        }
        Ok(self.eval_or_zero(z))
    }

    /// Like [`eval`](Self::eval) but treats the field as zero outside a
    /// tabulated range. Used when several elements are summed along a column.
    pub fn eval_or_zero(&self, z: f64) -> (f64, f64) {
        let s = self.polarity.sign();
        match &self.shape {
            Shape::Glaser { a } => {
                let g = s * self.b0 / (1.0 + (z / a) * (z / a));
                (g, g)
            }
            Shape::WireLoop { radius } => {
                let r = *radius;
                let u = r / z.hypot(r); // R/ℓ
                let u2 = u * u;
                let u3 = u2 * u;
                let u5 = u3 * u2;
                let u7 = u5 * u2;
                (
                    s * self.b0 * u3 / 2.0,
                    s * 3.0 * self.b0 * (u5 + 2.5 * u7),
                )
            }
            Shape::Tabulated { z: zs, b1, b3 } => {
                let n = zs.len();
                if !(z >= zs[0] && z <= zs[n - 1]) {
                    return (0.0, 0.0);
                }
                let j = match zs.binary_search_by(|v| v.total_cmp(&z)) {
                    Ok(j) => return (s * b1[j], s * b3[j]),
                    Err(j) => j - 1,
                };
                let t = (z - zs[j]) / (zs[j + 1] - zs[j]);
                (
                    s * (b1[j] + t * (b1[j + 1] - b1[j])),
                    s * (b3[j] + t * (b3[j + 1] - b3[j])),
                )
            }
        }
    }

    /// `A_φ(ρ, z) = B1·ρ/2 − B3·ρ³/(8b²)`.
    pub fn vector_potential_phi(&self, rho: f64, z: f64) -> Result<VectorPotential> {
        if !(rho >= 0.0) {
            return Err(Error::domain(format!("ρ must be non-negative, got {rho}")));
        }
        let (b1, b3) = self.eval(z)?;
        let b = self.b;
        Ok(VectorPotential {
            a_phi: b1 * rho / 2.0 - b3 * rho * rho * rho / (8.0 * b * b),
            beyond_validity: rho > b,
        })
    }

    /// Axis integrals; closed forms where they exist, quadrature otherwise.
    pub fn integrals(&self) -> Result<FieldIntegrals> {
        let s = self.polarity.sign();
        match &self.shape {
            Shape::Glaser { a } => {
                let b0 = self.b0;
                Ok(FieldIntegrals {
                    b1_sq: PI * b0 * b0 * a / 2.0,
                    b3: s * PI * b0 * a,
                    b1: s * PI * b0 * a,
                    b1_b3: PI * b0 * b0 * a / 2.0,
                })
            }
            Shape::WireLoop { radius } => {
                let q = self.integrals_quadrature()?;
                Ok(FieldIntegrals {
                    b3: s * 12.0 * self.b0 * radius,
                    b1: s * self.b0 * radius,
                    ..q
                })
            }
            Shape::Tabulated { .. } => self.integrals_quadrature(),
        }
    }

    /// Axis integrals by adaptive quadrature (relative tolerance 1e-9), for
    /// every model. Tabulated fields are integrated segment by segment.
    pub fn integrals_quadrature(&self) -> Result<FieldIntegrals> {
        let quad = Quadrature {
            rel_tol: 1e-9,
            scale: Some(self.extent()),
            ..Default::default()
        };
        let integrate = |f: &dyn Fn(f64, f64) -> f64| -> Result<f64> {
            match &self.shape {
                Shape::Tabulated { z, .. } => {
                    let mut total = 0.0;
                    let seg = Quadrature {
                        initial_panels: 1,
                        ..quad
                    };
                    for w in z.windows(2) {
                        total += seg
                            .integrate(
                                |x| {
                                    let (b1, b3) = self.eval_or_zero(x);
                                    f(b1, b3)
                                },
                                w[0],
                                w[1],
                            )?
                            .value;
                    }
                    Ok(total)
                }
                _ => Ok(quad
                    .integrate(
                        |x| {
                            let (b1, b3) = self.eval_or_zero(x);
                            f(b1, b3)
                        },
                        f64::NEG_INFINITY,
                        f64::INFINITY,
                    )?
                    .value),
            }
        };
        Ok(FieldIntegrals {
            b1_sq: integrate(&|b1, _| b1 * b1)?,
            b3: integrate(&|_, b3| b3)?,
            b1: integrate(&|b1, _| b1)?,
            b1_b3: integrate(&|b1, b3| b1 * b3)?,
        })
    }
}

/// Free-function form of [`AxialFieldModel::eval`].
pub fn eval_axial_field(model: &AxialFieldModel, z: f64) -> Result<(f64, f64)> {
    model.eval(z)
}

/// Free-function form of [`AxialFieldModel::integrals`].
pub fn field_integrals(model: &AxialFieldModel) -> Result<FieldIntegrals> {
    model.integrals()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn glaser() -> AxialFieldModel {
        AxialFieldModel::glaser(2.0, 1e-3, 1e-7, Polarity::Positive).unwrap()
    }

    #[test]
    fn glaser_values() {
        let g = glaser();
        assert_eq!(g.eval(0.0).unwrap(), (2.0, 2.0));
        assert_eq!(g.eval(1e-3).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn wire_loop_on_axis() {
        let w = AxialFieldModel::wire_loop(1.0, 1e-7, Polarity::Positive).unwrap();
        let (b1, b3) = w.eval(0.0).unwrap();
        assert!((b1 - 0.5).abs() < 1e-15);
        assert!((b3 - 10.5).abs() < 1e-14);
        assert_eq!(w.b(), 1e-7);
    }

    #[test]
    fn wire_loop_from_current_sets_b0() {
        let w = AxialFieldModel::wire_loop_from_current(1.0, 1e-6, Polarity::Positive).unwrap();
        assert!((w.b0() - MU0 / 1e-6).abs() < 1e-18);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(AxialFieldModel::glaser(0.0, 1e-3, 1e-7, Polarity::Positive).is_err());
        assert!(AxialFieldModel::glaser(1.0, -1e-3, 1e-7, Polarity::Positive).is_err());
        assert!(AxialFieldModel::glaser(1.0, 1e-3, 0.0, Polarity::Positive).is_err());
        assert!(Polarity::from_sign(0).is_err());
        assert!(AxialFieldModel::tabulated(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            1e-7,
            Polarity::Positive
        )
        .is_err());
        assert!(AxialFieldModel::tabulated(
            vec![0.0, 1.0],
            vec![1.0],
            vec![1.0, 1.0],
            1e-7,
            Polarity::Positive
        )
        .is_err());
    }

    #[test]
    fn tabulated_interpolates_and_rejects_out_of_range() {
        let t = AxialFieldModel::tabulated(
            vec![-1.0, 0.0, 2.0],
            vec![0.0, 2.0, 0.0],
            vec![1.0, 3.0, 1.0],
            1e-7,
            Polarity::Negative,
        )
        .unwrap();
        assert_eq!(t.eval(1.0).unwrap(), (-1.0, -2.0));
        assert_eq!(t.eval(-0.5).unwrap(), (-1.0, -2.0));
        assert!(matches!(t.eval(2.5), Err(Error::Domain(_))));
        assert_eq!(t.eval_or_zero(2.5), (0.0, 0.0));
    }

    #[test]
    fn vector_potential_substitution() {
        let g = glaser();
        assert_eq!(g.vector_potential_phi(0.0, 0.0).unwrap().a_phi, 0.0);
        let v = g.vector_potential_phi(1e-8, 0.0).unwrap();
        let expected = 2.0 * 1e-8 / 2.0 - 2.0 * 1e-24 / (8.0 * 1e-14);
        assert!((v.a_phi - expected).abs() < 1e-22);
        assert!((v.a_phi - 9.975e-9).abs() < 1e-13);
        assert!(!v.beyond_validity);
        assert!(g.vector_potential_phi(2e-7, 0.0).unwrap().beyond_validity);
        assert!(g.vector_potential_phi(-1e-9, 0.0).is_err());
    }

    #[test]
    fn glaser_integrals_match_quadrature() {
        let g = AxialFieldModel::glaser(2.0, 1e-3, 1e-7, Polarity::Negative).unwrap();
        let a = g.integrals().unwrap();
        let q = g.integrals_quadrature().unwrap();
        for (x, y) in [(a.b1_sq, q.b1_sq), (a.b3, q.b3), (a.b1, q.b1), (a.b1_b3, q.b1_b3)] {
            assert!((x - y).abs() <= 1e-8 * x.abs(), "{x} vs {y}");
        }
        assert!((a.b1_sq - 6.2832e-3).abs() < 1e-7);
        assert!(a.b3 < 0.0 && a.b1 < 0.0);
    }

    #[test]
    fn wire_loop_integrals() {
        let w = AxialFieldModel::wire_loop(1.0, 1e-7, Polarity::Positive).unwrap();
        let q = w.integrals_quadrature().unwrap();
        assert!((q.b3 - 1.2e-6).abs() <= 1e-6 * 1.2e-6);
        let oracle = 3.0 * PI / 32.0 * 1e-7;
        assert!((q.b1_sq - oracle).abs() <= 1e-8 * oracle);
        assert!((q.b1 - 1e-7).abs() <= 1e-8 * 1e-7);
        let a = w.integrals().unwrap();
        assert!((a.b1_sq - 2.945e-8).abs() < 1e-11);
    }

    #[test]
    fn tabulated_integrals_are_exact_for_linear_segments() {
        let t = AxialFieldModel::tabulated(
            vec![-1.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            1.0,
            Polarity::Positive,
        )
        .unwrap();
        let i = t.integrals().unwrap();
        assert!((i.b1 - 1.0).abs() < 1e-12);
        assert!((i.b1_sq - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        std::fs::write(&path, "z,B1,B3\n-1e-3,0.5,0.25\n0,1.0,0.5\n1e-3,0.5,0.25\n").unwrap();
        let t = AxialFieldModel::from_csv(&path, 1e-7, Polarity::Positive).unwrap();
        assert_eq!(t.kind(), FieldKind::Tabulated);
        assert_eq!(t.eval(0.0).unwrap(), (1.0, 0.5));
        assert_eq!(t.b0(), 1.0);
        std::fs::write(&path, "z,B1\n0,1\n").unwrap();
        assert!(AxialFieldModel::from_csv(&path, 1e-7, Polarity::Positive).is_err());
    }

    proptest! {
        #[test]
        fn polarity_flip_negates_fields(z in -1e-2f64..1e-2, b0 in 0.1f64..5.0, a in 1e-5f64..1e-2) {
            for m in [
                AxialFieldModel::glaser(b0, a, 1e-7, Polarity::Positive).unwrap(),
                AxialFieldModel::wire_loop(b0, a, Polarity::Positive).unwrap(),
            ] {
                let f = m.with_polarity(Polarity::Negative);
                let (p1, p3) = m.eval(z).unwrap();
                let (n1, n3) = f.eval(z).unwrap();
                prop_assert_eq!(p1, -n1);
                prop_assert_eq!(p3, -n3);
                // even in z, exactly
                prop_assert_eq!(m.eval(-z).unwrap(), m.eval(z).unwrap());
            }
        }

        #[test]
        fn polarity_flip_integrals(b0 in 0.1f64..5.0, a in 1e-6f64..1e-3) {
            let m = AxialFieldModel::glaser(b0, a, 1e-7, Polarity::Positive).unwrap();
            let p = m.integrals().unwrap();
            let n = m.with_polarity(Polarity::Negative).integrals().unwrap();
            prop_assert_eq!(p.b1_sq, n.b1_sq);
            prop_assert_eq!(p.b1_b3, n.b1_b3);
            prop_assert_eq!(p.b3, -n.b3);
            prop_assert_eq!(p.b1, -n.b1);
        }

        #[test]
        fn vector_potential_is_odd_polynomial(rho in 0.0f64..3e-7, z in -1e-3f64..1e-3) {
            let m = AxialFieldModel::glaser(2.0, 1e-3, 1e-7, Polarity::Positive).unwrap();
            let (b1, b3) = m.eval(z).unwrap();
            let b = m.b();
            let formal = |r: f64| b1 * r / 2.0 - b3 * r * r * r / (8.0 * b * b);
            let direct = m.vector_potential_phi(rho, z).unwrap().a_phi;
            prop_assert_eq!(direct, formal(rho));
            prop_assert_eq!(formal(rho) + formal(-rho), 0.0);
        }
    }
}
