//! Stacked-lens OAM measurement devices.
//!
//! Both devices are built from pairs of lenses of opposite polarity, so an
//! OAM mode sees focal lengths `f0(1 ± Λm)` to first order.

use serde::Serialize;

use super::matrix::{image_solve, Imaging, RayTransferMatrix};
use crate::error::{Error, Result};

/// Magnification of a stack of `N` afocal pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AfocalMagnification {
    /// `−(1+Λm)/(1−Λm)`: telescope of lenses `f0(1∓Λm)` spaced `2f0`.
    pub per_pair_exact: f64,
    /// `−(1+2Λm)`.
    pub per_pair_approx: f64,
    /// `(−(1+Λm)/(1−Λm))^N`.
    pub exact: f64,
    /// `(−1)^N exp(2ΛmN)`.
    pub approx: f64,
}

fn check_small(x: f64) -> Result<()> {
    if !(x.abs() < 1.0) {
        return Err(Error::domain(format!("|Λm| must be below 1, got {x}")));
    }
    Ok(())
}

pub fn afocal_stack_magnification(lambda: f64, m: i32, n: u32) -> Result<AfocalMagnification> {
    let x = lambda * m as f64;
    check_small(x)?;
    let per_pair_exact = -(1.0 + x) / (1.0 - x);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(AfocalMagnification {
        per_pair_exact,
        per_pair_approx: -(1.0 + 2.0 * x),
        exact: per_pair_exact.powi(n as i32),
        approx: sign * (2.0 * x * n as f64).exp(),
    })
}

/// One afocal pair: lens `f0(1−Λm)`, drift `2f0`, lens `f0(1+Λm)`.
pub fn afocal_pair_matrix(f0: f64, lambda: f64, m: i32) -> Result<RayTransferMatrix> {
    let x = lambda * m as f64;
    check_small(x)?;
    Ok(RayTransferMatrix::compose(&[
        RayTransferMatrix::thin_lens(f0 * (1.0 - x))?,
        RayTransferMatrix::drift(2.0 * f0),
        RayTransferMatrix::thin_lens(f0 * (1.0 + x))?,
    ]))
}

/// `n` afocal pairs placed back to back.
pub fn afocal_stack_matrix(f0: f64, lambda: f64, m: i32, n: u32) -> Result<RayTransferMatrix> {
    let pair = afocal_pair_matrix(f0, lambda, m)?;
    Ok(RayTransferMatrix::compose(std::iter::repeat(&pair).take(n as usize)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Magnification {
    Finite(f64),
    Infinite,
}

impl Magnification {
    pub fn value(self) -> f64 {
        match self {
            Magnification::Finite(v) => v,
            Magnification::Infinite => f64::INFINITY,
        }
    }
}

/// `1/(1 − 2(s+1)Λm)` for the two-lens variable-spacing device.
pub fn variable_spacing_magnification(lambda: f64, m: i32, s: f64) -> Result<Magnification> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("spacing parameter s must be positive, got {s}")));
    }
    let denom = 1.0 - 2.0 * (s + 1.0) * lambda * m as f64;
    if denom.abs() <= 1e-12 {
        return Ok(Magnification::Infinite);
    }
    Ok(Magnification::Finite(1.0 / denom))
}

/// Ray-matrix model of the variable-spacing device: object `(s+1)f0/s`
/// before a lens of focal length `f0(1+Λm)`, then `2(s+1)f0` to a lens of
/// focal length `f0(1−Λm)`. At `m = 0` the image is upright at unit
/// magnification.
pub fn variable_spacing_abcd(f0: f64, lambda: f64, m: i32, s: f64) -> Result<Imaging> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("spacing parameter s must be positive, got {s}")));
    }
    let x = lambda * m as f64;
    check_small(x)?;
    let system = RayTransferMatrix::compose(&[
        RayTransferMatrix::thin_lens(f0 * (1.0 + x))?,
        RayTransferMatrix::drift(2.0 * (s + 1.0) * f0),
        RayTransferMatrix::thin_lens(f0 * (1.0 - x))?,
    ]);
    image_solve(&system, (s + 1.0) * f0 / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undispersed_stack_alternates_sign() {
        for n in 0..6 {
            let r = afocal_stack_magnification(0.066, 0, n).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(r.exact, sign);
            assert_eq!(r.approx, sign);
        }
    }

    #[test]
    fn single_pair_values() {
        let r = afocal_stack_magnification(0.066, 1, 1).unwrap();
        assert!((r.per_pair_approx + 1.132).abs() < 1e-12);
        let mat = afocal_pair_matrix(0.06, 0.066, 1).unwrap();
        assert!((mat.a - r.per_pair_exact).abs() < 1e-12);
        assert!(mat.c.abs() < 1e-12);
    }

    #[test]
    fn twenty_pairs() {
        let r = afocal_stack_magnification(0.066, 1, 20).unwrap();
        assert!((r.approx - 14.0).abs() < 0.05);
        assert!((r.exact - 14.07).abs() < 0.01);
        let mat = afocal_stack_matrix(0.06, 0.066, 1, 20).unwrap();
        assert!((mat.a - r.exact).abs() < 1e-9 * r.exact);
        assert!((mat.det() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_large_dispersion() {
        assert!(afocal_stack_magnification(0.5, 2, 3).is_err());
        assert!(variable_spacing_abcd(0.06, 0.5, -2, 1.0).is_err());
    }

    #[test]
    fn variable_spacing_formula() {
        let m = variable_spacing_magnification(0.05, 2, 3.0).unwrap();
        assert!((m.value() - 5.0).abs() < 1e-12);
        assert_eq!(variable_spacing_magnification(0.1, 0, 3.0).unwrap(), Magnification::Finite(1.0));
        assert_eq!(
            variable_spacing_magnification(0.125, 1, 3.0).unwrap(),
            Magnification::Infinite
        );
        assert!(variable_spacing_magnification(0.1, 1, 0.0).is_err());
    }

    #[test]
    fn abcd_device_is_unit_at_zero_oam() {
        for s in [0.5, 1.0, 3.0, 10.0] {
            match variable_spacing_abcd(0.06, 0.05, 0, s).unwrap() {
                Imaging::Finite { magnification, .. } => {
                    assert!((magnification - 1.0).abs() < 1e-12, "s = {s}")
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn abcd_device_closed_form() {
        // exact magnification of the ray-matrix device
        for s in [1.0, 3.0, 10.0] {
            for x in [-0.02, 0.01, 0.03] {
                let exact = (1.0 - x * x) / (1.0 - 2.0 * (s + 1.0) * x - x * x);
                let lambda = x / 2.0;
                match variable_spacing_abcd(0.06, lambda, 2, s).unwrap() {
                    Imaging::Finite { magnification, .. } => {
                        assert!((magnification - exact).abs() < 1e-10 * exact.abs())
                    }
                    other => panic!("{other:?}"),
                }
            }
        }
    }
}
