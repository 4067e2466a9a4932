//! Complex tridiagonal systems (Thomas algorithm), factored once and solved
//! many times.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// LU factorisation of a tridiagonal matrix with sub-diagonal `lower`,
/// diagonal `diag` and super-diagonal `upper`.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<Complex64>,
    // modified super-diagonal c'_i = c_i / (b_i - a_i c'_{i-1})
    upper_mod: Vec<Complex64>,
    // 1 / (b_i - a_i c'_{i-1})
    inv_pivot: Vec<Complex64>,
}

impl TridiagonalLu {
    /// `lower[0]` and `upper[n-1]` are ignored.
    pub fn new(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() != n || upper.len() != n {
            return Err(Error::domain("tridiagonal bands must have equal nonzero length"));
        }
        let mut upper_mod = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let pivot = if i == 0 { diag[0] } else { diag[i] - lower[i] * prev };
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(Error::numerical(
                    format!("zero pivot at row {i} of tridiagonal system"),
                    None,
                ));
            }
            let inv = pivot.inv();
            inv_pivot[i] = inv;
            prev = if i + 1 < n { upper[i] * inv } else { Complex64::new(0.0, 0.0) };
            upper_mod[i] = prev;
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper_mod,
            inv_pivot,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Solves in place: `rhs` is overwritten with the solution.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n, "right-hand side length mismatch");
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.upper_mod[i] * next;
        }
    }
}
