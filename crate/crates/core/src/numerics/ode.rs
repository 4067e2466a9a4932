//! Explicit Runge–Kutta integrators for small fixed-size systems: adaptive
//! Dormand–Prince 5(4) with continuous output, and classical fixed-step RK4.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<const N: usize> {
    pub rel_tol: f64,
    pub abs_tol: [f64; N],
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl<const N: usize> OdeOptions<N> {
    pub fn new(rel_tol: f64, abs_tol: [f64; N], max_step: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_step,
            initial_step: None,
            max_steps: 1_000_000,
        }
    }
}

/// Continuous extension over one accepted step `[z0, z0 + h]`.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub z0: f64,
    pub h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn z1(&self) -> f64 {
        self.z0 + self.h
    }

    /// Fifth-order interpolant; valid for `z` in `[z0, z0 + h]`.
    pub fn eval(&self, z: f64) -> [f64; N] {
        let theta = (z - self.z0) / self.h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            let r = &self.rc;
            out[i] = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

/// Integrates `y' = rhs(z, y)` from `z0` to `z_end` (forward only) and calls
/// `observer` after every accepted step. Returns the final state and the `z`
/// at which integration stopped.
pub fn dopri5<const N: usize, F, O>(
    mut rhs: F,
    z0: f64,
    y0: [f64; N],
    z_end: f64,
    opts: &OdeOptions<N>,
    mut observer: O,
) -> Result<(f64, [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(&DenseStep<N>, &[f64; N]) -> Result<Control>,
{
    if !(z_end > z0) {
        return Err(Error::domain(format!(
            "integration range must be increasing: [{z0}, {z_end}]"
        )));
    }
    if !(opts.rel_tol > 0.0) || !(opts.max_step > 0.0) {
        return Err(Error::domain("tolerance and max_step must be positive"));
    }
    let span = z_end - z0;
    let mut z = z0;
    let mut y = y0;
    let mut k1 = rhs(z, &y)?;
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| (span * 1e-3).min(opts.max_step))
        .min(opts.max_step)
        .min(span);
    let min_step = 1e-13 * span.max(z0.abs()).max(z_end.abs());
    let mut steps = 0usize;

    while z < z_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::numerical(
                format!("step limit {} reached at z = {z:e}", opts.max_steps),
                None,
            ));
        }
        let last = z + h >= z_end;
        if last {
            h = z_end - z;
        }
        let z_new = if last { z_end } else { z + h };
        let stages = (|| -> Result<_> {
            let k2 = rhs(z + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = rhs(z + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(z + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = rhs(
                z + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                z + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = rhs(z_new, &y_new)?;
            Ok((k3, k4, k5, k6, k7, y_new))
        })();
        let (k3, k4, k5, k6, k7, y_new) = match stages {
            Ok(s) => s,
            // a trial stage that lands in a singular region is a rejected step
            Err(Error::Singularity(msg)) => {
                h *= 0.25;
                if h < min_step {
                    return Err(Error::Singularity(format!(
                        "{msg}; step size collapsed to {h:e} at z = {z:e}"
                    )));
                }
                continue;
            }
            Err(e) => return Err(e),
        };

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol[i] + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            let mut rc = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rc[0][i] = y[i];
                rc[1][i] = ydiff;
                rc[2][i] = bspl;
                rc[3][i] = ydiff - h * k7[i] - bspl;
                rc[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let dense = DenseStep { z0: z, h, rc };
            z = z_new;
            y = y_new;
            k1 = k7;
            if observer(&dense, &y)? == Control::Stop {
                return Ok((z, y));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(opts.max_step);
        } else {
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= factor;
            if h < min_step {
                return Err(Error::numerical(
                    format!("step size collapsed to {h:e} at z = {z:e}"),
                    None,
                ));
            }
        }
    }
    Ok((z, y))
}

/// Classical fourth-order Runge–Kutta with `steps` equal steps.
pub fn rk4_fixed<const N: usize, F, O>(
    mut rhs: F,
    z0: f64,
    y0: [f64; N],
    z_end: f64,
    steps: usize,
    mut observer: O,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(f64, &[f64; N]),
{
    if steps == 0 {
        return Err(Error::domain("rk4 needs at least one step"));
    }
    let h = (z_end - z0) / steps as f64;
    let mut y = y0;
    observer(z0, &y);
    for s in 0..steps {
        let z = z0 + h * s as f64;
        let k1 = rhs(z, &y)?;
        let k2 = rhs(z + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]))?;
        let k3 = rhs(z + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]))?;
        let k4 = rhs(z + h, &axpy(&y, h, &[(1.0, &k3)]))?;
        y = axpy(
            &y,
            h,
            &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
        );
        let z_next = if s + 1 == steps { z_end } else { z0 + h * (s + 1) as f64 };
        observer(z_next, &y);
    }
    Ok(y)
}
