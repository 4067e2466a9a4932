//! Globally adaptive Gauss–Kronrod quadrature on finite, semi-infinite and
//! doubly infinite intervals.
//!
//! Infinite limits are mapped with `z = c + L·tan(t)` onto a finite `t`
//! interval. The length scale `L` is either supplied or estimated by scanning
//! `|f(z)|·|z − c|` over a logarithmic grid. After mapping, the `t` interval is
//! truncated where the mapped integrand `f(z(t))·L·sec²(t)` stays below
//! `1e-14` of its sampled peak; the truncation is reported in
//! [`Truncation`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_178,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Mapping and truncation applied to an infinite range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Length scale `L` of the tangent map.
    pub scale: f64,
    /// Centre `c` of the tangent map.
    pub center: f64,
    /// Integrated `t` range after truncation.
    pub t_range: (f64, f64),
    /// The same range expressed in `z` (infinite when not truncated).
    pub z_range: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Integral of `|f|`, used for the absolute error floor.
    pub abs_integral: f64,
    pub evaluations: usize,
    pub intervals: usize,
    pub truncation: Option<Truncation>,
}

/// Adaptive quadrature settings.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    pub initial_panels: usize,
    /// Length scale for infinite ranges; estimated when `None`.
    pub scale: Option<f64>,
    /// Centre of the tangent map for doubly infinite ranges.
    pub center: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 4000,
            initial_panels: 8,
            scale: None,
            center: 0.0,
        }
    }
}

/// Integrates `f` over `[z_min, z_max]` (either limit may be infinite) to
/// relative tolerance `rel_tol`, which must lie in `(0, 1e-2]`.
pub fn integrate_line<F: Fn(f64) -> f64>(
    f: F,
    z_min: f64,
    z_max: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    Quadrature {
        rel_tol,
        ..Default::default()
    }
    .integrate(f, z_min, z_max)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        z_min: f64,
        z_max: f64,
    ) -> Result<QuadratureResult> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::domain(format!(
                "rel_tol must lie in (0, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if z_min.is_nan() || z_max.is_nan() {
            return Err(Error::domain("integration limits must not be NaN"));
        }
        if z_min == z_max {
            return Ok(QuadratureResult {
                value: 0.0,
                error_estimate: 0.0,
                abs_integral: 0.0,
                evaluations: 0,
                intervals: 0,
                truncation: None,
            });
        }
        if z_min > z_max {
            let mut r = self.integrate(f, z_max, z_min)?;
            r.value = -r.value;
            return Ok(r);
        }

        match (z_min.is_finite(), z_max.is_finite()) {
            (true, true) => self.adaptive(&f, z_min, z_max, None),
            (lower_finite, upper_finite) => {
                let center = if lower_finite {
                    z_min
                } else if upper_finite {
                    z_max
                } else {
                    self.center
                };
                let scale = match self.scale {
                    Some(s) if s > 0.0 && s.is_finite() => s,
                    Some(s) => return Err(Error::domain(format!("invalid length scale {s}"))),
                    None => match estimate_scale(&f, center, lower_finite, upper_finite) {
                        Some(s) => s,
                        None => {
                            // integrand vanishes on every probe
                            return Ok(QuadratureResult {
                                value: 0.0,
                                error_estimate: 0.0,
                                abs_integral: 0.0,
                                evaluations: 0,
                                intervals: 0,
                                truncation: None,
                            });
                        }
                    },
                };
                let t_lo = if lower_finite { 0.0 } else { -FRAC_PI_2 };
                let t_hi = if upper_finite { 0.0 } else { FRAC_PI_2 };
                let mapped = |t: f64| {
                    let c = t.cos();
                    f(center + scale * t.tan()) * scale / (c * c)
                };
                let (ta, tb) = truncate(&mapped, t_lo, t_hi);
                let to_z = |t: f64| {
                    if t.abs() >= FRAC_PI_2 {
                        t.signum() * f64::INFINITY
                    } else {
                        center + scale * t.tan()
                    }
                };
                let trunc = Truncation {
                    scale,
                    center,
                    t_range: (ta, tb),
                    z_range: (to_z(ta), to_z(tb)),
                };
                self.adaptive(&mapped, ta, tb, Some(trunc))
            }
        }
    }

    fn adaptive<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        truncation: Option<Truncation>,
    ) -> Result<QuadratureResult> {
        let n0 = self.initial_panels.max(1);
        let width = (b - a) / n0 as f64;
        let mut heap = BinaryHeap::with_capacity(self.max_intervals + n0);
        let mut evaluations = 0;
        for i in 0..n0 {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            let p = kronrod21(f, lo, hi)?;
            evaluations += 21;
            heap.push(p);
        }

        loop {
            let (value, error, abs) = heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
                (acc.0 + p.value, acc.1 + p.error, acc.2 + p.abs)
            });
            let floor = 100.0 * f64::EPSILON * abs;
            let target = self.abs_tol.max(self.rel_tol * value.abs()).max(floor);
            if error <= target {
                return Ok(QuadratureResult {
                    value,
                    error_estimate: error,
                    abs_integral: abs,
                    evaluations,
                    intervals: heap.len(),
                    truncation,
                });
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::numerical(
                    format!(
                        "quadrature did not converge after {} intervals (error {error:e})",
                        heap.len()
                    ),
                    Some(value),
                ));
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval exhausted at floating-point resolution
                return Err(Error::numerical(
                    "quadrature interval collapsed below machine resolution",
                    Some(value),
                ));
            }
            heap.push(kronrod21(f, worst.a, mid)?);
            heap.push(kronrod21(f, mid, worst.b)?);
            evaluations += 42;
        }
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs = WGK[10] * fc.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() || !abs.is_finite() {
        return Err(Error::numerical(
            format!("integrand not finite on [{a:e}, {b:e}]"),
            None,
        ));
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let half_abs = half.abs();
    let value = kronrod * half;
    let abs = abs * half_abs;
    let asc = asc * half_abs;
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * abs;
    if round > error {
        error = round;
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        abs,
    })
}

/// Picks the `|z − c|` that maximises `|f(z)|·|z − c|` on a log grid, i.e. the
/// decade contributing most to the integral.
fn estimate_scale<F: Fn(f64) -> f64>(
    f: &F,
    center: f64,
    lower_finite: bool,
    upper_finite: bool,
) -> Option<f64> {
    let mut best = (0.0, None);
    for k in -160..=160 {
        let s = 10f64.powf(k as f64 / 8.0);
        for (side, allowed) in [(1.0, !upper_finite), (-1.0, !lower_finite)] {
            if !allowed {
                continue;
            }
            let v = f(center + side * s).abs() * s;
            if v.is_finite() && v > best.0 {
                best = (v, Some(s));
            }
        }
    }
    best.1
}

/// Shrinks `[t_lo, t_hi]` to the region where the mapped integrand exceeds
/// `1e-14` of its sampled peak.
fn truncate<F: Fn(f64) -> f64>(g: &F, t_lo: f64, t_hi: f64) -> (f64, f64) {
    const PROBES: usize = 4096;
    let dt = (t_hi - t_lo) / PROBES as f64;
    let samples: Vec<f64> = (0..PROBES)
        .map(|i| {
            let v = g(t_lo + (i as f64 + 0.5) * dt).abs();
            if v.is_finite() {
                v
            } else {
                0.0
            }
        })
        .collect();
    let peak = samples.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return (t_lo, t_hi);
    }
    let threshold = 1e-14 * peak;
    let first = samples.iter().position(|&v| v >= threshold).unwrap_or(0);
    let last = samples
        .iter()
        .rposition(|&v| v >= threshold)
        .unwrap_or(PROBES - 1);
    let lo = if first <= 1 {
        t_lo
    } else {
        t_lo + (first - 1) as f64 * dt
    };
    let hi = if last + 2 >= PROBES {
        t_hi
    } else {
        t_lo + (last + 2) as f64 * dt
    };
    (lo, hi)
}
