//! Adaptive Gauss-Kronrod (G7/K15) quadrature.
//!
//! Infinite ranges are mapped to finite ones before subdivision: `x = tan(u)`
//! on `(-π/2, π/2)` for the whole line (this keeps Cauchy-type tails
//! integrable) and `x = a + t/(1-t)` for half-lines. The worst panel is
//! bisected until the summed error estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 0.0,
            max_panels: 10_000,
        }
    }
}

impl Options {
    pub fn abs(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
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

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let error = rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h);
    Ok(Panel {
        a,
        b,
        value: res_k * half,
        error,
    })
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, cuts: &[f64], opts: Options) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(f, w[0], w[1])?);
        }
    }
    let mut panels = heap.len();
    loop {
        let value: f64 = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
        let error: f64 = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol {
            return Ok(Integral {
                value,
                error,
                panels,
            });
        }
        if panels >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "error estimate {error:.3e} above tolerance {tol:.3e} after {panels} panels"
            )));
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Quadrature(format!(
                "panels cannot be refined further; error estimate {error:.3e}"
            )));
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        heap.push(kronrod(f, worst.a, mid)?);
        heap.push(kronrod(f, mid, worst.b)?);
        panels += 1;
    }
}

/// Integrates `f` over `[a, b]`; either bound may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: Options) -> Result<Integral> {
    integrate_with_breaks(f, a, b, &[], opts)
}

/// Integrates `f` over `[a, b]` with extra initial cut points, typically at
/// kinks or peaks of the integrand.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: Options,
) -> Result<Integral> {
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::Range(format!("invalid interval [{a}, {b}]")));
    }
    let mut interior: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();

    // Every transformed integrand treats f(x) == 0 as an exact zero so that
    // infinite Jacobians at the ends cannot produce NaN.
    match (a.is_finite(), b.is_finite()) {
        (true, true) => {
            let mut cuts = vec![a];
            cuts.extend(interior);
            cuts.push(b);
            adaptive(&f, &cuts, opts)
        }
        (false, false) => {
            let g = |u: f64| {
                let x = u.tan();
                let fx = f(x);
                if fx == 0.0 {
                    0.0
                } else {
                    fx * (1.0 + x * x)
                }
            };
            let mut cuts = vec![-FRAC_PI_2];
            cuts.extend(interior.iter().map(|x| x.atan()));
            cuts.push(FRAC_PI_2);
            adaptive(&g, &cuts, opts)
        }
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let fx = f(a + t / s);
                if fx == 0.0 {
                    0.0
                } else {
                    fx / (s * s)
                }
            };
            let mut cuts = vec![0.0];
            cuts.extend(interior.iter().map(|x| (x - a) / (1.0 + x - a)));
            cuts.push(1.0);
            adaptive(&g, &cuts, opts)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let fx = f(b - t / s);
                if fx == 0.0 {
                    0.0
                } else {
                    fx / (s * s)
                }
            };
            let mut cuts: Vec<f64> = interior.iter().map(|x| (b - x) / (1.0 + b - x)).collect();
            cuts.push(0.0);
            cuts.push(1.0);
            cuts.sort_by(f64::total_cmp);
            adaptive(&g, &cuts, opts)
        }
    }
}
