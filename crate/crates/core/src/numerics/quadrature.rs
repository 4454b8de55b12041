use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

/// Default absolute tolerance for planning integrals.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;

/// Default subdivision budget for [`integrate`].
pub const DEFAULT_MAX_SEGMENTS: usize = 4000;

// 15-point Kronrod abscissae on [-1, 1] (non-negative half, centre last).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
// 7-point Gauss weights for the odd-indexed Kronrod nodes plus the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(centre - dx), f(centre + dx));
        finite &= f1.is_finite() && f2.is_finite();
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !finite {
        return Err(Error::Domain(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Adaptive Gauss–Kronrod (G7/K15) quadrature of `f` over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the summed
/// estimate is at most `abs_tol`. Integrable endpoint singularities are fine
/// as long as `f` is finite at interior points; interior nodes never touch
/// the endpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    integrate_with_budget(f, a, b, abs_tol, DEFAULT_MAX_SEGMENTS)
}

pub fn integrate_with_budget<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if a > b {
        return Err(Error::Domain(format!("integration requires a <= b, got [{a}, {b}]")));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::Domain(format!("abs_tol must be positive, got {abs_tol}")));
    }
    if a == b {
        return Ok(0.0);
    }

    let first = gauss_kronrod(&f, a, b)?;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::from([first]);

    while total_error > abs_tol {
        if heap.len() >= max_segments.max(1) {
            return Err(Error::QuadratureNonConvergence {
                tol: abs_tol,
                estimate: total_error,
                segments: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // segment cannot be split further in floating point
            return Err(Error::QuadratureNonConvergence {
                tol: abs_tol,
                estimate: total_error,
                segments: heap.len() + 1,
            });
        }
        let left = gauss_kronrod(&f, worst.a, mid)?;
        let right = gauss_kronrod(&f, mid, worst.b)?;
        heap.push(left);
        heap.push(right);
        // recompute instead of updating incrementally to avoid drift
        total_error = heap.iter().map(|s| s.error).sum();
    }

    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(segments.iter().map(|s| s.value).sum())
}
