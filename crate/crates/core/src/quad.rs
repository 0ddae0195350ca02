//! Globally adaptive Gauss–Kronrod quadrature (7–15 pair) for vector-valued
//! integrands on a finite interval.
//!
//! Several derivatives of the retarded potential share the same retarded
//! argument, so evaluating them through one adaptive pass with a common
//! subdivision is much cheaper than separate integrations. The integrand
//! therefore writes `ncomp` components per abscissa and every component gets
//! its own accumulated error bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Abscissae of the 15-point Kronrod rule (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// 7-point Gauss weights for the even-indexed abscissae of `XGK`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone)]
pub struct QuadResult {
    /// Integral estimate per component.
    pub values: Vec<f64>,
    /// Certified error bound per component.
    pub bounds: Vec<f64>,
    /// Number of subintervals in the final partition.
    pub intervals: usize,
}

struct Interval {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    key: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.partial_cmp(&other.key).unwrap_or(Ordering::Equal)
    }
}

/// Integrate `f` over the hull of `breakpoints` until every component's
/// error bound drops below `tol + rel_tol * |estimate|`, subdividing at
/// most `max_intervals` times. The relative term keeps large-magnitude
/// components from demanding sub-roundoff absolute accuracy; the reported
/// bounds stay honest either way.
///
/// `breakpoints` must be strictly increasing and contain at least two
/// points; interior entries seed the initial partition (useful when the
/// integrand changes character at a known location).
pub fn integrate<F>(
    f: &F,
    ncomp: usize,
    breakpoints: &[f64],
    tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult>
where
    F: Fn(f64, &mut [f64]),
{
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "quadrature breakpoints must be strictly increasing".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut totals = vec![0.0; ncomp];
    let mut bounds = vec![0.0; ncomp];
    for w in breakpoints.windows(2) {
        let iv = eval_interval(f, ncomp, w[0], w[1]);
        for c in 0..ncomp {
            totals[c] += iv.values[c];
            bounds[c] += iv.errors[c];
        }
        heap.push(iv);
    }

    let converged = |bounds: &[f64], totals: &[f64]| {
        bounds
            .iter()
            .zip(totals)
            .all(|(&b, &v)| b <= tol + rel_tol * v.abs())
    };
    while !converged(&bounds, &totals) {
        if heap.len() >= max_intervals {
            let worst = bounds.iter().cloned().fold(0.0, f64::max);
            let worst_idx = bounds.iter().position(|&b| b == worst).unwrap_or(0);
            return Err(Error::QuadratureBudget {
                estimate: totals[worst_idx],
                bound: worst,
                tolerance: tol,
            });
        }
        let iv = match heap.pop() {
            Some(iv) => iv,
            None => break,
        };
        let mid = 0.5 * (iv.a + iv.b);
        if mid <= iv.a || mid >= iv.b {
            // Interval at floating-point resolution; its bound is final.
            let mut pinned = iv;
            pinned.key = 0.0;
            heap.push(pinned);
            continue;
        }
        for c in 0..ncomp {
            totals[c] -= iv.values[c];
            bounds[c] -= iv.errors[c];
        }
        for (a, b) in [(iv.a, mid), (mid, iv.b)] {
            let child = eval_interval(f, ncomp, a, b);
            for c in 0..ncomp {
                totals[c] += child.values[c];
                bounds[c] += child.errors[c];
            }
            heap.push(child);
        }
    }

    Ok(QuadResult {
        values: totals,
        bounds,
        intervals: heap.len(),
    })
}

/// Convenience wrapper for scalar integrands.
pub fn integrate_scalar<F>(
    f: &F,
    breakpoints: &[f64],
    tol: f64,
    max_intervals: usize,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let wrapped = |x: f64, out: &mut [f64]| out[0] = f(x);
    let res = integrate(&wrapped, 1, breakpoints, tol, 0.0, max_intervals)?;
    Ok((res.values[0], res.bounds[0]))
}

fn eval_interval<F>(f: &F, ncomp: usize, a: f64, b: f64) -> Interval
where
    F: Fn(f64, &mut [f64]),
{
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);

    let mut kronrod = vec![0.0; ncomp];
    let mut gauss = vec![0.0; ncomp];
    let mut resabs = vec![0.0; ncomp]; // integral of |f|
    let mut fc = vec![0.0; ncomp];
    let mut buf = vec![0.0; ncomp];

    f(center, &mut fc);
    for c in 0..ncomp {
        kronrod[c] = WGK[7] * fc[c];
        gauss[c] = WG[3] * fc[c];
        resabs[c] = WGK[7] * fc[c].abs();
    }
    let mut samples = vec![vec![0.0; ncomp]; 14];
    for (i, &xi) in XGK.iter().take(7).enumerate() {
        let dx = half * xi;
        f(center - dx, &mut buf);
        samples[2 * i].copy_from_slice(&buf);
        f(center + dx, &mut samples[2 * i + 1]);
        for c in 0..ncomp {
            let pair = samples[2 * i][c] + samples[2 * i + 1][c];
            kronrod[c] += WGK[i] * pair;
            resabs[c] += WGK[i] * (samples[2 * i][c].abs() + samples[2 * i + 1][c].abs());
            if i % 2 == 1 {
                gauss[c] += WG[i / 2] * pair;
            }
        }
    }

    let mut values = vec![0.0; ncomp];
    let mut errors = vec![0.0; ncomp];
    for c in 0..ncomp {
        // Integral of |f - mean| over the interval, used to rescale the raw
        // Gauss/Kronrod difference the way QUADPACK does.
        let mean = 0.5 * kronrod[c];
        let mut resasc = WGK[7] * (fc[c] - mean).abs();
        for (i, pair) in samples.chunks(2).enumerate() {
            resasc += WGK[i] * ((pair[0][c] - mean).abs() + (pair[1][c] - mean).abs());
        }
        resasc *= half.abs();
        let raw = ((kronrod[c] - gauss[c]) * half).abs();
        let mut err = raw;
        if resasc != 0.0 && raw != 0.0 {
            err = resasc * (1.0f64).min((200.0 * raw / resasc).powf(1.5));
        }
        let floor = 50.0 * f64::EPSILON * resabs[c] * half.abs();
        values[c] = kronrod[c] * half;
        errors[c] = err.max(floor);
    }

    let key = errors.iter().cloned().fold(0.0, f64::max);
    Interval {
        a,
        b,
        values,
        errors,
        key,
    }
}
