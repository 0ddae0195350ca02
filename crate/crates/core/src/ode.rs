//! Embedded Runge-Kutta 5(4) integration (Dormand-Prince pair) with
//! adaptive steps, fifth-order dense output, event location, and backward
//! integration.
//!
//! The right-hand side returns `Result`, so systems whose evaluation
//! involves certified quadrature can propagate numerical failures cleanly
//! instead of poisoning the state with NaNs.

use crate::error::{Error, Result};

/// Butcher tableau of the Dormand-Prince 5(4) pair.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (the last tableau row plus a zero: the pair is
/// first-same-as-last).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Error weights `b5 - b4`.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense-output weights for the fifth interpolation coefficient.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Cap on the step magnitude; defaults to the span length.
    pub h_max: Option<f64>,
    /// Initial step magnitude; estimated from the right-hand side when
    /// absent.
    pub h_init: Option<f64>,
    /// Record interpolation coefficients for every accepted step so the
    /// solution can be sampled anywhere afterwards.
    pub store_dense: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
            h_max: None,
            h_init: None,
            store_dense: false,
        }
    }
}

/// One accepted step's interpolation data: a quintic in the normalized
/// time `theta = (t - t0) / h`.
#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            let [r1, r2, r3, r4, r5] = [
                self.rcont[0][i],
                self.rcont[1][i],
                self.rcont[2][i],
                self.rcont[3][i],
                self.rcont[4][i],
            ];
            y[i] = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
        }
        y
    }
}

/// Where and why an event function crossed zero.
#[derive(Debug, Clone, Copy)]
pub struct EventHit<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    /// Endpoint times of accepted steps, starting with `t0`.
    pub times: Vec<f64>,
    /// States at those times.
    pub states: Vec<[f64; N]>,
    /// Final time actually reached (end of span, or the event time).
    pub t_end: f64,
    pub y_end: [f64; N],
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Right-hand-side evaluation count.
    pub n_eval: usize,
    pub event: Option<EventHit<N>>,
    dense: Vec<DenseSegment<N>>,
}

impl<const N: usize> Solution<N> {
    /// Interpolate the solution at `t` (requires `store_dense`).
    pub fn sample(&self, t: f64) -> Result<[f64; N]> {
        if self.dense.is_empty() {
            return Err(Error::InvalidInput(
                "solution was integrated without dense output".into(),
            ));
        }
        let first = &self.dense[0];
        let dir = first.h.signum();
        if dir * (t - first.t0) < -1e-12 || dir * (t - self.t_end) > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "sample time {t} outside integrated span [{}, {}]",
                first.t0, self.t_end
            )));
        }
        // Binary search for the segment containing t.
        let pos = self
            .dense
            .partition_point(|s| dir * (s.t0 + s.h - t) < 0.0)
            .min(self.dense.len() - 1);
        Ok(self.dense[pos].eval(t))
    }

    pub fn dense_segments(&self) -> &[DenseSegment<N>] {
        &self.dense
    }
}

/// Integrate `y' = rhs(t, y)` from `t_span.0` to `t_span.1` (either
/// direction).
pub fn solve<F, const N: usize>(
    rhs: F,
    t_span: (f64, f64),
    y0: [f64; N],
    opts: &OdeOptions,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    solve_with_event(rhs, t_span, y0, opts, |_, _| 1.0)
}

/// As [`solve`], additionally stopping when `event` changes sign between
/// accepted steps. The crossing is located on the dense interpolant to
/// roughly integrator accuracy and reported in [`Solution::event`].
pub fn solve_with_event<F, G, const N: usize>(
    mut rhs: F,
    t_span: (f64, f64),
    y0: [f64; N],
    opts: &OdeOptions,
    event: G,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    G: Fn(f64, &[f64; N]) -> f64,
{
    let (t0, t1) = t_span;
    if !t0.is_finite() || !t1.is_finite() || t0 == t1 {
        return Err(Error::InvalidInput(format!(
            "degenerate integration span [{t0}, {t1}]"
        )));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let h_max = opts.h_max.unwrap_or(span).abs();

    let mut n_eval = 0usize;
    let mut eval = |t: f64, y: &[f64; N], n_eval: &mut usize| -> Result<[f64; N]> {
        *n_eval += 1;
        rhs(t, y)
    };

    let mut t = t0;
    let mut y = y0;
    let mut f_cur = eval(t, &y, &mut n_eval)?;
    let mut g_cur = event(t, &y);

    let mut h = match opts.h_init {
        Some(h) => h.abs().min(h_max).max(f64::MIN_POSITIVE) * dir,
        None => initial_step(&mut eval, &mut n_eval, t, &y, &f_cur, dir, h_max, opts)?,
    };

    let mut sol = Solution {
        times: vec![t0],
        states: vec![y0],
        t_end: t0,
        y_end: y0,
        accepted_steps: 0,
        rejected_steps: 0,
        n_eval: 0,
        event: None,
        dense: Vec::new(),
    };

    let mut facmax = 5.0;
    let mut steps = 0usize;
    while dir * (t1 - t) > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepBudget {
                t,
                max_steps: opts.max_steps,
            });
        }
        if h.abs() < 4.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        // Land exactly on the endpoint.
        if dir * (t + h - t1) > 0.0 {
            h = t1 - t;
        }

        // Stage evaluations (k1 = f_cur by the first-same-as-last property).
        let mut k = [[0.0; N]; 7];
        k[0] = f_cur;
        let mut stage_err = None;
        for s in 1..7 {
            let mut ys = y;
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ys[i] += h * acc;
            }
            match eval(t + C[s] * h, &ys, &mut n_eval) {
                Ok(f) => k[s] = f,
                Err(e) => {
                    stage_err = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = stage_err {
            return Err(e);
        }

        let mut y_new = y;
        let mut err_scaled = 0.0;
        for i in 0..N {
            let mut dy = 0.0;
            let mut ei = 0.0;
            for s in 0..7 {
                dy += B5[s] * k[s][i];
                ei += E[s] * k[s][i];
            }
            y_new[i] += h * dy;
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            let q = h * ei / scale;
            err_scaled += q * q;
        }
        let err = (err_scaled / N as f64).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            // Blow-up inside the step: retry much smaller.
            sol.rejected_steps += 1;
            h *= 0.1;
            facmax = 1.0;
            continue;
        }
        if err > 1.0 {
            sol.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            facmax = 1.0;
            continue;
        }

        // Accepted. k[6] is f(t + h, y_new): reuse it (FSAL).
        let seg = dense_segment(t, h, &y, &y_new, &k);
        let g_new = event(t + h, &y_new);
        let crossed = g_cur != 0.0 && (g_new == 0.0 || (g_cur > 0.0) != (g_new > 0.0));
        if crossed {
            let (te, ye) = locate_event(&seg, &event, t, t + h, g_cur);
            sol.times.push(te);
            sol.states.push(ye);
            if opts.store_dense {
                sol.dense.push(seg);
            }
            sol.accepted_steps += 1;
            sol.t_end = te;
            sol.y_end = ye;
            sol.event = Some(EventHit { t: te, y: ye });
            sol.n_eval = n_eval;
            return Ok(sol);
        }

        t += h;
        y = y_new;
        f_cur = k[6];
        g_cur = g_new;
        sol.accepted_steps += 1;
        sol.times.push(t);
        sol.states.push(y);
        if opts.store_dense {
            sol.dense.push(seg);
        }

        h = (h * (0.9 * err.powf(-0.2)).clamp(0.2, facmax)).clamp(-h_max, h_max);
        if h == 0.0 {
            h = dir * f64::MIN_POSITIVE;
        }
        facmax = 5.0;
    }

    sol.t_end = t;
    sol.y_end = y;
    sol.n_eval = n_eval;
    Ok(sol)
}

/// Fifth-order interpolant for one step, in the standard nested form.
fn dense_segment<const N: usize>(
    t: f64,
    h: f64,
    y: &[f64; N],
    y_new: &[f64; N],
    k: &[[f64; N]; 7],
) -> DenseSegment<N> {
    let mut rcont = [[0.0; N]; 5];
    for i in 0..N {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        rcont[0][i] = y[i];
        rcont[1][i] = ydiff;
        rcont[2][i] = bspl;
        rcont[3][i] = ydiff - h * k[6][i] - bspl;
        let mut d = 0.0;
        for s in 0..7 {
            d += D[s] * k[s][i];
        }
        rcont[4][i] = h * d;
    }
    DenseSegment { t0: t, h, rcont }
}

/// Bisect the dense interpolant for the sign change of `event` in
/// `[ta, tb]`.
fn locate_event<G, const N: usize>(
    seg: &DenseSegment<N>,
    event: &G,
    ta: f64,
    tb: f64,
    g_a: f64,
) -> (f64, [f64; N])
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    let mut lo = ta;
    let mut hi = tb;
    let positive_at_lo = g_a > 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let g = event(mid, &seg.eval(mid));
        if g == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (g > 0.0) == positive_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let te = 0.5 * (lo + hi);
    (te, seg.eval(te))
}

/// Standard two-probe estimate of a safe initial step.
#[allow(clippy::too_many_arguments)]
fn initial_step<E, const N: usize>(
    eval: &mut E,
    n_eval: &mut usize,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    h_max: f64,
    opts: &OdeOptions,
) -> Result<f64>
where
    E: FnMut(f64, &[f64; N], &mut usize) -> Result<[f64; N]>,
{
    let scale = |yi: f64| opts.abs_tol + opts.rel_tol * yi.abs();
    let d0 = rms(y.iter().map(|&yi| yi / scale(yi)));
    let d1 = rms(f0.iter().zip(y.iter()).map(|(&fi, &yi)| fi / scale(yi)));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(h_max);

    let mut y1 = *y;
    for i in 0..N {
        y1[i] += dir * h0 * f0[i];
    }
    let f1 = eval(t + dir * h0, &y1, n_eval)?;
    let d2 = rms(
        f1.iter()
            .zip(f0.iter())
            .zip(y.iter())
            .map(|((&a, &b), &yi)| (a - b) / scale(yi)),
    ) / h0;

    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok(dir * (100.0 * h0).min(h1).min(h_max))
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v * v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}
