//! Third-order normal-form coefficients along a periodic orbit and the
//! twist certificate built from them.
//!
//! Expanding the radial equation about a periodic solution `r_k(t)`
//! gives `x'' + A(t) x + B(t) x^2 + C(t) x^3 + O(x^4) = 0` with
//!
//! ```text
//! A = d_rr V,   B = (1/2) d_rrr V,   C = (1/6) d_rrrr V,
//! ```
//!
//! evaluated at `(t, r_k(t))`. As the amplitude goes to zero the
//! coefficients converge uniformly to the explicit limits
//!
//! ```text
//! Abar = 2 L^2 / rbar^4 + I0^2 / rbar^2,
//! Bbar = -5 L^2 / rbar^5 - (3/2) I0^2 / rbar^3,
//! Cbar = 9 L^2 / rbar^6 + (11/6) I0^2 / rbar^4.
//! ```
//!
//! The certificate checks the three twist conditions
//! `0 < A_* <= A^* < (pi/2T)^2`, `C_* > 0`, and
//! `10 B_*^2 A_*^{3/2} > 9 C^* (A^*)^{5/2}` with sup/inf estimated from
//! a refined grid plus a Lipschitz inflation term — grid extrema alone
//! could falsely certify. `B_*` is read conservatively as `inf |B|`
//! when `B` keeps one sign and `0` when it does not.

use crate::continuation::{Branch, PeriodMap, PeriodicOrbit};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Refinement of the sampling grid stops once the six sup/inf estimates
/// move less than this between levels.
const EXTREMA_STABLE_TOL: f64 = 1e-6;
/// Coarsest grid (intervals); each refinement doubles it.
const GRID_START: usize = 32;
/// Refinement cap; reaching it means the coefficients oscillate faster
/// than expected and the inflation term carries the uncertainty.
const GRID_MAX: usize = 1024;
/// Safety factor on the sampled time-derivative bounds.
const RATE_INFLATION: f64 = 2.0;
/// Quadrature budget floor for the third and fourth radial partials.
/// Their integrands carry much more absolute mass than the potential
/// itself, so budgets tight enough for interpolation tables sit below
/// the f64 rounding floor here; the certificate margins are of order
/// one, so this is still far more accuracy than the verdict needs.
const COEFF_ABS_TOL: f64 = 1e-8;
const COEFF_REL_TOL: f64 = 1e-9;

/// The normal-form coefficients sampled along one orbit.
#[derive(Debug, Clone, Serialize)]
pub struct TwistCoefficients {
    pub k: f64,
    /// Sampling grid over one period, uniform.
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Zero-amplitude limits from the triplet.
    pub a_bar: f64,
    pub b_bar: f64,
    pub c_bar: f64,
    /// Deviations from the limits, `A - Abar` etc.
    pub xi_a: Vec<f64>,
    pub xi_b: Vec<f64>,
    pub xi_c: Vec<f64>,
    /// Monodromy rotation angle of the orbit (NaN when hyperbolic).
    pub rotation_angle: f64,
    /// Sampled bounds on `|dA/dt|`, `|dB/dt|`, `|dC/dt|`, already
    /// inflated; used to widen grid extrema into certified sup/inf.
    pub rate_bounds: [f64; 3],
}

/// Verdicts and margins of the three twist conditions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TwistCertificate {
    /// `0 < A_* <= A^* < (pi / 2T)^2`.
    pub condition_i: bool,
    /// `(pi / 2T)^2 - A^*`; the binding direction of condition (i).
    pub margin_i: f64,
    /// `C_* > 0`.
    pub condition_ii: bool,
    pub margin_ii: f64,
    /// `10 B_*^2 A_*^{3/2} > 9 C^* (A^*)^{5/2}`.
    pub condition_iii: bool,
    pub margin_iii: f64,
    pub a_inf: f64,
    pub a_sup: f64,
    pub c_inf: f64,
    pub c_sup: f64,
    /// `B_*^2` under the conservative sign-change reading.
    pub b_star_sq: f64,
    /// Rotation number of the fixed point, `rotation_angle / 2 pi`.
    pub rotation_bound: f64,
    pub certified: bool,
}

/// Certificate of one branch entry.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdEntry {
    pub k: f64,
    pub certificate: TwistCertificate,
}

/// Branch-wide sweep outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    /// Largest amplitude whose certificate passes with margins above the
    /// safety floor; `None` when no entry passes.
    pub k1: Option<f64>,
    pub entries: Vec<ThresholdEntry>,
}

/// Sample `A`, `B`, `C` along an orbit of `pm`, refining the grid until
/// the running extrema stabilize.
///
/// The a-partials up to fourth order come from one batched certified
/// evaluation per grid point; errors surface when the current profile
/// is not smooth enough for fourth derivatives.
pub fn compute_coefficients(pm: &PeriodMap, orbit: &PeriodicOrbit) -> Result<TwistCoefficients> {
    let dyn_k = pm.dynamics().clone().with_k(orbit.k);
    let period = pm.period();
    let triplet = pm.triplet();

    let field = {
        let base = pm.dynamics().eval().field();
        let mut config = *base.config();
        config.abs_tol = config.abs_tol.max(COEFF_ABS_TOL);
        config.rel_tol = config.rel_tol.max(COEFF_REL_TOL);
        crate::potential::PotentialField::with_config(base.profile().clone(), base.c(), config)?
    };

    let mut opts = crate::dynamics::SimOptions::default();
    opts.ode.store_dense = true;
    let sol = dyn_k.integrate_radial((0.0, period), orbit.x0, &opts)?;
    if let Some(hit) = &sol.event {
        return Err(Error::Collision { t: hit.t, r: hit.y[0] });
    }

    let eval_point = |t: f64| -> Result<[f64; 3]> {
        let r = sol.sample(t)?[0];
        let mut a5 = [0.0_f64; 5];
        if orbit.k != 0.0 {
            let pairs = [(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)];
            let vals = field.a_with_partials(t, r, &pairs)?;
            for (slot, v) in a5.iter_mut().zip(&vals) {
                *slot = v.value;
            }
        }
        let v = dyn_k.v_derivatives_from_a(r, &a5);
        Ok([v[2], v[3] / 2.0, v[4] / 6.0])
    };

    // Dyadic refinement, reusing previously evaluated points. Each new
    // level only evaluates the interval midpoints, in parallel.
    let mut n = GRID_START;
    let mut times: Vec<f64> = (0..=n).map(|i| period * i as f64 / n as f64).collect();
    let mut vals: Vec<[f64; 3]> = times
        .par_iter()
        .map(|&t| eval_point(t))
        .collect::<Result<_>>()?;
    let mut extrema = grid_extrema(&vals);
    while n < GRID_MAX {
        let mid_times: Vec<f64> = (0..n)
            .map(|i| period * (2 * i + 1) as f64 / (2 * n) as f64)
            .collect();
        let mid_vals: Vec<[f64; 3]> = mid_times
            .par_iter()
            .map(|&t| eval_point(t))
            .collect::<Result<_>>()?;
        let mut new_times = Vec::with_capacity(2 * n + 1);
        let mut new_vals = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            new_times.push(times[i]);
            new_vals.push(vals[i]);
            new_times.push(mid_times[i]);
            new_vals.push(mid_vals[i]);
        }
        new_times.push(times[n]);
        new_vals.push(vals[n]);
        times = new_times;
        vals = new_vals;
        n *= 2;
        let refined = grid_extrema(&vals);
        let drift = extrema
            .iter()
            .zip(&refined)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        extrema = refined;
        if drift <= EXTREMA_STABLE_TOL {
            break;
        }
    }

    let h = period / n as f64;
    let mut rate_bounds = [0.0_f64; 3];
    for w in vals.windows(2) {
        for c in 0..3 {
            rate_bounds[c] = rate_bounds[c].max((w[1][c] - w[0][c]).abs() / h);
        }
    }
    for r in &mut rate_bounds {
        *r *= RATE_INFLATION;
    }

    let (rbar, l, i0) = (triplet.rbar, triplet.l, triplet.i0);
    let a_bar = 2.0 * l * l / rbar.powi(4) + i0 * i0 / (rbar * rbar);
    let b_bar = -5.0 * l * l / rbar.powi(5) - 1.5 * i0 * i0 / rbar.powi(3);
    let c_bar = 9.0 * l * l / rbar.powi(6) + 11.0 / 6.0 * i0 * i0 / rbar.powi(4);

    let a: Vec<f64> = vals.iter().map(|v| v[0]).collect();
    let b: Vec<f64> = vals.iter().map(|v| v[1]).collect();
    let c: Vec<f64> = vals.iter().map(|v| v[2]).collect();
    Ok(TwistCoefficients {
        k: orbit.k,
        xi_a: a.iter().map(|x| x - a_bar).collect(),
        xi_b: b.iter().map(|x| x - b_bar).collect(),
        xi_c: c.iter().map(|x| x - c_bar).collect(),
        times,
        a,
        b,
        c,
        a_bar,
        b_bar,
        c_bar,
        rotation_angle: orbit.rotation_angle,
        rate_bounds,
    })
}

/// Evaluate the three twist conditions for the given period.
///
/// Sup/inf are grid extrema widened by `rate_bound * h / 2` — the
/// largest move the coefficient can make between adjacent samples at
/// the observed rates.
pub fn check_twist(coeffs: &TwistCoefficients, period: f64) -> TwistCertificate {
    let h = if coeffs.times.len() > 1 {
        coeffs.times[1] - coeffs.times[0]
    } else {
        0.0
    };
    let widen = |lo: f64, hi: f64, rate: f64| -> (f64, f64) {
        let pad = 0.5 * rate * h;
        (lo - pad, hi + pad)
    };
    let (a_lo, a_hi) = {
        let (lo, hi) = min_max(&coeffs.a);
        widen(lo, hi, coeffs.rate_bounds[0])
    };
    let (b_lo, b_hi) = {
        let (lo, hi) = min_max(&coeffs.b);
        widen(lo, hi, coeffs.rate_bounds[1])
    };
    let (c_lo, c_hi) = {
        let (lo, hi) = min_max(&coeffs.c);
        widen(lo, hi, coeffs.rate_bounds[2])
    };

    // Conservative B_*: the infimum of |B| when the sign is constant,
    // zero otherwise.
    let b_star = if b_lo > 0.0 {
        b_lo
    } else if b_hi < 0.0 {
        -b_hi
    } else {
        0.0
    };
    let b_star_sq = b_star * b_star;

    let cap = (std::f64::consts::FRAC_PI_2 / period).powi(2);
    let margin_i = cap - a_hi;
    let condition_i = a_lo > 0.0 && margin_i > 0.0;
    let margin_ii = c_lo;
    let condition_ii = margin_ii > 0.0;
    let margin_iii = 10.0 * b_star_sq * a_lo.powf(1.5) - 9.0 * c_hi * a_hi.powf(2.5);
    let condition_iii = condition_i && margin_iii > 0.0;

    TwistCertificate {
        condition_i,
        margin_i,
        condition_ii,
        margin_ii,
        condition_iii,
        margin_iii,
        a_inf: a_lo,
        a_sup: a_hi,
        c_inf: c_lo,
        c_sup: c_hi,
        b_star_sq,
        rotation_bound: coeffs.rotation_angle / std::f64::consts::TAU,
        certified: condition_i && condition_ii && condition_iii,
    }
}

/// Certify every branch entry (in parallel) and report the largest
/// amplitude whose margins clear `safety`.
pub fn twist_threshold(pm: &PeriodMap, branch: &Branch, safety: f64) -> Result<ThresholdReport> {
    let period = pm.period();
    let entries: Vec<ThresholdEntry> = branch
        .orbits
        .par_iter()
        .map(|orbit| {
            let coeffs = compute_coefficients(pm, orbit)?;
            Ok(ThresholdEntry {
                k: orbit.k,
                certificate: check_twist(&coeffs, period),
            })
        })
        .collect::<Result<_>>()?;
    let k1 = entries
        .iter()
        .filter(|e| {
            let c = &e.certificate;
            c.certified && c.margin_i > safety && c.margin_ii > safety && c.margin_iii > safety
        })
        .map(|e| e.k.abs())
        .fold(None, |acc: Option<f64>, k| Some(acc.map_or(k, |a| a.max(k))));
    Ok(ThresholdReport { k1, entries })
}

fn grid_extrema(vals: &[[f64; 3]]) -> [f64; 6] {
    let mut out = [
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    ];
    for v in vals {
        for c in 0..3 {
            out[2 * c] = out[2 * c].min(v[c]);
            out[2 * c + 1] = out[2 * c + 1].max(v[c]);
        }
    }
    out
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}
