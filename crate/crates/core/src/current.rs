//! Periodic current profiles `I(t)` driving the oscillating part of the
//! wire's field.
//!
//! A profile bundles the mean current `I0`, the forcing amplitude `k`, the
//! period `T`, and the zero-mean shape `I`. Two shape families are
//! provided:
//!
//! * finite Fourier series (smooth, all derivatives and antiderivatives in
//!   closed form),
//! * a C^4 "smoothed square wave" built from ninth-degree polynomial
//!   transitions, which exercises the finite-smoothness paths.
//!
//! Both families expose *levels*: level `0` is `I` itself, level `-n` the
//! `n`-th derivative, and level `+n` the `n`-th zero-mean antiderivative.
//! Tail estimates for the retarded potential integral need antiderivatives
//! and a uniform bound at every level, so those are part of the contract
//! here rather than an afterthought.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Deepest derivative/antiderivative level kept available for the tail
/// machinery (`-MAX_LEVEL ..= MAX_LEVEL`).
pub(crate) const MAX_LEVEL: i32 = 8;

/// Smoothness of the polynomial square wave: derivatives exist up to C^4.
const SQUARE_SMOOTHNESS: u32 = 4;

#[derive(Debug, Clone)]
pub struct CurrentProfile {
    i0: f64,
    k: f64,
    period: f64,
    omega: f64,
    waveform: Waveform,
    /// Upper bounds for `sup_t |level m|`, index `(m + MAX_LEVEL)`.
    sup_levels: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Waveform {
    /// `dc + sum_n a_n cos(n w t) + b_n sin(n w t)`. A nonzero `dc` term is
    /// representable so that validation can reject it, but it never passes
    /// `validate`.
    Fourier { dc: f64, cos: Vec<f64>, sin: Vec<f64> },
    /// Piecewise polynomial square wave; `pieces[m + MAX_LEVEL]` holds
    /// level `m` (only derivatives up to `SQUARE_SMOOTHNESS` are present).
    Square { pieces: Vec<Option<PiecewisePoly>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `max_t |I(t + T) - I(t)|` over a grid.
    pub periodicity_defect: f64,
    /// `|(1/T) int_0^T I|` (quadrature of the exact representation).
    pub mean_defect: f64,
}

impl CurrentProfile {
    /// Profile with a truncated Fourier shape; `cos_coeffs[n-1]` and
    /// `sin_coeffs[n-1]` multiply the `n`-th harmonic. A constant term is
    /// deliberately not accepted — the shape must have zero mean.
    pub fn fourier(
        i0: f64,
        k: f64,
        period: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    ) -> Result<Self> {
        Self::fourier_with_offset(i0, k, period, 0.0, cos_coeffs, sin_coeffs)
    }

    /// As [`CurrentProfile::fourier`] but with an explicit constant term.
    /// Only useful to feed `validate` a profile that must fail the
    /// zero-mean check.
    pub fn fourier_with_offset(
        i0: f64,
        k: f64,
        period: f64,
        dc: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    ) -> Result<Self> {
        check_period(period)?;
        if !(i0.is_finite() && k.is_finite() && dc.is_finite())
            || cos_coeffs.iter().chain(&sin_coeffs).any(|c| !c.is_finite())
        {
            return Err(Error::InvalidProfile("non-finite parameter".into()));
        }
        let omega = 2.0 * PI / period;
        let waveform = Waveform::Fourier { dc, cos: cos_coeffs, sin: sin_coeffs };
        let sup_levels = fourier_sup_levels(&waveform, omega);
        Ok(CurrentProfile {
            i0,
            k,
            period,
            omega,
            waveform,
            sup_levels,
        })
    }

    /// `I(t) = sin(2 pi t / T)`, the workhorse shape.
    pub fn sinusoid(i0: f64, k: f64, period: f64) -> Result<Self> {
        Self::fourier(i0, k, period, vec![], vec![1.0])
    }

    /// Zero shape (`I ≡ 0`): the purely static wire.
    pub fn steady(i0: f64, period: f64) -> Result<Self> {
        Self::fourier(i0, 0.0, period, vec![], vec![])
    }

    /// C^4 smoothed square wave alternating between -1 and +1 with
    /// polynomial transitions of half-width `transition * T` (default 1/16,
    /// must be in `(0, 1/4)`).
    pub fn smoothed_square(i0: f64, k: f64, period: f64, transition: Option<f64>) -> Result<Self> {
        check_period(period)?;
        let frac = transition.unwrap_or(1.0 / 16.0);
        if !(frac > 0.0 && frac < 0.25) {
            return Err(Error::InvalidProfile(format!(
                "transition fraction {frac} outside (0, 1/4)"
            )));
        }
        let base = square_wave_poly(period, frac * period);

        let mut pieces: Vec<Option<PiecewisePoly>> = vec![None; (2 * MAX_LEVEL + 1) as usize];
        pieces[MAX_LEVEL as usize] = Some(base.clone());
        let mut d = base.clone();
        for m in 1..=SQUARE_SMOOTHNESS as i32 {
            d = d.derivative();
            pieces[(MAX_LEVEL - m) as usize] = Some(d.clone());
        }
        let mut p = base;
        for m in 1..=MAX_LEVEL {
            p = p.antiderivative_zero_mean();
            pieces[(MAX_LEVEL + m) as usize] = Some(p.clone());
        }

        let sup_levels = pieces
            .iter()
            .map(|p| p.as_ref().map_or(0.0, |p| p.sup_bound()))
            .collect();
        Ok(CurrentProfile {
            i0,
            k,
            period,
            omega: 2.0 * PI / period,
            waveform: Waveform::Square { pieces },
            sup_levels,
        })
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// True when the oscillating shape is identically zero.
    pub fn is_zero(&self) -> bool {
        match &self.waveform {
            Waveform::Fourier { dc, cos, sin } => {
                *dc == 0.0 && cos.iter().all(|&c| c == 0.0) && sin.iter().all(|&c| c == 0.0)
            }
            Waveform::Square { .. } => false,
        }
    }

    /// Highest available derivative order (`None` = smooth).
    pub fn smoothness(&self) -> Option<u32> {
        match &self.waveform {
            Waveform::Fourier { .. } => None,
            Waveform::Square { .. } => Some(SQUARE_SMOOTHNESS),
        }
    }

    /// Harmonic content `(cos, sin)` if the shape is a Fourier series.
    pub(crate) fn harmonics(&self) -> Option<(&[f64], &[f64])> {
        match &self.waveform {
            Waveform::Fourier { cos, sin, .. } => Some((cos, sin)),
            Waveform::Square { .. } => None,
        }
    }

    /// `d^order I / dt^order`. Errors if the order exceeds the shape's
    /// smoothness.
    pub fn eval(&self, t: f64, order: u32) -> Result<f64> {
        if let Some(s) = self.smoothness() {
            if order > s {
                return Err(Error::UnsupportedOrder {
                    requested: order as i32,
                    available: s as i32,
                });
            }
        }
        if order as i32 > MAX_LEVEL {
            return Err(Error::UnsupportedOrder {
                requested: order as i32,
                available: MAX_LEVEL,
            });
        }
        Ok(self.eval_level(t, -(order as i32)))
    }

    /// The zero-mean antiderivative of `I` (level `+1`). Only meaningful
    /// once the profile passed validation.
    pub fn primitive(&self, t: f64) -> f64 {
        self.eval_level(t, 1)
    }

    /// Evaluate level `lvl` (see module docs). Panics on levels outside the
    /// precomputed range or beyond the shape's smoothness; external callers
    /// go through `eval`/`primitive`, which check.
    pub(crate) fn eval_level(&self, t: f64, lvl: i32) -> f64 {
        assert!(lvl.abs() <= MAX_LEVEL, "level {lvl} out of range");
        match &self.waveform {
            Waveform::Fourier { dc, cos, sin } => {
                let mut total = match lvl.cmp(&0) {
                    std::cmp::Ordering::Equal => *dc,
                    std::cmp::Ordering::Less => 0.0,
                    std::cmp::Ordering::Greater => {
                        // Raw monomial antiderivative of the constant part;
                        // nonzero dc never survives validation.
                        let mut v = *dc;
                        for j in 1..=lvl {
                            v *= t / j as f64;
                        }
                        v
                    }
                };
                // Each antiderivative divides by (n w) and retards the
                // phase by pi/2; each derivative does the opposite.
                for n in 1..=cos.len().max(sin.len()) {
                    let a = cos.get(n - 1).copied().unwrap_or(0.0);
                    let b = sin.get(n - 1).copied().unwrap_or(0.0);
                    let nw = n as f64 * self.omega;
                    let phase = nw * t - lvl as f64 * PI / 2.0;
                    total += nw.powi(-lvl) * (a * phase.cos() + b * phase.sin());
                }
                total
            }
            Waveform::Square { pieces } => {
                let p = pieces[(MAX_LEVEL + lvl) as usize]
                    .as_ref()
                    .unwrap_or_else(|| panic!("level {lvl} beyond C^{SQUARE_SMOOTHNESS}"));
                p.eval(t.rem_euclid(self.period))
            }
        }
    }

    /// Upper bound for `sup_t` of level `lvl`.
    pub(crate) fn sup_level(&self, lvl: i32) -> f64 {
        assert!(lvl.abs() <= MAX_LEVEL);
        self.sup_levels[(MAX_LEVEL + lvl) as usize]
    }

    /// Check periodicity, zero mean, positive period, nonzero `I0`.
    ///
    /// Returns the measured defects on success; profiles violating the
    /// structural hypotheses produce `InvalidProfile`.
    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "period {} must be positive and finite",
                self.period
            )));
        }
        if self.i0 == 0.0 || !self.i0.is_finite() {
            return Err(Error::InvalidProfile("I0 must be nonzero".into()));
        }
        const GRID: usize = 257;
        let mut periodicity_defect: f64 = 0.0;
        for i in 0..GRID {
            let t = self.period * i as f64 / GRID as f64;
            let d = (self.eval_level(t + self.period, 0) - self.eval_level(t, 0)).abs();
            periodicity_defect = periodicity_defect.max(d);
        }
        let mean_defect = match &self.waveform {
            // Harmonics integrate to zero over a period exactly.
            Waveform::Fourier { dc, .. } => dc.abs(),
            Waveform::Square { .. } => {
                // Exact: evaluate the level +1 antiderivative difference.
                ((self.eval_level(self.period, 1) - self.eval_level(0.0, 1)) / self.period).abs()
            }
        };
        if periodicity_defect > tol {
            return Err(Error::InvalidProfile(format!(
                "periodicity defect {periodicity_defect:.3e} exceeds {tol:.3e}"
            )));
        }
        if mean_defect > tol {
            return Err(Error::InvalidProfile(format!(
                "mean defect {mean_defect:.3e} exceeds {tol:.3e}"
            )));
        }
        Ok(ValidationReport {
            periodicity_defect,
            mean_defect,
        })
    }
}

fn check_period(period: f64) -> Result<()> {
    if period == 0.0 || !period.is_finite() {
        return Err(Error::InvalidProfile(format!(
            "period {period} must be finite and nonzero"
        )));
    }
    Ok(())
}

/// Rigorous sup bounds for a Fourier shape: each harmonic contributes at
/// most `hypot(a_n, b_n) (n w)^{-lvl}`.
fn fourier_sup_levels(waveform: &Waveform, omega: f64) -> Vec<f64> {
    let (dc, cos, sin) = match waveform {
        Waveform::Fourier { dc, cos, sin } => (*dc, cos, sin),
        _ => unreachable!(),
    };
    (-MAX_LEVEL..=MAX_LEVEL)
        .map(|lvl| {
            let mut s = if lvl == 0 { dc.abs() } else { 0.0 };
            let n_max = cos.len().max(sin.len());
            for n in 1..=n_max {
                let a = cos.get(n - 1).copied().unwrap_or(0.0);
                let b = sin.get(n - 1).copied().unwrap_or(0.0);
                s += a.hypot(b) * (n as f64 * omega).powi(-lvl);
            }
            s
        })
        .collect()
}

/// The C^4 step `S(x) = 126 x^5 - 420 x^6 + 540 x^7 - 315 x^8 + 70 x^9`
/// rising from 0 to 1 on [0, 1] with four vanishing derivatives at both
/// ends.
const SMOOTHSTEP4: [f64; 10] = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];

/// Square wave with transitions of half-width `w` centered at `0` and
/// `T/2`, represented exactly as piecewise polynomials on `[0, T]`.
fn square_wave_poly(period: f64, w: f64) -> PiecewisePoly {
    let t_half = 0.5 * period;
    // Rising transition on [-w, w]: -1 + 2 S((t + w) / (2w)).
    let rise = |offset: f64| {
        let mut p = poly_affine_arg(&SMOOTHSTEP4, 1.0 / (2.0 * w), offset / (2.0 * w));
        for c in p.iter_mut() {
            *c *= 2.0;
        }
        p[0] -= 1.0;
        p
    };
    let fall = |offset: f64| {
        // 1 - 2 S((t - offset_start)/(2w)) expressed via affine argument.
        let mut p = poly_affine_arg(&SMOOTHSTEP4, 1.0 / (2.0 * w), offset / (2.0 * w));
        for c in p.iter_mut() {
            *c *= -2.0;
        }
        p[0] += 1.0;
        p
    };
    PiecewisePoly {
        breaks: vec![0.0, w, t_half - w, t_half + w, period - w, period],
        // Local coordinate is (t - left break) on each piece.
        coeffs: vec![
            rise(w),              // [0, w]: second half of the rise through t=0
            vec![1.0],            // plateau
            fall(0.0),            // fall centered at T/2
            vec![-1.0],           // plateau
            rise(0.0),            // first half of the rise through t=T
        ],
    }
}

/// Coefficients of `p(alpha x + beta)` in ascending powers of `x`.
fn poly_affine_arg(p: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    // Horner in polynomial arithmetic: result = p_n, then result*(alpha x + beta) + p_{n-1}.
    let mut res = vec![*p.last().unwrap()];
    for &c in p.iter().rev().skip(1) {
        let mut next = vec![0.0; res.len() + 1];
        for (i, &r) in res.iter().enumerate() {
            next[i] += r * beta;
            next[i + 1] += r * alpha;
        }
        next[0] += c;
        res = next;
    }
    res
}

/// Piecewise polynomial on `[0, T]` with local coordinates per piece.
#[derive(Debug, Clone)]
pub(crate) struct PiecewisePoly {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    fn span(&self) -> f64 {
        *self.breaks.last().unwrap() - self.breaks[0]
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        let idx = match self
            .breaks
            .windows(2)
            .position(|w| t >= w[0] && t <= w[1])
        {
            Some(i) => i,
            None => {
                if t < self.breaks[0] {
                    0
                } else {
                    self.coeffs.len() - 1
                }
            }
        };
        let x = t - self.breaks[idx];
        self.coeffs[idx].iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn derivative(&self) -> PiecewisePoly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|p| {
                if p.len() <= 1 {
                    vec![0.0]
                } else {
                    p.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect()
                }
            })
            .collect();
        PiecewisePoly {
            breaks: self.breaks.clone(),
            coeffs,
        }
    }

    /// Antiderivative, continuous across pieces, shifted to zero mean over
    /// the full span.
    fn antiderivative_zero_mean(&self) -> PiecewisePoly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        let mut acc = 0.0; // value at the left edge of the current piece
        for (i, p) in self.coeffs.iter().enumerate() {
            let mut ap = vec![acc];
            for (j, &c) in p.iter().enumerate() {
                ap.push(c / (j + 1) as f64);
            }
            let len = self.breaks[i + 1] - self.breaks[i];
            acc = ap.iter().rev().fold(0.0, |a, &c| a * len + c);
            coeffs.push(ap);
        }
        let mut out = PiecewisePoly {
            breaks: self.breaks.clone(),
            coeffs,
        };
        // Subtract the mean: integrate once more and divide by the span.
        let mut total = 0.0;
        for (i, p) in out.coeffs.iter().enumerate() {
            let len = out.breaks[i + 1] - out.breaks[i];
            for (j, &c) in p.iter().enumerate() {
                total += c * len.powi(j as i32 + 1) / (j + 1) as f64;
            }
        }
        let mean = total / out.span();
        for p in out.coeffs.iter_mut() {
            p[0] -= mean;
        }
        out
    }

    /// Upper bound for `sup |p|`: grid maximum inflated by a grid bound on
    /// the derivative. Loose but safe — only used to size quadrature tails.
    fn sup_bound(&self) -> f64 {
        const N: usize = 256;
        let d = self.derivative();
        let mut max_p: f64 = 0.0;
        let mut max_d: f64 = 0.0;
        let mut h_max: f64 = 0.0;
        for (i, w) in self.breaks.windows(2).enumerate() {
            let h = (w[1] - w[0]) / N as f64;
            h_max = h_max.max(h);
            for j in 0..=N {
                let t = w[0] + h * j as f64;
                let x = t - self.breaks[i];
                let pv = self.coeffs[i].iter().rev().fold(0.0, |a, &c| a * x + c);
                let dv = d.coeffs[i].iter().rev().fold(0.0, |a, &c| a * x + c);
                max_p = max_p.max(pv.abs());
                max_d = max_d.max(dv.abs());
            }
        }
        max_p + 0.75 * h_max * max_d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sinusoid_values_and_derivatives() {
        let p = CurrentProfile::sinusoid(1.0, 0.1, 2.0 * PI).unwrap();
        for &t in &[0.0, 0.3, 1.7, 4.0, 6.9] {
            assert_relative_eq!(p.eval(t, 0).unwrap(), t.sin(), epsilon = 1e-14);
            assert_relative_eq!(p.eval(t, 1).unwrap(), t.cos(), epsilon = 1e-14);
            assert_relative_eq!(p.eval(t, 2).unwrap(), -t.sin(), epsilon = 1e-14);
            assert_relative_eq!(p.primitive(t), -t.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn period_scaling() {
        // I(t) = sin(2 pi t / T) for T = 0.5.
        let p = CurrentProfile::sinusoid(1.0, 0.0, 0.5).unwrap();
        let w = 4.0 * PI;
        assert_relative_eq!(p.eval(0.1, 0).unwrap(), (w * 0.1).sin(), epsilon = 1e-14);
        assert_relative_eq!(p.eval(0.1, 1).unwrap(), w * (w * 0.1).cos(), epsilon = 1e-12);
    }

    #[test]
    fn primitive_matches_derivative_by_fd() {
        let p = CurrentProfile::fourier(2.0, 0.3, 3.0, vec![0.4, -0.2], vec![1.0, 0.0, 0.25]).unwrap();
        let h = 1e-5;
        for &t in &[0.0, 0.4, 1.1, 2.9] {
            let fd = (p.primitive(t + h) - p.primitive(t - h)) / (2.0 * h);
            assert_relative_eq!(fd, p.eval(t, 0).unwrap(), epsilon = 1e-9);
            let fd2 = (p.eval(t + h, 0).unwrap() - p.eval(t - h, 0).unwrap()) / (2.0 * h);
            assert_relative_eq!(fd2, p.eval(t, 1).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn deeper_levels_chain_consistently() {
        let p = CurrentProfile::sinusoid(1.0, 0.0, 2.0 * PI).unwrap();
        let h = 1e-5;
        for lvl in -3..=3 {
            for &t in &[0.2, 2.0] {
                let fd = (p.eval_level(t + h, lvl + 1) - p.eval_level(t - h, lvl + 1)) / (2.0 * h);
                assert_relative_eq!(fd, p.eval_level(t, lvl), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn validate_accepts_sinusoid() {
        let p = CurrentProfile::sinusoid(1.0, 0.05, 2.0 * PI).unwrap();
        let rep = p.validate(1e-10).unwrap();
        assert!(rep.periodicity_defect < 1e-12);
        assert!(rep.mean_defect == 0.0);
    }

    #[test]
    fn validate_rejects_nonzero_mean() {
        // I(t) = 1 + sin t has mean 1.
        let p = CurrentProfile::fourier_with_offset(1.0, 0.1, 2.0 * PI, 1.0, vec![], vec![1.0])
            .unwrap();
        let err = p.validate(1e-10).unwrap_err();
        assert!(matches!(err, Error::InvalidProfile(_)), "{err:?}");
    }

    #[test]
    fn validate_rejects_zero_i0_and_bad_period() {
        let p = CurrentProfile::sinusoid(0.0, 0.1, 1.0).unwrap();
        assert!(p.validate(1e-10).is_err());
        let p = CurrentProfile::sinusoid(1.0, 0.1, -2.0).unwrap();
        assert!(p.validate(1e-10).is_err());
        assert!(CurrentProfile::sinusoid(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn zero_shape() {
        let p = CurrentProfile::steady(1.0, 1.0).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.eval(0.37, 0).unwrap(), 0.0);
        assert_eq!(p.primitive(0.37), 0.0);
        assert_eq!(p.sup_level(1), 0.0);
    }

    #[test]
    fn square_wave_is_c4_with_zero_mean() {
        let t_period = 2.0 * PI;
        let p = CurrentProfile::smoothed_square(1.0, 0.1, t_period, None).unwrap();
        let rep = p.validate(1e-10).unwrap();
        assert!(rep.mean_defect < 1e-13, "mean {}", rep.mean_defect);

        // Plateaus sit at +-1 and the wave is odd about t = 0.
        assert_relative_eq!(p.eval(t_period * 0.25, 0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.eval(t_period * 0.75, 0).unwrap(), -1.0, epsilon = 1e-12);
        assert!(p.eval(0.0, 0).unwrap().abs() < 1e-12);

        // 4th derivative continuous at the transition edges; 5th would not be.
        let w = t_period / 16.0;
        for edge in [w, t_period / 2.0 - w] {
            let lo = p.eval(edge - 1e-7, 4).unwrap();
            let hi = p.eval(edge + 1e-7, 4).unwrap();
            assert!((lo - hi).abs() < 1e-2 * p.sup_level(-4), "jump at {edge}: {lo} vs {hi}");
        }
        assert!(matches!(
            p.eval(0.1, 5),
            Err(Error::UnsupportedOrder { requested: 5, available: 4 })
        ));
    }

    #[test]
    fn square_wave_primitives_chain() {
        let p = CurrentProfile::smoothed_square(1.0, 0.1, 1.0, None).unwrap();
        let h = 1e-6;
        for lvl in 1..=3 {
            for &t in &[0.11, 0.43, 0.77] {
                let fd = (p.eval_level(t + h, lvl) - p.eval_level(t - h, lvl)) / (2.0 * h);
                assert_relative_eq!(fd, p.eval_level(t, lvl - 1), epsilon = 1e-6);
            }
        }
        // Zero mean at level 1 (exact integral via level 2 endpoints).
        let mean = (p.eval_level(1.0, 2) - p.eval_level(0.0, 2)) / 1.0;
        assert!(mean.abs() < 1e-13);
    }

    #[test]
    fn sup_bounds_hold_on_grid() {
        let profiles = [
            CurrentProfile::sinusoid(1.0, 0.0, 2.0 * PI).unwrap(),
            CurrentProfile::fourier(1.0, 0.0, 1.0, vec![0.3], vec![0.5, 0.2]).unwrap(),
            CurrentProfile::smoothed_square(1.0, 0.0, 2.0, None).unwrap(),
        ];
        for p in &profiles {
            for lvl in -2..=4 {
                if p.smoothness().map_or(false, |s| (-lvl) as u32 > s) {
                    continue;
                }
                let bound = p.sup_level(lvl);
                for i in 0..500 {
                    let t = p.period() * i as f64 / 500.0;
                    let v = p.eval_level(t, lvl).abs();
                    assert!(v <= bound * (1.0 + 1e-12) + 1e-300, "lvl {lvl}: |{v}| > {bound}");
                }
            }
        }
    }

    #[test]
    fn periodicity_of_all_levels() {
        let p = CurrentProfile::smoothed_square(1.0, 0.1, 1.7, None).unwrap();
        for lvl in -4..=4 {
            for &t in &[0.0, 0.3, 0.9, 1.3] {
                let a = p.eval_level(t, lvl);
                let b = p.eval_level(t + 1.7, lvl);
                assert_relative_eq!(a, b, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }
}
