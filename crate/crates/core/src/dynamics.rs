//! Motion of a unit-charge, unit-mass particle in the wire's field.
//!
//! Conservation of the angular momentum `L = r^2 theta_dot` and the
//! momentum `p_z = z_dot - (I0 ln r + k a(t, r))` reduces the full
//! Newton-Lorentz dynamics to a single radial equation
//!
//! ```text
//! r_ddot = L^2 / r^3 - g (I0 / r + k d_r a),    g = p_z + I0 ln r + k a,
//! ```
//!
//! equivalently `r_ddot = -d_r V` with the effective potential
//! `V(t, r) = L^2 / (2 r^2) + g^2 / 2`. This module provides that reduced
//! system, the cylindrical reconstruction `theta_dot = L / r^2`,
//! `z_dot = g`, and the untransformed Cartesian equations, all sharing
//! one integrator and one field evaluator. The evaluator can be the slow
//! certified quadrature or the fast certified interpolant; results agree
//! within stated bounds, so every integration can be cross-checked in
//! exact mode.

use crate::error::{Error, Result};
use crate::interp::PotentialInterp;
use crate::ode::{self, OdeOptions, Solution};
use crate::potential::PotentialField;
use serde::{Deserialize, Serialize};

/// How the oscillating potential is evaluated inside right-hand sides.
#[derive(Debug, Clone)]
pub enum EvalMode {
    /// Certified quadrature on every call. Accurate and slow; the
    /// reference mode.
    Exact(PotentialField),
    /// Certified spectral tables (Fourier shapes only), falling back to
    /// quadrature outside the tabulated window.
    Interp(PotentialInterp),
}

impl EvalMode {
    pub fn field(&self) -> &PotentialField {
        match self {
            EvalMode::Exact(f) => f,
            EvalMode::Interp(i) => i.field(),
        }
    }

    fn a_partial(&self, t: f64, r: f64, dt: u32, dr: u32) -> Result<f64> {
        match self {
            EvalMode::Exact(f) => Ok(f.a_partial(t, r, dt, dr)?.value),
            EvalMode::Interp(i) => i.eval(t, r, dt, dr),
        }
    }
}

/// The two conserved momenta of the reduced system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumPair {
    /// Angular momentum `r^2 theta_dot`.
    pub l: f64,
    /// Linear momentum `z_dot - (I0 ln r + k a)`.
    pub p_z: f64,
}

/// State of the reduced radial equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub r: f64,
    pub r_dot: f64,
}

/// State of the cylindrical system `(r, r_dot, theta, z)`; the angular
/// and axial velocities are slaved to `r` through the momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylindricalState {
    pub r: f64,
    pub r_dot: f64,
    pub theta: f64,
    pub z: f64,
}

/// Momenta plus the unperturbed energy `E0 = r_dot^2/2 + V0(r)`;
/// `E0` is conserved only at `k = 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FirstIntegrals {
    pub l: f64,
    pub p_z: f64,
    pub e0: f64,
}

/// Integration policy: tolerances plus the collision threshold.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub ode: OdeOptions,
    /// Radius at which a trajectory is declared to hit the wire; the
    /// equation is singular at `r = 0`, so integration stops with an
    /// event instead of grinding into the singularity.
    pub r_min: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            ode: OdeOptions::default(),
            r_min: 1e-8,
        }
    }
}

/// The reduced dynamics at fixed momenta, together with the Cartesian
/// equations (which carry their own momenta implicitly).
#[derive(Debug, Clone)]
pub struct RadialDynamics {
    eval: EvalMode,
    momenta: MomentumPair,
    i0: f64,
    k: f64,
}

impl RadialDynamics {
    /// `I0` and the forcing amplitude `k` are taken from the evaluator's
    /// current profile.
    pub fn new(eval: EvalMode, momenta: MomentumPair) -> Self {
        let profile = eval.field().profile();
        let (i0, k) = (profile.i0(), profile.k());
        RadialDynamics {
            eval,
            momenta,
            i0,
            k,
        }
    }

    /// Override the forcing amplitude. The oscillating potential is
    /// amplitude-independent, so continuation in `k` can reuse one
    /// evaluator (and one set of interpolation tables) across the sweep.
    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    /// Override the mean current, e.g. to inspect the pure centrifugal
    /// limit `I0 = 0`. Only the static parts `I0 ln r`, `I0 / r` are
    /// affected — the oscillating shape is unchanged.
    pub fn with_i0(mut self, i0: f64) -> Self {
        self.i0 = i0;
        self
    }

    pub fn with_momenta(mut self, momenta: MomentumPair) -> Self {
        self.momenta = momenta;
        self
    }

    pub fn eval(&self) -> &EvalMode {
        &self.eval
    }

    pub fn momenta(&self) -> MomentumPair {
        self.momenta
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }

    /// `d_t^dt d_r^dr a`, short-circuiting when the amplitude is zero.
    pub(crate) fn a_term(&self, t: f64, r: f64, dt: u32, dr: u32) -> Result<f64> {
        if self.k == 0.0 {
            return Ok(0.0);
        }
        self.eval.a_partial(t, r, dt, dr)
    }

    /// `g` without the radius check; callers guarantee `r > 0`.
    pub(crate) fn g_at(&self, t: f64, r: f64) -> Result<f64> {
        Ok(self.momenta.p_z + self.i0 * r.ln() + self.k * self.a_term(t, r, 0, 0)?)
    }

    /// `B_theta` without the radius check; callers guarantee `r > 0`.
    pub(crate) fn b_theta_at(&self, t: f64, r: f64) -> Result<f64> {
        Ok(self.i0 / r + self.k * self.a_term(t, r, 0, 1)?)
    }

    pub(crate) fn accel_at(&self, t: f64, r: f64) -> Result<f64> {
        let l = self.momenta.l;
        Ok(l * l / (r * r * r) - self.g_at(t, r)? * self.b_theta_at(t, r)?)
    }

    /// Acceleration and `d_rr V` in one pass, sharing the field
    /// evaluations; the workhorse of joint state + variational
    /// integration. Callers guarantee `r > 0`.
    pub(crate) fn accel_curvature_at(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        let l = self.momenta.l;
        let g = self.g_at(t, r)?;
        let gp = self.i0 / r + self.k * self.a_term(t, r, 0, 1)?;
        let gpp = -self.i0 / (r * r) + self.k * self.a_term(t, r, 0, 2)?;
        let accel = l * l / (r * r * r) - g * gp;
        let curvature = 3.0 * l * l / r.powi(4) + gp * gp + g * gpp;
        Ok((accel, curvature))
    }

    /// `d_rr V(t, r)`, the coefficient of the first variation
    /// `y'' = -d_rr V y` along a trajectory. Uses the same evaluator as
    /// the acceleration so shooting Jacobians stay consistent with the
    /// map they differentiate.
    pub fn curvature(&self, t: f64, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.accel_curvature_at(t, r)?.1)
    }

    /// Axial velocity `g = p_z + I0 ln r + k a(t, r)`.
    pub fn g(&self, t: f64, r: f64) -> Result<f64> {
        check_radius(r)?;
        self.g_at(t, r)
    }

    /// Azimuthal field `B_theta = I0 / r + k d_r a` (also `d_r g`).
    pub fn b_theta(&self, t: f64, r: f64) -> Result<f64> {
        check_radius(r)?;
        self.b_theta_at(t, r)
    }

    /// Radial acceleration `L^2 / r^3 - g B_theta`.
    pub fn radial_rhs(&self, t: f64, s: &RadialState) -> Result<f64> {
        check_radius(s.r)?;
        self.accel_at(t, s.r)
    }

    /// Effective potential `V(t, r) = L^2/(2 r^2) + g^2/2`.
    pub fn effective_potential(&self, t: f64, r: f64) -> Result<f64> {
        Ok(self.potential_derivatives(t, r, 0)?[0])
    }

    /// `[V, d_r V, ..., d_r^max_order V]` for `max_order <= 4`.
    ///
    /// Radial derivatives of `a` beyond second order always use exact
    /// quadrature (the tables stop at order two).
    pub fn potential_derivatives(&self, t: f64, r: f64, max_order: u32) -> Result<Vec<f64>> {
        check_radius(r)?;
        if max_order > 4 {
            return Err(Error::InvalidInput(format!(
                "effective-potential derivative order {max_order} exceeds 4"
            )));
        }
        // a-partials d_r^j for j <= max_order; order > 2 falls back to the
        // exact field even in interpolated mode.
        let mut a = [0.0; 5];
        if self.k != 0.0 {
            for (j, slot) in a.iter_mut().enumerate().take(max_order as usize + 1) {
                *slot = if j <= 2 {
                    self.eval.a_partial(t, r, 0, j as u32)?
                } else {
                    self.eval.field().a_partial(t, r, 0, j as u32)?.value
                };
            }
        }
        Ok(self.v_derivatives_from_a(r, &a)[..=max_order as usize].to_vec())
    }

    /// Assemble `[V, d_r V, ..., d_r^4 V]` from precomputed a-partials
    /// `[a, a_r, ..., a_rrrr]`; lets callers batch the field evaluations.
    pub(crate) fn v_derivatives_from_a(&self, r: f64, a: &[f64; 5]) -> [f64; 5] {
        let (l, i0, k) = (self.momenta.l, self.i0, self.k);
        let g = self.momenta.p_z + i0 * r.ln() + k * a[0];
        // Derivatives of g: g' = I0/r + k a_r, and onward.
        let gd = [
            g,
            i0 / r + k * a[1],
            -i0 / (r * r) + k * a[2],
            2.0 * i0 / (r * r * r) + k * a[3],
            -6.0 * i0 / (r * r * r * r) + k * a[4],
        ];
        let l2 = l * l;
        let centrifugal = [
            l2 / (2.0 * r * r),
            -l2 / (r * r * r),
            3.0 * l2 / r.powi(4),
            -12.0 * l2 / r.powi(5),
            60.0 * l2 / r.powi(6),
        ];
        // Leibniz expansion of (g^2 / 2)^{(n)}.
        let quad = [
            0.5 * g * g,
            gd[0] * gd[1],
            gd[0] * gd[2] + gd[1] * gd[1],
            gd[0] * gd[3] + 3.0 * gd[1] * gd[2],
            gd[0] * gd[4] + 4.0 * gd[1] * gd[3] + 3.0 * gd[2] * gd[2],
        ];
        [
            centrifugal[0] + quad[0],
            centrifugal[1] + quad[1],
            centrifugal[2] + quad[2],
            centrifugal[3] + quad[3],
            centrifugal[4] + quad[4],
        ]
    }

    /// Momenta and unperturbed energy for a radial state (the momenta are
    /// the stored parameters).
    pub fn first_integrals(&self, s: &RadialState) -> Result<FirstIntegrals> {
        check_radius(s.r)?;
        let MomentumPair { l, p_z } = self.momenta;
        let g0 = p_z + self.i0 * s.r.ln();
        let e0 = 0.5 * s.r_dot * s.r_dot + 0.5 * l * l / (s.r * s.r) + 0.5 * g0 * g0;
        Ok(FirstIntegrals { l, p_z, e0 })
    }

    /// Momenta and unperturbed energy read off a Cartesian state
    /// `[x, y, z, vx, vy, vz]`.
    pub fn first_integrals_cartesian(&self, t: f64, y: &[f64; 6]) -> Result<FirstIntegrals> {
        let r = y[0].hypot(y[1]);
        check_radius(r)?;
        let l = y[0] * y[4] - y[1] * y[3];
        let p_z = y[5] - self.i0 * r.ln() - self.k * self.a_term(t, r, 0, 0)?;
        let r_dot = (y[0] * y[3] + y[1] * y[4]) / r;
        let g0 = p_z + self.i0 * r.ln();
        let e0 = 0.5 * r_dot * r_dot + 0.5 * l * l / (r * r) + 0.5 * g0 * g0;
        Ok(FirstIntegrals { l, p_z, e0 })
    }

    /// Integrate the reduced radial equation. A collision (`r` reaching
    /// `opts.r_min`) ends the run early and is reported in the solution's
    /// event slot.
    ///
    /// Trial steps may overshoot the collision radius before the event is
    /// located, so inside the integration the radius fed to field
    /// evaluations is floored at a fraction of `r_min`; accepted states on
    /// the reported trajectory are unaffected.
    pub fn integrate_radial(
        &self,
        t_span: (f64, f64),
        s0: RadialState,
        opts: &SimOptions,
    ) -> Result<Solution<2>> {
        check_radius(s0.r)?;
        let r_min = opts.r_min;
        let floor = collision_floor(r_min)?;
        ode::solve_with_event(
            |t, y: &[f64; 2]| {
                let r = clamp_radius(y[0], floor);
                Ok([y[1], self.accel_at(t, r)?])
            },
            t_span,
            [s0.r, s0.r_dot],
            &opts.ode,
            |_, y| y[0] - r_min,
        )
    }

    /// Integrate the cylindrical system `(r, r_dot, theta, z)`.
    pub fn integrate_cylindrical(
        &self,
        t_span: (f64, f64),
        s0: CylindricalState,
        opts: &SimOptions,
    ) -> Result<Solution<4>> {
        check_radius(s0.r)?;
        let l = self.momenta.l;
        let r_min = opts.r_min;
        let floor = collision_floor(r_min)?;
        ode::solve_with_event(
            |t, y: &[f64; 4]| {
                let r = clamp_radius(y[0], floor);
                Ok([y[1], self.accel_at(t, r)?, l / (r * r), self.g_at(t, r)?])
            },
            t_span,
            [s0.r, s0.r_dot, s0.theta, s0.z],
            &opts.ode,
            |_, y| y[0] - r_min,
        )
    }

    /// Integrate the full Newton-Lorentz equations in Cartesian
    /// coordinates, state `[x, y, z, vx, vy, vz]`. The stored momenta are
    /// not used — the state carries its own.
    pub fn integrate_cartesian(
        &self,
        t_span: (f64, f64),
        y0: [f64; 6],
        opts: &SimOptions,
    ) -> Result<Solution<6>> {
        check_radius(y0[0].hypot(y0[1]))?;
        let r_min = opts.r_min;
        let floor = collision_floor(r_min)?;
        ode::solve_with_event(
            |t, y: &[f64; 6]| {
                let r = clamp_radius(y[0].hypot(y[1]), floor);
                let b_theta = self.b_theta_at(t, r)?;
                let e_z = self.k * self.a_term(t, r, 1, 0)?;
                let r_dot = (y[0] * y[3] + y[1] * y[4]) / r;
                // Lorentz force for B = B_theta theta_hat, E = E_z z_hat.
                let ax = -y[5] * b_theta * y[0] / r;
                let ay = -y[5] * b_theta * y[1] / r;
                let az = e_z + b_theta * r_dot;
                Ok([y[3], y[4], y[5], ax, ay, az])
            },
            t_span,
            y0,
            &opts.ode,
            |_, y| y[0].hypot(y[1]) - r_min,
        )
    }

    /// Recover `theta(t)`, `z(t)` from a dense radial solution by
    /// integrating the slaved angular and axial equations.
    pub fn reconstruct(
        &self,
        radial: &Solution<2>,
        theta0: f64,
        z0: f64,
    ) -> Result<Solution<2>> {
        let l = self.momenta.l;
        let (t0, t1) = (radial.times[0], radial.t_end);
        ode::solve(
            |t, _y: &[f64; 2]| {
                let r = radial.sample(t)?[0];
                Ok([l / (r * r), self.g(t, r)?])
            },
            (t0, t1),
            [theta0, z0],
            &OdeOptions {
                store_dense: true,
                ..OdeOptions::default()
            },
        )
    }

    /// Cartesian state on the cylinder matching `(s0, momenta)` at time
    /// `t0`, placed at `theta = 0`: the natural seed for equivalence
    /// checks between the formulations.
    pub fn cartesian_seed(&self, t0: f64, s0: &RadialState) -> Result<[f64; 6]> {
        check_radius(s0.r)?;
        let l = self.momenta.l;
        let vz = self.g(t0, s0.r)?;
        Ok([s0.r, 0.0, 0.0, s0.r_dot, l / s0.r, vz])
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::WireSingularity { r });
    }
    Ok(())
}

/// Evaluation floor used inside trial steps; strictly below `r_min` so the
/// event zero sits inside the evaluable region.
pub(crate) fn collision_floor(r_min: f64) -> Result<f64> {
    if !(r_min >= 0.0) || !r_min.is_finite() {
        return Err(Error::InvalidInput(format!(
            "collision radius must be a nonnegative finite number, got {r_min}"
        )));
    }
    Ok((0.25 * r_min).max(1e-12))
}

/// Floors the radius; written so NaN passes through to the step
/// controller instead of being masked.
pub(crate) fn clamp_radius(r: f64, floor: f64) -> f64 {
    if r < floor {
        floor
    } else {
        r
    }
}
