//! Periodic orbits of the forced radial equation by Newton shooting,
//! and their continuation in the forcing amplitude.
//!
//! The stroboscopic map `P` advances a radial state over one period of
//! the forcing; a T-periodic solution is a fixed point of `P`. The map
//! and its derivative (the monodromy matrix, from the first variation
//! `y'' = -d_rr V(t, r(t)) y`) are integrated jointly, so the shooting
//! Jacobian `M - I` is exact to integrator accuracy. At zero amplitude
//! the circular orbit `(rbar, 0)` is a fixed point with a purely
//! rotational monodromy; from there a predictor-corrector sweep carries
//! the orbit to finite amplitudes, halving its step on failure and
//! growing it after repeated success.

use crate::dynamics::{
    clamp_radius, collision_floor, EvalMode, RadialDynamics, RadialState, SimOptions,
};
use crate::error::{Error, Result};
use crate::ode;
use crate::triplets::Triplet;
use serde::{Deserialize, Serialize};

/// Shooting Jacobians with `|det(M - I)|` below this are treated as
/// resonant rather than inverted.
const SINGULAR_DET_TOL: f64 = 1e-10;

/// Newton-shooting policy.
#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    /// Convergence threshold on `|P(x) - x|`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Step halvings tried before an iteration counts as failed.
    pub max_halvings: usize,
    /// Points on the uniform sample grid stored with each orbit.
    pub n_samples: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            tol: 1e-9,
            max_iterations: 25,
            max_halvings: 8,
            n_samples: 257,
        }
    }
}

/// Amplitude-sweep policy.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions {
    /// Largest amplitude step attempted.
    pub dk_max: f64,
    /// Step below which the sweep gives up.
    pub dk_min: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            dk_max: 1e-3,
            dk_min: 1e-8,
        }
    }
}

/// The stroboscopic map of the reduced radial equation at a fixed
/// period, with everything needed to shoot for its fixed points.
///
/// The period should be the forcing period (or an integer multiple of
/// it, for subharmonics); this is not enforced, since the map is
/// well-defined for any horizon.
#[derive(Debug, Clone)]
pub struct PeriodMap {
    triplet: Triplet,
    dynamics: RadialDynamics,
    period: f64,
    sim: SimOptions,
    shoot: ShootOptions,
}

/// A periodic solution of the forced radial equation.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicOrbit {
    pub k: f64,
    /// Fixed point of the stroboscopic map.
    pub x0: RadialState,
    /// `|P(x0) - x0|` at the accepted iterate.
    pub residual: f64,
    /// Uniform time grid over one period.
    pub times: Vec<f64>,
    /// `r(t)` on that grid; strictly positive.
    pub samples: Vec<f64>,
    /// Fundamental matrix of the first variation over one period.
    pub monodromy: [[f64; 2]; 2],
    /// Elliptic rotation angle of the monodromy (NaN when hyperbolic).
    pub rotation_angle: f64,
}

/// Why an amplitude sweep stopped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Termination {
    /// All requested amplitudes were reached.
    Completed,
    /// The step control collapsed before the next target.
    Stalled { at_k: f64, reason: String },
}

/// A family of periodic orbits indexed by amplitude, starting with the
/// exact circular orbit at `k = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub orbits: Vec<PeriodicOrbit>,
    pub termination: Termination,
    /// Largest amplitude at which an orbit was found; an empirical
    /// lower estimate for the amplitude threshold of the family.
    pub k_reached: f64,
}

impl PeriodMap {
    /// The triplet's mean current must match the profile behind `eval`;
    /// the forcing amplitude is swept per call and the profile's own
    /// amplitude is ignored.
    pub fn new(triplet: Triplet, eval: EvalMode, period: f64, sim: SimOptions) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidInput(format!(
                "map period must be positive and finite, got {period}"
            )));
        }
        let profile_i0 = eval.field().profile().i0();
        if (profile_i0 - triplet.i0).abs() > 1e-12 * triplet.i0.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "triplet mean current {} does not match the profile's {profile_i0}",
                triplet.i0
            )));
        }
        let dynamics = RadialDynamics::new(eval, triplet.momenta());
        Ok(PeriodMap {
            triplet,
            dynamics,
            period,
            sim,
            shoot: ShootOptions::default(),
        })
    }

    /// Replace the integrator settings used by the map evaluations.
    pub fn with_sim_options(mut self, sim: SimOptions) -> Self {
        self.sim = sim;
        self
    }

    pub fn with_shoot_options(mut self, shoot: ShootOptions) -> Self {
        self.shoot = shoot;
        self
    }

    pub fn triplet(&self) -> &Triplet {
        &self.triplet
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dynamics(&self) -> &RadialDynamics {
        &self.dynamics
    }

    /// Advance a state over one period at amplitude `k`, returning the
    /// image and the monodromy matrix. A collision en route is an error.
    pub fn map(&self, x: RadialState, k: f64) -> Result<(RadialState, [[f64; 2]; 2])> {
        self.map_pow(x, k, 1)
    }

    /// The `n`-fold composition of the period map and its Jacobian,
    /// computed as one variational integration over `n` periods.
    pub fn map_pow(&self, x: RadialState, k: f64, n: u32) -> Result<(RadialState, [[f64; 2]; 2])> {
        if n == 0 {
            return Err(Error::InvalidInput(
                "map power must be at least 1".into(),
            ));
        }
        let sol = self.flow_with_variation(x, k, self.period * n as f64)?;
        let y = sol.y_end;
        Ok((
            RadialState { r: y[0], r_dot: y[1] },
            [[y[2], y[3]], [y[4], y[5]]],
        ))
    }

    /// State + variational flow `[r, r_dot, Y]`, `Y(0) = I`.
    fn flow_with_variation(
        &self,
        x: RadialState,
        k: f64,
        horizon: f64,
    ) -> Result<ode::Solution<6>> {
        if !(x.r > 0.0) {
            return Err(Error::WireSingularity { r: x.r });
        }
        let dyn_k = self.dynamics.clone().with_k(k);
        let floor = collision_floor(self.sim.r_min)?;
        let r_min = self.sim.r_min;
        let sol = ode::solve_with_event(
            |t, y: &[f64; 6]| {
                let r = clamp_radius(y[0], floor);
                let (accel, q) = dyn_k.accel_curvature_at(t, r)?;
                Ok([y[1], accel, y[4], y[5], -q * y[2], -q * y[3]])
            },
            (0.0, horizon),
            [x.r, x.r_dot, 1.0, 0.0, 0.0, 1.0],
            &self.sim.ode,
            |_, y| y[0] - r_min,
        )?;
        if let Some(hit) = &sol.event {
            return Err(Error::Collision {
                t: hit.t,
                r: hit.y[0],
            });
        }
        Ok(sol)
    }

    /// `F(x) = P(x) - x` and the monodromy at `x`.
    fn shooting_residual(&self, x: RadialState, k: f64) -> Result<([f64; 2], [[f64; 2]; 2])> {
        let (image, m) = self.map(x, k)?;
        Ok(([image.r - x.r, image.r_dot - x.r_dot], m))
    }

    /// Damped Newton iteration on the fixed-point equation.
    ///
    /// The Jacobian singularity check runs before the first convergence
    /// test, so a resonant period is reported as such even when the
    /// guess happens to be (near-)fixed.
    pub fn newton_shoot(&self, guess: RadialState, k: f64) -> Result<PeriodicOrbit> {
        let mut x = guess;
        let (mut f, mut m) = self.shooting_residual(x, k)?;
        let mut f_norm = norm2(f);
        for iteration in 0..self.shoot.max_iterations {
            let j = [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det.abs() <= SINGULAR_DET_TOL {
                return Err(Error::SingularJacobian { det_abs: det.abs() });
            }
            if f_norm <= self.shoot.tol {
                return self.assemble_orbit(x, f_norm, m, k);
            }
            let dx = [
                (-f[0] * j[1][1] + f[1] * j[0][1]) / det,
                (-f[1] * j[0][0] + f[0] * j[1][0]) / det,
            ];
            let mut advanced = false;
            let mut lambda = 1.0;
            for _ in 0..=self.shoot.max_halvings {
                let trial = RadialState {
                    r: x.r + lambda * dx[0],
                    r_dot: x.r_dot + lambda * dx[1],
                };
                if trial.r > 0.0 {
                    if let Ok((f_t, m_t)) = self.shooting_residual(trial, k) {
                        let f_t_norm = norm2(f_t);
                        if f_t_norm < f_norm {
                            x = trial;
                            f = f_t;
                            m = m_t;
                            f_norm = f_t_norm;
                            advanced = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !advanced {
                return Err(Error::NoConvergence {
                    iterations: iteration + 1,
                    residual: f_norm,
                });
            }
        }
        if f_norm <= self.shoot.tol {
            return self.assemble_orbit(x, f_norm, m, k);
        }
        Err(Error::NoConvergence {
            iterations: self.shoot.max_iterations,
            residual: f_norm,
        })
    }

    fn assemble_orbit(
        &self,
        x0: RadialState,
        residual: f64,
        monodromy: [[f64; 2]; 2],
        k: f64,
    ) -> Result<PeriodicOrbit> {
        let dyn_k = self.dynamics.clone().with_k(k);
        let mut opts = self.sim;
        opts.ode.store_dense = true;
        let sol = dyn_k.integrate_radial((0.0, self.period), x0, &opts)?;
        if let Some(hit) = &sol.event {
            return Err(Error::Collision {
                t: hit.t,
                r: hit.y[0],
            });
        }
        let n = self.shoot.n_samples.max(2);
        let mut times = Vec::with_capacity(n);
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let t = self.period * i as f64 / (n - 1) as f64;
            let r = sol.sample(t)?[0];
            if !(r > 0.0) {
                return Err(Error::WireSingularity { r });
            }
            times.push(t);
            samples.push(r);
        }
        Ok(PeriodicOrbit {
            k,
            x0,
            residual,
            times,
            samples,
            monodromy,
            rotation_angle: rotation_angle(&monodromy),
        })
    }

    /// Continue the circular orbit to the requested amplitudes.
    ///
    /// Targets must share a sign and increase strictly in magnitude; the
    /// returned branch always starts with the exact `k = 0` orbit. If the
    /// sweep stalls, the branch carries the orbits found so far and a
    /// `Stalled` flag — unless not even the first target was reachable,
    /// which is an error.
    pub fn continue_in_k(
        &self,
        k_targets: &[f64],
        opts: &ContinuationOptions,
    ) -> Result<Branch> {
        let targets = validate_targets(k_targets)?;
        if !(opts.dk_max > 0.0) || !(opts.dk_min > 0.0) || opts.dk_min > opts.dk_max {
            return Err(Error::InvalidInput(
                "continuation steps must satisfy 0 < dk_min <= dk_max".into(),
            ));
        }
        let rbar = self.triplet.rbar;
        let orbit0 = self.newton_shoot(RadialState { r: rbar, r_dot: 0.0 }, 0.0)?;

        let sign = targets[0].signum();
        let mut orbits = vec![orbit0];
        let mut k_cur = 0.0_f64;
        let mut x_cur = RadialState { r: rbar, r_dot: 0.0 };
        let mut prev: Option<(f64, RadialState)> = None; // for the secant predictor
        let mut dk = opts.dk_max.min(targets[0].abs());
        let mut streak = 0u32;

        for &target in &targets {
            loop {
                let remaining = (target - k_cur).abs();
                if remaining <= f64::EPSILON * target.abs() {
                    break;
                }
                let step = dk.min(remaining);
                let k_next = k_cur + sign * step;
                let guess = match prev {
                    Some((k_prev, x_prev)) if (k_cur - k_prev).abs() > 0.0 => {
                        let s = (k_next - k_cur) / (k_cur - k_prev);
                        RadialState {
                            r: x_cur.r + s * (x_cur.r - x_prev.r),
                            r_dot: x_cur.r_dot + s * (x_cur.r_dot - x_prev.r_dot),
                        }
                    }
                    _ => x_cur,
                };
                match self.newton_shoot(guess, k_next) {
                    Ok(orbit) => {
                        prev = Some((k_cur, x_cur));
                        k_cur = k_next;
                        x_cur = orbit.x0;
                        streak += 1;
                        if streak >= 2 {
                            dk = (2.0 * dk).min(opts.dk_max);
                            streak = 0;
                        }
                        let on_target =
                            (k_cur - target).abs() <= f64::EPSILON * target.abs().max(1.0);
                        if on_target {
                            orbits.push(orbit);
                        }
                    }
                    Err(err) => {
                        streak = 0;
                        dk *= 0.5;
                        if dk < opts.dk_min {
                            if orbits.len() == 1 {
                                return Err(Error::BranchTerminated {
                                    reached_k: k_cur,
                                    reason: err.to_string(),
                                });
                            }
                            return Ok(Branch {
                                termination: Termination::Stalled {
                                    at_k: k_cur,
                                    reason: err.to_string(),
                                },
                                k_reached: k_cur,
                                orbits,
                            });
                        }
                    }
                }
            }
        }
        Ok(Branch {
            orbits,
            termination: Termination::Completed,
            k_reached: k_cur,
        })
    }
}

/// Rotation angle of an elliptic area-preserving matrix: `tr M = 2 cos
/// alpha`, the sign of `sin alpha` read off the upper-right entry. NaN
/// when `|tr| >= 2` (hyperbolic or parabolic).
fn rotation_angle(m: &[[f64; 2]; 2]) -> f64 {
    let half_trace = 0.5 * (m[0][0] + m[1][1]);
    if half_trace.abs() >= 1.0 {
        return f64::NAN;
    }
    let s = (1.0 - half_trace * half_trace).sqrt();
    f64::atan2(m[0][1].signum() * s, half_trace)
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn validate_targets(k_targets: &[f64]) -> Result<Vec<f64>> {
    let targets: Vec<f64> = k_targets.iter().copied().filter(|&k| k != 0.0).collect();
    if targets.is_empty() {
        return Err(Error::InvalidInput(
            "continuation needs at least one nonzero amplitude target".into(),
        ));
    }
    let sign = targets[0].signum();
    let mut last = 0.0_f64;
    for &k in &targets {
        if !k.is_finite() {
            return Err(Error::InvalidInput("amplitude targets must be finite".into()));
        }
        if k.signum() != sign {
            return Err(Error::InvalidInput(
                "amplitude targets must share one sign".into(),
            ));
        }
        if k.abs() <= last {
            return Err(Error::InvalidInput(
                "amplitude targets must increase strictly in magnitude".into(),
            ));
        }
        last = k.abs();
    }
    Ok(targets)
}
