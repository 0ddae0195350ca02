//! Rotation numbers near an elliptic fixed point, subharmonic orbit
//! searches, and radial-stability probes of the period map.
//!
//! The period map linearized at a stable periodic orbit is an elliptic
//! rotation; a linear change of coordinates ([`elliptic_frame`]) turns
//! iterates of nearby points into near-circular motion whose average
//! angular advance per period is the rotation number. Where the
//! rotation number passes through a rational `p/q` the map carries
//! `qT`-periodic orbits winding `p` times radially per `q` periods;
//! [`find_subharmonic`] hunts them by seeding Newton iteration on the
//! `q`-fold map from the resonant circle. [`stability_probe`] takes the
//! empirical route to radial stability: integrate a cloud of perturbed
//! initial conditions — momenta included — and record how far anyone
//! strays from the reference orbit.

use crate::continuation::{PeriodMap, PeriodicOrbit};
use crate::dynamics::{MomentumPair, RadialState, SimOptions};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Iterates of the period map used for one rotation-number estimate.
const DEFAULT_ROTATION_ITERATES: usize = 10_000;
/// Tangential zeros of `r - rbar` closer to zero than this are merged
/// into their neighbours rather than counted as crossings.
const ZERO_CLUSTER_TOL: f64 = 1e-10;
/// Fine grid used for sign-change counting over `[0, qT]`.
const ZERO_GRID: usize = 8192;
/// A converged point of the q-fold map only counts as an isolated
/// orbit when `|det(M_q - I)|` clears this at the solution. On the
/// degenerate resonant circle of an integrable map the determinant
/// vanishes with the residual, so ghosts die here.
const DEGENERATE_DET_TOL: f64 = 1e-8;

/// Settings for rotation-number sampling.
///
/// The angle of an iterate is resolved relative to the deviation from
/// the fixed point, so the integrator error must stay well below
/// `radius`, not below the state magnitude; hence defaults much tighter
/// than the shooting tolerances.
#[derive(Debug, Clone, Copy)]
pub struct RotationOptions {
    pub iterations: usize,
    /// Integrator settings for each period-map application.
    pub ode: crate::ode::OdeOptions,
    /// Iterates whose normal-form radius leaves
    /// `[radius / factor, radius * factor]` abort the estimate.
    pub annulus_factor: f64,
}

impl Default for RotationOptions {
    fn default() -> Self {
        let mut ode = crate::ode::OdeOptions::default();
        ode.rel_tol = 1e-12;
        ode.abs_tol = 1e-14;
        RotationOptions {
            iterations: DEFAULT_ROTATION_ITERATES,
            ode,
            annulus_factor: 16.0,
        }
    }
}

/// Settings for the subharmonic search.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Normal-form radius range scanned for the resonant circle.
    pub radius_min: f64,
    pub radius_max: f64,
    /// Number of scan radii (linearly spaced).
    pub radii: usize,
    /// Map iterates per scan radius; the scan only needs the rotation
    /// number to bracketing accuracy.
    pub scan_iterations: usize,
    /// Newton seeds placed around the resonant circle.
    pub seeds: usize,
    /// Convergence threshold on `|P^q(x) - x|`.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Points stored with a found orbit.
    pub n_samples: usize,
    /// A converged point closer than this to its image under `P^l`,
    /// `l < q`, is a lower-period orbit in disguise and is rejected.
    pub distinct_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            radius_min: 0.02,
            radius_max: 0.8,
            radii: 24,
            scan_iterations: 192,
            seeds: 8,
            tol: 1e-9,
            max_iterations: 40,
            max_halvings: 8,
            n_samples: 1025,
            distinct_tol: 1e-4,
        }
    }
}

/// A `qT`-periodic orbit whose radial deviation from `rbar` winds `p`
/// times per window.
#[derive(Debug, Clone, Serialize)]
pub struct SubharmonicOrbit {
    pub p: u32,
    pub q: u32,
    pub initial: RadialState,
    /// `|P^q(x) - x|` at the accepted point.
    pub residual: f64,
    /// Uniform sample grid over `[0, qT]` and the radii on it.
    pub times: Vec<f64>,
    pub samples: Vec<f64>,
    /// Sign changes of `r(t) - rbar` in one `qT` window; a valid
    /// `(p, q)` orbit has exactly `2p`.
    pub zero_count: usize,
    /// Entry `l - 1` is true when the orbit is *not* `lT`-periodic,
    /// `l = 1 .. q-1`; all entries must hold for a genuine period `qT`.
    pub minimal_period_check: Vec<bool>,
}

/// Outcome of a subharmonic hunt. Absence of a find is data, not an
/// error: the scan may simply not reach the resonant circle.
#[derive(Debug, Clone, Serialize)]
pub struct SubharmonicReport {
    pub p: u32,
    pub q: u32,
    pub found: bool,
    /// Rotation number measured at the smallest scan radius.
    pub rotation_at_center: f64,
    /// Normal-form radius where the scan bracketed rotation `p/q`.
    pub ring_radius: Option<f64>,
    pub orbit: Option<SubharmonicOrbit>,
}

/// Settings for the perturbation-ensemble probe.
#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    pub members: usize,
    pub rng_seed: u64,
    /// Excursions beyond this count as escapes in the report.
    pub escape_epsilon: f64,
    /// Integrator settings per member.
    pub sim: SimOptions,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            members: 200,
            rng_seed: 42,
            escape_epsilon: 0.1,
            sim: SimOptions::default(),
        }
    }
}

/// Empirical stability record: how far an ensemble of perturbed initial
/// conditions strays from the reference orbit. Report-only — large
/// excursions are findings, not failures.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityProbe {
    pub k: f64,
    pub delta: f64,
    pub horizon_periods: u32,
    pub members: usize,
    /// Largest `|r - r_ref| + |rdot - rdot_ref|` seen by any member.
    pub max_excursion: f64,
    pub collisions: usize,
    /// Members whose excursion exceeded the configured epsilon.
    pub escapes: usize,
    pub member_excursions: Vec<f64>,
}

/// Linear frame turning the action of an elliptic matrix into a rigid
/// rotation: `N^-1 M N = [[cos a, sin a], [-sin a, cos a]]` with
/// `cos a = tr M / 2`. Columns are the real and imaginary parts of a
/// unit-circle eigenvector, rescaled so `|det N| = 1`.
pub fn elliptic_frame(m: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let c = 0.5 * (m[0][0] + m[1][1]);
    if !(c.abs() < 1.0) {
        return Err(Error::InvalidInput(format!(
            "matrix is not elliptic (|trace|/2 = {})",
            c.abs()
        )));
    }
    let s = (1.0 - c * c).sqrt();
    // Eigenvector for c + i s from the larger off-diagonal entry.
    let n = if m[0][1].abs() >= m[1][0].abs() {
        [[m[0][1], 0.0], [c - m[0][0], s]]
    } else {
        [[c - m[1][1], s], [m[1][0], 0.0]]
    };
    let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
    if det.abs() < 1e-14 {
        return Err(Error::InvalidInput(
            "matrix is too close to a scalar multiple of the identity".into(),
        ));
    }
    let scale = det.abs().sqrt();
    let n = [
        [n[0][0] / scale, n[0][1] / scale],
        [n[1][0] / scale, n[1][1] / scale],
    ];
    // The conjugation identity is cheap to verify; a gross violation
    // means the input was not a faithful monodromy.
    let ni = inv2(&n);
    let d = mul2(&mul2(&ni, m), &n);
    let target = [[c, s], [-s, c]];
    let mut err: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            err = err.max((d[i][j] - target[i][j]).abs());
        }
    }
    if err > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "frame verification failed (defect {err:.2e}); matrix may not have unit determinant"
        )));
    }
    Ok(n)
}

/// Average angular advance per iterate, in revolutions, of a sequence
/// of period-map iterates around `center`, measured in the coordinates
/// of `frame`. Exposed for diagnostics on raw state sequences.
pub fn mean_rotation(
    center: RadialState,
    frame: &[[f64; 2]; 2],
    states: &[RadialState],
) -> Result<f64> {
    if states.len() < 2 {
        return Err(Error::InvalidInput(
            "rotation estimate needs at least two iterates".into(),
        ));
    }
    let ni = inv2(frame);
    let mut prev: Option<[f64; 2]> = None;
    let mut total = 0.0;
    for x in states {
        let z = mat_vec(&ni, [x.r - center.r, x.r_dot - center.r_dot]);
        if let Some(zp) = prev {
            let cross = zp[0] * z[1] - zp[1] * z[0];
            let dot = zp[0] * z[0] + zp[1] * z[1];
            total += cross.atan2(dot);
        }
        prev = Some(z);
    }
    Ok((total / (states.len() - 1) as f64).abs() / TAU)
}

/// Rotation number of the period map around `orbit` at the given
/// normal-form radius, with default sampling settings.
pub fn rotation_number(pm: &PeriodMap, orbit: &PeriodicOrbit, radius: f64) -> Result<f64> {
    rotation_number_with(pm, orbit, radius, &RotationOptions::default())
}

/// Rotation number from explicit sampling settings: iterate the period
/// map from a point at `radius` on the normal-form circle and average
/// the angular advance. Iterates drifting out of the sampling annulus
/// abort with an error — that is the signature of a non-elliptic or
/// too-nonlinear regime where the estimate would be meaningless.
pub fn rotation_number_with(
    pm: &PeriodMap,
    orbit: &PeriodicOrbit,
    radius: f64,
    opts: &RotationOptions,
) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sampling radius must be positive and finite, got {radius}"
        )));
    }
    if opts.iterations == 0 {
        return Err(Error::InvalidInput("iteration count must be positive".into()));
    }
    let frame = elliptic_frame(&orbit.monodromy)?;
    let ni = inv2(&frame);
    let center = orbit.x0;
    let dyn_k = pm.dynamics().clone().with_k(orbit.k);
    let mut sim = SimOptions::default();
    sim.ode = opts.ode;

    let start = mat_vec(&frame, [radius, 0.0]);
    let mut x = RadialState {
        r: center.r + start[0],
        r_dot: center.r_dot + start[1],
    };
    let mut states = Vec::with_capacity(opts.iterations + 1);
    states.push(x);
    for iteration in 0..opts.iterations {
        let sol = dyn_k.integrate_radial((0.0, pm.period()), x, &sim)?;
        if let Some(hit) = &sol.event {
            return Err(Error::Collision { t: hit.t, r: hit.y[0] });
        }
        x = RadialState {
            r: sol.y_end[0],
            r_dot: sol.y_end[1],
        };
        let z = mat_vec(&ni, [x.r - center.r, x.r_dot - center.r_dot]);
        let rho = z[0].hypot(z[1]);
        if !rho.is_finite() || rho > radius * opts.annulus_factor || rho < radius / opts.annulus_factor
        {
            return Err(Error::AnnulusEscape { iterations: iteration + 1 });
        }
        states.push(x);
    }
    mean_rotation(center, &frame, &states)
}

/// Hunt a `(p, q)`-subharmonic at amplitude `k`: locate the radius
/// where the measured rotation number crosses `p/q`, seed Newton
/// iteration on the `q`-fold period map around that circle, and
/// validate the definitional invariants (exact `2p` sign changes of
/// `r - rbar` per window, not `lT`-periodic for any `l < q`) before
/// reporting a find.
pub fn find_subharmonic(
    pm: &PeriodMap,
    k: f64,
    p: u32,
    q: u32,
    opts: &SearchOptions,
) -> Result<SubharmonicReport> {
    if p == 0 || q < 2 {
        return Err(Error::InvalidInput(format!(
            "subharmonic indices need p >= 1 and q >= 2, got ({p}, {q})"
        )));
    }
    if !(opts.radius_min > 0.0 && opts.radius_max > opts.radius_min && opts.radii >= 2) {
        return Err(Error::InvalidInput(
            "radius scan needs 0 < radius_min < radius_max and at least two radii".into(),
        ));
    }
    let target = p as f64 / q as f64;

    // Center orbit and its elliptic frame at this amplitude.
    let center = pm.newton_shoot(
        RadialState { r: pm.triplet().rbar, r_dot: 0.0 },
        k,
    )?;
    let frame = elliptic_frame(&center.monodromy)?;

    let scan_opts = RotationOptions {
        iterations: opts.scan_iterations,
        ..RotationOptions::default()
    };
    let rho_of = |radius: f64| rotation_number_with(pm, &center, radius, &scan_opts);

    let rotation_at_center = rho_of(opts.radius_min)?;
    let mut report = SubharmonicReport {
        p,
        q,
        found: false,
        rotation_at_center,
        ring_radius: None,
        orbit: None,
    };
    if target >= rotation_at_center {
        // Subharmonics bifurcate where the (decreasing) rotation number
        // crosses p/q; a target at or above the center value has no
        // resonant circle to cross.
        return Ok(report);
    }

    // Walk outward until the rotation number brackets the target.
    let mut ring = None;
    let mut prev = (opts.radius_min, rotation_at_center);
    for i in 1..opts.radii {
        let radius = opts.radius_min
            + (opts.radius_max - opts.radius_min) * i as f64 / (opts.radii - 1) as f64;
        let rho = match rho_of(radius) {
            Ok(v) => v,
            // Escape or collision marks the edge of the elliptic island;
            // nothing to scan beyond it.
            Err(Error::AnnulusEscape { .. }) | Err(Error::Collision { .. }) => break,
            Err(e) => return Err(e),
        };
        if (prev.1 - target) * (rho - target) <= 0.0 {
            // Linear interpolation in rho locates the circle well enough
            // to seed Newton.
            let w = (prev.1 - target) / (prev.1 - rho);
            ring = Some(prev.0 + w * (radius - prev.0));
            break;
        }
        prev = (radius, rho);
    }
    let Some(ring_radius) = ring else {
        return Ok(report);
    };
    report.ring_radius = Some(ring_radius);

    // Newton on the q-fold map from seeds around the resonant circle,
    // under a tighter integrator so the qT residual is trustworthy.
    let mut sim = SimOptions::default();
    sim.ode.rel_tol = 1e-12;
    sim.ode.abs_tol = 1e-13;
    let pm_tight = pm.clone().with_sim_options(sim);
    for seed in 0..opts.seeds {
        let phase = TAU * seed as f64 / opts.seeds as f64;
        let z = mat_vec(&frame, [ring_radius * phase.cos(), ring_radius * phase.sin()]);
        let guess = RadialState {
            r: center.x0.r + z[0],
            r_dot: center.x0.r_dot + z[1],
        };
        if let Some(x) = newton_on_q_map(&pm_tight, guess, k, q, opts) {
            if let Some(orbit) = validate_candidate(&pm_tight, x, k, p, q, opts)? {
                report.found = true;
                report.orbit = Some(orbit);
                break;
            }
        }
    }
    Ok(report)
}

/// Damped Newton on `G(x) = P^q(x) - x`. Returns the converged point,
/// or `None` when this seed stalls (singular Jacobian, collision, no
/// residual decrease) — the caller just moves to the next seed.
fn newton_on_q_map(
    pm: &PeriodMap,
    guess: RadialState,
    k: f64,
    q: u32,
    opts: &SearchOptions,
) -> Option<RadialState> {
    let residual = |x: RadialState| -> Option<([f64; 2], [[f64; 2]; 2])> {
        let (image, mq) = pm.map_pow(x, k, q).ok()?;
        Some(([image.r - x.r, image.r_dot - x.r_dot], mq))
    };
    let mut x = guess;
    let (mut f, mut mq) = residual(x)?;
    let mut f_norm = f[0].hypot(f[1]);
    for _ in 0..opts.max_iterations {
        let j = [[mq[0][0] - 1.0, mq[0][1]], [mq[1][0], mq[1][1] - 1.0]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        // A (near-)singular q-fold Jacobian means a degenerate circle of
        // fixed points — the integrable resonant case — where no isolated
        // orbit can be certified from this seed.
        if det.abs() <= 1e-12 {
            return None;
        }
        if f_norm <= opts.tol {
            return (det.abs() > DEGENERATE_DET_TOL).then_some(x);
        }
        let dx = [
            (-f[0] * j[1][1] + f[1] * j[0][1]) / det,
            (-f[1] * j[0][0] + f[0] * j[1][0]) / det,
        ];
        let mut advanced = false;
        let mut lambda = 1.0;
        for _ in 0..=opts.max_halvings {
            let trial = RadialState {
                r: x.r + lambda * dx[0],
                r_dot: x.r_dot + lambda * dx[1],
            };
            if trial.r > 0.0 {
                if let Some((f_t, m_t)) = residual(trial) {
                    let f_t_norm = f_t[0].hypot(f_t[1]);
                    if f_t_norm < f_norm {
                        x = trial;
                        f = f_t;
                        mq = m_t;
                        f_norm = f_t_norm;
                        advanced = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !advanced {
            return None;
        }
    }
    if f_norm > opts.tol {
        return None;
    }
    let j = [[mq[0][0] - 1.0, mq[0][1]], [mq[1][0], mq[1][1] - 1.0]];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    (det.abs() > DEGENERATE_DET_TOL).then_some(x)
}

/// Check the definitional invariants at a converged point and assemble
/// the orbit record; `Ok(None)` rejects the candidate (for example the
/// central fixed point, which satisfies `P^q(x) = x` trivially).
fn validate_candidate(
    pm: &PeriodMap,
    x: RadialState,
    k: f64,
    p: u32,
    q: u32,
    opts: &SearchOptions,
) -> Result<Option<SubharmonicOrbit>> {
    let period = pm.period();
    let horizon = period * q as f64;
    let dyn_k = pm.dynamics().clone().with_k(k);
    let mut sim = SimOptions::default();
    sim.ode.rel_tol = 1e-12;
    sim.ode.abs_tol = 1e-13;
    sim.ode.store_dense = true;
    let sol = dyn_k.integrate_radial((0.0, horizon), x, &sim)?;
    if sol.event.is_some() {
        return Ok(None);
    }

    let residual = {
        let y = sol.y_end;
        (y[0] - x.r).hypot(y[1] - x.r_dot)
    };
    if residual > 10.0 * opts.tol {
        return Ok(None);
    }

    let mut minimal_period_check = Vec::with_capacity(q as usize - 1);
    for l in 1..q {
        let y = sol.sample(period * l as f64)?;
        let dist = (y[0] - x.r).hypot(y[1] - x.r_dot);
        minimal_period_check.push(dist > opts.distinct_tol);
    }

    let rbar = pm.triplet().rbar;
    let mut zero_count = 0usize;
    let mut last_sign = 0i8;
    for i in 0..=ZERO_GRID {
        let t = horizon * i as f64 / ZERO_GRID as f64;
        let v = sol.sample(t)?[0] - rbar;
        if v.abs() <= ZERO_CLUSTER_TOL {
            continue;
        }
        let sign = if v > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            zero_count += 1;
        }
        last_sign = sign;
    }

    if minimal_period_check.iter().any(|ok| !ok) || zero_count != 2 * p as usize {
        return Ok(None);
    }

    let n = opts.n_samples.max(2);
    let mut times = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = horizon * i as f64 / (n - 1) as f64;
        let y = sol.sample(t)?;
        if !(y[0] > 0.0) {
            return Ok(None);
        }
        times.push(t);
        samples.push(y[0]);
    }

    Ok(Some(SubharmonicOrbit {
        p,
        q,
        initial: x,
        residual,
        times,
        samples,
        zero_count,
        minimal_period_check,
    }))
}

/// Integrate an ensemble of perturbed copies of `orbit` — initial
/// radius, radial velocity, and both momenta displaced uniformly in a
/// 4-ball of radius `delta` — over the given horizon and record the
/// worst deviation from the reference orbit. Findings are data: a
/// large excursion is reported, never asserted against.
pub fn stability_probe(
    pm: &PeriodMap,
    orbit: &PeriodicOrbit,
    delta: f64,
    horizon: u32,
    opts: &ProbeOptions,
) -> Result<StabilityProbe> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "perturbation radius must be nonnegative and finite, got {delta}"
        )));
    }
    if horizon == 0 || opts.members == 0 {
        return Err(Error::InvalidInput(
            "probe needs at least one period and one member".into(),
        ));
    }
    let period = pm.period();
    let dyn_k = pm.dynamics().clone().with_k(orbit.k);

    // Reference trajectory over one period, sampled by phase folding —
    // the orbit is periodic, so one dense window covers any horizon.
    let mut ref_sim = opts.sim;
    ref_sim.ode.store_dense = true;
    let reference = dyn_k.integrate_radial((0.0, period), orbit.x0, &ref_sim)?;
    if let Some(hit) = &reference.event {
        return Err(Error::Collision { t: hit.t, r: hit.y[0] });
    }

    // All draws come from one sequentially-consumed stream so the
    // ensemble is reproducible regardless of worker scheduling.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let draws: Vec<[f64; 4]> = (0..opts.members)
        .map(|_| loop {
            let v = [
                rng.gen_range(-delta..=delta),
                rng.gen_range(-delta..=delta),
                rng.gen_range(-delta..=delta),
                rng.gen_range(-delta..=delta),
            ];
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            if norm2 <= delta * delta {
                break v;
            }
        })
        .collect();

    let base = pm.triplet().momenta();
    let horizon_t = period * horizon as f64;
    let results: Vec<(f64, bool)> = draws
        .par_iter()
        .map(|d| -> Result<(f64, bool)> {
            let dyn_m = dyn_k.clone().with_momenta(MomentumPair {
                l: base.l + d[2],
                p_z: base.p_z + d[3],
            });
            let start = RadialState {
                r: orbit.x0.r + d[0],
                r_dot: orbit.x0.r_dot + d[1],
            };
            let sol = dyn_m.integrate_radial((0.0, horizon_t), start, &opts.sim)?;
            let mut excursion: f64 = 0.0;
            for (t, y) in sol.times.iter().zip(&sol.states) {
                let r = reference.sample(t.rem_euclid(period).min(period))?;
                excursion = excursion.max((y[0] - r[0]).abs() + (y[1] - r[1]).abs());
            }
            Ok((excursion, sol.event.is_some()))
        })
        .collect::<Result<_>>()?;

    let member_excursions: Vec<f64> = results.iter().map(|r| r.0).collect();
    let collisions = results.iter().filter(|r| r.1).count();
    let escapes = member_excursions
        .iter()
        .filter(|&&e| e > opts.escape_epsilon)
        .count();
    let max_excursion = member_excursions.iter().cloned().fold(0.0, f64::max);

    Ok(StabilityProbe {
        k: orbit.k,
        delta,
        horizon_periods: horizon,
        members: opts.members,
        max_excursion,
        collisions,
        escapes,
        member_excursions,
    })
}

fn mul2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn inv2(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::PeriodMap;
    use crate::current::CurrentProfile;
    use crate::dynamics::EvalMode;
    use crate::interp::PotentialInterp;
    use crate::potential::{PotentialField, QuadConfig};
    use crate::triplets::Triplet;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    const SQRT3: f64 = 1.732_050_807_568_877_3;

    fn shared_interp() -> &'static PotentialInterp {
        static CELL: OnceLock<PotentialInterp> = OnceLock::new();
        CELL.get_or_init(|| {
            let profile = CurrentProfile::sinusoid(1.0, 1.0, 0.5).unwrap();
            let config = QuadConfig {
                abs_tol: 5e-12,
                rel_tol: 1e-12,
                ..QuadConfig::default()
            };
            let field = PotentialField::with_config(profile, 1.0, config).unwrap();
            PotentialInterp::build(field, 0.4, 1.8, 1e-10).unwrap()
        })
    }

    fn standard_map() -> PeriodMap {
        PeriodMap::new(
            Triplet::new(1.0, 1.0, 1.0, 1.0).unwrap(),
            EvalMode::Interp(shared_interp().clone()),
            0.5,
            SimOptions::default(),
        )
        .unwrap()
    }

    fn center_orbit(pm: &PeriodMap, k: f64) -> PeriodicOrbit {
        pm.newton_shoot(RadialState { r: 1.0, r_dot: 0.0 }, k).unwrap()
    }

    fn quick(iterations: usize) -> RotationOptions {
        RotationOptions {
            iterations,
            ..RotationOptions::default()
        }
    }

    #[test]
    fn frame_conjugates_the_monodromy_to_a_rotation() {
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.0);
        let m = &orbit.monodromy;
        let n = elliptic_frame(m).unwrap();
        let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
        assert_relative_eq!(det.abs(), 1.0, epsilon = 1e-10);
        let c = 0.5 * (m[0][0] + m[1][1]);
        let s = (1.0 - c * c).sqrt();
        let d = mul2(&mul2(&inv2(&n), m), &n);
        assert_relative_eq!(d[0][0], c, epsilon = 1e-9);
        assert_relative_eq!(d[0][1], s, epsilon = 1e-9);
        assert_relative_eq!(d[1][0], -s, epsilon = 1e-9);
        assert_relative_eq!(d[1][1], c, epsilon = 1e-9);
    }

    #[test]
    fn frame_rejects_hyperbolic_matrices() {
        let m = [[2.0, 1.0], [1.0, 1.0]];
        assert!(matches!(elliptic_frame(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rotation_limit_matches_the_linear_frequency() {
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.0);
        let rho = rotation_number_with(&pm, &orbit, 1e-6, &quick(2000)).unwrap();
        assert_relative_eq!(rho, SQRT3 * 0.5 / TAU, epsilon = 1e-7);
        assert!((rho - orbit.rotation_angle / TAU).abs() <= 1e-6);
    }

    #[test]
    fn rotation_is_flat_in_the_linear_regime() {
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.0);
        let tiny = rotation_number_with(&pm, &orbit, 1e-6, &quick(1500)).unwrap();
        let small = rotation_number_with(&pm, &orbit, 1e-4, &quick(1500)).unwrap();
        assert!((tiny - small).abs() <= 1e-5, "gap {}", (tiny - small).abs());
    }

    #[test]
    fn rotation_softens_with_amplitude() {
        // The twist coefficient: rotation decreases quadratically in the
        // normal-form radius. The fitted curvature is pinned as a
        // regression value (frame normalized to |det| = 1).
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.0);
        let at = |radius: f64| rotation_number_with(&pm, &orbit, radius, &quick(2000)).unwrap();
        let (r1, r2) = (0.1, 0.2);
        let tau = (at(r2) - at(r1)) / (r2 * r2 - r1 * r1);
        assert!(tau < 0.0, "expected softening, got {tau}");
        assert_relative_eq!(tau, -0.047_627_834_562_654, epsilon = 1e-6);
    }

    #[test]
    fn forced_rotation_stays_near_the_unforced_value() {
        let pm = standard_map();
        let k = 1e-3;
        let forced = center_orbit(&pm, k);
        let unforced = center_orbit(&pm, 0.0);
        let rho_k = rotation_number_with(&pm, &forced, 1e-4, &quick(1000)).unwrap();
        let rho_0 = rotation_number_with(&pm, &unforced, 1e-4, &quick(1000)).unwrap();
        assert!(
            (rho_k - rho_0).abs() <= 10.0 * k,
            "rotation moved by {}",
            (rho_k - rho_0).abs()
        );
    }

    #[test]
    fn tight_annulus_flags_nonlinear_wander() {
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.0);
        let opts = RotationOptions {
            iterations: 500,
            annulus_factor: 1.0 + 1e-6,
            ..RotationOptions::default()
        };
        let err = rotation_number_with(&pm, &orbit, 0.3, &opts).unwrap_err();
        assert!(matches!(err, Error::AnnulusEscape { .. }));
    }

    #[test]
    fn rotation_obstruction_reports_not_found() {
        let pm = standard_map();
        let report = find_subharmonic(&pm, 0.01, 1, 2, &SearchOptions::default()).unwrap();
        assert!(!report.found);
        assert!(report.orbit.is_none());
        assert!(report.ring_radius.is_none());
        assert_relative_eq!(report.rotation_at_center, SQRT3 * 0.5 / TAU, epsilon = 1e-3);
    }

    #[test]
    fn unforced_resonant_circle_yields_no_isolated_orbit() {
        // At k = 0 the map is integrable: where the rotation number
        // crosses 1/8 an entire circle of q-periodic points exists, the
        // q-fold Jacobian is singular along it, and no isolated orbit
        // can be certified. The search must come back empty-handed.
        let pm = standard_map();
        let opts = SearchOptions {
            radii: 12,
            scan_iterations: 128,
            seeds: 4,
            ..SearchOptions::default()
        };
        let report = find_subharmonic(&pm, 0.0, 1, 8, &opts).unwrap();
        assert!(!report.found);
        assert!(report.orbit.is_none());
    }

    #[test]
    fn subharmonic_1_8_found_at_small_forcing() {
        let pm = standard_map();
        let opts = SearchOptions {
            radius_min: 0.05,
            radius_max: 0.75,
            radii: 18,
            scan_iterations: 160,
            ..SearchOptions::default()
        };
        let report = find_subharmonic(&pm, 0.01, 1, 8, &opts).unwrap();
        assert!(report.found, "no (1,8) orbit located");
        let orbit = report.orbit.unwrap();
        assert!(orbit.residual <= 1e-8, "residual {}", orbit.residual);
        assert_eq!(orbit.zero_count, 2);
        assert_eq!(orbit.minimal_period_check.len(), 7);
        assert!(orbit.minimal_period_check.iter().all(|&ok| ok));
        assert!(orbit.samples.iter().all(|&r| r > 0.0));
        // The ring sits at a genuinely nonlinear amplitude.
        let spread = orbit
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            });
        assert!(spread.1 - spread.0 > 0.05);
    }

    #[test]
    fn probe_is_deterministic() {
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.01);
        let opts = ProbeOptions {
            members: 12,
            ..ProbeOptions::default()
        };
        let a = stability_probe(&pm, &orbit, 1e-3, 20, &opts).unwrap();
        let b = stability_probe(&pm, &orbit, 1e-3, 20, &opts).unwrap();
        assert_eq!(a.member_excursions, b.member_excursions);
        assert_eq!(a.max_excursion, b.max_excursion);
        assert_eq!(a.collisions, 0);
    }

    #[test]
    fn probe_zero_delta_stays_on_the_orbit() {
        // delta = 0 leaves every member on the reference orbit; the
        // recorded excursion is the integrator's phase-folding floor.
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.0);
        let opts = ProbeOptions {
            members: 4,
            ..ProbeOptions::default()
        };
        let probe = stability_probe(&pm, &orbit, 0.0, 10, &opts).unwrap();
        assert!(probe.max_excursion <= 1e-8, "floor {}", probe.max_excursion);
        assert_eq!(probe.collisions, 0);
        assert_eq!(probe.escapes, 0);
    }

    #[test]
    fn probe_confines_small_perturbations_of_the_integrable_orbit() {
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.0);
        let opts = ProbeOptions {
            members: 32,
            escape_epsilon: 1e-2,
            ..ProbeOptions::default()
        };
        let probe = stability_probe(&pm, &orbit, 1e-3, 100, &opts).unwrap();
        assert!(probe.max_excursion <= 1e-2, "excursion {}", probe.max_excursion);
        assert_eq!(probe.collisions, 0);
        assert_eq!(probe.escapes, 0);
        assert_eq!(probe.member_excursions.len(), 32);
    }

    #[test]
    fn probe_rejects_bad_arguments() {
        let pm = standard_map();
        let orbit = center_orbit(&pm, 0.0);
        let opts = ProbeOptions::default();
        assert!(stability_probe(&pm, &orbit, -1.0, 10, &opts).is_err());
        assert!(stability_probe(&pm, &orbit, 1e-3, 0, &opts).is_err());
        assert!(find_subharmonic(&pm, 0.0, 0, 8, &SearchOptions::default()).is_err());
        assert!(find_subharmonic(&pm, 0.0, 1, 1, &SearchOptions::default()).is_err());
        assert!(rotation_number_with(&pm, &orbit, -0.5, &quick(10)).is_err());
    }
}
