//! Subcommand implementations.
//!
//! Each handler reads its config, runs the computation, writes the
//! artifacts into the output directory, and echoes a manifest JSON on
//! stdout. Grids and ensembles run on the rayon pool; rows are
//! collected in index order so artifacts do not depend on the thread
//! count.

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::json;
use std::path::{Path, PathBuf};
use wirefield_core::continuation::{ContinuationOptions, PeriodMap, Termination};
use wirefield_core::dynamics::{
    CylindricalState, EvalMode, MomentumPair, RadialDynamics, RadialState,
};
use wirefield_core::orbit_search::{find_subharmonic, stability_probe, ProbeOptions};
use wirefield_core::twist::{check_twist, compute_coefficients, ThresholdEntry, ThresholdReport};
use wirefield_core::{fields, PotentialField, PotentialInterp, Triplet};

use crate::config::{
    FieldsConfig, InitialState, OrbitStem, PotentialTableConfig, SimulateConfig, StabilityConfig,
    SubharmonicsConfig, TwistCheckConfig,
};
use crate::config::ContinueConfig;
use crate::output::{self, Manifest, Versions};
use crate::{BranchArg, CliError, RunContext, TripletArgs};

/// Admissibility slack for triplet classification.
const ADMISSIBLE_TOL: f64 = 1e-9;

/// Read and parse a JSON config; any failure here is a validation
/// error. Returns the typed config, the SHA-256 of the raw bytes, and
/// the parsed value for the manifest echo.
fn read_config<T: DeserializeOwned>(
    path: &Path,
) -> Result<(T, String, serde_json::Value), CliError> {
    let bytes = std::fs::read(path).map_err(|e| {
        CliError::Validation(format!("cannot read config {}: {e}", path.display()))
    })?;
    let value: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Validation(format!("malformed config: {e}")))?;
    let cfg: T = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
    Ok((cfg, output::sha256_hex(&bytes), value))
}

fn emit_manifest(
    ctx: &RunContext,
    command: &str,
    config_sha256: String,
    inputs: serde_json::Value,
    seed: Option<u64>,
    artifacts: Vec<PathBuf>,
) -> Result<(), CliError> {
    Manifest {
        command: command.to_string(),
        versions: Versions {
            wirefield: env!("CARGO_PKG_VERSION"),
        },
        config_sha256,
        inputs,
        seed,
        threads: ctx.threads,
        artifacts,
        wall_time_s: ctx.wall_time_s(),
    }
    .print()
}

fn config_inputs(path: &Path, value: serde_json::Value) -> serde_json::Value {
    json!({ "config_path": path, "config": value })
}

/// Assemble the period map shared by the orbit-family commands. The
/// profile's own amplitude is ignored there — each command passes its
/// amplitudes explicitly.
fn build_period_map(stem: &OrbitStem) -> Result<PeriodMap, CliError> {
    let profile = stem.profile.build()?;
    let period = profile.period();
    let field = PotentialField::with_config(profile, stem.c, stem.quad.to_config())?;
    let eval = match stem.interp {
        Some(spec) => {
            EvalMode::Interp(PotentialInterp::build(field, spec.r_lo, spec.r_hi, spec.tol)?)
        }
        None => EvalMode::Exact(field),
    };
    let triplet = stem.triplet.build()?;
    Ok(PeriodMap::new(
        triplet,
        eval,
        period,
        stem.ode.to_sim(stem.r_min),
    )?)
}

pub fn potential_table(ctx: &RunContext, config_path: &Path) -> Result<(), CliError> {
    let (cfg, sha, raw): (PotentialTableConfig, _, _) = read_config(config_path)?;
    let field = PotentialField::with_config(cfg.profile.build()?, cfg.c, cfg.quad.to_config())?;
    let c2 = cfg.c * cfg.c;
    let grid: Vec<(f64, f64)> = cfg
        .t
        .points()
        .into_iter()
        .flat_map(|t| cfg.r.points().into_iter().map(move |r| (t, r)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(t, r)| {
            let p = field.a_with_partials(t, r, &[(0, 0), (0, 1), (1, 0), (2, 0), (0, 2)])?;
            let wave_residual = p[3].value - c2 * (p[4].value + p[1].value / r);
            let residual_bound = p[3].error_bound + c2 * (p[4].error_bound + p[1].error_bound / r);
            let est_error = p
                .iter()
                .map(|c| c.error_bound)
                .fold(residual_bound, f64::max);
            Ok(vec![
                t,
                r,
                p[0].value,
                p[1].value,
                p[2].value,
                wave_residual,
                est_error,
            ])
        })
        .collect::<wirefield_core::Result<Vec<_>>>()?;
    let csv = ctx.out_dir.join("potential_table.csv");
    output::write_csv(
        &csv,
        "potential-table",
        &sha,
        &["t", "r", "a", "da_dr", "da_dt", "wave_residual", "est_error"],
        &rows,
    )?;
    emit_manifest(
        ctx,
        "potential-table",
        sha,
        config_inputs(config_path, raw),
        None,
        vec![csv],
    )
}

pub fn fields(ctx: &RunContext, config_path: &Path) -> Result<(), CliError> {
    let (cfg, sha, raw): (FieldsConfig, _, _) = read_config(config_path)?;
    let field = PotentialField::with_config(cfg.profile.build()?, cfg.c, cfg.quad.to_config())?;
    let grid: Vec<(f64, f64)> = cfg
        .t
        .points()
        .into_iter()
        .flat_map(|t| cfg.r.points().into_iter().map(move |r| (t, r)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(t, r)| {
            let s = fields::sample(&field, t, r)?;
            Ok(vec![t, r, s.e_z.value, s.b_theta.value])
        })
        .collect::<wirefield_core::Result<Vec<_>>>()?;
    let csv = ctx.out_dir.join("fields.csv");
    output::write_csv(&csv, "fields", &sha, &["t", "r", "e_z", "b_theta"], &rows)?;
    emit_manifest(
        ctx,
        "fields",
        sha,
        config_inputs(config_path, raw),
        None,
        vec![csv],
    )
}

fn cylindrical(i: &InitialState) -> CylindricalState {
    CylindricalState {
        r: i.r,
        r_dot: i.r_dot,
        theta: i.theta,
        z: i.z,
    }
}

/// Momenta and start state from either a triplet (circular-orbit start)
/// or an explicit pair, never both.
fn resolve_start(
    cfg: &SimulateConfig,
    profile_i0: f64,
) -> Result<(MomentumPair, CylindricalState), CliError> {
    match (&cfg.triplet, &cfg.momenta, &cfg.initial) {
        (Some(spec), None, initial) => {
            let triplet = spec.build()?;
            if (triplet.i0 - profile_i0).abs() > 1e-12 * profile_i0.abs().max(1.0) {
                return Err(CliError::Validation(format!(
                    "triplet mean current {} does not match the profile's {}",
                    triplet.i0, profile_i0
                )));
            }
            let start = initial.as_ref().map(cylindrical).unwrap_or(CylindricalState {
                r: triplet.rbar,
                r_dot: 0.0,
                theta: 0.0,
                z: 0.0,
            });
            Ok((triplet.momenta(), start))
        }
        (None, Some(m), Some(i)) => Ok((MomentumPair { l: m.l, p_z: m.p_z }, cylindrical(i))),
        _ => Err(CliError::Validation(
            "config needs either `triplet` or both `momenta` and `initial`".into(),
        )),
    }
}

pub fn simulate(ctx: &RunContext, config_path: &Path) -> Result<(), CliError> {
    let (cfg, sha, raw): (SimulateConfig, _, _) = read_config(config_path)?;
    if !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
        return Err(CliError::Validation(format!(
            "t_end must be positive and finite, got {}",
            cfg.t_end
        )));
    }
    if cfg.samples < 2 {
        return Err(CliError::Validation(
            "samples must be at least 2".into(),
        ));
    }
    let profile = cfg.profile.build()?;
    let i0 = profile.i0();
    let field = PotentialField::with_config(profile, cfg.c, cfg.quad.to_config())?;
    let eval = match cfg.interp {
        Some(spec) => {
            EvalMode::Interp(PotentialInterp::build(field, spec.r_lo, spec.r_hi, spec.tol)?)
        }
        None => EvalMode::Exact(field),
    };
    let (momenta, start) = resolve_start(&cfg, i0)?;
    let dynamics = RadialDynamics::new(eval, momenta);
    let mut sim = cfg.ode.to_sim(cfg.r_min);
    sim.ode.store_dense = true;
    let sol = dynamics.integrate_cylindrical((0.0, cfg.t_end), start, &sim)?;
    if let Some(hit) = sol.event {
        return Err(CliError::Numerical(format!(
            "trajectory hit the wire at t = {:.6e}",
            hit.t
        )));
    }
    let n = cfg.samples;
    let rows = (0..n)
        .map(|i| {
            let t = cfg.t_end * i as f64 / (n - 1) as f64;
            let y = sol.sample(t)?;
            let fi = dynamics.first_integrals(&RadialState {
                r: y[0],
                r_dot: y[1],
            })?;
            Ok(vec![t, y[0], y[1], y[2], y[3], fi.l, fi.p_z, fi.e0])
        })
        .collect::<wirefield_core::Result<Vec<_>>>()?;
    let csv = ctx.out_dir.join("simulate.csv");
    output::write_csv(
        &csv,
        "simulate",
        &sha,
        &["t", "r", "rdot", "theta", "z", "L", "p_z", "E0"],
        &rows,
    )?;
    emit_manifest(
        ctx,
        "simulate",
        sha,
        config_inputs(config_path, raw),
        None,
        vec![csv],
    )
}

pub fn triplet(ctx: &RunContext, args: &TripletArgs) -> Result<(), CliError> {
    let triplet = match (args.l, args.p_z) {
        (Some(l), Some(p_z)) => Triplet::new(args.rbar, l, p_z, args.i0)?,
        _ => Triplet::complete(args.rbar, args.i0, args.branch.into())?,
    };
    let inputs = json!({
        "rbar": args.rbar,
        "I0": args.i0,
        "T": args.period,
        "l": args.l,
        "p_z": args.p_z,
        "branch": match args.branch { BranchArg::Plus => "plus", BranchArg::Minus => "minus" },
    });
    let sha = output::sha256_hex(inputs.to_string().as_bytes());
    let admissibility = triplet.admissibility(ADMISSIBLE_TOL);
    // Resonance classification presumes an admissible triplet; for a
    // near-miss the verdicts are omitted rather than refused.
    let (resonance, strong) = if admissibility.admissible {
        (
            Some(triplet.resonance(args.period)?),
            Some(triplet.strong(args.period)?),
        )
    } else {
        (None, None)
    };
    let report = json!({
        "triplet": triplet,
        "period": args.period,
        "omega0": triplet.omega0(),
        "admissibility": admissibility,
        "resonance": resonance,
        "strong": strong.map(|s| s.strong),
        "strong_margin": strong.map(|s| s.margin),
    });
    let path = ctx.out_dir.join("triplet.json");
    output::write_json(&path, &report)?;
    emit_manifest(ctx, "triplet", sha, inputs, None, vec![path])
}

pub fn continue_branch(ctx: &RunContext, config_path: &Path) -> Result<(), CliError> {
    let (cfg, sha, raw): (ContinueConfig, _, _) = read_config(config_path)?;
    let pm = build_period_map(&cfg.stem)?;
    let opts = ContinuationOptions {
        dk_max: cfg.dk_max,
        dk_min: cfg.dk_min,
    };
    let branch = pm.continue_in_k(&cfg.k_list, &opts)?;
    let json_path = ctx.out_dir.join("branch.json");
    output::write_json(&json_path, &branch)?;
    let mut rows = Vec::new();
    for orbit in &branch.orbits {
        for (&t, &r) in orbit.times.iter().zip(&orbit.samples) {
            rows.push(vec![orbit.k, t, r]);
        }
    }
    let csv_path = ctx.out_dir.join("branch.csv");
    output::write_csv(&csv_path, "continue", &sha, &["k", "t", "r"], &rows)?;
    emit_manifest(
        ctx,
        "continue",
        sha,
        config_inputs(config_path, raw),
        None,
        vec![json_path, csv_path],
    )
}

pub fn twist_check(ctx: &RunContext, config_path: &Path) -> Result<(), CliError> {
    let (cfg, sha, raw): (TwistCheckConfig, _, _) = read_config(config_path)?;
    let pm = build_period_map(&cfg.stem)?;
    let opts = ContinuationOptions {
        dk_max: cfg.dk_max,
        dk_min: cfg.dk_min,
    };
    let branch = pm.continue_in_k(&cfg.k_list, &opts)?;
    // Certify each branch entry, keeping the coefficient series for the
    // CSV; the threshold filter below mirrors the library's sweep.
    let results = branch
        .orbits
        .par_iter()
        .map(|orbit| {
            let coeffs = compute_coefficients(&pm, orbit)?;
            let certificate = check_twist(&coeffs, pm.period());
            Ok((
                coeffs,
                ThresholdEntry {
                    k: orbit.k,
                    certificate,
                },
            ))
        })
        .collect::<wirefield_core::Result<Vec<_>>>()?;
    let k1 = results
        .iter()
        .filter(|(_, e)| {
            let c = &e.certificate;
            c.certified
                && c.margin_i > cfg.safety
                && c.margin_ii > cfg.safety
                && c.margin_iii > cfg.safety
        })
        .map(|(_, e)| e.k.abs())
        .fold(None, |acc: Option<f64>, k| Some(acc.map_or(k, |a| a.max(k))));
    let mut rows = Vec::new();
    for (coeffs, _) in &results {
        for (i, &t) in coeffs.times.iter().enumerate() {
            rows.push(vec![coeffs.k, t, coeffs.a[i], coeffs.b[i], coeffs.c[i]]);
        }
    }
    let report = ThresholdReport {
        k1,
        entries: results.into_iter().map(|(_, e)| e).collect(),
    };
    let json_path = ctx.out_dir.join("twist.json");
    output::write_json(&json_path, &report)?;
    let csv_path = ctx.out_dir.join("twist.csv");
    output::write_csv(&csv_path, "twist-check", &sha, &["k", "t", "A", "B", "C"], &rows)?;
    emit_manifest(
        ctx,
        "twist-check",
        sha,
        config_inputs(config_path, raw),
        None,
        vec![json_path, csv_path],
    )
}

pub fn subharmonics(ctx: &RunContext, config_path: &Path) -> Result<(), CliError> {
    let (cfg, sha, raw): (SubharmonicsConfig, _, _) = read_config(config_path)?;
    let pm = build_period_map(&cfg.stem)?;
    let report = find_subharmonic(&pm, cfg.k, cfg.p, cfg.q, &cfg.search.to_options())?;
    let summary = json!({
        "p": report.p,
        "q": report.q,
        "found": report.found,
        "residual": report.orbit.as_ref().map(|o| o.residual),
        "zeros": report.orbit.as_ref().map(|o| o.zero_count),
        "minimal_period": report
            .orbit
            .as_ref()
            .map(|o| o.minimal_period_check.iter().all(|&ok| ok)),
        "rotation_at_center": report.rotation_at_center,
        "ring_radius": report.ring_radius,
    });
    let json_path = ctx.out_dir.join("subharmonics.json");
    output::write_json(&json_path, &summary)?;
    let mut artifacts = vec![json_path];
    if let Some(orbit) = &report.orbit {
        let rows: Vec<Vec<f64>> = orbit
            .times
            .iter()
            .zip(&orbit.samples)
            .map(|(&t, &r)| vec![t, r])
            .collect();
        let csv_path = ctx.out_dir.join("subharmonic_orbit.csv");
        output::write_csv(&csv_path, "subharmonics", &sha, &["t", "r"], &rows)?;
        artifacts.push(csv_path);
    }
    emit_manifest(
        ctx,
        "subharmonics",
        sha,
        config_inputs(config_path, raw),
        None,
        artifacts,
    )
}

pub fn stability(ctx: &RunContext, config_path: &Path) -> Result<(), CliError> {
    let (cfg, sha, raw): (StabilityConfig, _, _) = read_config(config_path)?;
    let pm = build_period_map(&cfg.stem)?;
    let orbit = if cfg.k == 0.0 {
        let rbar = pm.triplet().rbar;
        pm.newton_shoot(RadialState { r: rbar, r_dot: 0.0 }, 0.0)?
    } else {
        let branch = pm.continue_in_k(&[cfg.k], &ContinuationOptions::default())?;
        if let Termination::Stalled { at_k, reason } = &branch.termination {
            return Err(CliError::Numerical(format!(
                "continuation stalled at k = {at_k}: {reason}"
            )));
        }
        branch.orbits.last().cloned().expect("completed branch has orbits")
    };
    let opts = ProbeOptions {
        members: cfg.members,
        rng_seed: cfg.seed,
        escape_epsilon: cfg.escape_epsilon,
        sim: cfg.stem.ode.to_sim(cfg.stem.r_min),
    };
    let probe = stability_probe(&pm, &orbit, cfg.delta, cfg.horizon, &opts)?;
    let summary = json!({
        "k": probe.k,
        "delta": probe.delta,
        "horizon_periods": probe.horizon_periods,
        "members": probe.members,
        "max_excursion": probe.max_excursion,
        "collisions": probe.collisions,
        "escapes": probe.escapes,
    });
    let json_path = ctx.out_dir.join("stability.json");
    output::write_json(&json_path, &summary)?;
    let rows: Vec<Vec<f64>> = probe
        .member_excursions
        .iter()
        .enumerate()
        .map(|(i, &e)| vec![i as f64, e])
        .collect();
    let csv_path = ctx.out_dir.join("stability.csv");
    output::write_csv(&csv_path, "stability", &sha, &["member", "excursion"], &rows)?;
    emit_manifest(
        ctx,
        "stability",
        sha,
        config_inputs(config_path, raw),
        Some(cfg.seed),
        vec![json_path, csv_path],
    )
}
