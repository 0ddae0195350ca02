//! JSON run configurations.
//!
//! Every subcommand that takes `--config` deserializes one of these
//! structs. Unknown fields are rejected so typos surface as validation
//! errors instead of silently running with defaults; omitted fields
//! fall back to the same defaults the library uses.

use serde::{Deserialize, Serialize};
use wirefield_core::continuation::ContinuationOptions;
use wirefield_core::dynamics::SimOptions;
use wirefield_core::ode::OdeOptions;
use wirefield_core::orbit_search::SearchOptions;
use wirefield_core::{CurrentProfile, QuadConfig, Result, Sign, Triplet};

/// Current profile selector mirroring the library constructors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ProfileConfig {
    pub shape: Shape,
    pub i0: f64,
    /// Forcing amplitude; orbit-family commands override it per run.
    #[serde(default)]
    pub k: f64,
    pub period: f64,
    /// Smoothing width for `smoothed_square`.
    #[serde(default)]
    pub transition: Option<f64>,
    /// Harmonic coefficients for `fourier` (entry `n-1` scales the
    /// `n`-th harmonic).
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sinusoid,
    Steady,
    SmoothedSquare,
    Fourier,
}

impl ProfileConfig {
    pub fn build(&self) -> Result<CurrentProfile> {
        match self.shape {
            Shape::Sinusoid => CurrentProfile::sinusoid(self.i0, self.k, self.period),
            Shape::Steady => CurrentProfile::steady(self.i0, self.period),
            Shape::SmoothedSquare => {
                CurrentProfile::smoothed_square(self.i0, self.k, self.period, self.transition)
            }
            Shape::Fourier => CurrentProfile::fourier(
                self.i0,
                self.k,
                self.period,
                self.cos.clone(),
                self.sin.clone(),
            ),
        }
    }
}

/// Uniform sampling grid on one axis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// Quadrature budgets for potential evaluations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadTols {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadTols {
    fn default() -> Self {
        let q = QuadConfig::default();
        QuadTols { abs_tol: q.abs_tol, rel_tol: q.rel_tol }
    }
}

impl QuadTols {
    pub fn to_config(self) -> QuadConfig {
        QuadConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            ..QuadConfig::default()
        }
    }
    /// Budget tight enough to support interpolation tables at their
    /// default tolerance; used by the orbit-family commands.
    pub fn tight() -> Self {
        QuadTols { abs_tol: 5e-12, rel_tol: 1e-12 }
    }
}

/// Integrator tolerances.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        let o = OdeOptions::default();
        OdeConfig { rel_tol: o.rel_tol, abs_tol: o.abs_tol }
    }
}

impl OdeConfig {
    pub fn to_sim(self, r_min: f64) -> SimOptions {
        let mut sim = SimOptions::default();
        sim.ode.rel_tol = self.rel_tol;
        sim.ode.abs_tol = self.abs_tol;
        sim.r_min = r_min;
        sim
    }
}

fn default_r_min() -> f64 {
    SimOptions::default().r_min
}

/// Chebyshev-table interpolation window for the hot loops; absent means
/// exact quadrature per evaluation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpSpec {
    pub r_lo: f64,
    pub r_hi: f64,
    #[serde(default = "default_interp_tol")]
    pub tol: f64,
}

fn default_interp_tol() -> f64 {
    1e-10
}

/// A triplet given either in full or completed from `(rbar, I0)` along
/// one sign branch of the angular momentum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TripletSpec {
    Full { rbar: f64, l: f64, p_z: f64, i0: f64 },
    Completed { rbar: f64, i0: f64, branch: Sign },
}

impl TripletSpec {
    pub fn build(&self) -> Result<Triplet> {
        match *self {
            TripletSpec::Full { rbar, l, p_z, i0 } => Triplet::new(rbar, l, p_z, i0),
            TripletSpec::Completed { rbar, i0, branch } => Triplet::complete(rbar, i0, branch),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialTableConfig {
    pub profile: ProfileConfig,
    #[serde(default = "default_c")]
    pub c: f64,
    pub t: GridSpec,
    pub r: GridSpec,
    #[serde(default)]
    pub quad: QuadTols,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    pub profile: ProfileConfig,
    #[serde(default = "default_c")]
    pub c: f64,
    pub t: GridSpec,
    pub r: GridSpec,
    #[serde(default)]
    pub quad: QuadTols,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentaConfig {
    pub l: f64,
    pub p_z: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub r: f64,
    #[serde(default)]
    pub r_dot: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub z: f64,
}

/// Either a triplet (start on its circular orbit) or explicit momenta
/// plus an initial state must be given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub profile: ProfileConfig,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub triplet: Option<TripletSpec>,
    #[serde(default)]
    pub momenta: Option<MomentaConfig>,
    #[serde(default)]
    pub initial: Option<InitialState>,
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub ode: OdeConfig,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default)]
    pub quad: QuadTols,
    #[serde(default)]
    pub interp: Option<InterpSpec>,
}

fn default_samples() -> usize {
    1001
}

fn default_c() -> f64 {
    1.0
}

/// Shared stem of the orbit-family commands (`continue`, `twist-check`,
/// `subharmonics`, `stability`): a triplet, a forcing profile whose
/// period is the map period, and evaluation settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitStem {
    pub profile: ProfileConfig,
    #[serde(default = "default_c")]
    pub c: f64,
    pub triplet: TripletSpec,
    #[serde(default = "QuadTols::tight")]
    pub quad: QuadTols,
    #[serde(default)]
    pub interp: Option<InterpSpec>,
    #[serde(default)]
    pub ode: OdeConfig,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
}

/// Unknown keys are rejected by the flattened stem, so
/// `deny_unknown_fields` (which serde forbids next to `flatten`) is not
/// needed here; likewise for the other orbit-family configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinueConfig {
    #[serde(flatten)]
    pub stem: OrbitStem,
    /// Amplitudes at which orbits are recorded, strictly increasing in
    /// magnitude, one sign.
    pub k_list: Vec<f64>,
    #[serde(default = "default_dk_max")]
    pub dk_max: f64,
    #[serde(default = "default_dk_min")]
    pub dk_min: f64,
}

fn default_dk_max() -> f64 {
    ContinuationOptions::default().dk_max
}

fn default_dk_min() -> f64 {
    ContinuationOptions::default().dk_min
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistCheckConfig {
    #[serde(flatten)]
    pub stem: OrbitStem,
    pub k_list: Vec<f64>,
    #[serde(default = "default_dk_max")]
    pub dk_max: f64,
    #[serde(default = "default_dk_min")]
    pub dk_min: f64,
    /// Margin floor below which a certificate does not count toward the
    /// reported amplitude threshold.
    #[serde(default)]
    pub safety: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubharmonicsConfig {
    #[serde(flatten)]
    pub stem: OrbitStem,
    pub k: f64,
    pub p: u32,
    pub q: u32,
    #[serde(default)]
    pub search: SearchConfig,
}

/// Overridable subset of the search settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub radius_min: f64,
    pub radius_max: f64,
    pub radii: usize,
    pub scan_iterations: usize,
    pub seeds: usize,
    pub tol: f64,
    pub n_samples: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let s = SearchOptions::default();
        SearchConfig {
            radius_min: s.radius_min,
            radius_max: s.radius_max,
            radii: s.radii,
            scan_iterations: s.scan_iterations,
            seeds: s.seeds,
            tol: s.tol,
            n_samples: s.n_samples,
        }
    }
}

impl SearchConfig {
    pub fn to_options(self) -> SearchOptions {
        SearchOptions {
            radius_min: self.radius_min,
            radius_max: self.radius_max,
            radii: self.radii,
            scan_iterations: self.scan_iterations,
            seeds: self.seeds,
            tol: self.tol,
            n_samples: self.n_samples,
            ..SearchOptions::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityConfig {
    #[serde(flatten)]
    pub stem: OrbitStem,
    pub k: f64,
    /// Perturbation-ball radius over `(r, r_dot, L, p_z)`.
    pub delta: f64,
    /// Horizon in periods.
    pub horizon: u32,
    #[serde(default = "default_members")]
    pub members: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub escape_epsilon: f64,
}

fn default_members() -> usize {
    200
}

fn default_seed() -> u64 {
    42
}

fn default_epsilon() -> f64 {
    0.1
}
