use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate.
///
/// Variants split into two families mirrored by the CLI exit codes:
/// configuration/validation problems (rejected input) and numerical failures
/// (the computation was attempted but did not meet its contract).
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A current profile failed validation (period, mean, or `I0`).
    #[error("invalid current profile: {0}")]
    InvalidProfile(String),

    /// A derivative order was requested beyond the profile's smoothness.
    #[error("derivative order {requested} not available (profile is C^{available})")]
    UnsupportedOrder { requested: i32, available: i32 },

    /// Evaluation at or inside the wire (`r <= 0`, or `r <= r_min` for
    /// trajectories).
    #[error("radius {r} is at or inside the wire")]
    WireSingularity { r: f64 },

    /// Adaptive quadrature could not certify the requested tolerance within
    /// its interval budget. Carries the best estimate and its bound.
    #[error("quadrature budget exhausted: estimate {estimate} with error bound {bound} > tolerance {tolerance}")]
    QuadratureBudget {
        estimate: f64,
        bound: f64,
        tolerance: f64,
    },

    /// A trajectory reached the collision radius.
    #[error("trajectory hit the wire at t = {t} (r = {r})")]
    Collision { t: f64, r: f64 },

    /// The adaptive step controller drove the step size below the
    /// representable minimum.
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// The integrator exceeded its step budget.
    #[error("step budget of {max_steps} exceeded at t = {t}")]
    StepBudget { t: f64, max_steps: usize },

    /// The shooting Jacobian `M - I` is singular to working precision,
    /// which happens exactly at spectral resonance.
    #[error("shooting Jacobian is singular (|det(M - I)| = {det_abs:.3e}); period is resonant")]
    SingularJacobian { det_abs: f64 },

    /// Newton iteration did not reach the residual tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Continuation stopped before reaching the requested amplitude.
    #[error("continuation terminated early at k = {reached_k}: {reason}")]
    BranchTerminated { reached_k: f64, reason: String },

    /// An orbit left the sampling annulus during rotation-number estimation.
    #[error("iterates escaped the sampling annulus after {iterations} steps")]
    AnnulusEscape { iterations: usize },

    /// Catch-all for malformed requests (bad ranges, empty grids, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors that indicate bad input rather than a numerical
    /// failure; the CLI maps these to exit code 2, the rest to 3.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidProfile(_)
                | Error::UnsupportedOrder { .. }
                | Error::InvalidInput(_)
        )
    }
}
