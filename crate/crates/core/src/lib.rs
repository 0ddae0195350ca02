//! Field and particle dynamics around an infinitely long straight wire
//! carrying a periodically modulated current.
//!
//! The wire lies on the z-axis and carries `J(t) = (I0 + k I(t)) z_hat`
//! with `I` periodic and zero-mean. Everything downstream — the retarded
//! vector potential, the electromagnetic field, the reduced radial
//! dynamics, periodic-orbit continuation in the forcing amplitude, twist
//! certificates, and subharmonic orbit searches — is built from a small
//! set of carefully tested numerical kernels: Bessel evaluations, adaptive
//! Gauss-Kronrod quadrature with certified error bounds, and an embedded
//! Runge-Kutta integrator with dense output.
//!
//! Layering, bottom to top:
//!
//! * [`current`] — periodic current profiles and their derivative /
//!   antiderivative ladders,
//! * [`quad`], [`bessel`] — quadrature and special-function kernels,
//! * [`potential`] — the retarded potential `a(t, r)` and its partials,
//!   with truncation + quadrature error control,
//! * [`fields`] — electromagnetic field samples derived from the potential,
//! * [`ode`] — the shared Runge-Kutta 5(4) integrator,
//! * [`interp`] — fast certified interpolants for the hot loops,
//! * [`dynamics`] — the reduced radial system and full 3D equations of
//!   motion,
//! * [`triplets`], [`continuation`], [`twist`], [`orbit_search`] — the
//!   orbit-level layers: parameter bookkeeping, continuation of circular
//!   orbits in `k`, twist-stability certificates, and subharmonic hunting.

pub mod bessel;
pub mod continuation;
pub mod current;
pub mod dynamics;
mod error;
pub mod fields;
pub mod interp;
pub mod ode;
pub mod orbit_search;
pub mod potential;
pub mod quad;
pub mod triplets;
pub mod twist;

pub use continuation::{
    Branch, ContinuationOptions, PeriodMap, PeriodicOrbit, ShootOptions, Termination,
};
pub use current::{CurrentProfile, ValidationReport};
pub use dynamics::{
    CylindricalState, EvalMode, FirstIntegrals, MomentumPair, RadialDynamics, RadialState,
    SimOptions,
};
pub use error::{Error, Result};
pub use fields::{CartesianFieldSample, FieldSample};
pub use interp::PotentialInterp;
pub use orbit_search::{
    ProbeOptions, RotationOptions, SearchOptions, StabilityProbe, SubharmonicOrbit,
    SubharmonicReport, elliptic_frame, find_subharmonic, mean_rotation, rotation_number,
    rotation_number_with, stability_probe,
};
pub use potential::{Certified, PotentialField, QuadConfig};
pub use triplets::{Admissibility, ResonanceReport, Sign, StrongReport, Triplet};
pub use twist::{
    ThresholdEntry, ThresholdReport, TwistCertificate, TwistCoefficients, check_twist,
    compute_coefficients, twist_threshold,
};
