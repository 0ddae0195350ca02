//! Circular-orbit data `(rbar, L, p_z)` and its classification.
//!
//! A triplet is *admissible* when the centrifugal and magnetic terms
//! balance on the circle `r = rbar`, i.e. `L^2 = rbar^2 I0 (p_z + I0 ln
//! rbar)`; each admissible triplet is a circular orbit of the
//! unperturbed system with linear oscillation frequency `omega0` given
//! by `omega0^2 = (2 L^2 / rbar^2 + I0^2) / rbar^2`. Two resonance
//! notions are exposed side by side: a *literal* one testing the period
//! against the set `{n omega0}`, and a *spectral* one testing whether
//! the linearization `y'' = -omega0^2 y` admits a nontrivial T-periodic
//! solution (`omega0 T` a multiple of `2 pi`). They disagree
//! dimensionally, and the spectral notion is the one that actually
//! gates continuation; both are reported with margins so callers can
//! see how close a period sits to either set.

use crate::dynamics::MomentumPair;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative tolerance for resonance-set membership.
const MEMBERSHIP_REL_TOL: f64 = 1e-9;
/// Largest multiplier considered when testing set membership.
const MEMBERSHIP_N_MAX: f64 = 1e6;
/// Admissibility slack accepted by the classification routines.
const ADMISSIBLE_ENFORCE_TOL: f64 = 1e-9;

/// Sign choice for the angular momentum when completing a triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn sign(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Orbit data `(rbar, L, p_z)` at mean current `I0`.
///
/// Construction checks only the structural constraints (`rbar > 0`,
/// `L != 0`, `I0 != 0`); admissibility is a separate, quantitative
/// query so that near-miss triplets can still be inspected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub rbar: f64,
    pub l: f64,
    pub p_z: f64,
    pub i0: f64,
}

/// Outcome of the admissibility test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Admissibility {
    /// `L^2 - rbar^2 I0 (p_z + I0 ln rbar)`; zero exactly on balance.
    pub defect: f64,
    pub admissible: bool,
}

/// Distance of a period from both resonance sets.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResonanceReport {
    /// Period avoids the printed set `{n omega0 : n >= 1}`.
    pub paper_literal: bool,
    pub paper_literal_margin: f64,
    /// Linearization has no nontrivial T-periodic solution
    /// (`omega0 T` is not a positive multiple of `2 pi`).
    pub spectral: bool,
    pub spectral_margin: f64,
}

/// Outcome of the strong non-resonance test `omega0 < pi / (2T)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StrongReport {
    pub strong: bool,
    /// `pi/(2T) - omega0`; positive iff the test passes.
    pub margin: f64,
}

impl Triplet {
    pub fn new(rbar: f64, l: f64, p_z: f64, i0: f64) -> Result<Self> {
        if !(rbar > 0.0) || !rbar.is_finite() {
            return Err(Error::InvalidInput(format!(
                "triplet radius must be positive and finite, got {rbar}"
            )));
        }
        if l == 0.0 || !l.is_finite() {
            return Err(Error::InvalidInput(
                "angular momentum must be nonzero and finite (L = 0 leads to radial collision dynamics)"
                    .into(),
            ));
        }
        if i0 == 0.0 || !i0.is_finite() {
            return Err(Error::InvalidInput(
                "mean current must be nonzero and finite".into(),
            ));
        }
        if !p_z.is_finite() {
            return Err(Error::InvalidInput("p_z must be finite".into()));
        }
        Ok(Triplet { rbar, l, p_z, i0 })
    }

    /// Choose `L` and `p_z` so the triplet is admissible by construction:
    /// `L = ±|I0| rbar`, `p_z = I0 - I0 ln rbar`.
    pub fn complete(rbar: f64, i0: f64, branch: Sign) -> Result<Self> {
        let l = branch.sign() * i0.abs() * rbar;
        let p_z = i0 - i0 * rbar.ln();
        Triplet::new(rbar, l, p_z, i0)
    }

    /// Linear oscillation frequency about the circle:
    /// `omega0 = sqrt(2 L^2 / rbar^2 + I0^2) / rbar`.
    pub fn omega0(&self) -> f64 {
        (2.0 * self.l * self.l / (self.rbar * self.rbar) + self.i0 * self.i0).sqrt() / self.rbar
    }

    /// The momenta as consumed by the reduced dynamics.
    pub fn momenta(&self) -> MomentumPair {
        MomentumPair {
            l: self.l,
            p_z: self.p_z,
        }
    }

    /// Force-balance defect and verdict at relative tolerance `rel_tol`
    /// (scaled by `max(1, L^2)`).
    pub fn admissibility(&self, rel_tol: f64) -> Admissibility {
        let defect =
            self.l * self.l - self.rbar * self.rbar * self.i0 * (self.p_z + self.i0 * self.rbar.ln());
        Admissibility {
            defect,
            admissible: defect.abs() <= rel_tol * (self.l * self.l).max(1.0),
        }
    }

    /// Both resonance verdicts for period `period`.
    pub fn resonance(&self, period: f64) -> Result<ResonanceReport> {
        self.require_admissible()?;
        check_period(period)?;
        let omega0 = self.omega0();
        // Literal reading: the period itself against {n omega0}.
        let (paper_literal_margin, lit_hit) = distance_to_multiples(period, omega0);
        // Spectral reading: omega0 T against {2 pi n}.
        let (spectral_margin, spec_hit) =
            distance_to_multiples(omega0 * period, 2.0 * std::f64::consts::PI);
        Ok(ResonanceReport {
            paper_literal: !lit_hit,
            paper_literal_margin,
            spectral: !spec_hit,
            spectral_margin,
        })
    }

    /// Strong non-resonance: `omega0 < pi / (2 period)`. Implies spectral
    /// non-resonance with room to spare (`omega0 T < pi/2 < 2 pi`).
    pub fn strong(&self, period: f64) -> Result<StrongReport> {
        self.require_admissible()?;
        check_period(period)?;
        let margin = std::f64::consts::FRAC_PI_2 / period - self.omega0();
        Ok(StrongReport {
            strong: margin > 0.0,
            margin,
        })
    }

    fn require_admissible(&self) -> Result<()> {
        let report = self.admissibility(ADMISSIBLE_ENFORCE_TOL);
        if !report.admissible {
            return Err(Error::InvalidInput(format!(
                "triplet is not admissible (force-balance defect {:.3e})",
                report.defect
            )));
        }
        Ok(())
    }
}

/// Distance from `x` to the set `{n q : 1 <= n <= N_MAX}` and whether
/// `x` lies in the set at the membership tolerance.
fn distance_to_multiples(x: f64, q: f64) -> (f64, bool) {
    let n = (x / q).round().clamp(1.0, MEMBERSHIP_N_MAX);
    let margin = (x - n * q).abs();
    (margin, margin <= MEMBERSHIP_REL_TOL * x.abs().max(1.0))
}

fn check_period(period: f64) -> Result<()> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidInput(format!(
            "period must be positive and finite, got {period}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    const SQRT3: f64 = 1.732_050_807_568_877_3;

    fn standard() -> Triplet {
        Triplet::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn completion_at_unit_radius() {
        let t = Triplet::complete(1.0, 1.0, Sign::Plus).unwrap();
        assert_eq!((t.l, t.p_z), (1.0, 1.0));
        let report = t.admissibility(1e-12);
        assert!(report.admissible);
        assert_eq!(report.defect, 0.0);
    }

    #[test]
    fn completion_at_radius_e() {
        let t = Triplet::complete(E, 1.0, Sign::Plus).unwrap();
        assert_relative_eq!(t.l, E, epsilon = 1e-15);
        assert!(t.p_z.abs() < 1e-15);
    }

    #[test]
    fn minus_branch_is_admissible_too() {
        let t = Triplet::complete(2.5, -0.7, Sign::Minus).unwrap();
        assert_eq!(t.l, -0.7 * 2.5); // L = -|I0| rbar
        assert!(t.admissibility(1e-12).admissible);
    }

    #[test]
    fn admissibility_defect_values() {
        assert_eq!(standard().admissibility(1e-12).defect, 0.0);
        let off = Triplet::new(1.0, 1.0, 2.0, 1.0).unwrap();
        let report = off.admissibility(1e-12);
        assert_eq!(report.defect, -1.0);
        assert!(!report.admissible);
    }

    #[test]
    fn zero_angular_momentum_is_rejected() {
        assert!(Triplet::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(Triplet::new(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(Triplet::new(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn standard_frequency_is_sqrt3() {
        assert_relative_eq!(standard().omega0(), SQRT3, epsilon = 1e-15);
    }

    #[test]
    fn resonance_verdicts() {
        let t = standard();
        // T = 1: clear of both sets.
        let r = t.resonance(1.0).unwrap();
        assert!(r.paper_literal && r.spectral);
        assert_relative_eq!(r.paper_literal_margin, SQRT3 - 1.0, epsilon = 1e-12);

        // T = 2 pi / sqrt(3): spectrally resonant (omega0 T = 2 pi) even
        // though the literal set does not flag it.
        let r = t.resonance(2.0 * PI / SQRT3).unwrap();
        assert!(r.paper_literal);
        assert!(!r.spectral);
        assert!(r.spectral_margin < 1e-12);

        // T = sqrt(3): literal hit with n = 1.
        let r = t.resonance(SQRT3).unwrap();
        assert!(!r.paper_literal);
        assert!(r.paper_literal_margin < 1e-12);
    }

    #[test]
    fn strong_verdicts() {
        let t = standard();
        let s = t.strong(0.5).unwrap();
        assert!(s.strong);
        assert_relative_eq!(s.margin, PI - SQRT3, epsilon = 1e-12);
        let s = t.strong(2.0).unwrap();
        assert!(!s.strong);
    }

    #[test]
    fn strong_condition_matches_completed_form() {
        // For completed triplets (L^2 = I0^2 rbar^2) the condition
        // reduces to rbar / |I0| > 2 sqrt(3) T / pi.
        for &(rbar, i0, period) in &[
            (1.0, 1.0, 0.5),
            (3.0, 0.4, 1.5),
            (0.7, 2.0, 0.1),
            (5.0, 1.1, 2.0),
        ] {
            let t = Triplet::complete(rbar, i0, Sign::Plus).unwrap();
            let direct = t.strong(period).unwrap().strong;
            let remark_form = rbar / i0.abs() > SQRT3 * 2.0 * period / PI;
            assert_eq!(direct, remark_form, "mismatch at ({rbar}, {i0}, {period})");
        }
    }

    #[test]
    fn classification_requires_admissibility() {
        let off = Triplet::new(1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(off.resonance(1.0).is_err());
        assert!(off.strong(1.0).is_err());
        assert!(standard().resonance(0.0).is_err());
        assert!(standard().strong(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn completion_roundtrip_is_admissible(
            rbar in 0.1f64..10.0,
            i0 in 0.1f64..10.0,
            minus in proptest::bool::ANY,
        ) {
            let branch = if minus { Sign::Minus } else { Sign::Plus };
            let t = Triplet::complete(rbar, i0, branch).unwrap();
            prop_assert!(t.admissibility(1e-12).admissible);
            // Frequency identity omega0^2 rbar^2 = 2 L^2 / rbar^2 + I0^2.
            let lhs = t.omega0().powi(2) * rbar * rbar;
            let rhs = 2.0 * t.l * t.l / (rbar * rbar) + i0 * i0;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }

        #[test]
        fn strong_implies_spectral(
            rbar in 0.1f64..10.0,
            i0 in 0.1f64..10.0,
            period in 0.01f64..10.0,
        ) {
            let t = Triplet::complete(rbar, i0, Sign::Plus).unwrap();
            let strong = t.strong(period).unwrap();
            if strong.strong {
                let r = t.resonance(period).unwrap();
                prop_assert!(r.spectral,
                    "strong margin {} but spectral margin {}",
                    strong.margin, r.spectral_margin);
            }
        }
    }
}
