//! Electromagnetic field of the modulated wire.
//!
//! From `A_z = -(a0(r) + k a(t, r))` and the cylindrical symmetry, the
//! only nonvanishing field components are
//!
//! ```text
//! B_theta(t, r) = I0 / r + k d_r a(t, r)
//! E_z(t, r)     = k d_t a(t, r)
//! ```
//!
//! (`E_r = E_theta = B_r = B_z = 0`.) The static part reproduces the
//! familiar `I0 / r` azimuthal field; the oscillating part carries the
//! certified error bounds of the potential evaluation.

use crate::error::Result;
use crate::potential::{Certified, PotentialField};

/// Cylindrical field sample at `(t, r)`.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub t: f64,
    pub r: f64,
    /// Oscillating potential `a(t, r)` (unit amplitude, before `k`).
    pub a: Certified,
    /// Azimuthal magnetic field including the static `I0 / r` part.
    pub b_theta: Certified,
    /// Axial electric field `k d_t a`.
    pub e_z: Certified,
}

/// Field vectors at a Cartesian point, components ordered `(x, y, z)`.
#[derive(Debug, Clone, Copy)]
pub struct CartesianFieldSample {
    pub e: [f64; 3],
    pub b: [f64; 3],
    /// Combined error bound on any field component.
    pub error_bound: f64,
}

/// Evaluate the physical field at `(t, r)`, scaling the oscillating part
/// by the profile's forcing amplitude `k`.
pub fn sample(field: &PotentialField, t: f64, r: f64) -> Result<FieldSample> {
    let k = field.profile().k();
    let parts = field.a_with_partials(t, r, &[(0, 0), (0, 1), (1, 0)])?;
    let b_static = field.a0_prime(r)?;
    Ok(FieldSample {
        t,
        r,
        a: parts[0],
        b_theta: Certified {
            value: b_static + k * parts[1].value,
            error_bound: k.abs() * parts[1].error_bound,
        },
        e_z: Certified {
            value: k * parts[2].value,
            error_bound: k.abs() * parts[2].error_bound,
        },
    })
}

/// Evaluate the field at a Cartesian point `(x, y, z)`; the z-coordinate
/// is irrelevant by translation symmetry but accepted for convenience.
pub fn sample_cartesian(
    field: &PotentialField,
    t: f64,
    x: f64,
    y: f64,
    _z: f64,
) -> Result<CartesianFieldSample> {
    let r = x.hypot(y);
    let s = sample(field, t, r)?;
    // theta_hat = (-y/r, x/r, 0).
    let b = [-y / r * s.b_theta.value, x / r * s.b_theta.value, 0.0];
    Ok(CartesianFieldSample {
        e: [0.0, 0.0, s.e_z.value],
        b,
        error_bound: s.b_theta.error_bound.max(s.e_z.error_bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{j0, j1, y0, y1};
    use crate::current::CurrentProfile;
    use crate::error::Error;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn static_wire_field() {
        let profile = CurrentProfile::steady(1.0, 1.0).unwrap();
        let f = PotentialField::new(profile, 1.0).unwrap();
        let s = sample(&f, 0.3, 2.0).unwrap();
        assert_eq!(s.b_theta.value, 0.5);
        assert_eq!(s.b_theta.error_bound, 0.0);
        assert_eq!(s.e_z.value, 0.0);
        assert_eq!(s.a.value, 0.0);
    }

    #[test]
    fn zero_amplitude_hides_oscillation() {
        let profile = CurrentProfile::sinusoid(2.0, 0.0, 1.0).unwrap();
        let f = PotentialField::new(profile, 1.0).unwrap();
        let s = sample(&f, 0.7, 1.3).unwrap();
        assert_relative_eq!(s.b_theta.value, 2.0 / 1.3, epsilon = 1e-15);
        assert_eq!(s.e_z.value, 0.0);
        // The potential itself is still reported (unit amplitude).
        assert!(s.a.value.abs() > 0.1);
    }

    #[test]
    fn sinusoid_fields_match_closed_forms() {
        let (i0, k) = (1.5, 0.07);
        let profile = CurrentProfile::sinusoid(i0, k, 2.0 * PI).unwrap();
        let f = PotentialField::new(profile, 1.0).unwrap();
        for &(t, r) in &[(0.0, 1.0), (1.2, 0.6), (3.9, 2.5)] {
            let s = sample(&f, t, r).unwrap();
            let want_b = i0 / r + k * (PI / 2.0) * (t.sin() * y1(r) + t.cos() * j1(r));
            let want_e = -k * (PI / 2.0) * (t.cos() * y0(r) - t.sin() * j0(r));
            assert_relative_eq!(s.b_theta.value, want_b, epsilon = 1e-8);
            assert_relative_eq!(s.e_z.value, want_e, epsilon = 1e-8);
        }
    }

    #[test]
    fn cartesian_orientation() {
        let profile = CurrentProfile::sinusoid(1.0, 0.05, 2.0 * PI).unwrap();
        let f = PotentialField::new(profile, 1.0).unwrap();
        let r = 1.7;
        let on_x = sample_cartesian(&f, 0.4, r, 0.0, 3.0).unwrap();
        let on_y = sample_cartesian(&f, 0.4, 0.0, r, -1.0).unwrap();
        let s = sample(&f, 0.4, r).unwrap();

        // At (r, 0) the azimuthal direction is +y; at (0, r) it is -x.
        assert_relative_eq!(on_x.b[1], s.b_theta.value, epsilon = 1e-12);
        assert!(on_x.b[0].abs() < 1e-15 && on_x.b[2] == 0.0);
        assert_relative_eq!(on_y.b[0], -s.b_theta.value, epsilon = 1e-12);

        // E is axial everywhere; magnitude of B is direction-independent.
        assert_eq!(on_x.e[0], 0.0);
        assert_eq!(on_x.e[1], 0.0);
        assert_relative_eq!(on_x.e[2], s.e_z.value, epsilon = 1e-14);
        let mag_x = on_x.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mag_y = on_y.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_relative_eq!(mag_x, mag_y, epsilon = 1e-12);
    }

    #[test]
    fn faraday_law_in_reduced_form() {
        // With E = E_z(t, r) z_hat and B = B_theta(t, r) theta_hat the
        // only nontrivial Maxwell component is d_r E_z = d_t B_theta.
        let profile = CurrentProfile::fourier(1.0, 0.2, 3.0, vec![0.5], vec![1.0]).unwrap();
        let f = PotentialField::new(profile, 2.0).unwrap();
        let k = f.profile().k();
        let (t, r) = (0.9, 1.1);
        let lhs = k * f.a_partial(t, r, 1, 1).unwrap().value;
        let h = 1e-4;
        let bt = |t: f64| sample(&f, t, r).unwrap().b_theta.value;
        let rhs = (bt(t + h) - bt(t - h)) / (2.0 * h);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-6);
    }

    #[test]
    fn rejects_axis() {
        let profile = CurrentProfile::sinusoid(1.0, 0.1, 1.0).unwrap();
        let f = PotentialField::new(profile, 1.0).unwrap();
        assert!(matches!(
            sample(&f, 0.0, 0.0),
            Err(Error::WireSingularity { .. })
        ));
        assert!(sample_cartesian(&f, 0.0, 0.0, 0.0, 1.0).is_err());
    }
}
