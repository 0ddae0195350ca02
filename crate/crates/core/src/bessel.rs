//! Bessel functions `J0`, `J1`, `Y0`, `Y1` of a real positive argument.
//!
//! These exist to provide an independent closed-form reference for the
//! oscillating potential of a purely sinusoidal current; the production
//! evaluation path never calls them. Accuracy is ~1e-11 absolute or better
//! over the range used by the tests (power series up to the switch point,
//! Hankel asymptotic expansions beyond it).

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Switch between the ascending series and the asymptotic expansion.
const SERIES_CUTOFF: f64 = 13.0;

/// Bessel function of the first kind, order zero.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_CUTOFF {
        j0_series(x)
    } else {
        let (p, q) = hankel_pq(0, x);
        let chi = x - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Bessel function of the first kind, order one.
pub fn j1(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "j1 is used for x >= 0 only");
    if x <= SERIES_CUTOFF {
        j1_series(x)
    } else {
        let (p, q) = hankel_pq(1, x);
        let chi = x - 3.0 * PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Bessel function of the second kind, order zero. Requires `x > 0`.
pub fn y0(x: f64) -> f64 {
    assert!(x > 0.0, "y0 requires a positive argument");
    if x <= SERIES_CUTOFF {
        // Y0 = (2/pi) [ (ln(x/2)+gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k q^k/(k!)^2 ]
        let q = 0.25 * x * x;
        let mut term = 1.0; // q^k / (k!)^2
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= q / ((k * k) as f64);
            harmonic += 1.0 / k as f64;
            let contrib = if k % 2 == 1 { 1.0 } else { -1.0 } * harmonic * term;
            sum += contrib;
            if term * (harmonic + 1.0) < 1e-18 * (1.0 + sum.abs()) {
                break;
            }
        }
        2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j0_series(x) + sum)
    } else {
        let (p, q) = hankel_pq(0, x);
        let chi = x - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * chi.sin() + q * chi.cos())
    }
}

/// Bessel function of the second kind, order one. Requires `x > 0`.
pub fn y1(x: f64) -> f64 {
    assert!(x > 0.0, "y1 requires a positive argument");
    if x <= SERIES_CUTOFF {
        // Y1 = (2/pi)(ln(x/2)+gamma) J1 - 2/(pi x)
        //      - (x/(2 pi)) sum_k (H_k + H_{k+1}) (-q)^k / (k!(k+1)!)
        let q = 0.25 * x * x;
        let mut term = 1.0; // q^k / (k! (k+1)!)
        let mut harmonic = 0.0; // H_k
        let mut sum = 1.0; // k = 0 contribution: (H_0 + H_1) = 1
        for k in 1..200 {
            term *= q / ((k * (k + 1)) as f64);
            harmonic += 1.0 / k as f64;
            let weight = 2.0 * harmonic + 1.0 / (k + 1) as f64; // H_k + H_{k+1}
            let contrib = if k % 2 == 0 { 1.0 } else { -1.0 } * weight * term;
            sum += contrib;
            if term * (weight + 1.0) < 1e-18 * (1.0 + sum.abs()) {
                break;
            }
        }
        2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j1_series(x) - 1.0 / x)
            - x / (2.0 * PI) * sum
    } else {
        let (p, q) = hankel_pq(1, x);
        let chi = x - 3.0 * PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * chi.sin() + q * chi.cos())
    }
}

/// First derivatives, handy for radial derivatives of the closed form.
pub fn j0_prime(x: f64) -> f64 {
    -j1(x)
}

pub fn y0_prime(x: f64) -> f64 {
    -y1(x)
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= -q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 * (1.0 + sum.abs()) {
            break;
        }
    }
    sum
}

fn j1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= -q / ((k * (k + 1)) as f64);
        sum += term;
        if term.abs() < 1e-18 * (1.0 + sum.abs()) {
            break;
        }
    }
    0.5 * x * sum
}

/// The `P` and `Q` factors of the Hankel asymptotic expansion for order
/// `nu`, truncated at the smallest term.
fn hankel_pq(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k x^k)
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..40u32 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > prev {
            break; // divergent part of the asymptotic series reached
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}
