//! Complementary error function, accurate to better than 1e-12 absolute.
//!
//! Small arguments use the Maclaurin series of erf; large arguments use
//! the Laplace continued fraction evaluated with the modified Lentz
//! scheme, so no polynomial fit limits the accuracy.

use std::f64::consts::FRAC_2_SQRT_PI;
/// Series/continued-fraction crossover; the series loses about two
/// digits to cancellation here, the fraction none.
const SPLIT: f64 = 3.0;

pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x == 0.0 {
        return 1.0;
    }
    if x <= SPLIT {
        1.0 - erf_series(x)
    } else {
        erfc_fraction(x)
    }
}

pub fn erf(x: f64) -> f64 {
    1.0 - erfc(x)
}

/// erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1)).
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x; // x^(2n+1) / n!
    let mut sum = x;
    for n in 1..200 {
        term *= -x2 / n as f64;
        let contribution = term / (2 * n + 1) as f64;
        sum += contribution;
        if contribution.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

/// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
/// for x > 0, evaluated by modified Lentz iteration.
fn erfc_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..400 {
        let a = 0.5 * n as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    let prefactor = (-x * x).exp() / std::f64::consts::PI.sqrt();
    prefactor / f
}
