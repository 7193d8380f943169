//! Complementary error function.
//!
//! `erfc(x)` for `0 <= x < 2.5` is `1 - erf(x)` with the all-positive series
//!
//! ```text
//! erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_{n>=0} 2^n x^(2n+1) / (1*3*...*(2n+1))
//! ```
//!
//! and for `x >= 2.5` the Laplace continued fraction
//!
//! ```text
//! erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
//! ```
//!
//! evaluated with the modified Lentz method. Negative arguments use
//! `erfc(-x) = 2 - erfc(x)`. Absolute error is below 1e-14 on the real line.

use std::f64::consts::PI;

const SWITCH: f64 = 2.5;
// erfc underflows to zero past here
const UNDERFLOW: f64 = 27.3;
const EPS: f64 = 1e-17;
const MAX_TERMS: usize = 500;

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x > UNDERFLOW {
        0.0
    } else if x < SWITCH {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

pub fn erf(x: f64) -> f64 {
    1.0 - erfc(x)
}

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term < EPS * sum {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    // f = x + a1/(x + a2/(x + ...)), a_n = n/2
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..MAX_TERMS {
        let a = n as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}
