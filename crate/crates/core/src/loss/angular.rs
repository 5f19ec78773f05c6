//! Angular-momentum coupling coefficients and spherical harmonics.
//!
//! Angular momenta are passed doubled (`2j`, `2m`) so half-integers stay exact.

use std::f64::consts::PI;

use num_complex::Complex64;

fn factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)` from doubled arguments (Racah formula).
pub fn wigner_3j_doubled(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    let ok = |tj: i64, tm: i64| tj >= 0 && tm.abs() <= tj && (tj + tm) % 2 == 0;
    if !(ok(tj1, tm1) && ok(tj2, tm2) && ok(tj3, tm3)) {
        return 0.0;
    }
    // triangle condition with integer sum
    if tj3 < (tj1 - tj2).abs() || tj3 > tj1 + tj2 || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    // (j1 j2 j3; 0 0 0) vanishes for odd j1 + j2 + j3
    if tm1 == 0 && tm2 == 0 && (tj1 + tj2 + tj3) % 4 != 0 {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let (a, b, c) = (h(tj1 + tj2 - tj3), h(tj1 - tj2 + tj3), h(-tj1 + tj2 + tj3));
    let delta = factorial(a) * factorial(b) * factorial(c) / factorial(h(tj1 + tj2 + tj3) + 1);
    let pref = (delta
        * factorial(h(tj1 + tm1))
        * factorial(h(tj1 - tm1))
        * factorial(h(tj2 + tm2))
        * factorial(h(tj2 - tm2))
        * factorial(h(tj3 + tm3))
        * factorial(h(tj3 - tm3)))
    .sqrt();
    let t1 = h(tj3 - tj2 + tm1);
    let t2 = h(tj3 - tj1 - tm2);
    let t3 = h(tj1 + tj2 - tj3);
    let t4 = h(tj1 - tm1);
    let t5 = h(tj2 + tm2);
    let kmin = 0.max(-t1).max(-t2);
    let kmax = t3.min(t4).min(t5);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let denom = factorial(k)
            * factorial(t1 + k)
            * factorial(t2 + k)
            * factorial(t3 - k)
            * factorial(t4 - k)
            * factorial(t5 - k);
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / denom;
    }
    let phase_exp = h(tj1 - tj2 - tm3);
    let phase = if phase_exp.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    phase * pref * sum
}

/// Wigner 3j symbol for integer angular momenta.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    wigner_3j_doubled(2 * j1, 2 * j2, 2 * j3, 2 * m1, 2 * m2, 2 * m3)
}

/// Clebsch-Gordan coefficient `<j1 m1 j2 m2 | J M>` from doubled arguments.
pub fn clebsch_gordan_doubled(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    let exp = (tj1 - tj2 + tm) / 2;
    let phase = if exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * ((tj + 1) as f64).sqrt() * wigner_3j_doubled(tj1, tj2, tj, tm1, tm2, -tm)
}

/// `<l' m'| C^k_q |l m>` with `C^k_q = sqrt(4 pi / (2k+1)) Y_kq`.
pub fn c_tensor_element(lp: i64, mp: i64, k: i64, q: i64, l: i64, m: i64) -> f64 {
    let phase = if mp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase
        * (((2 * lp + 1) * (2 * l + 1)) as f64).sqrt()
        * wigner_3j(lp, k, l, 0, 0, 0)
        * wigner_3j(lp, k, l, -mp, q, m)
}

/// Gaunt integral `int Y*_{l'm'} Y_{kq} Y_{lm} dOmega`.
pub fn gaunt(lp: i64, mp: i64, k: i64, q: i64, l: i64, m: i64) -> f64 {
    ((2 * k + 1) as f64 / (4.0 * PI)).sqrt() * c_tensor_element(lp, mp, k, q, l, m)
}

/// Spherical harmonic `Y_lm(theta, phi)` with the Condon-Shortley phase.
pub fn spherical_harmonic(l: i64, m: i64, theta: f64, phi: f64) -> Complex64 {
    if l < 0 || m.abs() > l {
        return Complex64::new(0.0, 0.0);
    }
    let ma = m.abs();
    let x = theta.cos();
    let s = theta.sin();
    // P_ma^ma = (-1)^ma (2ma-1)!! s^ma
    let mut pmm = 1.0;
    for i in 0..ma {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    let plm = if l == ma {
        pmm
    } else {
        let mut p0 = pmm;
        let mut p1 = x * (2 * ma + 1) as f64 * pmm;
        for ll in (ma + 2)..=l {
            let p2 = ((2 * ll - 1) as f64 * x * p1 - (ll + ma - 1) as f64 * p0) / (ll - ma) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - ma) / factorial(l + ma)).sqrt();
    let y = Complex64::from_polar(norm * plm, ma as f64 * phi);
    if m >= 0 {
        y
    } else if ma % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}
