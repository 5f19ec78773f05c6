//! Time-dependent Schrödinger equation for a single spin in the rf field.
//!
//! In the `|m>` basis along the rf axis the Hamiltonian
//! `H/hbar = gamma (B_par Jz + B_perp Jx) + Omega(t) cos(wt) Jz` is real and
//! tridiagonal, so `H psi` costs O(2J+1).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::field::FieldConfig;
use crate::ode::{Dop853, Stats};
use crate::spin::SpinSystem;
use crate::Result;

/// Tridiagonal drive Hamiltonian in angular-frequency units.
#[derive(Clone, Debug)]
pub struct DrivenSpin {
    m: Vec<f64>,
    /// `gamma B_perp <m+1|Jx|m>`.
    coupling: Vec<f64>,
    /// `gamma B_par`.
    static_z: f64,
    rf_omega: f64,
}

impl DrivenSpin {
    pub fn new(spin: &SpinSystem, field: &FieldConfig) -> Self {
        let ops = spin.operators();
        let gamma = spin.gamma();
        Self {
            m: ops.jz_diag(),
            coupling: ops
                .jx_offdiag()
                .into_iter()
                .map(|c| gamma * field.b_perp * c)
                .collect(),
            static_z: gamma * field.b_par,
            rf_omega: field.rf_omega,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn rf_omega(&self) -> f64 {
        self.rf_omega
    }

    /// `y' = -i H(t) y` for interleaved `(re, im)` columns stacked one after
    /// another; `rabi` is the instantaneous Rabi envelope.
    pub fn derivative(&self, t: f64, rabi: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.dim();
        let z = self.static_z + rabi * (self.rf_omega * t).cos();
        for (col, dcol) in y.chunks_exact(2 * n).zip(dy.chunks_exact_mut(2 * n)) {
            for k in 0..n {
                let d = z * self.m[k];
                let mut hr = d * col[2 * k];
                let mut hi = d * col[2 * k + 1];
                if k > 0 {
                    let c = self.coupling[k - 1];
                    hr += c * col[2 * k - 2];
                    hi += c * col[2 * k - 1];
                }
                if k + 1 < n {
                    let c = self.coupling[k];
                    hr += c * col[2 * k + 2];
                    hi += c * col[2 * k + 3];
                }
                dcol[2 * k] = hi;
                dcol[2 * k + 1] = -hr;
            }
        }
    }
}

/// The same spin in the frame `exp(i phi(t) Jz)` that removes the rf term,
/// `phi(t) = int_0^t Omega(t') cos(wt') dt'`. What remains,
/// `gamma B_par Jz + gamma B_perp e^{i phi Jz} Jx e^{-i phi Jz}`, has Larmor-scale
/// norm, so the integration error no longer scales with `Omega`.
#[derive(Clone, Debug)]
pub struct RotatingFrameSpin {
    m: Vec<f64>,
    coupling: Vec<f64>,
    static_z: f64,
}

impl RotatingFrameSpin {
    pub fn new(spin: &SpinSystem, field: &FieldConfig) -> Self {
        let DrivenSpin {
            m,
            coupling,
            static_z,
            ..
        } = DrivenSpin::new(spin, field);
        Self {
            m,
            coupling,
            static_z,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// `y' = -i H_rot y` at rf phase `phi`; `<m|H_rot|m+1> = c_m e^{-i phi}`.
    pub fn derivative(&self, phi: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.dim();
        let (s, c) = phi.sin_cos();
        for k in 0..n {
            let d = self.static_z * self.m[k];
            let mut hr = d * y[2 * k];
            let mut hi = d * y[2 * k + 1];
            if k > 0 {
                // c_{k-1} e^{+i phi} y_{k-1}
                let g = self.coupling[k - 1];
                let (yr, yi) = (y[2 * k - 2], y[2 * k - 1]);
                hr += g * (c * yr - s * yi);
                hi += g * (c * yi + s * yr);
            }
            if k + 1 < n {
                // c_k e^{-i phi} y_{k+1}
                let g = self.coupling[k];
                let (yr, yi) = (y[2 * k + 2], y[2 * k + 3]);
                hr += g * (c * yr + s * yi);
                hi += g * (c * yi - s * yr);
            }
            dy[2 * k] = hi;
            dy[2 * k + 1] = -hr;
        }
    }

    /// Maps rotating-frame amplitudes back to the lab frame, `e^{-i phi Jz}`.
    pub fn to_lab(&self, phi: f64, amplitudes: &mut [Complex64]) {
        for (a, m) in amplitudes.iter_mut().zip(&self.m) {
            *a *= Complex64::from_polar(1.0, -phi * m);
        }
    }
}

pub fn to_interleaved(v: &[Complex64]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn from_interleaved(y: &[f64]) -> Vec<Complex64> {
    y.chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect()
}

/// Propagates the columns of `u` from `t0` to `t1` under the envelope `rabi(t)`.
pub fn propagate_matrix<R>(
    drive: &DrivenSpin,
    rabi: R,
    u: &DMatrix<Complex64>,
    t0: f64,
    t1: f64,
    opts: &Dop853,
) -> Result<(DMatrix<Complex64>, Stats)>
where
    R: Fn(f64) -> f64,
{
    let n = u.nrows();
    let mut y: Vec<f64> = u.iter().flat_map(|z| [z.re, z.im]).collect();
    let stats = opts.integrate(
        |t, y, dy| drive.derivative(t, rabi(t), y, dy),
        t0,
        t1,
        &mut y,
    )?;
    let out = DMatrix::from_iterator(n, u.ncols(), from_interleaved(&y));
    Ok((out, stats))
}
