//! Classical precession of a magnetic moment, `dmu/dt = gamma mu x B(t)`,
//! with `B(t) = B_rf cos(wt) z + B_perp x + B_par z`.
//!
//! For a moment starting along x in the pure rf field the solution is
//! `mu_x = cos((Omega/w) sin wt)`, `mu_y = -sin((Omega/w) sin wt)`; its
//! one-period average is `J0(Omega/w)`.

use std::f64::consts::PI;

use crate::constants::CODATA;
use crate::error::{finite, positive, Error};
use crate::field::FieldConfig;
use crate::ode::{Dop853, Stepper};
use crate::quadrature;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalMoment {
    /// Magnetic moment (J/T).
    pub mu: [f64; 3],
    pub t: f64,
}

impl ClassicalMoment {
    pub fn norm(&self) -> f64 {
        self.mu.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Integrates the precession equation to `t_final`, returning the moment at
/// `t = 0` and after every accepted step.
pub fn integrate_classical_spin(
    mu0: [f64; 3],
    field: &FieldConfig,
    g_j: f64,
    t_final: f64,
    tol: f64,
) -> Result<Vec<ClassicalMoment>> {
    field.validate()?;
    finite("g_j", g_j)?;
    positive("tol", tol)?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::invalid("t_final", "must be finite and >= 0"));
    }
    let norm0 = mu0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm0 > 0.0 && norm0.is_finite()) {
        return Err(Error::invalid("mu0", "must be a finite non-zero vector"));
    }
    let gamma = g_j * CODATA.mu_b / CODATA.hbar;
    // rabi_omega = gamma B_rf
    let rf_amp = field.rabi_omega / gamma;
    let (w, bx, bz) = (field.rf_omega, field.b_perp, field.b_par);
    // integrate the unit vector, rescale on output
    let y0: Vec<f64> = mu0.iter().map(|x| x / norm0).collect();
    let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
        let b = [bx, 0.0, bz + rf_amp * (w * t).cos()];
        let c = cross([y[0], y[1], y[2]], b);
        for k in 0..3 {
            dy[k] = gamma * c[k];
        }
    };
    let opts = Dop853::new(tol).with_max_step(field.rf_period() / 8.0);
    let mut stepper = Stepper::new(opts, rhs, 0.0, &y0);
    let mut out = vec![ClassicalMoment { mu: mu0, t: 0.0 }];
    stepper.advance_observed(t_final, |t, y| {
        out.push(ClassicalMoment {
            mu: [y[0] * norm0, y[1] * norm0, y[2] * norm0],
            t,
        });
    })?;
    Ok(out)
}

/// `cos((Omega/w) sin(wt))`.
pub fn analytic_transverse(t: f64, rabi_omega: f64, rf_omega: f64) -> Result<f64> {
    finite("t", t)?;
    finite("rabi_omega", rabi_omega)?;
    positive("rf_omega", rf_omega)?;
    Ok((rabi_omega / rf_omega * (rf_omega * t).sin()).cos())
}

/// One-period average of [`analytic_transverse`] by adaptive quadrature.
pub fn time_averaged_moment(rabi_omega: f64, rf_omega: f64) -> Result<f64> {
    finite("rabi_omega", rabi_omega)?;
    positive("rf_omega", rf_omega)?;
    let ratio = rabi_omega / rf_omega;
    // integrate over the phase wt
    let est = quadrature::integrate(|p| (ratio * p.sin()).cos(), 0.0, 2.0 * PI, 1e-13, 1e-14)?;
    Ok(est.value / (2.0 * PI))
}
