//! Spin-J systems and their angular-momentum matrices in the `|m>` basis.
//!
//! Basis index `k` corresponds to `m = -J + k`, so index 0 is the lowest
//! projection.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::constants::{CHROMIUM_52_MASS_AMU, CODATA};
use crate::error::{finite, positive, Error};
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    two_j: u32,
    g_j: f64,
    mass: f64,
}

impl SpinSystem {
    /// `j` must be a positive half-integer; `mass` in kg.
    pub fn new(j: f64, g_j: f64, mass: f64) -> Result<Self> {
        finite("j", j)?;
        let two_j = (2.0 * j).round();
        if (2.0 * j - two_j).abs() > 1e-12 || two_j < 1.0 {
            return Err(Error::invalid(
                "j",
                format!("must be a positive half-integer, got {j}"),
            ));
        }
        finite("g_j", g_j)?;
        if g_j == 0.0 {
            return Err(Error::invalid("g_j", "must be non-zero"));
        }
        positive("mass", mass)?;
        Ok(Self {
            two_j: two_j as u32,
            g_j,
            mass,
        })
    }

    /// 52Cr ground state: J = 3, gJ = 2.00.
    pub fn chromium52() -> Self {
        Self::new(3.0, 2.0, CHROMIUM_52_MASS_AMU * CODATA.amu).expect("valid defaults")
    }

    pub fn with_g_j(mut self, g_j: f64) -> Result<Self> {
        finite("g_j", g_j)?;
        if g_j == 0.0 {
            return Err(Error::invalid("g_j", "must be non-zero"));
        }
        self.g_j = g_j;
        Ok(self)
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn g_j(&self) -> f64 {
        self.g_j
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Hilbert space dimension 2J+1.
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Projections `-J, -J+1, ..., J` in basis order.
    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.m_of(k)).collect()
    }

    pub fn m_of(&self, index: usize) -> f64 {
        index as f64 - self.j()
    }

    /// Basis index of projection `m`, if it exists.
    pub fn index_of(&self, m: f64) -> Option<usize> {
        let k = m + self.j();
        let r = k.round();
        ((k - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.dim()).then_some(r as usize)
    }

    /// Gyromagnetic ratio `gJ mu_B / hbar` (rad s^-1 T^-1).
    pub fn gamma(&self) -> f64 {
        self.g_j * CODATA.mu_b / CODATA.hbar
    }

    pub fn operators(&self) -> SpinOperators {
        SpinOperators::for_two_j(self.two_j)
    }
}

/// Cartesian spin components in units of hbar.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub jx: DMatrix<Complex64>,
    pub jy: DMatrix<Complex64>,
    pub jz: DMatrix<Complex64>,
}

impl SpinOperators {
    fn for_two_j(two_j: u32) -> Self {
        let n = two_j as usize + 1;
        let j = two_j as f64 / 2.0;
        let mut jx = DMatrix::zeros(n, n);
        let mut jy = DMatrix::zeros(n, n);
        let mut jz = DMatrix::zeros(n, n);
        for k in 0..n {
            let m = k as f64 - j;
            jz[(k, k)] = Complex64::new(m, 0.0);
            if k + 1 < n {
                // <m+1| J+ |m>
                let c = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
                jx[(k + 1, k)] = Complex64::new(0.5 * c, 0.0);
                jx[(k, k + 1)] = Complex64::new(0.5 * c, 0.0);
                jy[(k + 1, k)] = Complex64::new(0.0, -0.5 * c);
                jy[(k, k + 1)] = Complex64::new(0.0, 0.5 * c);
            }
        }
        Self { jx, jy, jz }
    }

    pub fn dim(&self) -> usize {
        self.jz.nrows()
    }

    /// Real off-diagonal elements `<m+1|Jx|m>` (Jx is real and tridiagonal).
    pub fn jx_offdiag(&self) -> Vec<f64> {
        (0..self.dim().saturating_sub(1))
            .map(|k| self.jx[(k + 1, k)].re)
            .collect()
    }

    pub fn jz_diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.jz[(k, k)].re).collect()
    }
}

/// Builds the spin operators for spin `j`.
pub fn build_spin_operators(j: f64) -> Result<SpinOperators> {
    finite("j", j)?;
    let two_j = (2.0 * j).round();
    if (2.0 * j - two_j).abs() > 1e-12 || two_j < 1.0 {
        return Err(Error::invalid(
            "j",
            format!("must be a positive half-integer, got {j}"),
        ));
    }
    Ok(SpinOperators::for_two_j(two_j as u32))
}
