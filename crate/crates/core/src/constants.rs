//! Physical constants (CODATA 2018). Every other module reads them from here.

/// Fixed table of the constants used throughout the crate, SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    /// Bohr magneton (J/T).
    pub mu_b: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Planck constant (J s).
    pub h: f64,
    /// Magnetic constant over 4 pi (T m / A).
    pub mu0_over_4pi: f64,
    /// Bohr radius (m).
    pub a0: f64,
    /// Atomic mass unit (kg).
    pub amu: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
}

/// CODATA 2018 recommended values.
pub const CODATA: PhysicalConstants = PhysicalConstants {
    // CODATA 2018, mu_B = 9.274 010 0783(28) e-24 J/T
    mu_b: 9.274_010_078_3e-24,
    // exact since the 2019 SI redefinition: h / 2 pi
    hbar: 6.626_070_15e-34 / (2.0 * std::f64::consts::PI),
    // exact since 2019
    h: 6.626_070_15e-34,
    // CODATA 2018, mu_0 = 1.256 637 062 12(19) e-6 N/A^2
    mu0_over_4pi: 1.256_637_062_12e-6 / (4.0 * std::f64::consts::PI),
    // CODATA 2018, a_0 = 5.291 772 109 03(80) e-11 m
    a0: 5.291_772_109_03e-11,
    // CODATA 2018, m_u = 1.660 539 066 60(50) e-27 kg
    amu: 1.660_539_066_60e-27,
    // exact since 2019
    k_b: 1.380_649e-23,
};

/// Atomic mass of 52Cr in atomic mass units (AME 2020).
pub const CHROMIUM_52_MASS_AMU: f64 = 51.940_504_7;

/// Larmor angular frequency `gJ mu_B B / hbar` (rad/s) for a field `b` in tesla.
pub fn larmor_angular_frequency(b: f64, g_j: f64) -> crate::Result<f64> {
    crate::error::non_negative("b", b)?;
    crate::error::finite("g_j", g_j)?;
    Ok(g_j * CODATA.mu_b * b / CODATA.hbar)
}

/// Field (T) whose Larmor angular frequency is `omega` for the given Landé factor.
pub fn field_for_larmor(omega: f64, g_j: f64) -> f64 {
    omega * CODATA.hbar / (g_j * CODATA.mu_b)
}
