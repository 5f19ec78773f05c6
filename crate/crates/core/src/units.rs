//! Conversions between laboratory units and SI. Internal computations are SI.

use std::f64::consts::PI;

use crate::constants::CODATA;

pub const GAUSS: f64 = 1e-4;
pub const MILLIGAUSS: f64 = 1e-7;
pub const MS: f64 = 1e-3;
pub const US: f64 = 1e-6;
pub const MM: f64 = 1e-3;
pub const UM: f64 = 1e-6;

pub fn mg_to_tesla(mg: f64) -> f64 {
    mg * MILLIGAUSS
}

pub fn tesla_to_mg(t: f64) -> f64 {
    t / MILLIGAUSS
}

pub fn gauss_per_cm_to_tesla_per_m(g_cm: f64) -> f64 {
    g_cm * GAUSS / 1e-2
}

/// Cyclic frequency in kHz to angular frequency in rad/s.
pub fn khz_to_angular(khz: f64) -> f64 {
    2.0 * PI * khz * 1e3
}

pub fn angular_to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Energy in joules expressed as a frequency E/h in Hz.
pub fn joule_to_hz(e: f64) -> f64 {
    e / CODATA.h
}

pub fn hz_to_joule(f: f64) -> f64 {
    f * CODATA.h
}

pub fn a0_to_m(r: f64) -> f64 {
    r * CODATA.a0
}

pub fn m_to_a0(r: f64) -> f64 {
    r / CODATA.a0
}

pub fn amu_to_kg(m: f64) -> f64 {
    m * CODATA.amu
}

pub fn ms_to_s(t: f64) -> f64 {
    t * MS
}

pub fn us_to_s(t: f64) -> f64 {
    t * US
}
