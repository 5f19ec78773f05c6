//! Static and rf field configuration.
//!
//! Geometry: the rf field `B_rf cos(wt)` points along z. `b_par` is the static
//! component along z, `b_perp` the static component along x. The field
//! gradient acts along the horizontal trap axis.

use std::f64::consts::PI;

use crate::constants::CODATA;
use crate::error::{finite, positive};
use crate::Result;

/// Minimum rf/Larmor ratio for which first-order dressing is trusted.
pub const STRONG_FIELD_RATIO: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldConfig {
    /// Static field along the rf axis (T).
    pub b_par: f64,
    /// Static field perpendicular to the rf axis (T).
    pub b_perp: f64,
    /// Rf angular frequency (rad/s).
    pub rf_omega: f64,
    /// Peak Rabi angular frequency `gJ mu_B B_rf / hbar` (rad/s). A negative
    /// value is the same drive with its phase shifted by half a period.
    pub rabi_omega: f64,
    /// Field gradient along the trap axis (T/m), any sign.
    pub gradient: f64,
}

impl FieldConfig {
    pub fn new(
        b_par: f64,
        b_perp: f64,
        rf_omega: f64,
        rabi_omega: f64,
        gradient: f64,
    ) -> Result<Self> {
        let f = Self {
            b_par,
            b_perp,
            rf_omega,
            rabi_omega,
            gradient,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        finite("b_par", self.b_par)?;
        finite("b_perp", self.b_perp)?;
        positive("rf_omega", self.rf_omega)?;
        finite("rabi_omega", self.rabi_omega)?;
        finite("gradient", self.gradient)?;
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.rabi_omega / self.rf_omega
    }

    pub fn with_rabi(&self, rabi_omega: f64) -> Self {
        Self {
            rabi_omega,
            ..self.clone()
        }
    }

    pub fn with_ratio(&self, ratio: f64) -> Self {
        self.with_rabi(ratio * self.rf_omega)
    }

    pub fn with_b_par(&self, b_par: f64) -> Self {
        Self {
            b_par,
            ..self.clone()
        }
    }

    pub fn with_b_perp(&self, b_perp: f64) -> Self {
        Self {
            b_perp,
            ..self.clone()
        }
    }

    /// Magnitude of the static field (T).
    pub fn b_static(&self) -> f64 {
        self.b_par.hypot(self.b_perp)
    }

    /// Larmor angular frequency of the full static field (rad/s, non-negative).
    pub fn larmor(&self, g_j: f64) -> f64 {
        (g_j * CODATA.mu_b * self.b_static() / CODATA.hbar).abs()
    }

    pub fn rf_period(&self) -> f64 {
        2.0 * PI / self.rf_omega
    }

    pub fn is_strong_field(&self, g_j: f64) -> bool {
        self.rf_omega >= STRONG_FIELD_RATIO * self.larmor(g_j)
    }

    /// Human-readable warnings about the validity regime.
    pub fn regime_warnings(&self, g_j: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !self.is_strong_field(g_j) {
            out.push(format!(
                "strong-field assumption violated: rf/Larmor = {:.3} < {STRONG_FIELD_RATIO}",
                self.rf_omega / self.larmor(g_j)
            ));
        }
        out
    }
}
