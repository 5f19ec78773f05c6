//! Rf-assisted two-body loss: two spin-1/2 atoms in dressed Floquet channels
//! coupled by the magnetic dipole-dipole interaction.
//!
//! Atoms in the lowest dressed state collide in `|S=1, m_S=-1, l=0, m_l=0>` of
//! photon manifold `n`. The dipolar coupling, dressed by the rf, mixes this
//! channel with d-wave channels of manifold `n - 1`, whose centrifugal barrier
//! lifts them back into degeneracy near `R_c`. The splitting of the
//! resulting avoided crossing, `Delta E_g`, sets the loss rate.

pub mod angular;
pub mod channels;
pub mod hamiltonian;
pub mod potentials;

pub use channels::{default_n_max, Channel, ChannelBasis};
pub use hamiltonian::{
    build_channel_hamiltonian, dipolar_energy, dipole_dipole_element, dressed_states,
    ChannelHamiltonian, DressedState, TwoAtomSystem,
};
pub use potentials::{
    adiabatic_potentials, crossing_gap, crossing_radius, two_channel_gap, CrossingProblem,
    CurveLabel, ExitChannel, GapSettings, LossEstimate, PotentialCurve,
};

use crate::constants::CODATA;
use crate::error::positive;
use crate::Result;

/// Order-of-magnitude two-body coefficient for dipolar relaxation of
/// chromium (m^3/s); an input constant, not a computed quantity.
pub const REFERENCE_K2: f64 = 1e-18;

/// Typical condensate density (m^-3).
pub const REFERENCE_DENSITY: f64 = 1e20;

/// Order-of-magnitude loss figures.
#[derive(Clone, Debug, PartialEq)]
pub struct LossScale {
    /// Static field whose Zeeman splitting equals `hbar w` (T).
    pub b_eq: f64,
    /// `1 / (K2 n)` (s).
    pub lifetime: f64,
    /// Kinetic energy released per lost pair, `hbar w` (J).
    pub released_energy: f64,
    pub estimate: LossEstimate,
}

/// Two-body lifetime scale for a gap estimate, taking `K2` as an input.
pub fn loss_scale(
    estimate: &LossEstimate,
    k2: f64,
    density: f64,
    rf_omega: f64,
    g_j: f64,
) -> Result<LossScale> {
    positive("rf_omega", rf_omega)?;
    positive("g_j", g_j)?;
    let estimate = estimate.clone().with_rate(k2, density)?;
    Ok(LossScale {
        b_eq: CODATA.hbar * rf_omega / (g_j * CODATA.mu_b),
        lifetime: estimate.lifetime_scale.expect("set by with_rate"),
        released_energy: CODATA.hbar * rf_omega,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{khz_to_angular, MILLIGAUSS};

    fn dummy() -> LossEstimate {
        LossEstimate {
            gap: 1e-31,
            r_c: 5e-8,
            r_diabatic: 5e-8,
            two_level_gap: 1e-31,
            k2_scale: None,
            lifetime_scale: None,
        }
    }

    #[test]
    fn equivalent_field_at_300_khz() {
        let s = loss_scale(
            &dummy(),
            REFERENCE_K2,
            REFERENCE_DENSITY,
            khz_to_angular(300.0),
            2.0,
        )
        .unwrap();
        assert!(
            (s.b_eq / MILLIGAUSS - 107.0).abs() < 1.0,
            "{}",
            s.b_eq / MILLIGAUSS
        );
        assert!((s.released_energy / CODATA.h / 3e5 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lifetime_is_tens_of_ms_and_two_body() {
        let w = khz_to_angular(500.0);
        let s = loss_scale(&dummy(), REFERENCE_K2, REFERENCE_DENSITY, w, 2.0).unwrap();
        assert!(s.lifetime >= 5e-3 && s.lifetime <= 1e-1, "{}", s.lifetime);
        let d = loss_scale(&dummy(), REFERENCE_K2, 2.0 * REFERENCE_DENSITY, w, 2.0).unwrap();
        assert!((d.lifetime / s.lifetime - 0.5).abs() < 1e-12);
        assert_eq!(s.estimate.k2_scale, Some(REFERENCE_K2));
        assert!(loss_scale(&dummy(), REFERENCE_K2, 0.0, w, 2.0).is_err());
    }
}
