//! Simulation toolkit for atomic spins dressed by strong, off-resonant,
//! linearly polarized rf fields.
//!
//! The crate is organized bottom-up:
//!
//! * [`constants`], [`units`], [`spin`], [`bessel`]: physical constants, lab-unit
//!   conversions, spin-J operators and the zero-order Bessel function.
//! * [`ode`], [`quadrature`], [`roots`], [`linalg`]: numerical building blocks.
//! * [`dressed`]: analytic dressed Landé factor and eigenenergies, plus Floquet
//!   quasi-energies from the one-period propagator.
//! * [`classical`]: classical moment precession in the rf field.
//! * [`ramp`]: spin dynamics through rf power ramps.
//! * [`trajectory`]: centre-of-mass drift of dressed atoms in a magnetic gradient.
//! * [`loss`]: two-atom dressed channels with dipole-dipole coupling.
//!
//! Parameter sweeps go through [`sweep`], which uses rayon when the `parallel`
//! feature is enabled (the default) and falls back to sequential iteration
//! otherwise.

pub mod bessel;
pub mod classical;
pub mod constants;
pub mod dressed;
mod error;
pub mod field;
pub mod linalg;
pub mod loss;
pub mod ode;
mod ode_tableau;
pub mod quadrature;
pub mod ramp;
pub mod roots;
pub mod schrodinger;
pub mod spin;
pub mod sweep;
pub mod trajectory;
pub mod units;

pub use error::{Error, Result};
pub use field::FieldConfig;
pub use spin::{SpinOperators, SpinSystem};
