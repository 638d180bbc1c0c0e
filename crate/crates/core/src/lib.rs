//! Decoherence and state distinguishability for a free charge coupled to a
//! thermal electromagnetic field in the dipole approximation.
//!
//! Everything is dimensionless: time is `s = Ω̄t`, temperature enters through
//! `θ_T = ħΩ̄/k_BT`, momenta are in units of `m0c` and velocities in units of `c`.

pub mod decoherence;
pub mod error;
pub mod fidelity;
pub mod geometry;
pub mod kernels;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod sbs;
pub mod special;

pub use decoherence::{DecoherenceResult, Regime};
pub use error::{Error, Result};
pub use fidelity::{FidelityResult, FieldMode, Macrofraction};
pub use geometry::{Polarization, SolidAngleRegion, UnitDirection};
pub use model::{MomentumVector, PhysicalScenario};
