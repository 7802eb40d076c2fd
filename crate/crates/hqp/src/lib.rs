//! Qubit–qubit coupling through hyperbolic phonon-polariton resonators.
//!
//! * [`material`]: uniaxial Lorentz permittivity and hyperbolic bands.
//! * [`optics`]: quasistatic dipole fields in unbounded hyperbolic media.
//! * [`resonance`]: super-resonances of metal-clad cylinders, couplings and
//!   decay rates.
//! * [`dynamics`]: Lindblad evolution of small qubit registers and gate
//!   fidelity.

pub mod dynamics;
pub mod error;
pub mod material;
pub mod numeric;
pub mod optics;
pub mod resonance;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
