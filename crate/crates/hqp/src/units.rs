//! Physical constants and unit conversions.
//!
//! Frequencies are carried as wavenumbers (cm⁻¹), lengths in nm, energies in
//! meV, times in ps and dipole moments in e·nm. Electrostatics is Gaussian, so
//! the only coupling constant needed is e²/(1 nm) expressed in meV.

/// Reduced Planck constant, meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;

/// e²/(1 nm) in meV (Gaussian units; equals e²/(4πε₀·1 nm) in SI).
pub const E2_MEV_NM: f64 = 1439.964_547;

/// Photon energy of 1 cm⁻¹, meV (h·c·100 m⁻¹).
pub const MEV_PER_CM1: f64 = 0.123_984_198_4;

/// Thermal energy at room temperature used for the strong-coupling flag, meV.
pub const KT_ROOM_MEV: f64 = 22.0;

/// Vacuum wavenumber 2π/λ (rad/nm) of a wave at `omega_cm1`.
pub fn k0_per_nm(omega_cm1: f64) -> f64 {
    2.0 * std::f64::consts::PI * omega_cm1 * 1e-7
}

pub fn cm1_to_mev(omega_cm1: f64) -> f64 {
    omega_cm1 * MEV_PER_CM1
}

pub fn mev_to_cm1(energy_mev: f64) -> f64 {
    energy_mev / MEV_PER_CM1
}

/// Dephasing energy γ = ħ/(2τ) for a coherence time τ in ps.
pub fn gamma_from_coherence_time(tau_ps: f64) -> f64 {
    HBAR_MEV_PS / (2.0 * tau_ps)
}
