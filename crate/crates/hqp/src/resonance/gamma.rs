//! Absorption-induced decay rate of a single emitter above the resonator.

use serde::{Deserialize, Serialize};

use super::ResonatorGeometry;
use crate::error::{Error, Result};
use crate::material::{permittivity_at, MaterialModel, UniaxialPermittivity};
use crate::numeric::quad::integrate;
use crate::units::E2_MEV_NM;

/// Upper limit of the t-integral: ∫_T^∞ t²e^{−t} dt < 1e-30 beyond it.
const T_MAX: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfDecay {
    pub method: GammaMethod,
    /// Γ_ii in meV. For `ClosedForm`: (p²/h³)·|Re[ε₀(ε⊥−ε∥)s/ε∥²]|/√(1 + h²/(3h*)²).
    pub gamma: f64,
    /// `ClosedForm` only: the variant (p²/h³)·3h*/√(h² + 9h*²)·|Re[(ε⊥/ε∥)²(1 − ε⊥/ε∥)]|.
    pub gamma_alt: Option<f64>,
    /// `Quadrature` only: error estimate, meV.
    pub error: Option<f64>,
}

/// Γ_ii from the exact t-integral or its closed-form interpolation.
pub fn gamma_self(model: &MaterialModel, geom: &ResonatorGeometry, omega: f64, p: f64, method: GammaMethod) -> Result<SelfDecay> {
    gamma_self_at(&permittivity_at(model, omega)?, geom, p, method)
}

pub fn gamma_self_at(eps: &UniaxialPermittivity, geom: &ResonatorGeometry, p: f64, method: GammaMethod) -> Result<SelfDecay> {
    geom.validate()?;
    let h = geom.spacer;
    if h == 0.0 {
        return Err(Error::Divergence("decay rate of a point emitter diverges at zero spacer thickness".into()));
    }
    let (ep, ex) = (eps.eps_parallel, eps.eps_perp);
    let s = eps.slope();
    let p2 = p * p * E2_MEV_NM;
    let strength = (geom.eps_spacer * (ex - ep) * s / (ep * ep)).re;
    match method {
        GammaMethod::Quadrature => {
            let b = s.im * geom.length / h;
            let q = integrate(|t| t * t * (-t).exp() * (b * t).tanh(), 0.0, T_MAX, 1e-10, 1e-300, 20_000);
            if !q.converged {
                return Err(Error::SeriesNotConverged { n_terms: q.evaluations, estimate: q.error });
            }
            let pref = p2 / (2.0 * h.powi(3)) * strength;
            Ok(SelfDecay { method, gamma: pref * q.value, gamma_alt: None, error: Some((pref * q.error).abs()) })
        }
        GammaMethod::ClosedForm => {
            let h_star = geom.length * s.im.abs();
            let gamma = if h_star == 0.0 { 0.0 } else { p2 / h.powi(3) * strength.abs() / (1.0 + (h / (3.0 * h_star)).powi(2)).sqrt() };
            let k = ex / ep;
            let alt = p2 / h.powi(3) * 3.0 * h_star / (h * h + 9.0 * h_star * h_star).sqrt() * (k * k * (1.0 - k)).re.abs();
            Ok(SelfDecay { method, gamma, gamma_alt: Some(alt), error: None })
        }
    }
}
