//! Closed-form couplings at the super-resonance and the spacer design window.

use serde::{Deserialize, Serialize};

use super::ResonatorGeometry;
use crate::error::{domain, Error, Result};
use crate::material::{permittivity_at, MaterialModel, UniaxialPermittivity};
use crate::units::{cm1_to_mev, E2_MEV_NM};

/// Default factor for "h* ≪ h".
pub const DEFAULT_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCoupling {
    /// 8p²/(h*³ + 2h³) with the loss length h* = d·|Im√(−ε⊥/ε∥)|, meV.
    pub loss_length_form: f64,
    /// 4p²/(h³ + 32(|Im s/Re s|·R)³) at the primary resonance, meV.
    pub loss_ratio_form: f64,
    /// loss_length_form / loss_ratio_form.
    pub ratio: f64,
    pub h_star: f64,
}

/// Both closed-form estimates of the exchange energy at a super-resonance.
pub fn coupling_j12_hsr(model: &MaterialModel, geom: &ResonatorGeometry, omega_r: f64, p: f64, order: u32) -> Result<ClosedFormCoupling> {
    geom.validate()?;
    if order == 0 {
        return domain("order must be >= 1");
    }
    let eps = permittivity_at(model, omega_r)?;
    let s = eps.slope();
    if !eps.is_hyperbolic() || !(s.re > 0.0) {
        return domain(format!("{omega_r} cm^-1 is not inside a hyperbolic band"));
    }
    let target = 4.0 * geom.radius * order as f64 / geom.length;
    if ((s.re - target) / target).abs() > 1e-6 {
        return domain(format!(
            "geometry is off resonance: Re sqrt(-eps_perp/eps_par) = {:.9} but 4Rm/d = {:.9}",
            s.re, target
        ));
    }
    let p2 = p * p * E2_MEV_NM;
    let h = geom.spacer;
    let h_star = geom.length * s.im.abs();
    let loss_length_form = 8.0 * p2 / (h_star.powi(3) + 2.0 * h.powi(3));
    let loss_ratio_form = 4.0 * p2 / (h.powi(3) + 32.0 * ((s.im / s.re).abs() * geom.radius).powi(3));
    Ok(ClosedFormCoupling { loss_length_form, loss_ratio_form, ratio: loss_length_form / loss_ratio_form, h_star })
}

/// Exchange through an elliptic resonator with emitters at the foci:
/// J' = (1 − e²)/(2e)·J.
pub fn elliptic_correction(j: f64, eccentricity: f64) -> Result<f64> {
    if eccentricity <= 0.0 {
        return Err(Error::Divergence("elliptic correction diverges in the circular limit e -> 0".into()));
    }
    if eccentricity >= 1.0 {
        return domain(format!("eccentricity must be < 1, got {eccentricity}"));
    }
    Ok((1.0 - eccentricity * eccentricity) / (2.0 * eccentricity) * j)
}

/// Exchange of two axial dipoles a distance 2R apart along the axis of an
/// unbounded hyperbolic crystal, dominated by the lossy cone focus, meV.
pub fn bulk_axis_j12(eps: &UniaxialPermittivity, p: f64, radius: f64) -> Result<f64> {
    let prod = eps.eps_parallel * eps.eps_perp;
    if (prod - 1.0).norm() < 1e-12 {
        return Err(Error::Pole("eps_par * eps_perp = 1".into()));
    }
    let inv_slope = (-eps.eps_parallel / eps.eps_perp).sqrt();
    if !(inv_slope.im > 0.0) {
        return domain("bulk coupling needs Im sqrt(-eps_par/eps_perp) > 0");
    }
    if !(radius > 0.0) {
        return domain("R must be > 0");
    }
    let shape = ((1.0 + prod) / ((1.0 - prod) * eps.eps_perp)).re;
    Ok(p * p * E2_MEV_NM / (8.0 * radius.powi(3)) * shape / inv_slope.im.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignWindow {
    /// Loss length d·|Im√(−ε⊥/ε∥)|, nm.
    pub h_star: f64,
    /// Largest spacer keeping J ≳ 0.1ħω, nm.
    pub h_c: f64,
    pub ratio: f64,
    pub margin: f64,
    /// margin·h* ≤ h ≤ h_c.
    pub feasible: bool,
}

/// Window of spacer thicknesses where coherent exchange beats absorption and
/// stays fast: h* ≪ h ≲ h_c with h_c = 40·(e²r_eg²/ħω)^{1/3}.
pub fn design_window(model: &MaterialModel, geom: &ResonatorGeometry, omega: f64, r_eg: f64, margin: f64) -> Result<DesignWindow> {
    geom.validate()?;
    if !(r_eg > 0.0) {
        return domain("r_eg must be > 0");
    }
    let eps = permittivity_at(model, omega)?;
    let h_star = geom.length * eps.slope().im.abs();
    let h_c = 40.0 * (E2_MEV_NM * r_eg * r_eg / cm1_to_mev(omega)).cbrt();
    let ratio = if h_star > 0.0 { h_c / h_star } else { f64::INFINITY };
    let feasible = geom.spacer >= margin * h_star && geom.spacer <= h_c;
    Ok(DesignWindow { h_star, h_c, ratio, margin, feasible })
}
