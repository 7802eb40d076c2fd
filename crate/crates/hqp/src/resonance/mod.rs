//! Super-resonances of metal-clad hyperbolic cylinders and the qubit couplings
//! they mediate.
//!
//! A cylinder of radius R and length d made of a hyperbolic crystal traps
//! conical rays that bounce between the cladding and the end faces. When
//! Re√(−ε⊥/ε∥) = 4Rm/d every ray leaving a point on one face refocuses on the
//! opposite face after m round trips, and all radial modes add in phase.

mod closed;
mod gamma;
mod map;
mod series;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::material::{permittivity_at, BandType, HyperbolicBand, MaterialModel};
use crate::numeric::roots::brent;
use crate::C64;

pub use closed::{
    bulk_axis_j12, coupling_j12_hsr, design_window, elliptic_correction, ClosedFormCoupling, DesignWindow, DEFAULT_MARGIN,
};
pub use gamma::{gamma_self, gamma_self_at, GammaMethod, SelfDecay};
pub use map::{hsr_locus, resonance_map, MapProxy, ResonanceMap};
pub use series::{
    effective_reflection, pair_response, pair_response_at, pair_response_with, Orientation, PairResponse, PairSpec, Placement, SeriesControl, SeriesForm,
};

/// Silicon, the default spacer dielectric.
pub const EPS_SILICON: f64 = 11.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorGeometry {
    /// Cylinder radius, nm.
    pub radius: f64,
    /// Cylinder length, nm.
    pub length: f64,
    /// Emitter–resonator spacer thickness, nm.
    pub spacer: f64,
    /// Permittivity of the spacer layers.
    pub eps_spacer: C64,
    /// Eccentricity of an elliptic cross section (0 = circular).
    pub eccentricity: f64,
}

impl ResonatorGeometry {
    pub fn new(radius: f64, length: f64, spacer: f64) -> Self {
        ResonatorGeometry { radius, length, spacer, eps_spacer: C64::from(EPS_SILICON), eccentricity: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.length > 0.0) {
            return domain(format!("radius and length must be > 0 (R = {}, d = {})", self.radius, self.length));
        }
        if !(self.spacer >= 0.0) {
            return domain(format!("spacer thickness must be >= 0, got {}", self.spacer));
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return domain(format!("eccentricity must be in [0, 1), got {}", self.eccentricity));
        }
        Ok(())
    }
}

fn slope_re(model: &MaterialModel, omega: f64) -> f64 {
    permittivity_at(model, omega).map(|e| e.slope().re).unwrap_or(f64::NAN)
}

/// Monotone branch of Re√(−ε⊥/ε∥) inside a band: from its maximum to the band
/// edge where it is smallest. Returns (ω at maximum, ω at far edge).
fn monotone_branch(model: &MaterialModel, band: &HyperbolicBand) -> (f64, f64) {
    let n = 2048;
    let inset = 1e-9 * band.omega_high;
    let lo = band.omega_low + inset;
    let hi = band.omega_high - inset;
    let mut best = (lo, f64::NEG_INFINITY);
    for i in 0..=n {
        let w = lo + (hi - lo) * i as f64 / n as f64;
        let v = slope_re(model, w);
        if v > best.1 {
            best = (w, v);
        }
    }
    // Golden-section polish of an interior maximum.
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if slope_re(model, c) > slope_re(model, d) {
            b = d;
        } else {
            a = c;
        }
    }
    let peak = 0.5 * (a + b);
    let far = if slope_re(model, lo) < slope_re(model, hi) { lo } else { hi };
    (peak, far)
}

/// Frequency at which Re√(−ε⊥/ε∥) = 4Rm/d inside `band`.
///
/// With absorption Re√(−ε⊥/ε∥) is not monotone right at the strong edge of the
/// band, so the root is bracketed on the monotone branch running from its
/// maximum to the opposite edge.
pub fn hsr_frequency(model: &MaterialModel, radius: f64, length: f64, m: u32, band: &HyperbolicBand) -> Result<f64> {
    if !(radius > 0.0 && length > 0.0) || m == 0 {
        return domain("hsr_frequency needs R > 0, d > 0 and m >= 1");
    }
    let target = 4.0 * radius * m as f64 / length;
    let (peak, far) = monotone_branch(model, band);
    let (vmax, vmin) = (slope_re(model, peak), slope_re(model, far));
    if !(target <= vmax && target >= vmin) {
        return Err(Error::NoResonance { target, min: vmin, max: vmax, omega_low: band.omega_low, omega_high: band.omega_high });
    }
    let (a, b) = if peak < far { (peak, far) } else { (far, peak) };
    let root = brent(|w| slope_re(model, w) - target, a, b, 1e-13 * b, 200)?;
    Ok(root.x)
}

/// Range of 4Rm/d reachable inside `band`, as (min, max).
pub fn attainable_ratio(model: &MaterialModel, band: &HyperbolicBand) -> (f64, f64) {
    let (peak, far) = monotone_branch(model, band);
    (slope_re(model, far), slope_re(model, peak))
}

/// Aspect ratio d/R that puts `omega` on the m-th super-resonance.
pub fn hsr_aspect(model: &MaterialModel, omega: f64, m: u32) -> Result<f64> {
    let eps = permittivity_at(model, omega)?;
    if !eps.is_hyperbolic() || !(eps.slope().re > 0.0) {
        return domain(format!("{omega} cm^-1 is not inside a hyperbolic band"));
    }
    Ok(4.0 * m as f64 / eps.slope().re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcCoupling {
    /// ħg, meV.
    pub g: f64,
    /// Orders m ≡ 0 (mod 4) do not couple to an on-axis emitter.
    pub dark: bool,
}

/// Emitter–resonator coupling ħg = ((1 − cos(πm/2))/2)·√(p²ħω/(3dh²)).
pub fn jc_coupling_g(p: f64, omega: f64, length: f64, spacer: f64, m: u32) -> Result<JcCoupling> {
    if !(length > 0.0 && spacer > 0.0 && omega > 0.0) || m == 0 {
        return domain("jc_coupling_g needs d, h, omega > 0 and m >= 1");
    }
    // (1 − cos(πm/2))/2 tabulated exactly.
    let pref = [0.0, 0.5, 1.0, 0.5][(m % 4) as usize];
    let hw = crate::units::cm1_to_mev(omega);
    let g = pref * (p * p * crate::units::E2_MEV_NM * hw / (3.0 * length * spacer * spacer)).sqrt();
    Ok(JcCoupling { g, dark: m.is_multiple_of(4) })
}

/// The upper (TypeII) band of the bundled hBN model, the usual operating band.
pub fn upper_band(model: &MaterialModel) -> Result<HyperbolicBand> {
    crate::material::find_band(model, BandType::TypeII)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{loss_scaled, LorentzAxis, Oscillator};
    use crate::units::{cm1_to_mev, E2_MEV_NM};

    fn lossless_synthetic() -> MaterialModel {
        MaterialModel::new(
            "synthetic",
            LorentzAxis::constant(3.0),
            LorentzAxis::new(5.0, vec![Oscillator { omega_to: 1000.0, omega_lo: 1200.0, damping: 0.0 }]).unwrap(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn synthetic_unique_root() {
        let m = lossless_synthetic();
        let band = upper_band(&m).unwrap();
        for &(r, d, k) in &[(10.0, 200.0, 1u32), (50.0, 50.0, 1), (100.0, 30.0, 3), (20.0, 400.0, 2)] {
            let w = hsr_frequency(&m, r, d, k, &band).unwrap();
            let s = permittivity_at(&m, w).unwrap().slope().re;
            let t = 4.0 * r * k as f64 / d;
            assert!(((s - t) / t).abs() < 1e-9);
        }
    }

    #[test]
    fn direct_inversion() {
        let m = lossless_synthetic();
        let band = upper_band(&m).unwrap();
        let w = hsr_frequency(&m, 50.0, 50.0, 1, &band).unwrap();
        assert!((permittivity_at(&m, w).unwrap().slope().re - 4.0).abs() < 1e-9);
        assert!((hsr_aspect(&m, w, 1).unwrap() - 1.0).abs() < 1e-9);
        assert!((hsr_aspect(&m, w, 2).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn hbn_resonance_in_band() {
        let m = MaterialModel::hbn();
        let band = upper_band(&m).unwrap();
        let w = hsr_frequency(&m, 100.0, 50.0, 1, &band);
        // 4R/d = 8 is only reached close to the TO edge; report either a root
        // inside the band or a clean no-resonance error with the range.
        match w {
            Ok(w) => assert!(band.contains(w)),
            Err(Error::NoResonance { max, .. }) => assert!(max < 8.0),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn round_trip_hbn() {
        let m = loss_scaled(&MaterialModel::hbn(), 1.0 / 3.0).unwrap();
        let band = upper_band(&m).unwrap();
        for w in [1420.0, 1490.0, 1580.0] {
            let aspect = hsr_aspect(&m, w, 1).unwrap();
            let back = hsr_frequency(&m, 100.0, aspect * 100.0, 1, &band).unwrap();
            assert!((back - w).abs() / w < 1e-8, "{w} -> {back}");
        }
    }

    #[test]
    fn no_resonance_reports_range() {
        let m = MaterialModel::hbn();
        let band = upper_band(&m).unwrap();
        match hsr_frequency(&m, 1000.0, 1.0, 1, &band) {
            Err(Error::NoResonance { min, max, .. }) => assert!(min < max),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn aspect_rejects_non_hyperbolic() {
        assert!(hsr_aspect(&MaterialModel::hbn(), 1700.0, 1).is_err());
    }

    #[test]
    fn jc_examples() {
        let hw = 100.0;
        let omega = hw / cm1_to_mev(1.0);
        let g = jc_coupling_g(1.0, omega, 50.0, 3.0, 1).unwrap();
        assert!((g.g - 0.5 * (E2_MEV_NM * 100.0 / (3.0 * 50.0 * 9.0)).sqrt()).abs() < 1e-9);
        assert!((g.g - 5.16).abs() < 0.01);
        let dark = jc_coupling_g(1.0, omega, 50.0, 3.0, 4).unwrap();
        assert_eq!(dark.g, 0.0);
        assert!(dark.dark);
        let g2 = jc_coupling_g(2.0, omega, 50.0, 6.0, 1).unwrap();
        assert!((g2.g - g.g).abs() < 1e-12);
    }
}
