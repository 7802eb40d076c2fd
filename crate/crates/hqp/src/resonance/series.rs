//! Bessel-zero series for the quasistatic response of two axial dipoles
//! coupled through a metal-clad hyperbolic cylinder.
//!
//! Each term is one radial mode J0(x_n ρ/R) of the cylinder. The mode's
//! potential decays as exp(−x_n h/R) across the spacer and propagates through
//! the hyperbolic slab with phase φ_n = s·x_n·d/R, s = √(−ε⊥/ε∥). Two equivalent
//! forms are provided:
//!
//! * `Direct`: Σ x² e^{−xh/R} / (cos φ + B sin φ), the transfer coefficient of a
//!   slab between two spacer half-spaces;
//! * `Resummed`: the same ratio expanded as a geometric series over internal
//!   bounces, Σ x² e^{iφ−xh/R} / (1 − r_eff e^{2iφ}), which never overflows.
//!
//! Phases are always evaluated on the branch of s with Im s ≥ 0 so every
//! exponential is bounded; both forms are invariant under s → −s.

use serde::{Deserialize, Serialize};

use super::ResonatorGeometry;
use crate::error::{Error, Result};
use crate::material::{permittivity_at, MaterialModel, UniaxialPermittivity};
use crate::numeric::bessel::j0_zeros;
use crate::units::E2_MEV_NM;
use crate::C64;

/// Smallest gap between consecutive zeros of J0 (between the first two).
const MIN_ZERO_GAP: f64 = 3.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// Emitters on the two end faces of the cylinder (exchange J12 + iΓ12).
    OppositeSides,
    /// A single emitter and its own reflected field (Γ_ii).
    SelfResponse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Dipole along the cylinder / crystal axis.
    Axial,
    InPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesForm {
    Direct,
    Resummed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SeriesControl {
    /// Exactly this many terms.
    Fixed(usize),
    /// Double the number of terms from 64 until the truncation estimate drops
    /// below `rel_tol·|sum|`.
    Adaptive { rel_tol: f64, max_terms: usize },
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl::Adaptive { rel_tol: 1e-9, max_terms: 1 << 17 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    /// Dipole moments, e·nm. For the self response `p2` should equal `p1`.
    pub p1: f64,
    pub p2: f64,
    pub orientation: Orientation,
    pub placement: Placement,
}

impl PairSpec {
    pub fn opposite(p1: f64, p2: f64) -> Self {
        PairSpec { p1, p2, orientation: Orientation::Axial, placement: Placement::OppositeSides }
    }

    pub fn self_response(p: f64) -> Self {
        PairSpec { p1: p, p2: p, orientation: Orientation::Axial, placement: Placement::SelfResponse }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairResponse {
    /// Coherent exchange energy, meV.
    pub j: f64,
    /// Dissipative rate in energy units, meV.
    pub gamma: f64,
    pub n_terms: usize,
    /// Bound (or, where no rigorous bound applies, an estimate) on the
    /// magnitude of the neglected tail, meV.
    pub truncation_estimate: f64,
}

impl PairResponse {
    pub fn value(&self) -> C64 {
        C64::new(self.j, self.gamma)
    }
}

/// Per-frequency constants of the slab.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slab {
    /// The branch with Im ≥ 0.
    s: C64,
    /// ε₀/(ε∥ s) on the Im ≥ 0 branch.
    alpha: C64,
    /// ½(α − 1/α).
    b: C64,
    r_eff: C64,
}

impl Slab {
    pub(crate) fn new(eps: &UniaxialPermittivity, eps_spacer: C64) -> Self {
        let s_principal = eps.slope();
        let s = if s_principal.im < 0.0 { -s_principal } else { s_principal };
        let alpha = eps_spacer / (eps.eps_parallel * s);
        let b = 0.5 * (alpha - 1.0 / alpha);
        let one = C64::new(1.0, 0.0);
        let ratio = (one - C64::i() * alpha) / (one + C64::i() * alpha);
        Slab { s, alpha, b, r_eff: ratio * ratio }
    }
}

/// Amplitude for one round trip through the slab (both faces, including the
/// spacer impedance mismatch). In terms of α_p = ε₀/(ε∥ s_p) with s_p on the
/// principal branch this is ((1 + iα_p)/(1 − iα_p))² whenever Im s_p < 0.
pub fn effective_reflection(eps: &UniaxialPermittivity, eps_spacer: C64) -> C64 {
    Slab::new(eps, eps_spacer).r_eff
}

/// Value of one series term (without the 2π p1 p2 e²/R³ prefactor).
fn term(slab: &Slab, x: f64, geom: &ResonatorGeometry, placement: Placement, form: SeriesForm) -> C64 {
    let decay = (-x * geom.spacer / geom.radius).exp();
    let phi = slab.s * (x * geom.length / geom.radius);
    let one = C64::new(1.0, 0.0);
    let i = C64::i();
    match (placement, form) {
        (Placement::OppositeSides, SeriesForm::Direct) => {
            if phi.im > 300.0 {
                // 1/(cos φ + B sin φ) ~ e^{−Im φ}: below any representable term.
                return C64::new(0.0, 0.0);
            }
            x * x * decay / (phi.cos() + slab.b * phi.sin())
        }
        (Placement::OppositeSides, SeriesForm::Resummed) => {
            let e1 = (i * phi).exp();
            2.0 * x * x * decay * e1 / ((one + i * slab.b) * (one - slab.r_eff * e1 * e1))
        }
        (Placement::SelfResponse, SeriesForm::Direct) => {
            if phi.im > 300.0 {
                // sin φ/(cos φ + B sin φ) → i/(1 + iB) to double precision here.
                return -x * x * decay * 0.5 * (slab.alpha + 1.0 / slab.alpha) * (i / (one + i * slab.b));
            }
            -x * x * decay * 0.5 * (slab.alpha + 1.0 / slab.alpha) * phi.sin() / (phi.cos() + slab.b * phi.sin())
        }
        (Placement::SelfResponse, SeriesForm::Resummed) => {
            let u = (2.0 * i * phi).exp();
            -x * x * decay * 0.5 * (slab.alpha + 1.0 / slab.alpha) * (u - 1.0) / (i * (u + 1.0) + slab.b * (u - 1.0))
        }
    }
}

/// Upper bound on Σ_{n>N} |term_n| when it can be established, from
/// |term| ≤ c·x² e^{−a x} for x ≥ X and zero spacing ≥ 3.1.
fn tail_bound(slab: &Slab, geom: &ResonatorGeometry, placement: Placement, x_last: f64) -> Option<f64> {
    let kappa = slab.s.im * geom.length / geom.radius;
    let h = geom.spacer / geom.radius;
    let one = C64::new(1.0, 0.0);
    let (a, c) = match placement {
        Placement::OppositeSides => {
            if slab.r_eff.norm() * (-2.0 * kappa * x_last).exp() > 0.5 {
                return None;
            }
            // |1 − r e^{2iφ}| ≥ 1/2 for every later term.
            (h + kappa, 4.0 / (one + C64::i() * slab.b).norm())
        }
        Placement::SelfResponse => {
            // |u| ≤ 1/4 ⇒ |u − 1| ≤ 5/4 and |i(u+1) + B(u−1)| ≥ |i − B| − |i + B|/4.
            if (-2.0 * kappa * x_last).exp() > 0.25 {
                return None;
            }
            let den = (C64::i() - slab.b).norm() - 0.25 * (C64::i() + slab.b).norm();
            if den <= 0.0 {
                return None;
            }
            (h, 1.25 * (0.5 * (slab.alpha + 1.0 / slab.alpha)).norm() / den)
        }
    };
    if a <= 0.0 || x_last < 2.0 / a {
        return None;
    }
    let e = (-a * x_last).exp();
    let integral = e * (x_last * x_last / a + 2.0 * x_last / (a * a) + 2.0 / (a * a * a));
    Some(c * integral / MIN_ZERO_GAP)
}

/// Sum the first `n` terms; returns (sum, tail estimate).
fn partial(slab: &Slab, geom: &ResonatorGeometry, placement: Placement, form: SeriesForm, zeros: &[f64]) -> (C64, f64) {
    let mut sum = C64::new(0.0, 0.0);
    let mut recent_max: f64 = 0.0;
    let block = (zeros.len() / 4).max(1);
    for (k, &x) in zeros.iter().enumerate() {
        let t = term(slab, x, geom, placement, form);
        sum += t;
        if k + block >= zeros.len() {
            recent_max = recent_max.max(t.norm());
        }
    }
    let x_last = *zeros.last().expect("at least one term");
    let est = tail_bound(slab, geom, placement, x_last).unwrap_or_else(|| {
        // No rigorous bound (lossless or not yet past the round-trip decay):
        // treat the envelope as geometric with one zero spacing per step.
        let a = geom.spacer / geom.radius + slab.s.im * geom.length / geom.radius;
        let ratio = (-a * std::f64::consts::PI).exp();
        if ratio >= 1.0 {
            f64::INFINITY
        } else {
            2.0 * recent_max / (1.0 - ratio)
        }
    });
    (sum, est)
}

pub(crate) fn validate(geom: &ResonatorGeometry, spec: &PairSpec) -> Result<()> {
    geom.validate()?;
    if spec.orientation != Orientation::Axial {
        return Err(Error::NotImplemented("only axial dipoles (p along the cylinder axis) are supported".into()));
    }
    if spec.placement == Placement::SelfResponse && geom.spacer == 0.0 {
        return Err(Error::Divergence("self response of a point emitter diverges at zero spacer thickness".into()));
    }
    Ok(())
}

/// J + iΓ from the mode series (see module docs), in meV.
pub fn pair_response_with(
    eps: &UniaxialPermittivity,
    geom: &ResonatorGeometry,
    spec: &PairSpec,
    control: SeriesControl,
    form: SeriesForm,
) -> Result<PairResponse> {
    validate(geom, spec)?;
    let slab = Slab::new(eps, geom.eps_spacer);
    let norm = 2.0 * std::f64::consts::PI * spec.p1 * spec.p2 * E2_MEV_NM / geom.radius.powi(3);
    let finish = |sum: C64, est: f64, n: usize| PairResponse {
        j: (norm * sum).re,
        gamma: (norm * sum).im,
        n_terms: n,
        truncation_estimate: norm.abs() * est,
    };
    match control {
        SeriesControl::Fixed(n) => {
            if n == 0 {
                return crate::error::domain("n_terms must be >= 1");
            }
            let zeros = j0_zeros(n);
            let (sum, est) = partial(&slab, geom, spec.placement, form, &zeros);
            Ok(finish(sum, est, n))
        }
        SeriesControl::Adaptive { rel_tol, max_terms } => {
            let mut n = 64.min(max_terms.max(1));
            loop {
                let zeros = j0_zeros(n);
                let (sum, est) = partial(&slab, geom, spec.placement, form, &zeros);
                if est <= rel_tol * sum.norm() || sum.norm() == 0.0 && est == 0.0 {
                    return Ok(finish(sum, est, n));
                }
                if n >= max_terms {
                    return Err(Error::SeriesNotConverged { n_terms: n, estimate: norm.abs() * est });
                }
                n = (2 * n).min(max_terms);
            }
        }
    }
}

pub fn pair_response_at(eps: &UniaxialPermittivity, geom: &ResonatorGeometry, spec: &PairSpec, control: SeriesControl) -> Result<PairResponse> {
    pair_response_with(eps, geom, spec, control, SeriesForm::Resummed)
}

pub fn pair_response(
    model: &MaterialModel,
    geom: &ResonatorGeometry,
    omega: f64,
    spec: &PairSpec,
    control: SeriesControl,
) -> Result<PairResponse> {
    pair_response_at(&permittivity_at(model, omega)?, geom, spec, control)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::loss_scaled;

    fn enriched(omega: f64) -> UniaxialPermittivity {
        permittivity_at(&loss_scaled(&MaterialModel::hbn(), 1.0 / 3.0).unwrap(), omega).unwrap()
    }

    fn geom(d: f64, h: f64) -> ResonatorGeometry {
        ResonatorGeometry::new(100.0, d, h)
    }

    /// Transfer and reflection of one Fourier component through a slab, by
    /// solving the four interface conditions directly.
    fn slab_transfer(eps: &UniaxialPermittivity, eps0: f64, k: f64, d: f64) -> (C64, C64) {
        use nalgebra::{Matrix4, Vector4};
        let q = eps.slope() * k;
        let i = C64::i();
        let ep = eps.eps_parallel;
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let em = (-i * q * d).exp();
        let eq = (i * q * d).exp();
        let a = Matrix4::new(
            one, -one, -one, z,
            C64::from(-eps0 * k), -ep * i * q, ep * i * q, z,
            z, em, eq, -one,
            z, ep * i * q * em, -ep * i * q * eq, C64::from(-eps0 * k),
        );
        let b = Vector4::new(-one, C64::from(-eps0 * k), z, z);
        let x = a.lu().solve(&b).unwrap();
        (x[3], x[0])
    }

    #[test]
    fn terms_match_boundary_value_solution() {
        let eps = enriched(1480.0);
        let g = ResonatorGeometry { eps_spacer: C64::from(11.7), ..geom(200.0, 0.0) };
        let slab = Slab::new(&eps, g.eps_spacer);
        for &x in &[2.404_825_557_695_773, 14.930_917_708_487_79, 40.0] {
            let k = x / g.radius;
            let (t, r) = slab_transfer(&eps, 11.7, k, g.length);
            let direct = term(&slab, x, &g, Placement::OppositeSides, SeriesForm::Direct) / (x * x);
            assert!((direct - t).norm() < 1e-10 * t.norm(), "{direct} vs {t}");
            let refl = term(&slab, x, &g, Placement::SelfResponse, SeriesForm::Resummed) / (x * x);
            assert!((refl + r).norm() < 1e-10 * r.norm().max(1e-3), "{refl} vs {r}");
        }
    }

    #[test]
    fn resummed_equals_direct() {
        let eps = enriched(1500.0);
        for placement in [Placement::OppositeSides, Placement::SelfResponse] {
            let spec = PairSpec { placement, ..PairSpec::opposite(1.0, 1.0) };
            let g = geom(317.0, 5.0);
            let a = pair_response_with(&eps, &g, &spec, SeriesControl::Fixed(800), SeriesForm::Direct).unwrap();
            let b = pair_response_with(&eps, &g, &spec, SeriesControl::Fixed(800), SeriesForm::Resummed).unwrap();
            assert!((a.value() - b.value()).norm() < 1e-10 * b.value().norm(), "{a:?} {b:?}");
        }
    }

    #[test]
    fn lossless_matches_flat_limit() {
        // With no absorption and φ ≡ 0 mod 2π-ish averaging aside, a vanishing
        // slab gives the bare spacer transfer Σ x² e^{−xh/R} ≈ 2R³/(π h³).
        let eps = UniaxialPermittivity::new(1500.0, C64::from(2.0), C64::from(-2.0));
        let g = ResonatorGeometry { eps_spacer: C64::from(2.0), ..ResonatorGeometry::new(100.0, 1e-9, 5.0) };
        let r = pair_response_at(&eps, &g, &PairSpec::opposite(1.0, 1.0), SeriesControl::default()).unwrap();
        let flat = 4.0 * E2_MEV_NM / 125.0;
        assert!((r.j - flat).abs() / flat < 0.01, "{}", r.j);
        assert!(r.gamma.abs() < 1e-9 * r.j.abs());
    }

    #[test]
    fn zero_dipole_gives_zero() {
        let r = pair_response_at(&enriched(1500.0), &geom(300.0, 5.0), &PairSpec::opposite(0.0, 1.0), SeriesControl::default()).unwrap();
        assert_eq!((r.j, r.gamma), (0.0, 0.0));
    }

    #[test]
    fn self_response_needs_spacer() {
        let e = pair_response_at(&enriched(1500.0), &geom(300.0, 0.0), &PairSpec::self_response(1.0), SeriesControl::default());
        assert!(matches!(e, Err(Error::Divergence(_))));
    }

    #[test]
    fn in_plane_not_implemented() {
        let spec = PairSpec { orientation: Orientation::InPlane, ..PairSpec::opposite(1.0, 1.0) };
        let e = pair_response_at(&enriched(1500.0), &geom(300.0, 5.0), &spec, SeriesControl::default());
        assert!(matches!(e, Err(Error::NotImplemented(_))));
    }

    #[test]
    fn self_decay_positive() {
        for w in [1400.0, 1450.0, 1500.0, 1580.0] {
            let r = pair_response_at(&enriched(w), &geom(300.0, 5.0), &PairSpec::self_response(1.0), SeriesControl::default()).unwrap();
            assert!(r.gamma > 0.0, "{w}: {r:?}");
        }
    }

    #[test]
    fn r_eff_passive() {
        for w in [1380.0, 1450.0, 1500.0, 1600.0] {
            assert!(effective_reflection(&enriched(w), C64::from(11.7)).norm() <= 1.0);
        }
    }

    #[test]
    fn principal_branch_expression() {
        let eps = enriched(1500.0);
        let sp = eps.slope();
        assert!(sp.im < 0.0);
        let a = 11.7 / (eps.eps_parallel * sp);
        let one = C64::new(1.0, 0.0);
        let printed = ((one + C64::i() * a) / (one - C64::i() * a)).powi(2);
        assert!((printed - effective_reflection(&eps, C64::from(11.7))).norm() < 1e-14);
    }
}
