//! Uniaxial Lorentz-oscillator permittivity, hyperbolic band detection and
//! loss scaling.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{domain, Error, Result};
use crate::numeric::roots::bisect;
use crate::units::cm1_to_mev;
use crate::C64;

pub const DEFAULT_BAND_GRID: usize = 4096;
const EDGE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    /// Transverse optical phonon, cm⁻¹.
    pub omega_to: f64,
    /// Longitudinal optical phonon, cm⁻¹.
    pub omega_lo: f64,
    /// Damping, cm⁻¹.
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzAxis {
    pub eps_inf: f64,
    pub oscillators: Vec<Oscillator>,
}

impl LorentzAxis {
    pub fn new(eps_inf: f64, oscillators: Vec<Oscillator>) -> Result<Self> {
        let axis = LorentzAxis { eps_inf, oscillators };
        axis.validate()?;
        Ok(axis)
    }

    pub fn constant(eps_inf: f64) -> Self {
        LorentzAxis { eps_inf, oscillators: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_inf > 0.0) {
            return domain(format!("eps_inf must be > 0, got {}", self.eps_inf));
        }
        for o in &self.oscillators {
            check_oscillator(o).map_err(Error::Domain)?;
        }
        Ok(())
    }

    /// ε(ω) for complex ω; the physical response is the restriction to ω > 0.
    pub fn eval(&self, omega: C64, loss_scale: f64) -> C64 {
        let w2 = omega * omega;
        let mut sum = C64::new(0.0, 0.0);
        for o in &self.oscillators {
            let num = o.omega_lo * o.omega_lo - o.omega_to * o.omega_to;
            let den = o.omega_to * o.omega_to - w2 - C64::i() * omega * (loss_scale * o.damping);
            sum += num / den;
        }
        self.eps_inf * (1.0 + sum)
    }
}

fn check_oscillator(o: &Oscillator) -> std::result::Result<(), String> {
    if !(o.omega_to > 0.0) {
        return Err(format!("omega_to must be > 0, got {}", o.omega_to));
    }
    if !(o.omega_lo > o.omega_to) {
        return Err(format!("omega_lo ({}) must exceed omega_to ({})", o.omega_lo, o.omega_to));
    }
    if !(o.damping >= 0.0) {
        return Err(format!("damping must be >= 0, got {}", o.damping));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub name: String,
    /// Along the symmetry axis (ε∥).
    pub axis_parallel: LorentzAxis,
    /// In the basal plane (ε⊥).
    pub axis_perp: LorentzAxis,
    /// Multiplies every damping; 1 = natural abundance at room temperature.
    pub loss_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniaxialPermittivity {
    pub omega: f64,
    pub eps_parallel: C64,
    pub eps_perp: C64,
}

impl UniaxialPermittivity {
    pub fn new(omega: f64, eps_parallel: C64, eps_perp: C64) -> Self {
        UniaxialPermittivity { omega, eps_parallel, eps_perp }
    }

    pub fn isotropic(omega: f64, eps: C64) -> Self {
        Self::new(omega, eps, eps)
    }

    pub fn is_hyperbolic(&self) -> bool {
        (self.eps_parallel * self.eps_perp).re < 0.0
    }

    /// √(−ε⊥/ε∥) on the principal branch. Its real part sets the ray slope
    /// inside a resonator and its imaginary part the absorption per bounce.
    pub fn slope(&self) -> C64 {
        (-self.eps_perp / self.eps_parallel).sqrt()
    }

    pub fn photon_energy_mev(&self) -> f64 {
        cm1_to_mev(self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandType {
    /// Re ε∥ < 0, Re ε⊥ > 0.
    TypeI,
    /// Re ε⊥ < 0, Re ε∥ > 0.
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicBand {
    pub omega_low: f64,
    pub omega_high: f64,
    pub band_type: BandType,
}

impl HyperbolicBand {
    pub fn center(&self) -> f64 {
        0.5 * (self.omega_low + self.omega_high)
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega > self.omega_low && omega < self.omega_high
    }
}

impl MaterialModel {
    pub fn new(name: impl Into<String>, axis_parallel: LorentzAxis, axis_perp: LorentzAxis, loss_scale: f64) -> Result<Self> {
        let m = MaterialModel { name: name.into(), axis_parallel, axis_perp, loss_scale };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.axis_parallel.validate()?;
        self.axis_perp.validate()?;
        if !(self.loss_scale > 0.0) {
            return domain(format!("loss_scale must be > 0, got {}", self.loss_scale));
        }
        Ok(())
    }

    /// Non-dispersive isotropic medium with ε = 1 on both axes.
    pub fn vacuum() -> Self {
        MaterialModel {
            name: "vacuum".into(),
            axis_parallel: LorentzAxis::constant(1.0),
            axis_perp: LorentzAxis::constant(1.0),
            loss_scale: 1.0,
        }
    }

    /// Bundled hBN parameters (natural abundance).
    pub fn hbn() -> Self {
        Self::from_toml_str(BUNDLED_HBN, "<bundled hbn.toml>").expect("bundled hBN data file is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::MaterialFile { path: path.display().to_string(), line: 0, msg: e.to_string() })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        file::parse(text, origin)
    }

    pub fn with_loss_scale(&self, loss_scale: f64) -> Result<Self> {
        let mut m = self.clone();
        m.loss_scale = loss_scale;
        m.validate()?;
        Ok(m)
    }
}

pub const BUNDLED_HBN: &str = include_str!("../data/hbn.toml");

pub fn permittivity_at(model: &MaterialModel, omega: f64) -> Result<UniaxialPermittivity> {
    if !(omega > 0.0) {
        return domain(format!("frequency must be > 0 cm^-1, got {omega}"));
    }
    let w = C64::new(omega, 0.0);
    Ok(UniaxialPermittivity {
        omega,
        eps_parallel: model.axis_parallel.eval(w, model.loss_scale),
        eps_perp: model.axis_perp.eval(w, model.loss_scale),
    })
}

fn re_product(model: &MaterialModel, omega: f64) -> f64 {
    let w = C64::new(omega, 0.0);
    (model.axis_parallel.eval(w, model.loss_scale) * model.axis_perp.eval(w, model.loss_scale)).re
}

/// Maximal intervals of `omega_range` where Re[ε∥ε⊥] < 0, found on a uniform
/// grid and with edges refined by bisection.
pub fn hyperbolic_bands(model: &MaterialModel, omega_range: (f64, f64), grid_points: usize) -> Result<Vec<HyperbolicBand>> {
    let (lo, hi) = omega_range;
    if grid_points < 2 {
        return domain(format!("need at least 2 grid points, got {grid_points}"));
    }
    if !(lo > 0.0 && hi > lo) {
        return domain(format!("invalid frequency range [{lo}, {hi}]"));
    }
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| lo + step * i as f64).collect();
    let inside: Vec<bool> = grid.iter().map(|&w| re_product(model, w) < 0.0).collect();

    let refine = |a: f64, b: f64| bisect(|w| re_product(model, w), a, b, EDGE_RTOL * b);
    let mut bands = Vec::new();
    let mut i = 0;
    while i < grid_points {
        if !inside[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid_points && inside[i + 1] {
            i += 1;
        }
        let end = i;
        let omega_low = if start == 0 { lo } else { refine(grid[start - 1], grid[start]) };
        let omega_high = if end == grid_points - 1 { hi } else { refine(grid[end], grid[end + 1]) };
        let mid = permittivity_at(model, 0.5 * (omega_low + omega_high))?;
        let band_type = if mid.eps_perp.re < 0.0 { BandType::TypeII } else { BandType::TypeI };
        bands.push(HyperbolicBand { omega_low, omega_high, band_type });
        i += 1;
    }
    Ok(bands)
}

/// Hyperbolic bands of `model` over its full oscillator span.
pub fn default_bands(model: &MaterialModel) -> Result<Vec<HyperbolicBand>> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for o in model.axis_parallel.oscillators.iter().chain(&model.axis_perp.oscillators) {
        lo = lo.min(o.omega_to);
        hi = hi.max(o.omega_lo);
    }
    if hi == 0.0 {
        return Ok(Vec::new());
    }
    hyperbolic_bands(model, (0.5 * lo, 1.5 * hi), DEFAULT_BAND_GRID)
}

/// The band of the requested type (the highest-frequency one if several).
pub fn find_band(model: &MaterialModel, band_type: BandType) -> Result<HyperbolicBand> {
    default_bands(model)?
        .into_iter()
        .rfind(|b| b.band_type == band_type)
        .ok_or_else(|| Error::Domain(format!("material {} has no {band_type:?} band", model.name)))
}

pub fn loss_scaled(model: &MaterialModel, factor: f64) -> Result<MaterialModel> {
    if !(factor > 0.0) {
        return domain(format!("loss factor must be > 0, got {factor}"));
    }
    model.with_loss_scale(model.loss_scale * factor)
}

mod file {
    //! TOML material files. Every numeric field is span-tracked so invariant
    //! violations can point at a line.

    use super::*;

    pub const SCHEMA: &str = "hqp-material/1";

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawFile {
        schema: Spanned<String>,
        name: String,
        #[allow(dead_code)]
        version: Option<String>,
        loss_scale: Option<Spanned<f64>>,
        parallel: RawAxis,
        perp: RawAxis,
        check: Option<RawCheck>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawAxis {
        eps_inf: Spanned<f64>,
        #[serde(default)]
        oscillators: Vec<Spanned<RawOscillator>>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawOscillator {
        omega_to: f64,
        omega_lo: f64,
        damping: f64,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawCheck {
        band: Vec<Spanned<RawBandCheck>>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawBandCheck {
        low: f64,
        high: f64,
        tolerance: f64,
        #[serde(rename = "type")]
        band_type: BandType,
        scan: [f64; 2],
    }

    fn line_of(text: &str, offset: usize) -> usize {
        text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
    }

    pub fn parse(text: &str, origin: &str) -> Result<MaterialModel> {
        let fail = |offset: usize, msg: String| Error::MaterialFile { path: origin.to_string(), line: line_of(text, offset), msg };
        let raw: RawFile = toml::from_str(text).map_err(|e| {
            let off = e.span().map(|s| s.start).unwrap_or(0);
            fail(off, e.message().to_string())
        })?;
        if raw.schema.get_ref() != SCHEMA {
            return Err(fail(raw.schema.span().start, format!("unsupported schema {:?}, expected {SCHEMA:?}", raw.schema.get_ref())));
        }
        let axis = |a: &RawAxis, label: &str| -> Result<LorentzAxis> {
            let eps_inf = *a.eps_inf.get_ref();
            if !(eps_inf > 0.0) {
                return Err(fail(a.eps_inf.span().start, format!("{label}.eps_inf must be > 0, got {eps_inf}")));
            }
            let mut oscillators = Vec::new();
            for o in &a.oscillators {
                let r = o.get_ref();
                let osc = Oscillator { omega_to: r.omega_to, omega_lo: r.omega_lo, damping: r.damping };
                check_oscillator(&osc).map_err(|m| fail(o.span().start, format!("{label} oscillator: {m}")))?;
                oscillators.push(osc);
            }
            Ok(LorentzAxis { eps_inf, oscillators })
        };
        let loss_scale = raw.loss_scale.as_ref().map(|s| *s.get_ref()).unwrap_or(1.0);
        if !(loss_scale > 0.0) {
            let off = raw.loss_scale.as_ref().map(|s| s.span().start).unwrap_or(0);
            return Err(fail(off, format!("loss_scale must be > 0, got {loss_scale}")));
        }
        let model = MaterialModel {
            name: raw.name,
            axis_parallel: axis(&raw.parallel, "parallel")?,
            axis_perp: axis(&raw.perp, "perp")?,
            loss_scale,
        };
        if let Some(check) = &raw.check {
            for c in &check.band {
                let want = c.get_ref();
                let bands = hyperbolic_bands(&model, (want.scan[0], want.scan[1]), DEFAULT_BAND_GRID)
                    .map_err(|e| fail(c.span().start, e.to_string()))?;
                let ok = bands.iter().any(|b| {
                    b.band_type == want.band_type
                        && (b.omega_low - want.low).abs() <= want.tolerance
                        && (b.omega_high - want.high).abs() <= want.tolerance
                });
                if !ok {
                    let found: Vec<String> =
                        bands.iter().map(|b| format!("{:?} [{:.1}, {:.1}]", b.band_type, b.omega_low, b.omega_high)).collect();
                    return Err(fail(
                        c.span().start,
                        format!(
                            "band check failed: expected {:?} band [{}, {}] ± {}, found {}",
                            want.band_type,
                            want.low,
                            want.high,
                            want.tolerance,
                            if found.is_empty() { "none".into() } else { found.join(", ") }
                        ),
                    ));
                }
            }
        }
        Ok(model)
    }
}
