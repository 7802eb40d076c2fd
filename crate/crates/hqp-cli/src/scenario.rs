//! Scenario files: one TOML document describing material, geometry, register
//! and sweep axes. Every table and key is optional; missing values fall back
//! to the defaults below.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hqp::dynamics::QubitSpec;
use hqp::material::{loss_scaled, permittivity_at, MaterialModel, BUNDLED_HBN};
use hqp::resonance::{hsr_aspect, hsr_frequency, upper_band, ResonatorGeometry, DEFAULT_MARGIN, EPS_SILICON};
use hqp::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub material: MaterialRef,
    pub geometry: GeometrySpec,
    pub operating: Operating,
    pub qubits: Vec<QubitSpec>,
    pub couplings: CouplingSpec,
    /// Named ranges; which names a command reads is listed in the README.
    pub sweep: BTreeMap<String, Axis>,
    pub fieldmap: FieldMapSpec,
    pub gate: GateSpec,
    pub evolve: EvolveSpec,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialRef {
    /// Material file; relative paths resolve against the scenario file.
    pub path: Option<PathBuf>,
    /// Multiplies the file's own loss scale.
    pub loss_scale: f64,
}

impl Default for MaterialRef {
    fn default() -> Self {
        MaterialRef { path: None, loss_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySpec {
    pub radius: Option<f64>,
    pub length: Option<f64>,
    pub spacer: f64,
    pub eps_spacer: f64,
    pub eccentricity: f64,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec { radius: None, length: None, spacer: 5.0, eps_spacer: EPS_SILICON, eccentricity: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Operating {
    /// Frequency, cm⁻¹; defaults to the centre of the upper band.
    pub omega: Option<f64>,
    /// Super-resonance order.
    pub order: u32,
    /// Orders emitted by `coupling-sweep`.
    pub orders: Vec<u32>,
    /// Dipole moment for single-emitter commands, e·nm.
    pub p: f64,
    /// Transition radius for the design window, nm.
    pub r_eg: f64,
    pub margin: f64,
}

impl Default for Operating {
    fn default() -> Self {
        Operating { omega: None, order: 1, orders: vec![1, 2], p: 1.0, r_eg: 2.0, margin: DEFAULT_MARGIN }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    /// Exchange from the loss-length closed form, Γ_ii from the closed-form
    /// decay rate, Γ₁₂ = 0.
    ClosedForm,
    /// Exchange and all decay rates from the mode series.
    Series,
    /// Matrices given in the file.
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSpec {
    pub mode: CouplingMode,
    pub j: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
}

impl Default for CouplingSpec {
    fn default() -> Self {
        CouplingSpec { mode: CouplingMode::ClosedForm, j: Vec::new(), gamma: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Axis { start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        (0..self.points).map(|i| self.start + (self.stop - self.start) * i as f64 / (self.points - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldMapSpec {
    /// Dipole moment (x, y, z), e·nm.
    pub moment: [f64; 3],
    pub m_max: usize,
    pub a0: f64,
}

impl Default for FieldMapSpec {
    fn default() -> Self {
        FieldMapSpec { moment: [0.0, 0.0, 1.0], m_max: 5, a0: hqp::optics::DEFAULT_A0_NM }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateSpec {
    /// Exit status is 0 only if F_avg ≥ threshold.
    pub threshold: f64,
    pub gamma_on: bool,
    pub tol: f64,
}

impl Default for GateSpec {
    fn default() -> Self {
        GateSpec { threshold: 0.97, gamma_on: true, tol: 1e-11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub duration: f64,
    pub theta: Vec<bool>,
    /// Per-qubit drive amplitude as [re, im], meV.
    #[serde(default)]
    pub drive: Vec<[f64; 2]>,
    #[serde(default)]
    pub detuning: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSpec {
    /// Initial basis state, one letter per qubit (qubit 0 first), e.g. "eg".
    pub initial: String,
    pub tol: f64,
    pub segments: Vec<SegmentSpec>,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        EvolveSpec { initial: "eg".into(), tol: 1e-10, segments: Vec::new() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub prefix: Option<String>,
}

/// A parsed scenario plus everything needed to reproduce it.
pub struct Loaded {
    pub scenario: Scenario,
    pub model: MaterialModel,
    /// Raw text of the scenario and material files, for the input digest.
    pub sources: Vec<(String, String)>,
}

impl Scenario {
    pub fn load(path: Option<&Path>) -> Result<Loaded, CliError> {
        let (scenario, base, mut sources) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                let s: Scenario = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                (s, p.parent().map(Path::to_path_buf), vec![(p.display().to_string(), text)])
            }
            None => (Scenario::default(), None, Vec::new()),
        };
        let model = match &scenario.material.path {
            Some(m) => {
                let full = match &base {
                    Some(b) if m.is_relative() => b.join(m),
                    _ => m.clone(),
                };
                let text = std::fs::read_to_string(&full).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
                let model = MaterialModel::from_toml_str(&text, &full.display().to_string())?;
                sources.push((full.display().to_string(), text));
                model
            }
            None => {
                sources.push(("<bundled hBN>".into(), BUNDLED_HBN.into()));
                MaterialModel::hbn()
            }
        };
        if !(scenario.material.loss_scale > 0.0) {
            return Err(CliError::Config(format!("material.loss_scale must be > 0, got {}", scenario.material.loss_scale)));
        }
        let model = if scenario.material.loss_scale == 1.0 { model } else { loss_scaled(&model, scenario.material.loss_scale)? };
        scenario.validate()?;
        Ok(Loaded { scenario, model, sources })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, axis) in &self.sweep {
            if axis.points == 0 {
                return Err(CliError::Config(format!("sweep.{name}: points must be >= 1")));
            }
            if !axis.start.is_finite() || !axis.stop.is_finite() {
                return Err(CliError::Config(format!("sweep.{name}: bounds must be finite")));
            }
        }
        if self.operating.order == 0 || self.operating.orders.contains(&0) {
            return Err(CliError::Config("super-resonance orders must be >= 1".into()));
        }
        for (k, q) in self.qubits.iter().enumerate() {
            q.validate().map_err(|e| CliError::Config(format!("qubits[{k}]: {e}")))?;
        }
        let g = &self.geometry;
        for (name, v) in [("radius", g.radius), ("length", g.length)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(CliError::Config(format!("geometry.{name} must be > 0, got {v}")));
                }
            }
        }
        if !(g.spacer >= 0.0) {
            return Err(CliError::Config(format!("geometry.spacer must be >= 0, got {}", g.spacer)));
        }
        Ok(())
    }

    /// Axis `name`, or `default` if the scenario does not define it.
    pub fn axis(&self, name: &str, default: Axis) -> Axis {
        self.sweep.get(name).copied().unwrap_or(default)
    }

    pub fn qubits_or_default(&self) -> Vec<QubitSpec> {
        if self.qubits.is_empty() {
            vec![QubitSpec::resonant(self.operating.p); 2]
        } else {
            self.qubits.clone()
        }
    }
}

/// Operating point: frequency plus a geometry on its super-resonance.
#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub omega: f64,
    pub geometry: ResonatorGeometry,
}

/// Fill in whichever of (ω, R, d) is missing from the other two using the
/// super-resonance condition; ω defaults to the upper-band centre.
pub fn resolve(s: &Scenario, model: &MaterialModel) -> Result<Resolved, CliError> {
    let g = &s.geometry;
    let m = s.operating.order;
    let band = upper_band(model)?;
    let (omega, radius, length) = match (s.operating.omega, g.radius, g.length) {
        (Some(w), Some(r), Some(d)) => (w, r, d),
        (None, Some(r), Some(d)) => (hsr_frequency(model, r, d, m, &band)?, r, d),
        (w, r, d) => {
            let w = w.unwrap_or_else(|| band.center());
            let aspect = hsr_aspect(model, w, m)?;
            match (r, d) {
                (Some(r), None) => (w, r, aspect * r),
                (None, Some(d)) => (w, d / aspect, d),
                _ => (w, 100.0, aspect * 100.0),
            }
        }
    };
    permittivity_at(model, omega)?;
    let geometry = ResonatorGeometry {
        radius,
        length,
        spacer: g.spacer,
        eps_spacer: C64::from(g.eps_spacer),
        eccentricity: g.eccentricity,
    };
    geometry.validate()?;
    Ok(Resolved { omega, geometry })
}
