//! Quasistatic optics of point dipoles in unbounded uniaxial media: TM
//! dispersion, the emission cone, the dipole near field and the focal pattern
//! inside a cylindrical waveguide.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::material::UniaxialPermittivity;
use crate::units::{k0_per_nm, E2_MEV_NM};
use crate::C64;

/// Default atomic-scale cutoff for focal widths, nm.
pub const DEFAULT_A0_NM: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSource {
    /// Cartesian dipole moment, e·nm (z is the crystal axis).
    pub moment: [f64; 3],
    /// Position, nm.
    pub position: [f64; 3],
}

impl DipoleSource {
    pub fn axial(p: f64) -> Self {
        DipoleSource { moment: [0.0, 0.0, p], position: [0.0; 3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub position: [f64; 3],
    /// Field in meV per e·nm of probe dipole (Gaussian field × e²/nm).
    pub e_field: [C64; 3],
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalStructure {
    /// Spacing between consecutive foci along the axis, nm.
    pub delta_z: f64,
    /// Width of the m-th focus (index 0 ↔ m = 1), nm.
    pub widths: Vec<f64>,
    pub a0: f64,
}

/// Out-of-plane wavenumber of a TM wave with in-plane wavenumber `k_parallel`
/// (rad/nm), on the branch with Im k⊥ ≥ 0 (Re k⊥ ≥ 0 when real).
pub fn tm_kperp(eps: &UniaxialPermittivity, k_parallel: f64, omega: f64) -> Result<C64> {
    if !(omega > 0.0) {
        return domain(format!("frequency must be > 0, got {omega}"));
    }
    if eps.eps_perp.norm() == 0.0 {
        return Err(Error::SingularMedium("eps_perp = 0".into()));
    }
    let k0 = k0_per_nm(omega);
    let (ep, ex) = (eps.eps_parallel, eps.eps_perp);
    let k2 = (ex * ep * (k0 * k0) - ep * (k_parallel * k_parallel)) / ex;
    let mut k = k2.sqrt();
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        k = -k;
    }
    Ok(k)
}

/// Residual of the TM dispersion relation relative to its largest term.
pub fn tm_residual(eps: &UniaxialPermittivity, k_parallel: f64, k_perp: C64, omega: f64) -> f64 {
    let k0 = k0_per_nm(omega);
    let (ep, ex) = (eps.eps_parallel, eps.eps_perp);
    let terms = [ep * (k_parallel * k_parallel), ex * k_perp * k_perp, ex * ep * (k0 * k0)];
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    (terms[0] + terms[1] - terms[2]).norm() / scale
}

/// Elevation of the resonance cone above the basal plane, radians.
pub fn emission_angle(eps: &UniaxialPermittivity) -> Result<f64> {
    let (a, b) = (eps.eps_parallel.re, eps.eps_perp.re);
    if !(a * b < 0.0) {
        return domain(format!("not hyperbolic: Re eps_par = {a}, Re eps_perp = {b}"));
    }
    Ok((-a / b).sqrt().atan())
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

struct Kernel {
    kappa: C64,
    /// ε∥·√(ε⊥/ε∥): reduces to ε in an isotropic medium.
    scale: C64,
    lossless: bool,
}

impl Kernel {
    fn new(eps: &UniaxialPermittivity) -> Result<Self> {
        if eps.eps_parallel.norm() == 0.0 {
            return Err(Error::SingularMedium("eps_parallel = 0".into()));
        }
        let kappa = eps.eps_perp / eps.eps_parallel;
        Ok(Kernel {
            kappa,
            scale: eps.eps_parallel * kappa.sqrt(),
            lossless: eps.eps_parallel.im == 0.0 && eps.eps_perp.im == 0.0,
        })
    }

    fn quadric(&self, d: [f64; 3], at: [f64; 3]) -> Result<C64> {
        let q = C64::new(d[0] * d[0] + d[1] * d[1], 0.0) + self.kappa * (d[2] * d[2]);
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if r2 == 0.0 {
            return domain("field point coincides with the source");
        }
        if self.lossless && q.norm() <= 1e-12 * r2 {
            return Err(Error::ConeSingularity(at));
        }
        Ok(q)
    }
}

/// Potential of a unit point charge (Gaussian units, e/nm).
pub fn charge_potential(eps: &UniaxialPermittivity, source: [f64; 3], r: [f64; 3]) -> Result<C64> {
    let k = Kernel::new(eps)?;
    let q = k.quadric(sub(r, source), r)?;
    Ok(1.0 / (k.scale * q.sqrt()))
}

/// Dipole potential φ with E = −∇φ (Gaussian units, e/nm).
pub fn dipole_potential(eps: &UniaxialPermittivity, src: &DipoleSource, r: [f64; 3]) -> Result<C64> {
    let k = Kernel::new(eps)?;
    let d = sub(r, src.position);
    let q = k.quadric(d, r)?;
    let p = src.moment;
    let w = C64::new(p[0] * d[0] + p[1] * d[1], 0.0) + k.kappa * (p[2] * d[2]);
    Ok(w / (k.scale * q * q.sqrt()))
}

/// Near field of a point dipole, E = ∇(p·∇Q^{-1/2})/(ε∥√(ε⊥/ε∥)) with
/// Q = x² + y² + (ε⊥/ε∥)z², differentiated in closed form.
pub fn dipole_field(eps: &UniaxialPermittivity, src: &DipoleSource, r: [f64; 3]) -> Result<FieldSample> {
    if src.moment.iter().all(|&c| c == 0.0) {
        return domain("dipole moment must be non-zero");
    }
    let k = Kernel::new(eps)?;
    let d = sub(r, src.position);
    let q = k.quadric(d, r)?;
    let p = src.moment;
    let w = C64::new(p[0] * d[0] + p[1] * d[1], 0.0) + k.kappa * (p[2] * d[2]);
    let q_32 = q * q.sqrt();
    let inv_32 = 1.0 / q_32;
    let three_w_inv_52 = 3.0 * w / (q_32 * q);
    let pk = [C64::from(p[0]), C64::from(p[1]), k.kappa * p[2]];
    let dk = [C64::from(d[0]), C64::from(d[1]), k.kappa * d[2]];
    let pref = E2_MEV_NM / k.scale;
    let mut e = [C64::new(0.0, 0.0); 3];
    for i in 0..3 {
        e[i] = pref * (three_w_inv_52 * dk[i] - inv_32 * pk[i]);
    }
    let intensity = e.iter().map(|c| c.norm_sqr()).sum();
    Ok(FieldSample { position: r, e_field: e, intensity })
}

/// Foci spacing and widths inside a metal-clad hyperbolic cylinder of radius R.
pub fn waveguide_foci(eps: &UniaxialPermittivity, radius: f64, a0: f64, m_max: usize) -> Result<FocalStructure> {
    if !(radius > 0.0) {
        return domain(format!("radius must be > 0, got {radius}"));
    }
    let s = eps.slope();
    if !eps.is_hyperbolic() || !(s.re > 0.0) {
        return domain("waveguide foci need a hyperbolic permittivity");
    }
    let delta_z = focus_spacing(eps, radius, 1)?;
    let anisotropy = (eps.eps_perp / eps.eps_parallel).norm().powf(0.75);
    let widths = (1..=m_max).map(|m| a0.max(2.0 * m as f64 * s.im.abs() / anisotropy * radius)).collect();
    Ok(FocalStructure { delta_z, widths, a0 })
}

/// Axial distance 2mR/Re√(−ε⊥/ε∥) between foci of order m.
pub fn focus_spacing(eps: &UniaxialPermittivity, radius: f64, m: usize) -> Result<f64> {
    let s = eps.slope();
    if !(s.re > 0.0) || m == 0 {
        return domain("focus spacing needs Re sqrt(-eps_perp/eps_par) > 0 and m >= 1");
    }
    Ok(2.0 * m as f64 * radius / s.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapGrid {
    pub rho_range: (f64, f64),
    pub z_range: (f64, f64),
    pub n_rho: usize,
    pub n_z: usize,
}

impl MapGrid {
    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![range.0];
        }
        let step = (range.1 - range.0) / (n - 1) as f64;
        (0..n).map(|i| range.0 + step * i as f64).collect()
    }

    pub fn rho(&self) -> Vec<f64> {
        Self::axis(self.rho_range, self.n_rho)
    }

    pub fn z(&self) -> Vec<f64> {
        Self::axis(self.z_range, self.n_z)
    }
}

/// |E|² on a (ρ, z) grid in the y = 0 half plane through the source, row-major
/// with rows indexed by z. Points on a lossless cone are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub grid: MapGrid,
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl FieldMap {
    pub fn at(&self, iz: usize, irho: usize) -> f64 {
        self.intensity[iz * self.rho.len() + irho]
    }

    pub fn masked_cells(&self) -> usize {
        self.intensity.iter().filter(|v| v.is_nan()).count()
    }
}

pub fn field_map(eps: &UniaxialPermittivity, src: &DipoleSource, grid: &MapGrid) -> Result<FieldMap> {
    if grid.n_rho == 0 || grid.n_z == 0 {
        return domain("field map needs at least one cell");
    }
    let rho = grid.rho();
    let z = grid.z();
    for &zz in &z {
        for &rr in &rho {
            if rr == 0.0 && zz == 0.0 {
                return domain("field map grid contains the source point");
            }
        }
    }
    let rows: Vec<Result<Vec<f64>>> = z
        .par_iter()
        .map(|&zz| {
            rho.iter()
                .map(|&rr| {
                    let r = [src.position[0] + rr, src.position[1], src.position[2] + zz];
                    match dipole_field(eps, src, r) {
                        Ok(s) => Ok(s.intensity),
                        Err(Error::ConeSingularity(_)) => Ok(f64::NAN),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        })
        .collect();
    let mut intensity = Vec::with_capacity(rho.len() * z.len());
    for row in rows {
        intensity.extend(row?);
    }
    Ok(FieldMap { grid: *grid, rho, z, intensity })
}
