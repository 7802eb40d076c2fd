//! Frequency × aspect-ratio map of the opposite-sides pair response, a proxy
//! for how strongly a resonator of a given shape traps light at each frequency.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::series::{pair_response_at, PairSpec, SeriesControl};
use super::{hsr_frequency, ResonatorGeometry, EPS_SILICON};
use crate::error::{domain, Error, Result};
use crate::material::{permittivity_at, HyperbolicBand, MaterialModel};
use crate::numeric::bessel::prepare_j0_zeros;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapProxy {
    /// Fixed cylinder radius; d = (d/R)·R per column, nm.
    pub radius: f64,
    pub spacer: f64,
    pub eps_spacer: C64,
    /// Dipole moment of both emitters, e·nm.
    pub p: f64,
    pub control: SeriesControl,
}

impl Default for MapProxy {
    fn default() -> Self {
        MapProxy { radius: 100.0, spacer: 5.0, eps_spacer: C64::from(EPS_SILICON), p: 1.0, control: SeriesControl::default() }
    }
}

/// log₁₀|J + iΓ| (meV) on a grid; rows are frequencies, columns aspect ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceMap {
    pub omega: Vec<f64>,
    pub d_over_r: Vec<f64>,
    pub log10_magnitude: Vec<f64>,
    /// Whether each frequency row lies inside a hyperbolic band.
    pub hyperbolic: Vec<bool>,
    pub proxy: MapProxy,
}

impl ResonanceMap {
    pub fn at(&self, i_omega: usize, i_aspect: usize) -> f64 {
        self.log10_magnitude[i_omega * self.d_over_r.len() + i_aspect]
    }

    /// Row index of the maximum in each aspect-ratio column.
    pub fn column_argmax(&self) -> Vec<usize> {
        (0..self.d_over_r.len())
            .map(|j| {
                (0..self.omega.len())
                    .max_by(|&a, &b| self.at(a, j).total_cmp(&self.at(b, j)))
                    .expect("map has at least one row")
            })
            .collect()
    }
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

pub fn resonance_map(
    model: &MaterialModel,
    d_over_r_range: (f64, f64),
    omega_range: (f64, f64),
    grid: (usize, usize),
    proxy: &MapProxy,
) -> Result<ResonanceMap> {
    let (n_omega, n_aspect) = grid;
    if n_omega == 0 || n_aspect == 0 {
        return domain("resonance map needs at least one cell");
    }
    if !(d_over_r_range.0 > 0.0 && omega_range.0 > 0.0) {
        return domain("aspect ratio and frequency ranges must be positive");
    }
    let omega = axis(omega_range, n_omega);
    let d_over_r = axis(d_over_r_range, n_aspect);
    let eps: Vec<_> = omega.iter().map(|&w| permittivity_at(model, w)).collect::<Result<_>>()?;
    if let SeriesControl::Fixed(n) = proxy.control {
        prepare_j0_zeros(n);
    } else {
        prepare_j0_zeros(1 << 12);
    }
    let cells: Vec<Result<f64>> = (0..n_omega * n_aspect)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n_aspect, k % n_aspect);
            let geom = ResonatorGeometry {
                radius: proxy.radius,
                length: d_over_r[j] * proxy.radius,
                spacer: proxy.spacer,
                eps_spacer: proxy.eps_spacer,
                eccentricity: 0.0,
            };
            let r = pair_response_at(&eps[i], &geom, &PairSpec::opposite(proxy.p, proxy.p), proxy.control)?;
            Ok(r.value().norm().log10())
        })
        .collect();
    let log10_magnitude = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let hyperbolic = eps.iter().map(|e| e.is_hyperbolic()).collect();
    Ok(ResonanceMap { omega, d_over_r, log10_magnitude, hyperbolic, proxy: *proxy })
}

/// Super-resonance frequency of order m for each aspect ratio, or `None` where
/// the ratio is not attainable in `band`.
pub fn hsr_locus(model: &MaterialModel, band: &HyperbolicBand, d_over_r: &[f64], m: u32) -> Result<Vec<Option<f64>>> {
    d_over_r
        .iter()
        .map(|&a| match hsr_frequency(model, 1.0, a, m, band) {
            Ok(w) => Ok(Some(w)),
            Err(Error::NoResonance { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::loss_scaled;
    use crate::resonance::upper_band;

    #[test]
    fn single_cell_map() {
        let m = MaterialModel::hbn();
        let map = resonance_map(&m, (1.0, 1.0), (1500.0, 1500.0), (1, 1), &MapProxy::default()).unwrap();
        assert_eq!(map.log10_magnitude.len(), 1);
        assert!(map.log10_magnitude[0].is_finite());
    }

    #[test]
    fn map_converged_in_terms() {
        let m = loss_scaled(&MaterialModel::hbn(), 1.0 / 3.0).unwrap();
        let coarse = MapProxy { control: SeriesControl::Fixed(2000), ..MapProxy::default() };
        let fine = MapProxy { control: SeriesControl::Fixed(4000), ..MapProxy::default() };
        let a = resonance_map(&m, (0.5, 3.0), (1400.0, 1600.0), (6, 6), &coarse).unwrap();
        let b = resonance_map(&m, (0.5, 3.0), (1400.0, 1600.0), (6, 6), &fine).unwrap();
        for (x, y) in a.log10_magnitude.iter().zip(&b.log10_magnitude) {
            let rel = (10f64.powf(*x) - 10f64.powf(*y)).abs() / 10f64.powf(*y);
            assert!(rel < 1e-6, "{x} {y}");
        }
    }

    #[test]
    fn locus_matches_root_finder() {
        let m = MaterialModel::hbn();
        let band = upper_band(&m).unwrap();
        let loc = hsr_locus(&m, &band, &[3.0, 100.0], 1).unwrap();
        assert_eq!(loc[0], Some(hsr_frequency(&m, 100.0, 300.0, 1, &band).unwrap()));
        assert_eq!(loc[1], None);
    }
}
