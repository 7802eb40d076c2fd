//! Register description: qubits, couplings, control schedule and states.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::C64;

pub type Operator = DMatrix<C64>;

/// Dense representation limit.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    /// Transition energy ħω_j in the frame of the drive, meV.
    pub omega_eg: f64,
    /// Transition dipole, e·nm.
    pub p: f64,
    /// Decoherence rate while decoupled from the resonator, meV.
    pub gamma_background: f64,
    /// Default control flag (used when a segment does not override it).
    pub theta: bool,
    /// Drive detuning, meV.
    pub detuning: f64,
}

impl QubitSpec {
    pub fn resonant(p: f64) -> Self {
        QubitSpec { omega_eg: 0.0, p, gamma_background: 0.0, theta: true, detuning: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_background >= 0.0) || !(self.p >= 0.0) {
            return domain("qubit needs gamma_background >= 0 and p >= 0");
        }
        if !self.omega_eg.is_finite() || !self.detuning.is_finite() {
            return domain("qubit energies must be finite");
        }
        Ok(())
    }
}

/// Pairwise exchange and decay energies (meV), symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    pub j: DMatrix<f64>,
    pub gamma: DMatrix<f64>,
    /// Where the numbers came from (closed form, series, user input, …).
    pub provenance: String,
}

const PSD_TOL: f64 = 1e-10;

impl CouplingMatrix {
    /// Validate symmetry and Γ_ii ≥ 0, and make Γ positive semidefinite: tiny
    /// negative eigenvalues (> −1e-10) are clipped, anything worse is rejected.
    pub fn new(j: DMatrix<f64>, gamma: DMatrix<f64>, provenance: impl Into<String>) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n || gamma.nrows() != n || gamma.ncols() != n {
            return Err(Error::Dimension(format!("coupling matrices must be square and {n}x{n}")));
        }
        for a in 0..n {
            if gamma[(a, a)] < 0.0 {
                return domain(format!("Gamma[{a},{a}] = {} < 0", gamma[(a, a)]));
            }
            for b in 0..n {
                if j[(a, b)] != j[(b, a)] || gamma[(a, b)] != gamma[(b, a)] {
                    return domain(format!("coupling matrices must be symmetric (entry {a},{b})"));
                }
            }
        }
        let gamma = if n == 0 { gamma } else { project_psd(gamma)? };
        Ok(CouplingMatrix { j, gamma, provenance: provenance.into() })
    }

    pub fn pair(j12: f64, gamma11: f64, gamma22: f64, gamma12: f64, provenance: impl Into<String>) -> Result<Self> {
        Self::new(
            DMatrix::from_row_slice(2, 2, &[0.0, j12, j12, 0.0]),
            DMatrix::from_row_slice(2, 2, &[gamma11, gamma12, gamma12, gamma22]),
            provenance,
        )
    }

    /// From row lists, as read from a configuration file.
    pub fn from_rows(j: &[Vec<f64>], gamma: &[Vec<f64>], provenance: impl Into<String>) -> Result<Self> {
        let n = j.len();
        if j.iter().chain(gamma).any(|r| r.len() != n) || gamma.len() != n {
            return Err(Error::Dimension(format!("coupling rows must form {n}x{n} matrices")));
        }
        let flat = |m: &[Vec<f64>]| DMatrix::from_row_iterator(n, n, m.iter().flatten().copied());
        Self::new(flat(j), flat(gamma), provenance)
    }

    pub fn zeros(n: usize) -> Self {
        CouplingMatrix { j: DMatrix::zeros(n, n), gamma: DMatrix::zeros(n, n), provenance: "zero".into() }
    }

    pub fn n(&self) -> usize {
        self.j.nrows()
    }
}

fn project_psd(g: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(g.clone());
    let min = eig.eigenvalues.min();
    if min >= 0.0 {
        return Ok(g);
    }
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let v = &eig.eigenvectors;
    let mut out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    // Restore exact symmetry lost to rounding.
    out = 0.5 * (&out + out.transpose());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub theta: Vec<bool>,
    /// Drive amplitude p*·E per qubit, meV.
    pub drive: Vec<C64>,
    /// Drive detunings, meV.
    pub detuning: Vec<f64>,
}

impl Segment {
    /// Undriven segment with the given coupling flags.
    pub fn idle(duration: f64, theta: Vec<bool>) -> Self {
        let n = theta.len();
        Segment { duration, theta, drive: vec![C64::new(0.0, 0.0); n], detuning: vec![0.0; n] }
    }

    pub fn is_driven(&self) -> bool {
        self.drive.iter().any(|d| d.norm() > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub segments: Vec<Segment>,
}

impl ControlSchedule {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.segments.is_empty() {
            return domain("schedule has no segments");
        }
        for (k, s) in self.segments.iter().enumerate() {
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return domain(format!("segment {k}: duration must be > 0"));
            }
            if s.theta.len() != n || s.drive.len() != n || s.detuning.len() != n {
                return Err(Error::Dimension(format!("segment {k}: per-qubit vectors must have length {n}")));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Register state; basis index bit k is qubit k (0 = |g⟩, 1 = |e⟩).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub n_qubits: usize,
    pub rho: Operator,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, rho: Operator) -> Result<Self> {
        let d = 1usize << n_qubits;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Dimension(format!("density matrix must be {d}x{d}")));
        }
        let s = DensityMatrix { n_qubits, rho };
        s.validate()?;
        Ok(s)
    }

    /// Pure basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut rho = Operator::zeros(d, d);
        rho[(index, index)] = C64::new(1.0, 0.0);
        DensityMatrix { n_qubits, rho }
    }

    pub fn from_pure(n_qubits: usize, psi: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return domain("zero state vector");
        }
        let v = v / C64::from(norm);
        Self::new(n_qubits, &v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * C64::from(0.5);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.rho[(k, k)].re).collect()
    }

    /// Expectation of the total excitation number Σ_j |e⟩⟨e|_j.
    pub fn excitation_number(&self) -> f64 {
        (0..self.dim()).map(|k| k.count_ones() as f64 * self.rho[(k, k)].re).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).norm() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Label such as "eg" for a basis index: one letter per qubit, qubit 0 first.
pub fn basis_label(n_qubits: usize, index: usize) -> String {
    (0..n_qubits).map(|k| if index >> k & 1 == 1 { 'e' } else { 'g' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_projection() {
        let tiny = CouplingMatrix::pair(1.0, 1.0, 1.0, 1.0 + 1e-11, "t").unwrap();
        let eig = SymmetricEigen::new(tiny.gamma.clone()).eigenvalues;
        assert!(eig.min() >= -1e-15);
        assert!(matches!(CouplingMatrix::pair(1.0, 1.0, 1.0, 1.1, "t"), Err(Error::NotPsd(_))));
    }

    #[test]
    fn coupling_validation() {
        assert!(CouplingMatrix::pair(1.0, -0.1, 0.0, 0.0, "t").is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(CouplingMatrix::new(asym, DMatrix::zeros(2, 2), "t").is_err());
    }

    #[test]
    fn density_checks() {
        assert!(DensityMatrix::new(1, Operator::zeros(2, 2)).is_err());
        let plus = DensityMatrix::from_pure(1, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!((plus.purity() - 1.0).abs() < 1e-15);
        assert!((plus.excitation_number() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn labels() {
        assert_eq!(basis_label(2, 1), "eg");
        assert_eq!(basis_label(2, 2), "ge");
        assert_eq!(basis_label(3, 6), "gee");
    }

    #[test]
    fn schedule_validation() {
        let ok = ControlSchedule { segments: vec![Segment::idle(1.0, vec![true, true])] };
        assert!(ok.validate(2).is_ok());
        assert!(ok.validate(3).is_err());
        let zero = ControlSchedule { segments: vec![Segment::idle(0.0, vec![true])] };
        assert!(zero.validate(1).is_err());
    }
}
