//! Hamiltonian and Lindblad right-hand side.
//!
//! Single-qubit operators are applied by bit manipulation on basis indices
//! rather than by building Kronecker products: σ_eg^k sets bit k, σ_ge^k
//! clears it.

use crate::error::{Error, Result};
use crate::units::HBAR_MEV_PS;
use crate::C64;

use super::model::{CouplingMatrix, Operator, QubitSpec, Segment, MAX_QUBITS};

fn check_dims(qubits: &[QubitSpec], couplings: &CouplingMatrix, segment: &Segment) -> Result<usize> {
    let n = qubits.len();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Dimension(format!("register size {n} outside 1..={MAX_QUBITS}")));
    }
    if couplings.n() != n {
        return Err(Error::Dimension(format!("coupling matrix is {}x{} for {n} qubits", couplings.n(), couplings.n())));
    }
    if segment.theta.len() != n || segment.drive.len() != n || segment.detuning.len() != n {
        return Err(Error::Dimension(format!("segment vectors must have length {n}")));
    }
    Ok(n)
}

/// H(t) in meV: Σ_j (ħω_j/2)σ_z^j − Σ_{i≠j} θ_iθ_j J_ij σ_eg^i σ_ge^j
/// + Σ_j (Ω_j e^{−iΔ_j t} σ_eg^j + h.c.).
pub fn build_hamiltonian(qubits: &[QubitSpec], couplings: &CouplingMatrix, segment: &Segment, t: f64) -> Result<Operator> {
    let n = check_dims(qubits, couplings, segment)?;
    let d = 1usize << n;
    let mut h = Operator::zeros(d, d);
    for k in 0..d {
        let e: f64 = (0..n).map(|j| if k >> j & 1 == 1 { 0.5 } else { -0.5 } * qubits[j].omega_eg).sum();
        h[(k, k)] = C64::from(e);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || !(segment.theta[i] && segment.theta[j]) {
                continue;
            }
            let jij = couplings.j[(i, j)];
            if jij == 0.0 {
                continue;
            }
            let (bi, bj) = (1usize << i, 1usize << j);
            // σ_eg^i σ_ge^j |c⟩ = |c − bj + bi⟩ when bit j set and bit i clear.
            for c in 0..d {
                if c & bj != 0 && c & bi == 0 {
                    let r = c - bj + bi;
                    h[(r, c)] -= C64::from(jij);
                }
            }
        }
    }
    if segment.is_driven() {
        for j in 0..n {
            let amp = segment.drive[j] * (C64::new(0.0, -segment.detuning[j] * t / HBAR_MEV_PS)).exp();
            if amp.norm() == 0.0 {
                continue;
            }
            let bj = 1usize << j;
            for c in 0..d {
                if c & bj == 0 {
                    h[(c | bj, c)] += amp;
                    h[(c, c | bj)] += amp.conj();
                }
            }
        }
    }
    Ok(h)
}

/// Dissipator coefficients (θ_iθ_jΓ_ij + δ_ij(1−θ_j)γ_j)/ħ in ps⁻¹.
pub fn dissipation_rates(qubits: &[QubitSpec], couplings: &CouplingMatrix, segment: &Segment) -> Vec<(usize, usize, f64)> {
    let n = qubits.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut c = if segment.theta[i] && segment.theta[j] { couplings.gamma[(i, j)] } else { 0.0 };
            if i == j && !segment.theta[j] {
                c += qubits[j].gamma_background;
            }
            if c != 0.0 {
                out.push((i, j, c / HBAR_MEV_PS));
            }
        }
    }
    out
}

/// Right-hand side of the master equation for one schedule segment.
pub struct Generator {
    n: usize,
    h_static: Operator,
    drive: Vec<(usize, C64, f64)>,
    rates: Vec<(usize, usize, f64)>,
}

impl Generator {
    pub fn new(qubits: &[QubitSpec], couplings: &CouplingMatrix, segment: &Segment) -> Result<Self> {
        let n = check_dims(qubits, couplings, segment)?;
        let undriven = Segment { drive: vec![C64::new(0.0, 0.0); n], ..segment.clone() };
        let h_static = build_hamiltonian(qubits, couplings, &undriven, 0.0)?;
        let drive = (0..n)
            .filter(|&j| segment.drive[j].norm() > 0.0)
            .map(|j| (j, segment.drive[j], segment.detuning[j]))
            .collect();
        Ok(Generator { n, h_static, drive, rates: dissipation_rates(qubits, couplings, segment) })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// dρ/dt (ps⁻¹) at time `t` (ps, measured from the start of the run).
    pub fn rhs(&self, t: f64, rho: &Operator) -> Operator {
        let d = self.dim();
        let mut h = self.h_static.clone();
        for &(j, amp, det) in &self.drive {
            let a = amp * (C64::new(0.0, -det * t / HBAR_MEV_PS)).exp();
            let bj = 1usize << j;
            for c in 0..d {
                if c & bj == 0 {
                    h[(c | bj, c)] += a;
                    h[(c, c | bj)] += a.conj();
                }
            }
        }
        // (i/ħ)[ρ, H]
        let mut out = (rho * &h - &h * rho) * C64::new(0.0, 1.0 / HBAR_MEV_PS);
        for &(i, j, c) in &self.rates {
            let (bi, bj) = (1usize << i, 1usize << j);
            for r in 0..d {
                for col in 0..d {
                    let mut v = C64::new(0.0, 0.0);
                    // 2 σ_ge^i ρ σ_eg^j
                    if r & bi == 0 && col & bj == 0 {
                        v += 2.0 * rho[(r | bi, col | bj)];
                    }
                    // σ_eg^i σ_ge^j ρ: row r comes from r − bi + bj.
                    if r & bi != 0 && (r - bi) & bj == 0 {
                        v -= rho[(r - bi + bj, col)];
                    }
                    // ρ σ_eg^i σ_ge^j: column col maps to col − bj + bi.
                    if col & bj != 0 && (col - bj) & bi == 0 {
                        v -= rho[(r, col - bj + bi)];
                    }
                    out[(r, col)] += c * v;
                }
            }
        }
        out
    }
}

/// One-shot evaluation of dρ/dt.
pub fn lindblad_rhs(rho: &Operator, qubits: &[QubitSpec], couplings: &CouplingMatrix, segment: &Segment, t: f64) -> Result<Operator> {
    let d = 1usize << qubits.len();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::Dimension(format!("state must be {d}x{d}")));
    }
    Ok(Generator::new(qubits, couplings, segment)?.rhs(t, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::model::DensityMatrix;

    fn q(omega: f64) -> QubitSpec {
        QubitSpec { omega_eg: omega, ..QubitSpec::resonant(1.0) }
    }

    #[test]
    fn free_hamiltonian_is_diagonal() {
        let qs = [q(2.0), q(3.0)];
        let h = build_hamiltonian(&qs, &CouplingMatrix::zeros(2), &Segment::idle(1.0, vec![false, false]), 0.0).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| h[(k, k)].re).collect();
        assert_eq!(diag, vec![-2.5, -0.5, 0.5, 2.5]);
        assert_eq!(h.iter().filter(|c| c.norm() > 0.0).count(), 4);
    }

    #[test]
    fn exchange_element() {
        let c = CouplingMatrix::pair(7.0, 0.0, 0.0, 0.0, "t").unwrap();
        let h = build_hamiltonian(&[q(0.0), q(0.0)], &c, &Segment::idle(1.0, vec![true, true]), 0.0).unwrap();
        assert_eq!(h[(1, 2)], C64::from(-7.0));
        assert_eq!(h[(2, 1)], C64::from(-7.0));
        let off = build_hamiltonian(&[q(0.0), q(0.0)], &c, &Segment::idle(1.0, vec![true, false]), 0.0).unwrap();
        assert_eq!(off[(1, 2)], C64::from(0.0));
    }

    #[test]
    fn driven_hamiltonian_hermitian() {
        let c = CouplingMatrix::pair(1.0, 0.0, 0.0, 0.0, "t").unwrap();
        let seg = Segment {
            duration: 1.0,
            theta: vec![true, true],
            drive: vec![C64::new(0.3, 0.2), C64::new(-0.1, 0.5)],
            detuning: vec![0.7, -0.2],
        };
        let h = build_hamiltonian(&[q(1.0), q(2.0)], &c, &seg, 0.37).unwrap();
        assert!((&h - h.adjoint()).iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn ground_state_is_dark() {
        let c = CouplingMatrix::pair(1.0, 0.5, 0.5, 0.1, "t").unwrap();
        let rho = DensityMatrix::basis(2, 0).rho;
        let d = lindblad_rhs(&rho, &[q(0.0), q(0.0)], &c, &Segment::idle(1.0, vec![true, true]), 0.0).unwrap();
        assert!(d.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn single_qubit_decay_rate() {
        let g = 0.3;
        let c = CouplingMatrix::new(nalgebra::DMatrix::zeros(1, 1), nalgebra::DMatrix::from_element(1, 1, g), "t").unwrap();
        let rho = DensityMatrix::basis(1, 1).rho;
        let d = lindblad_rhs(&rho, &[q(1.0)], &c, &Segment::idle(1.0, vec![true]), 0.0).unwrap();
        assert!((d[(1, 1)].re + 2.0 * g / HBAR_MEV_PS).abs() < 1e-12);
        assert!((d[(0, 0)].re - 2.0 * g / HBAR_MEV_PS).abs() < 1e-12);
    }

    #[test]
    fn background_rate_only_when_decoupled() {
        let mut qb = q(0.0);
        qb.gamma_background = 0.2;
        let c = CouplingMatrix::zeros(1);
        let rho = DensityMatrix::basis(1, 1).rho;
        let on = lindblad_rhs(&rho, &[qb], &c, &Segment::idle(1.0, vec![true]), 0.0).unwrap();
        let off = lindblad_rhs(&rho, &[qb], &c, &Segment::idle(1.0, vec![false]), 0.0).unwrap();
        assert_eq!(on[(1, 1)], C64::from(0.0));
        assert!((off[(1, 1)].re + 0.4 / HBAR_MEV_PS).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let c = CouplingMatrix::zeros(3);
        assert!(build_hamiltonian(&[q(0.0), q(0.0)], &c, &Segment::idle(1.0, vec![true, true]), 0.0).is_err());
    }
}
