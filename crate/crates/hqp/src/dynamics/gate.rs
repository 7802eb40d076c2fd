//! iSWAP gate: process reconstruction and average gate fidelity.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::units::HBAR_MEV_PS;
use crate::C64;

use super::evolve::{evolve, EvolveOptions, Trajectory};
use super::model::{ControlSchedule, CouplingMatrix, DensityMatrix, Operator, QubitSpec, Segment};

/// A linear map on d×d matrices, stored by its action on the matrix units:
/// `images[i*d + j] = E(|i⟩⟨j|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessMap {
    pub dim: usize,
    pub images: Vec<Operator>,
}

impl ProcessMap {
    pub fn identity(dim: usize) -> Self {
        let images = (0..dim * dim).map(|k| unit(dim, k / dim, k % dim)).collect();
        ProcessMap { dim, images }
    }

    /// Channel X ↦ U X U†.
    pub fn unitary(u: &Operator) -> Self {
        let d = u.nrows();
        let images = (0..d * d).map(|k| u * unit(d, k / d, k % d) * u.adjoint()).collect();
        ProcessMap { dim: d, images }
    }

    pub fn apply(&self, x: &Operator) -> Operator {
        let d = self.dim;
        let mut out = Operator::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                if x[(i, j)].norm() != 0.0 {
                    out += &self.images[i * d + j] * x[(i, j)];
                }
            }
        }
        out
    }

    /// Largest deviation of Tr E(|i⟩⟨j|) from δ_ij.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|k| {
                let want = if k / d == k % d { 1.0 } else { 0.0 };
                (self.images[k].trace() - want).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Choi matrix Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|).
    pub fn choi(&self) -> Operator {
        let d = self.dim;
        let mut c = Operator::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                c.view_mut((i * d, j * d), (d, d)).copy_from(&self.images[i * d + j]);
            }
        }
        c
    }

    /// Flat `row,col,re,im` listing of the Choi matrix.
    pub fn choi_csv(&self) -> String {
        let c = self.choi();
        let mut out = String::from("row,col,re,im\n");
        for r in 0..c.nrows() {
            for col in 0..c.ncols() {
                writeln!(out, "{r},{col},{:.8e},{:.8e}", c[(r, col)].re, c[(r, col)].im).unwrap();
            }
        }
        out
    }
}

fn unit(d: usize, i: usize, j: usize) -> Operator {
    let mut m = Operator::zeros(d, d);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// F_avg = (d·F_e + 1)/(d + 1) with F_e = (1/d²) Σ_ij ⟨i|U†E(|i⟩⟨j|)U|j⟩.
pub fn average_gate_fidelity(process: &ProcessMap, ideal: &Operator) -> Result<f64> {
    let d = process.dim;
    if ideal.nrows() != d || ideal.ncols() != d {
        return Err(Error::Dimension(format!("ideal gate must be {d}x{d}")));
    }
    let tp = process.trace_preservation_error();
    if tp > 1e-6 {
        return Err(Error::NotTracePreserving(tp));
    }
    let ud = ideal.adjoint();
    let mut fe = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            let m = &ud * &process.images[i * d + j] * ideal;
            fe += m[(i, j)];
        }
    }
    let fe = fe.re / (d * d) as f64;
    Ok(((d as f64 * fe + 1.0) / (d as f64 + 1.0)).clamp(0.0, 1.0))
}

/// Two-qubit iSWAP in the |gg⟩, |eg⟩, |ge⟩, |ee⟩ basis: |eg⟩ ↦ i|ge⟩.
pub fn iswap_ideal() -> Operator {
    let i = C64::new(0.0, 1.0);
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    Operator::from_row_slice(4, 4, &[l, o, o, o, o, o, i, o, o, i, o, o, o, o, o, l])
}

/// The 16 pure input states used for tomography: the basis states and, for
/// each pair i < j, (|i⟩+|j⟩)/√2 and (|i⟩+i|j⟩)/√2.
fn tomography_inputs(d: usize) -> Vec<Vec<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..d {
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[i] = C64::new(1.0, 0.0);
        out.push(v);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut plus = vec![C64::new(0.0, 0.0); d];
            plus[i] = C64::new(s, 0.0);
            plus[j] = C64::new(s, 0.0);
            let mut plus_i = plus.clone();
            plus_i[j] = C64::new(0.0, s);
            out.push(plus);
            out.push(plus_i);
        }
    }
    out
}

/// Reconstruct the channel realised by `schedule` from d² physical inputs run
/// in parallel.
pub fn process_map(qubits: &[QubitSpec], couplings: &CouplingMatrix, schedule: &ControlSchedule, opts: &EvolveOptions) -> Result<ProcessMap> {
    let n = qubits.len();
    let d = 1usize << n;
    let opts = EvolveOptions { record_steps: false, ..*opts };
    let finals: Vec<Operator> = tomography_inputs(d)
        .par_iter()
        .map(|psi| {
            let rho0 = DensityMatrix::from_pure(n, psi)?;
            Ok(evolve(&rho0, qubits, couplings, schedule, &opts)?.last().rho.clone())
        })
        .collect::<Result<_>>()?;
    let mut images = vec![Operator::zeros(d, d); d * d];
    for i in 0..d {
        images[i * d + i] = finals[i].clone();
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let (p, pi) = (&finals[k], &finals[k + 1]);
            k += 2;
            let half_diag = (&finals[i] + &finals[j]) * C64::from(0.5);
            let re = p - &half_diag;
            let im = pi - &half_diag;
            // |i⟩⟨j| = (P₊ − D) + i(P₊ᵢ − D), |j⟩⟨i| = (P₊ − D) − i(P₊ᵢ − D).
            images[i * d + j] = &re + &im * C64::new(0.0, 1.0);
            images[j * d + i] = &re - &im * C64::new(0.0, 1.0);
        }
    }
    Ok(ProcessMap { dim: d, images })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub process: ProcessMap,
    pub avg_fidelity: f64,
    /// Duration of the exchange segment πħ/(2J₁₂), ps.
    pub gate_time: f64,
    /// Output for the |eg⟩ input.
    pub final_rho: DensityMatrix,
    pub trajectory: Trajectory,
}

/// Run the exchange segment for πħ/(2J₁₂) and score it against iSWAP (times
/// the free evolution over the same time). With `gamma_on = false` every Γ
/// and background γ is zeroed.
pub fn iswap_gate(qubits: &[QubitSpec], couplings: &CouplingMatrix, gamma_on: bool, opts: &EvolveOptions) -> Result<GateResult> {
    if qubits.len() != 2 || couplings.n() != 2 {
        return Err(Error::Dimension("iSWAP needs exactly two qubits".into()));
    }
    let j = couplings.j[(0, 1)];
    if !(j > 0.0) {
        return domain(format!("iSWAP needs J12 > 0, got {j}"));
    }
    let (qs, cm) = if gamma_on {
        (qubits.to_vec(), couplings.clone())
    } else {
        let qs = qubits.iter().map(|q| QubitSpec { gamma_background: 0.0, ..*q }).collect();
        let cm = CouplingMatrix { gamma: nalgebra::DMatrix::zeros(2, 2), ..couplings.clone() };
        (qs, cm)
    };
    let gate_time = std::f64::consts::PI * HBAR_MEV_PS / (2.0 * j);
    let schedule = ControlSchedule { segments: vec![Segment::idle(gate_time, vec![true, true])] };
    let process = process_map(&qs, &cm, &schedule, opts)?;
    let free = Operator::from_diagonal(&nalgebra::DVector::from_iterator(
        4,
        (0..4usize).map(|k| {
            let e: f64 = (0..2).map(|q| if k >> q & 1 == 1 { 0.5 } else { -0.5 } * qs[q].omega_eg).sum();
            C64::new(0.0, -e * gate_time / HBAR_MEV_PS).exp()
        }),
    ));
    let ideal = free * iswap_ideal();
    let avg_fidelity = average_gate_fidelity(&process, &ideal)?;
    let trajectory = evolve(&DensityMatrix::basis(2, 1), &qs, &cm, &schedule, opts)?;
    Ok(GateResult { process, avg_fidelity, gate_time, final_rho: trajectory.last().clone(), trajectory })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel_fidelity() {
        assert!((average_gate_fidelity(&ProcessMap::identity(4), &Operator::identity(4, 4)).unwrap() - 1.0).abs() < 1e-15);
        let u = iswap_ideal();
        assert!((average_gate_fidelity(&ProcessMap::unitary(&u), &u).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_fidelity() {
        let d = 4;
        let u = iswap_ideal();
        let images = (0..d * d)
            .map(|k| if k / d == k % d { Operator::identity(d, d) * C64::from(0.25) } else { Operator::zeros(d, d) })
            .collect();
        let f = average_gate_fidelity(&ProcessMap { dim: d, images }, &u).unwrap();
        assert!((f - 0.25).abs() < 1e-15);
    }

    #[test]
    fn global_phase_invariance() {
        let u = iswap_ideal();
        let p = ProcessMap::unitary(&u);
        let phased = &u * C64::new(0.0, 0.7).exp();
        assert!((average_gate_fidelity(&p, &phased).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let mut p = ProcessMap::identity(2);
        p.images[0] *= C64::from(0.9);
        assert!(matches!(average_gate_fidelity(&p, &Operator::identity(2, 2)), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn lossless_iswap() {
        let qs = vec![QubitSpec::resonant(1.0); 2];
        let c = CouplingMatrix::pair(5.0, 0.05, 0.05, 0.0, "t").unwrap();
        let g = iswap_gate(&qs, &c, false, &EvolveOptions::default()).unwrap();
        assert!((g.avg_fidelity - 1.0).abs() < 1e-7, "{}", g.avg_fidelity);
        let lossy = iswap_gate(&qs, &c, true, &EvolveOptions::default()).unwrap();
        assert!(lossy.avg_fidelity < 1.0 && lossy.avg_fidelity > 0.9);
    }

    #[test]
    fn gate_time_scale() {
        let qs = vec![QubitSpec::resonant(1.0); 2];
        let c = CouplingMatrix::pair(100.0, 0.0, 0.0, 0.0, "t").unwrap();
        let g = iswap_gate(&qs, &c, true, &EvolveOptions::default()).unwrap();
        assert!((g.gate_time - 0.0103).abs() < 1e-4);
    }

    #[test]
    fn requires_positive_exchange() {
        let qs = vec![QubitSpec::resonant(1.0); 2];
        let c = CouplingMatrix::pair(-1.0, 0.0, 0.0, 0.0, "t").unwrap();
        assert!(iswap_gate(&qs, &c, true, &EvolveOptions::default()).is_err());
    }
}
