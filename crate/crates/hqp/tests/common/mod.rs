//! Brute-force reference: the Lindblad generator as a dense d²×d² superoperator
//! built from Kronecker products, propagated with a matrix exponential.
#![allow(dead_code)]

use hqp::dynamics::{CouplingMatrix, Operator, QubitSpec};
use hqp::units::HBAR_MEV_PS;
use hqp::C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Single-site operator `op` on qubit k of an n-qubit register (qubit 0 is the
/// least significant factor).
pub fn embed(op: &Operator, k: usize, n: usize) -> Operator {
    let left = Operator::identity(1 << (n - 1 - k), 1 << (n - 1 - k));
    let right = Operator::identity(1 << k, 1 << k);
    left.kronecker(op).kronecker(&right)
}

/// |g⟩⟨e| with |g⟩ = (1,0), |e⟩ = (0,1).
pub fn lowering() -> Operator {
    Operator::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
}

pub fn hamiltonian(qubits: &[QubitSpec], cm: &CouplingMatrix, theta: &[bool]) -> Operator {
    let n = qubits.len();
    let d = 1 << n;
    let sz = Operator::from_row_slice(2, 2, &[c(-1.0), c(0.0), c(0.0), c(1.0)]);
    let mut h = Operator::zeros(d, d);
    for j in 0..n {
        h += embed(&sz, j, n) * c(0.5 * qubits[j].omega_eg);
    }
    let lo = lowering();
    let hi = lo.adjoint();
    for i in 0..n {
        for j in 0..n {
            if i != j && theta[i] && theta[j] {
                h -= embed(&hi, i, n) * embed(&lo, j, n) * c(cm.j[(i, j)]);
            }
        }
    }
    h
}

/// Column-major vectorisation: vec(AXB) = (Bᵀ ⊗ A) vec(X).
pub fn liouvillian(qubits: &[QubitSpec], cm: &CouplingMatrix, theta: &[bool]) -> Operator {
    let n = qubits.len();
    let d = 1 << n;
    let id = Operator::identity(d, d);
    let h = hamiltonian(qubits, cm, theta);
    let mut l = (h.transpose().kronecker(&id) - id.kronecker(&h)) * C64::new(0.0, 1.0 / HBAR_MEV_PS);
    let lo = lowering();
    for i in 0..n {
        for j in 0..n {
            let mut rate = if theta[i] && theta[j] { cm.gamma[(i, j)] } else { 0.0 };
            if i == j && !theta[j] {
                rate += qubits[j].gamma_background;
            }
            if rate == 0.0 {
                continue;
            }
            let li = embed(&lo, i, n);
            let lj_dag = embed(&lo, j, n).adjoint();
            let prod = embed(&lo, i, n).adjoint() * embed(&lo, j, n);
            let term = lj_dag.transpose().kronecker(&li) * c(2.0) - id.kronecker(&prod) - prod.transpose().kronecker(&id);
            l += term * c(rate / HBAR_MEV_PS);
        }
    }
    l
}

pub fn vec_of(m: &Operator) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &nalgebra::DVector<C64>, d: usize) -> Operator {
    Operator::from_column_slice(d, d, v.as_slice())
}

/// ρ(t) = exp(L t) ρ₀ for a piecewise-constant schedule of (duration, θ).
pub fn propagate(rho0: &Operator, qubits: &[QubitSpec], cm: &CouplingMatrix, segments: &[(f64, Vec<bool>)]) -> Operator {
    let d = rho0.nrows();
    let mut v = vec_of(rho0);
    for (t, theta) in segments {
        let l = liouvillian(qubits, cm, theta) * c(*t);
        v = l.exp() * v;
    }
    unvec(&v, d)
}

pub fn max_abs(m: &Operator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
