//! Master-equation propagation through a control schedule.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::generator::Generator;
use super::integrate::{integrate, StepControl};
use super::model::{basis_label, ControlSchedule, CouplingMatrix, DensityMatrix, QubitSpec};

/// Trace drift beyond this aborts the run.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Max-norm local error per step.
    pub tol: f64,
    pub max_steps: usize,
    /// Keep every accepted step (otherwise only segment boundaries).
    pub record_steps: bool,
    /// Uniform step (ps) instead of adaptive control; used for order checks.
    pub fixed_step: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { tol: 1e-10, max_steps: 10_000_000, record_steps: true, fixed_step: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Accepted integrator steps.
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn max_trace_error(&self) -> f64 {
        self.states.iter().map(|s| (s.trace() - 1.0).norm()).fold(0.0, f64::max)
    }

    /// `t_ps,p_<label>...,purity,trace_error` with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.n_qubits);
        let mut out = String::from("t_ps");
        for k in 0..1usize << n {
            write!(out, ",p_{}", basis_label(n, k)).unwrap();
        }
        out.push_str(",purity,trace_error\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(out, "{t:.8e}").unwrap();
            for p in s.populations() {
                write!(out, ",{p:.8e}").unwrap();
            }
            writeln!(out, ",{:.8e},{:.8e}", s.purity(), (s.trace() - 1.0).norm()).unwrap();
        }
        out
    }
}

/// Integrate ρ through every segment of `schedule`. Segment boundaries are
/// hit exactly; the trace is never renormalised and positivity is checked at
/// each boundary.
pub fn evolve(rho0: &DensityMatrix, qubits: &[QubitSpec], couplings: &CouplingMatrix, schedule: &ControlSchedule, opts: &EvolveOptions) -> Result<Trajectory> {
    rho0.validate()?;
    let n = qubits.len();
    if rho0.n_qubits != n {
        return Err(Error::Dimension(format!("state has {} qubits, register has {n}", rho0.n_qubits)));
    }
    for q in qubits {
        q.validate()?;
    }
    schedule.validate(n)?;
    let control = StepControl { tol: opts.tol, max_steps: opts.max_steps, fixed_step: opts.fixed_step };
    let mut traj = Trajectory { times: vec![0.0], states: vec![rho0.clone()], steps: 0 };
    let mut rho = rho0.rho.clone();
    let mut t0 = 0.0;
    let mut h_next = None;
    for seg in &schedule.segments {
        let gen = Generator::new(qubits, couplings, seg)?;
        let t1 = t0 + seg.duration;
        let (times, states, steps) = (&mut traj.times, &mut traj.states, &mut traj.steps);
        let (y, h) = integrate(|t, y| gen.rhs(t, y), t0, t1, rho, &control, h_next, |t, y, h| {
            *steps += 1;
            let drift = (y.trace() - 1.0).norm();
            if drift > TRACE_DRIFT_LIMIT {
                return Err(Error::TraceDrift { t_ps: t, drift, step_ps: h });
            }
            if opts.record_steps && t < t1 {
                times.push(t);
                states.push(DensityMatrix { n_qubits: n, rho: y.clone() });
            }
            Ok(())
        })?;
        let state = DensityMatrix { n_qubits: n, rho: y };
        let min = state.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e} at t = {t1} ps")));
        }
        rho = state.rho.clone();
        traj.times.push(t1);
        traj.states.push(state);
        h_next = Some(h);
        t0 = t1;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::model::Segment;
    use crate::units::HBAR_MEV_PS;
    use crate::C64;

    fn pair(omega: [f64; 2]) -> Vec<QubitSpec> {
        omega.iter().map(|&w| QubitSpec { omega_eg: w, ..QubitSpec::resonant(1.0) }).collect()
    }

    #[test]
    fn full_exchange() {
        let j = 3.0;
        let c = CouplingMatrix::pair(j, 0.0, 0.0, 0.0, "t").unwrap();
        let t = std::f64::consts::PI * HBAR_MEV_PS / (2.0 * j);
        let sched = ControlSchedule { segments: vec![Segment::idle(t, vec![true, true])] };
        let tr = evolve(&DensityMatrix::basis(2, 1), &pair([0.0, 0.0]), &c, &sched, &EvolveOptions::default()).unwrap();
        assert!((tr.last().populations()[2] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn free_evolution_rotates_coherence() {
        let qs = pair([2.0, 0.0]);
        let plus = DensityMatrix::from_pure(2, &[C64::from(1.0), C64::from(1.0), C64::from(0.0), C64::from(0.0)]).unwrap();
        let t = 0.7;
        let sched = ControlSchedule { segments: vec![Segment::idle(t, vec![false, false])] };
        let tr = evolve(&plus, &qs, &CouplingMatrix::zeros(2), &sched, &EvolveOptions::default()).unwrap();
        let rho = &tr.last().rho;
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-10);
        // ρ_01 ∝ e^{i(E_1 − E_0)t/ħ}... with E_1 − E_0 = ħω_0.
        let expect = C64::new(0.0, 2.0 * t / HBAR_MEV_PS).exp() * 0.5;
        assert!((rho[(0, 1)] - expect).norm() < 1e-9, "{} vs {expect}", rho[(0, 1)]);
    }

    #[test]
    fn segments_are_step_boundaries() {
        let c = CouplingMatrix::pair(1.0, 0.01, 0.01, 0.0, "t").unwrap();
        let sched = ControlSchedule { segments: vec![Segment::idle(0.3, vec![true, true]), Segment::idle(0.2, vec![false, false])] };
        let opts = EvolveOptions { record_steps: false, ..EvolveOptions::default() };
        let tr = evolve(&DensityMatrix::basis(2, 1), &pair([0.0, 0.0]), &c, &sched, &opts).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.3, 0.5]);
    }

    #[test]
    fn stiff_run_reports_step() {
        let c = CouplingMatrix::pair(0.0, 1e6, 1e6, 0.0, "t").unwrap();
        let sched = ControlSchedule { segments: vec![Segment::idle(10.0, vec![true, true])] };
        let opts = EvolveOptions { max_steps: 50, ..EvolveOptions::default() };
        let r = evolve(&DensityMatrix::basis(2, 3), &pair([0.0, 0.0]), &c, &sched, &opts);
        assert!(matches!(r, Err(Error::Stiff { .. })), "{r:?}");
    }

    #[test]
    fn csv_header() {
        let sched = ControlSchedule { segments: vec![Segment::idle(0.1, vec![false, false])] };
        let tr = evolve(&DensityMatrix::basis(2, 0), &pair([0.0, 0.0]), &CouplingMatrix::zeros(2), &sched, &EvolveOptions::default()).unwrap();
        let csv = tr.to_csv();
        assert!(csv.starts_with("t_ps,p_gg,p_eg,p_ge,p_ee,purity,trace_error\n"));
    }
}
