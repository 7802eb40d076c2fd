//! Open-system dynamics of a qubit register coupled through a resonator:
//! XY exchange plus collective Lindblad decay, and an iSWAP gate built on it.

mod evolve;
mod gate;
mod generator;
mod integrate;
mod model;

pub use evolve::{evolve, EvolveOptions, Trajectory, TRACE_DRIFT_LIMIT};
pub use gate::{average_gate_fidelity, iswap_gate, iswap_ideal, process_map, GateResult, ProcessMap};
pub use generator::{build_hamiltonian, dissipation_rates, lindblad_rhs, Generator};
pub use integrate::{integrate, StepControl};
pub use model::{basis_label, ControlSchedule, CouplingMatrix, DensityMatrix, Operator, QubitSpec, Segment, MAX_QUBITS};
