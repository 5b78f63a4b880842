//! Ideal statevector and noisy density-matrix simulation.
//!
//! Both simulators measure the circuit's outcome register (see
//! [`QuantumCircuit::output_register`]) and only simulate the qubits a
//! circuit actually touches, so a circuit routed onto a 27-qubit device
//! but using eight of its qubits costs an eight-qubit simulation.

mod density;
mod distribution;
mod statevector;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::circuit::{Instruction, QuantumCircuit};
use crate::device::ValidationReport;

pub use density::{simulate_noisy, simulate_noisy_observed, DensityState, MAX_NOISY_QUBITS};
pub use distribution::{sample, Distribution};
pub use statevector::{simulate_ideal, StateVector, MAX_IDEAL_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("circuit has unbound symbols: {0:?}")]
    UnboundSymbol(Vec<String>),
    #[error("{0} active qubits exceed the simulator limit of {1}")]
    TooLarge(usize, usize),
    #[error("circuit is not executable on the device: {0:?}")]
    NotExecutable(Box<ValidationReport>),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

/// Circuit relabelled onto its active qubits (ascending), plus the original
/// index of each compact qubit and the register in compact indices.
pub(crate) struct Compacted {
    pub circuit: QuantumCircuit,
    pub original: Vec<usize>,
    pub register: Vec<usize>,
}

pub(crate) fn compact(circuit: &QuantumCircuit, limit: usize) -> Result<Compacted, SimError> {
    if !circuit.is_bound() {
        return Err(SimError::UnboundSymbol(circuit.free_symbols().into_iter().collect()));
    }
    let register = circuit.output_register();
    let mut active = circuit.active_qubits();
    active.extend(register.iter().copied());
    if active.len() > limit {
        return Err(SimError::TooLarge(active.len(), limit));
    }
    let original: Vec<usize> = active.into_iter().collect();
    let index: BTreeMap<usize, usize> = original.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let insts = circuit
        .instructions()
        .iter()
        .filter(|i| i.kind.is_gate())
        .map(|i| Instruction { kind: i.kind, qubits: i.qubits.iter().map(|q| index[q]).collect(), param: i.param.clone() })
        .collect();
    Ok(Compacted {
        circuit: QuantumCircuit::from_parts_unchecked(original.len(), insts),
        register: register.iter().map(|q| index[q]).collect(),
        original,
    })
}
