use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::PassError;
use crate::circuit::{Layout, QuantumCircuit};
use crate::device::DeviceModel;

fn check_fits(circuit: &QuantumCircuit, device: &DeviceModel) -> Result<(), PassError> {
    if circuit.num_qubits() > device.num_qubits {
        return Err(PassError::TooManyQubits { circuit: circuit.num_qubits(), device: device.num_qubits });
    }
    Ok(())
}

/// Logical `i` on physical `i`.
pub fn trivial_layout(circuit: &QuantumCircuit, device: &DeviceModel) -> Result<Layout, PassError> {
    check_fits(circuit, device)?;
    Ok(Layout::identity(circuit.num_qubits()))
}

/// Uniformly random injection, a pure function of `seed`.
pub fn random_layout(circuit: &QuantumCircuit, device: &DeviceModel, seed: u64) -> Result<Layout, PassError> {
    check_fits(circuit, device)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phys: Vec<usize> = (0..device.num_qubits).collect();
    phys.shuffle(&mut rng);
    phys.truncate(circuit.num_qubits());
    Ok(Layout::new(phys, device.num_qubits).expect("prefix of a permutation is injective"))
}

/// Pairs logical qubits by descending two-qubit-gate count with physical
/// qubits by descending coupling degree; ties go to the smaller index.
pub fn greedy_layout(circuit: &QuantumCircuit, device: &DeviceModel) -> Result<Layout, PassError> {
    check_fits(circuit, device)?;
    let mut usage = vec![0usize; circuit.num_qubits()];
    for inst in circuit.instructions().iter().filter(|i| i.is_two_qubit()) {
        for &q in &inst.qubits {
            usage[q] += 1;
        }
    }
    let mut logical: Vec<usize> = (0..circuit.num_qubits()).collect();
    logical.sort_by_key(|&q| (std::cmp::Reverse(usage[q]), q));
    let mut physical: Vec<usize> = (0..device.num_qubits).collect();
    physical.sort_by_key(|&p| (std::cmp::Reverse(device.degree(p)), p));

    let mut map = vec![0; circuit.num_qubits()];
    for (l, p) in logical.into_iter().zip(physical) {
        map[l] = p;
    }
    Ok(Layout::new(map, device.num_qubits).expect("distinct physical qubits"))
}
