use num_traits::Zero;

use super::{compact, Distribution, SimError};
use crate::circuit::unitary::apply_instruction;
use crate::circuit::QuantumCircuit;
use crate::scalar::{Real, C};

pub const MAX_IDEAL_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amps: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![C::zero(); 1 << n];
        amps[0] = C::new(T::one(), T::zero());
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    /// Applies the gates of a bound circuit whose width matches this state.
    pub fn run(&mut self, circuit: &QuantumCircuit) {
        for inst in circuit.instructions() {
            apply_instruction(&mut self.amps, inst);
        }
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Born-rule outcome distribution of a noiseless run.
pub fn simulate_ideal<T: Real>(circuit: &QuantumCircuit) -> Result<Distribution<T>, SimError> {
    let c = compact(circuit, MAX_IDEAL_QUBITS)?;
    let mut psi = StateVector::<T>::zero(c.circuit.num_qubits());
    psi.run(&c.circuit);
    Ok(Distribution::from_raw(psi.probabilities())?.marginal(&c.register))
}
