//! Dense unitary construction, the brute-force oracle for pass equivalence.

use num_traits::{One, Zero};

use super::{CircuitError, GateKind, Instruction, QuantumCircuit};
use crate::kernels::{self, Mat2};
use crate::scalar::{c, Real, C};

pub const MAX_UNITARY_QUBITS: usize = 8;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T: Real> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C::one();
        }
        Self { dim, data }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self { dim, data }
    }

    /// Permutation matrix sending basis state `i` to `perm_state(i)`.
    pub fn permutation(dim: usize, perm_state: impl Fn(usize) -> usize) -> Self {
        let mut m = Self { dim, data: vec![C::zero(); dim * dim] };
        for i in 0..dim {
            m.data[perm_state(i) * dim + i] = C::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C<T> {
        self.data[r * self.dim + c]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = vec![C::zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.is_zero() {
                    continue;
                }
                for col in 0..n {
                    out[r * n + col] += a * other.data[k * n + col];
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// Kronecker product `self ⊗ other`; `other` occupies the low bits.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        Self::from_fn(a * b, |r, c| self.get(r / b, c / b) * other.get(r % b, c % b))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (*x - *y).norm())
            .fold(T::zero(), T::max)
    }

    /// `U U^dagger == I` within `tol` elementwise.
    pub fn is_unitary(&self, tol: T) -> bool {
        self.matmul(&self.adjoint()).max_abs_diff(&Self::identity(self.dim)) <= tol
    }
}

/// Equality modulo a global phase, elementwise within `tol`.
pub fn equal_up_to_phase<T: Real>(a: &Matrix<T>, b: &Matrix<T>, tol: T) -> bool {
    if a.dim != b.dim {
        return false;
    }
    let (idx, _) = b
        .data
        .iter()
        .enumerate()
        .fold((0, T::zero()), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
    let (x, y) = (a.data[idx], b.data[idx]);
    if y.norm().is_zero() || x.norm().is_zero() {
        return a.max_abs_diff(b) <= tol;
    }
    let phase = (x / y) / (x / y).norm();
    a.data.iter().zip(&b.data).all(|(p, q)| (*p - phase * *q).norm() <= tol)
}

/// 2x2 matrix of a bound single-qubit gate.
pub fn gate_matrix<T: Real>(kind: GateKind, angle: Option<f64>) -> Option<Mat2<T>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Some(match kind {
        GateKind::Rz => {
            let t = angle? / 2.0;
            [[c(t.cos(), -t.sin()), c(0.0, 0.0)], [c(0.0, 0.0), c(t.cos(), t.sin())]]
        }
        GateKind::Ry => {
            let t = angle? / 2.0;
            [[c(t.cos(), 0.0), c(-t.sin(), 0.0)], [c(t.sin(), 0.0), c(t.cos(), 0.0)]]
        }
        GateKind::Sx => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        GateKind::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::Id => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        _ => return None,
    })
}

/// Applies one bound gate instruction to an amplitude vector. Directives are no-ops.
pub(crate) fn apply_instruction<T: Real>(amps: &mut [C<T>], inst: &Instruction) {
    match inst.kind {
        GateKind::Cx => kernels::apply_cx(amps, inst.qubits[0], inst.qubits[1]),
        GateKind::Swap => kernels::apply_swap(amps, inst.qubits[0], inst.qubits[1]),
        GateKind::Measure | GateKind::Barrier => {}
        kind => {
            let u = gate_matrix::<T>(kind, inst.angle()).expect("bound single-qubit gate");
            kernels::apply_1q(amps, inst.qubits[0], &u);
        }
    }
}

/// Product of the gate matrices in instruction order. BARRIER is ignored.
pub fn unitary_of<T: Real>(circuit: &QuantumCircuit) -> Result<Matrix<T>, CircuitError> {
    let n = circuit.num_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(CircuitError::TooLarge(n, MAX_UNITARY_QUBITS));
    }
    if !circuit.is_bound() {
        return Err(CircuitError::UnboundSymbol(circuit.free_symbols().into_iter().collect()));
    }
    if circuit.instructions().iter().any(|i| i.kind == GateKind::Measure) {
        return Err(CircuitError::HasMeasurement);
    }
    let dim = 1usize << n;
    // Column j is U|j>; evolve each basis vector.
    let mut cols: Vec<Vec<C<T>>> = (0..dim)
        .map(|j| {
            let mut v = vec![C::zero(); dim];
            v[j] = C::one();
            v
        })
        .collect();
    for inst in circuit.instructions() {
        for col in cols.iter_mut() {
            apply_instruction(col, inst);
        }
    }
    Ok(Matrix::from_fn(dim, |r, c| cols[c][r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ParamExpr;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn circ(n: usize, insts: Vec<Instruction>) -> QuantumCircuit {
        QuantumCircuit::from_instructions(n, insts).unwrap()
    }

    #[test]
    fn hadamard_matrix() {
        let u = unitary_of::<f64>(&circ(1, vec![Instruction::single(GateKind::H, 0)])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = Matrix::from_fn(2, |r, c| C::new(if r == 1 && c == 1 { -h } else { h }, 0.0));
        assert!(u.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn empty_is_identity() {
        let u = unitary_of::<f64>(&QuantumCircuit::new(2)).unwrap();
        assert_eq!(u, Matrix::identity(4));
    }

    #[test]
    fn rz_sx_rz_is_hadamard_up_to_phase() {
        let seq = circ(
            1,
            vec![Instruction::rz(0, FRAC_PI_2), Instruction::single(GateKind::Sx, 0), Instruction::rz(0, FRAC_PI_2)],
        );
        let h = unitary_of::<f64>(&circ(1, vec![Instruction::single(GateKind::H, 0)])).unwrap();
        let u = unitary_of::<f64>(&seq).unwrap();
        assert!(equal_up_to_phase(&u, &h, 1e-12));
        assert!(u.max_abs_diff(&h) > 0.1, "differs by a nontrivial global phase");
    }

    #[test]
    fn cx_convention_qubit0_is_lsb() {
        // CX(control 0, target 1) maps |01> (index 1) to |11> (index 3).
        let u = unitary_of::<f64>(&circ(2, vec![Instruction::cx(0, 1)])).unwrap();
        assert_eq!(u.get(3, 1), C::new(1.0, 0.0));
        assert_eq!(u.get(2, 2), C::new(1.0, 0.0));
    }

    #[test]
    fn errors() {
        let sym = circ(1, vec![Instruction::rz(0, ParamExpr::symbol("a"))]);
        assert!(matches!(unitary_of::<f64>(&sym), Err(CircuitError::UnboundSymbol(_))));
        assert!(matches!(unitary_of::<f64>(&QuantumCircuit::new(9)), Err(CircuitError::TooLarge(9, 8))));
        let m = circ(1, vec![Instruction::measure(0)]);
        assert_eq!(unitary_of::<f64>(&m), Err(CircuitError::HasMeasurement));
    }

    #[test]
    fn rz_two_pi_is_global_phase() {
        let u = unitary_of::<f64>(&circ(1, vec![Instruction::rz(0, 2.0 * PI)])).unwrap();
        assert!(equal_up_to_phase(&u, &Matrix::identity(2), 1e-12));
    }

    #[test]
    fn single_precision_path() {
        let u = unitary_of::<f32>(&circ(2, vec![Instruction::single(GateKind::H, 0), Instruction::cx(0, 1)])).unwrap();
        assert!(u.is_unitary(1e-6));
    }
}
