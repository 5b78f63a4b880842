use num_traits::{One, Zero};

use super::{compact, Distribution, SimError};
use crate::circuit::{gate_matrix, GateKind, QuantumCircuit};
use crate::device::{validate_executable, DeviceModel};
use crate::kernels::Mat2;
use crate::linalg::symmetric_eigen;
use crate::scalar::{Real, C};

pub const MAX_NOISY_QUBITS: usize = 8;

/// Dense `2^n x 2^n` density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState<T: Real> {
    n: usize,
    dim: usize,
    rho: Vec<C<T>>,
}

impl<T: Real> DensityState<T> {
    /// `|0...0><0...0|`.
    pub fn zero(n: usize) -> Self {
        let dim = 1usize << n;
        let mut rho = vec![C::zero(); dim * dim];
        rho[0] = C::one();
        Self { n, dim, rho }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> C<T> {
        self.rho[r * self.dim + c]
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.rho[i * self.dim + i].re).sum()
    }

    /// `tr(rho^2)`, computed as the squared Frobenius norm.
    pub fn purity(&self) -> T {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, via the real symmetric embedding `[[A, -B], [B, A]]`
    /// of `rho = A + iB` (each eigenvalue appears twice there).
    pub fn min_eigenvalue(&self) -> T {
        let d = self.dim;
        let m = 2 * d;
        let mut emb = vec![T::zero(); m * m];
        for r in 0..d {
            for c in 0..d {
                let z = self.get(r, c);
                emb[r * m + c] = z.re;
                emb[(r + d) * m + c + d] = z.re;
                emb[r * m + c + d] = -z.im;
                emb[(r + d) * m + c] = z.im;
            }
        }
        let (w, _) = symmetric_eigen(&emb, m);
        w.into_iter().fold(T::infinity(), T::min)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.rho[i * self.dim + i].re).collect()
    }

    /// `rho -> U rho U^dagger` for a single-qubit `U` on qubit `k`.
    pub fn apply_1q(&mut self, k: usize, u: &Mat2<T>) {
        let bit = 1usize << k;
        let d = self.dim;
        let diagonal = u[0][1].is_zero() && u[1][0].is_zero();
        if diagonal {
            let (d0, d1) = (u[0][0], u[1][1]);
            for r in 0..d {
                let fr = if r & bit == 0 { d0 } else { d1 };
                for c in 0..d {
                    let fc = if c & bit == 0 { d0 } else { d1 };
                    self.rho[r * d + c] *= fr * fc.conj();
                }
            }
            return;
        }
        // Rows: rho <- U rho.
        for r0 in (0..d).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            for c in 0..d {
                let a = self.rho[r0 * d + c];
                let b = self.rho[r1 * d + c];
                self.rho[r0 * d + c] = u[0][0] * a + u[0][1] * b;
                self.rho[r1 * d + c] = u[1][0] * a + u[1][1] * b;
            }
        }
        // Columns: rho <- rho U^dagger.
        let (u00, u01, u10, u11) = (u[0][0].conj(), u[0][1].conj(), u[1][0].conj(), u[1][1].conj());
        for r in 0..d {
            let row = &mut self.rho[r * d..(r + 1) * d];
            for c0 in (0..d).filter(|c| c & bit == 0) {
                let c1 = c0 | bit;
                let a = row[c0];
                let b = row[c1];
                row[c0] = a * u00 + b * u01;
                row[c1] = a * u10 + b * u11;
            }
        }
    }

    /// Conjugation by a basis permutation `f` that is its own inverse.
    fn apply_involution(&mut self, f: impl Fn(usize) -> usize) {
        let d = self.dim;
        for r in 0..d {
            let fr = f(r);
            for c in 0..d {
                let fc = f(c);
                if (fr, fc) > (r, c) {
                    self.rho.swap(r * d + c, fr * d + fc);
                }
            }
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        self.apply_involution(|i| if i & cb != 0 { i ^ tb } else { i });
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let (ab, bb) = (1usize << a, 1usize << b);
        self.apply_involution(|i| {
            if ((i & ab) != 0) != ((i & bb) != 0) {
                i ^ ab ^ bb
            } else {
                i
            }
        });
    }

    /// `rho -> (1-p) rho + p (I/2 ⊗ tr_k rho)`.
    pub fn depolarize_1q(&mut self, k: usize, p: T) {
        if p == T::zero() {
            return;
        }
        let bit = 1usize << k;
        let d = self.dim;
        let keep = T::one() - p;
        let half_p = p / T::lit(2.0);
        for r0 in (0..d).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            for c0 in (0..d).filter(|c| c & bit == 0) {
                let c1 = c0 | bit;
                let a = self.rho[r0 * d + c0];
                let b = self.rho[r1 * d + c1];
                let mix = (a + b) * half_p;
                self.rho[r0 * d + c0] = a * keep + mix;
                self.rho[r1 * d + c1] = b * keep + mix;
                self.rho[r0 * d + c1] *= keep;
                self.rho[r1 * d + c0] *= keep;
            }
        }
    }

    /// `rho -> (1-p) rho + p (I/4 ⊗ tr_{a,b} rho)` on the qubit pair.
    pub fn depolarize_2q(&mut self, a: usize, b: usize, p: T) {
        if p == T::zero() {
            return;
        }
        let (ab, bb) = (1usize << a, 1usize << b);
        let offs = [0, ab, bb, ab | bb];
        let d = self.dim;
        let keep = T::one() - p;
        let quarter_p = p / T::lit(4.0);
        for r in (0..d).filter(|r| r & (ab | bb) == 0) {
            for c in (0..d).filter(|c| c & (ab | bb) == 0) {
                let traced: C<T> = offs.iter().map(|&o| self.rho[(r | o) * d + (c | o)]).sum();
                for &x in &offs {
                    for &y in &offs {
                        let idx = (r | x) * d + (c | y);
                        self.rho[idx] *= keep;
                        if x == y {
                            self.rho[idx] += traced * quarter_p;
                        }
                    }
                }
            }
        }
    }
}

/// Density-matrix run with per-gate depolarizing noise and readout bit
/// flips taken from `device`.
pub fn simulate_noisy<T: Real>(circuit: &QuantumCircuit, device: &DeviceModel) -> Result<Distribution<T>, SimError> {
    simulate_noisy_observed(circuit, device, |_, _| {})
}

/// [`simulate_noisy`] calling `observe(step, state)` after every gate and
/// every noise channel.
pub fn simulate_noisy_observed<T: Real>(
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    mut observe: impl FnMut(usize, &DensityState<T>),
) -> Result<Distribution<T>, SimError> {
    let report = validate_executable(circuit, device);
    if !report.is_empty() {
        return Err(SimError::NotExecutable(Box::new(report)));
    }
    let c = compact(circuit, MAX_NOISY_QUBITS)?;
    let phys = |q: usize| c.original[q];
    let mut rho = DensityState::<T>::zero(c.circuit.num_qubits());
    let mut step = 0;
    let mut tick = |rho: &DensityState<T>| {
        observe(step, rho);
        step += 1;
    };
    for inst in c.circuit.instructions() {
        match inst.kind {
            GateKind::Cx | GateKind::Swap => {
                let (a, b) = (inst.qubits[0], inst.qubits[1]);
                if inst.kind == GateKind::Cx {
                    rho.apply_cx(a, b);
                } else {
                    rho.apply_swap(a, b);
                }
                tick(&rho);
                let p = device.error_2q_on(phys(a), phys(b)).expect("validated coupling");
                rho.depolarize_2q(a, b, T::lit(p));
            }
            GateKind::Measure | GateKind::Barrier => continue,
            kind => {
                let q = inst.qubits[0];
                let u = gate_matrix::<T>(kind, inst.angle()).expect("bound single-qubit gate");
                rho.apply_1q(q, &u);
                tick(&rho);
                rho.depolarize_1q(q, T::lit(device.error_1q[phys(q)]));
            }
        }
        tick(&rho);
    }

    let mut probs = rho.diagonal();
    for &q in &c.register {
        let e = T::lit(device.readout_error[phys(q)]);
        if e == T::zero() {
            continue;
        }
        let bit = 1usize << q;
        for x in (0..probs.len()).filter(|x| x & bit == 0) {
            let (p0, p1) = (probs[x], probs[x | bit]);
            probs[x] = (T::one() - e) * p0 + e * p1;
            probs[x | bit] = (T::one() - e) * p1 + e * p0;
        }
    }
    Ok(Distribution::from_raw(probs)?.marginal(&c.register))
}
