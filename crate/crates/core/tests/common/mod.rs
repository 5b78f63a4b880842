#![allow(dead_code)]

use std::f64::consts::PI;

use qcc::circuit::{equal_up_to_phase, unitary_of, GateKind, Instruction, Matrix, QuantumCircuit};
use qcc::device::{default_native_gates, mock_device, validate_executable, DeviceModel, MOCK_NAMES};
use qcc::passes::{
    cancel_inverse_pairs, drop_identity_rz, greedy_layout, merge_rz, random_layout, route, translate_to_native,
    trivial_layout, DEFAULT_RZ_TOL,
};
use qcc::sim::{simulate_ideal, simulate_noisy_observed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const ONE_Q: [GateKind; 6] = [GateKind::H, GateKind::X, GateKind::Sx, GateKind::Id, GateKind::Rz, GateKind::Ry];

/// Bound random circuit of `depth` instructions, no measurements. Angles
/// include exact multiples of pi/2 so cancellation and merging get exercised.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> QuantumCircuit {
    let mut c = QuantumCircuit::new(n);
    for _ in 0..depth {
        let two = n >= 2 && rng.random_bool(0.4);
        let inst = if two {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            if rng.random_bool(0.8) { Instruction::cx(a, b) } else { Instruction::swap(a, b) }
        } else {
            let q = rng.random_range(0..n);
            let kind = ONE_Q[rng.random_range(0..ONE_Q.len())];
            let mut angle = || if rng.random_bool(0.3) { rng.random_range(-4i32..=4) as f64 * PI / 2.0 } else { rng.random_range(-2.0 * PI..2.0 * PI) };
            match kind {
                GateKind::Rz => Instruction::rz(q, angle()),
                GateKind::Ry => Instruction::ry(q, angle()),
                k => Instruction::single(k, q),
            }
        };
        c.push(inst).unwrap();
    }
    c
}

/// All-to-all device with the given uniform error rates.
pub fn complete_device(n: usize, e1: f64, e2: f64, ro: f64) -> DeviceModel {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    DeviceModel::uniform("complete", n, &edges, e1, e2, ro).unwrap()
}

/// Basis-state permutation moving wire `w` to bit `perm[w]`.
pub fn wire_permutation(perm: &[usize]) -> Matrix<f64> {
    let n = perm.len();
    Matrix::permutation(1 << n, |i| {
        let mut j = 0;
        for (w, &p) in perm.iter().enumerate() {
            if i >> w & 1 == 1 {
                j |= 1 << p;
            }
        }
        j
    })
}

/// `u` acting on the low qubits, identity on `extra` more.
pub fn pad(u: &Matrix<f64>, extra: usize) -> Matrix<f64> {
    Matrix::identity(1 << extra).kron(u)
}

const EQ_TOL: f64 = 1e-9;

fn same(a: &QuantumCircuit, b: &QuantumCircuit) -> bool {
    equal_up_to_phase(&unitary_of::<f64>(a).unwrap(), &unitary_of::<f64>(b).unwrap(), EQ_TOL)
}

/// The 200 seeded circuits of the equivalence suite: n <= 4, depth <= 12.
pub fn equivalence_circuits() -> Vec<QuantumCircuit> {
    (0..200u64)
        .map(|seed| {
            let mut r = rng(seed);
            let n = r.random_range(1..=4);
            let depth = r.random_range(1..=12);
            random_circuit(&mut r, n, depth)
        })
        .collect()
}

pub fn check_rewrites_preserve_unitary() {
    let natives = default_native_gates();
    for (i, c) in equivalence_circuits().iter().enumerate() {
        let (t, _) = translate_to_native(c, &natives).unwrap();
        assert!(same(c, &t), "translate, circuit {i}");
        for (name, out) in [
            ("merge_rz", merge_rz(c).0),
            ("drop_id_rz", drop_identity_rz(c, DEFAULT_RZ_TOL).0),
            ("cancel_pairs", cancel_inverse_pairs(c).0),
            ("merge_rz after translate", merge_rz(&t).0),
            ("cancel_pairs after translate", cancel_inverse_pairs(&t).0),
            ("drop_id_rz after merge", drop_identity_rz(&merge_rz(&t).0, DEFAULT_RZ_TOL).0),
        ] {
            assert!(same(c, &out), "{name}, circuit {i}");
        }
    }
}

/// Routed unitary times the initial wire permutation equals the final
/// wire permutation times the input (identity on ancillas).
pub fn check_routing_preserves_unitary() {
    let quito = mock_device("quito").unwrap();
    let mut swaps = 0;
    for (i, c) in equivalence_circuits().iter().enumerate() {
        let layouts = [
            trivial_layout(c, &quito).unwrap(),
            greedy_layout(c, &quito).unwrap(),
            random_layout(c, &quito, i as u64).unwrap(),
        ];
        let u = pad(&unitary_of::<f64>(c).unwrap(), quito.num_qubits - c.num_qubits());
        for layout in &layouts {
            let r = route(c, &quito, layout).unwrap();
            swaps += r.report.swaps_inserted;
            let lhs = unitary_of::<f64>(&r.circuit).unwrap().matmul(&wire_permutation(&r.initial));
            let rhs = wire_permutation(&r.final_permutation).matmul(&u);
            assert!(equal_up_to_phase(&lhs, &rhs, EQ_TOL), "circuit {i}, layout {:?}", layout.as_slice());
            assert_eq!(&r.initial[..c.num_qubits()], layout.as_slice());
        }
    }
    assert!(swaps > 50, "only {swaps} SWAPs inserted; the permutation check would be vacuous");
}

pub fn check_routing_validity() {
    for name in MOCK_NAMES {
        let device = mock_device(name).unwrap();
        for seed in 0..100u64 {
            let mut r = rng(seed ^ 0xabcd);
            let n = r.random_range(2..=device.num_qubits.min(7));
            let depth = r.random_range(1..=30);
            let c = random_circuit(&mut r, n, depth);
            let layout = if seed % 2 == 0 { greedy_layout(&c, &device) } else { random_layout(&c, &device, seed) }.unwrap();
            let routed = route(&c, &device, &layout).unwrap();
            let report = validate_executable(&routed.circuit, &device);
            assert!(report.not_coupled.is_empty() && report.out_of_range.is_empty(), "{name} seed {seed}: {report:?}");
            let (native, _) = translate_to_native(&routed.circuit, &device.native_gates).unwrap();
            let report = validate_executable(&native, &device);
            assert!(report.is_empty(), "{name} seed {seed}: {report:?}");
        }
    }
}

pub fn check_simulator_soundness() {
    let natives = default_native_gates();
    for seed in 0..100u64 {
        let mut r = rng(seed ^ 0x5157);
        let n = r.random_range(1..=5);
        let depth = r.random_range(1..=20);
        let c = random_circuit(&mut r, n, depth);
        let (native, _) = translate_to_native(&c, &natives).unwrap();
        let ideal = simulate_ideal::<f64>(&c).unwrap();

        let quiet = complete_device(n, 0.0, 0.0, 0.0);
        let dm = simulate_noisy_observed::<f64>(&native, &quiet, |step, rho| {
            assert!((rho.trace() - 1.0).abs() < 1e-10, "seed {seed} step {step}: trace {}", rho.trace());
        })
        .unwrap();
        let tv = dm.total_variation(&ideal);
        assert!(tv < 1e-10, "seed {seed}: TV {tv}");

        let noisy = complete_device(n, 0.01, 0.05, 0.03);
        let mut steps = 0;
        let out = simulate_noisy_observed::<f64>(&native, &noisy, |step, rho| {
            steps += 1;
            assert!((rho.trace() - 1.0).abs() < 1e-10, "seed {seed} step {step}: trace {}", rho.trace());
            assert!(rho.min_eigenvalue() > -1e-10, "seed {seed} step {step}");
            assert!(rho.purity() <= 1.0 + 1e-9);
        })
        .unwrap();
        assert!(steps >= native.len());
        let total: f64 = out.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}
