use std::f64::consts::TAU;

use super::{names, PassReport};
use crate::circuit::{GateKind, Instruction, ParamExpr, QuantumCircuit};

pub const DEFAULT_RZ_TOL: f64 = 1e-9;

/// Collapses each maximal run of RZ gates on one qubit (no other instruction
/// touching that qubit in between) into a single RZ carrying the sum of the
/// run's angles. Constant parts are folded, symbols are kept.
pub fn merge_rz(circuit: &QuantumCircuit) -> (QuantumCircuit, PassReport) {
    let mut out: Vec<Instruction> = Vec::with_capacity(circuit.len());
    let mut last: Vec<Option<usize>> = vec![None; circuit.num_qubits()];
    for inst in circuit.instructions() {
        if inst.kind == GateKind::Rz {
            let q = inst.qubits[0];
            if let Some(j) = last[q].filter(|&j| out[j].kind == GateKind::Rz) {
                let prev = out[j].param.take().expect("RZ has an angle");
                out[j].param = Some(ParamExpr::sum([prev, inst.param.clone().unwrap()]));
                continue;
            }
        }
        for &q in &inst.qubits {
            last[q] = Some(out.len());
        }
        out.push(inst.clone());
    }
    finish(names::MERGE_RZ, circuit, out)
}

/// Removes constant RZ gates whose angle is a multiple of 2pi within `tol`.
/// Symbolic RZ gates are always kept.
pub fn drop_identity_rz(circuit: &QuantumCircuit, tol: f64) -> (QuantumCircuit, PassReport) {
    let out = circuit
        .instructions()
        .iter()
        .filter(|inst| {
            if inst.kind != GateKind::Rz {
                return true;
            }
            match inst.angle() {
                Some(a) => {
                    let r = a.rem_euclid(TAU);
                    !(r <= tol || TAU - r <= tol)
                }
                None => true,
            }
        })
        .cloned()
        .collect();
    finish(names::DROP_ID_RZ, circuit, out)
}

fn self_inverse(kind: GateKind) -> bool {
    matches!(kind, GateKind::Cx | GateKind::X | GateKind::H | GateKind::Swap)
}

fn is_inverse_pair(a: &Instruction, b: &Instruction) -> bool {
    if a.kind != b.kind || !self_inverse(a.kind) {
        return false;
    }
    match a.kind {
        GateKind::Swap => {
            a.qubits == b.qubits || (a.qubits[0] == b.qubits[1] && a.qubits[1] == b.qubits[0])
        }
        _ => a.qubits == b.qubits,
    }
}

/// Deletes adjacent self-inverse pairs (CX, X, H, SWAP) on identical qubits,
/// repeating until nothing cancels.
pub fn cancel_inverse_pairs(circuit: &QuantumCircuit) -> (QuantumCircuit, PassReport) {
    let mut current: Vec<Instruction> = circuit.instructions().to_vec();
    loop {
        let (next, changed) = cancel_once(circuit.num_qubits(), &current);
        current = next;
        if !changed {
            break;
        }
    }
    finish(names::CANCEL_PAIRS, circuit, current)
}

fn cancel_once(num_qubits: usize, insts: &[Instruction]) -> (Vec<Instruction>, bool) {
    let mut out: Vec<Option<Instruction>> = Vec::with_capacity(insts.len());
    // Per-qubit stack of live output indices; the top is the latest
    // instruction touching that qubit.
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); num_qubits];
    let mut changed = false;
    for inst in insts {
        let top = stacks[inst.qubits[0]].last().copied();
        let cancels = top.is_some_and(|j| {
            inst.qubits.iter().all(|&q| stacks[q].last() == Some(&j))
                && out[j].as_ref().is_some_and(|prev| is_inverse_pair(prev, inst))
        });
        if cancels {
            let j = top.unwrap();
            out[j] = None;
            for &q in &inst.qubits {
                stacks[q].pop();
            }
            changed = true;
        } else {
            for &q in &inst.qubits {
                stacks[q].push(out.len());
            }
            out.push(Some(inst.clone()));
        }
    }
    (out.into_iter().flatten().collect(), changed)
}

fn finish(name: &str, before: &QuantumCircuit, out: Vec<Instruction>) -> (QuantumCircuit, PassReport) {
    let after = QuantumCircuit::from_parts_unchecked(before.num_qubits(), out);
    let report = PassReport::new(name, before, &after);
    (after, report)
}
