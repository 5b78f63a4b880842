use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use super::{names, PassError, PassReport};
use crate::circuit::{GateKind, Instruction, ParamExpr, QuantumCircuit};

/// Rewrites every gate outside `native` into native gates:
///
/// - `H      -> RZ(pi/2) SX RZ(pi/2)`
/// - `SWAP   -> CX(a,b) CX(b,a) CX(a,b)`
/// - `RY(t)  -> SX RZ(t + pi) SX RZ(pi)`
/// - `X      -> SX SX`, `ID -> nothing` when those are not native
///
/// Equalities hold up to global phase. A symbolic RY angle lands in exactly
/// one RZ slot as a sum with a constant.
pub fn translate_to_native(
    circuit: &QuantumCircuit,
    native: &BTreeSet<GateKind>,
) -> Result<(QuantumCircuit, PassReport), PassError> {
    let mut out = Vec::with_capacity(circuit.len());
    for inst in circuit.instructions() {
        expand(inst, native, &mut out)?;
    }
    let result = QuantumCircuit::from_parts_unchecked(circuit.num_qubits(), out);
    let report = PassReport::new(names::TRANSLATE, circuit, &result);
    Ok((result, report))
}

fn expand(inst: &Instruction, native: &BTreeSet<GateKind>, out: &mut Vec<Instruction>) -> Result<(), PassError> {
    if !inst.kind.is_gate() || native.contains(&inst.kind) {
        out.push(inst.clone());
        return Ok(());
    }
    let need = |kinds: &[GateKind]| -> Result<(), PassError> {
        match kinds.iter().find(|k| !native.contains(k)) {
            Some(_) => Err(PassError::UnsupportedGate(inst.kind)),
            None => Ok(()),
        }
    };
    let q = inst.qubits[0];
    match inst.kind {
        GateKind::H => {
            need(&[GateKind::Rz, GateKind::Sx])?;
            out.extend([
                Instruction::rz(q, FRAC_PI_2),
                Instruction::single(GateKind::Sx, q),
                Instruction::rz(q, FRAC_PI_2),
            ]);
        }
        GateKind::Swap => {
            need(&[GateKind::Cx])?;
            let b = inst.qubits[1];
            out.extend([Instruction::cx(q, b), Instruction::cx(b, q), Instruction::cx(q, b)]);
        }
        GateKind::Ry => {
            need(&[GateKind::Rz, GateKind::Sx])?;
            let theta = inst.param.clone().expect("RY carries an angle");
            out.extend([
                Instruction::single(GateKind::Sx, q),
                Instruction::rz(q, ParamExpr::sum([theta, ParamExpr::Constant(PI)])),
                Instruction::single(GateKind::Sx, q),
                Instruction::rz(q, PI),
            ]);
        }
        GateKind::X => {
            need(&[GateKind::Sx])?;
            out.extend([Instruction::single(GateKind::Sx, q), Instruction::single(GateKind::Sx, q)]);
        }
        GateKind::Id => {}
        kind => return Err(PassError::UnsupportedGate(kind)),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{equal_up_to_phase, unitary_of};
    use crate::device::default_native_gates;

    fn one(inst: Instruction, n: usize) -> QuantumCircuit {
        QuantumCircuit::from_instructions(n, [inst]).unwrap()
    }

    fn assert_equivalent(a: &QuantumCircuit, b: &QuantumCircuit) {
        let ua = unitary_of::<f64>(a).unwrap();
        let ub = unitary_of::<f64>(b).unwrap();
        assert!(equal_up_to_phase(&ua, &ub, 1e-12));
    }

    #[test]
    fn hadamard_rule() {
        let (out, report) = translate_to_native(&one(Instruction::single(GateKind::H, 0), 1), &default_native_gates()).unwrap();
        let kinds: Vec<_> = out.instructions().iter().map(|i| (i.kind, i.angle())).collect();
        assert_eq!(
            kinds,
            vec![(GateKind::Rz, Some(FRAC_PI_2)), (GateKind::Sx, None), (GateKind::Rz, Some(FRAC_PI_2))]
        );
        assert_eq!(report.instructions_after, 3);
    }

    #[test]
    fn swap_rule() {
        let c = one(Instruction::swap(0, 1), 2);
        let (out, _) = translate_to_native(&c, &default_native_gates()).unwrap();
        assert_eq!(out.count_two_qubit_gates(), 3);
        assert!(out.instructions().iter().all(|i| i.kind == GateKind::Cx));
        assert_equivalent(&out, &c);
    }

    #[test]
    fn ry_rule_committed_constants() {
        for theta in [0.0, 0.3, -1.7, PI, 2.5] {
            let c = one(Instruction::ry(0, theta), 1);
            let (out, _) = translate_to_native(&c, &default_native_gates()).unwrap();
            assert_eq!(out.len(), 4);
            assert_equivalent(&out, &c);
        }
    }

    #[test]
    fn symbolic_ry_keeps_symbol_in_one_slot() {
        let c = one(Instruction::ry(0, ParamExpr::symbol("t")), 1);
        let (out, _) = translate_to_native(&c, &default_native_gates()).unwrap();
        let slots = out.instructions().iter().filter(|i| i.param.as_ref().is_some_and(|p| !p.is_constant())).count();
        assert_eq!(slots, 1);
        assert_eq!(out.free_symbols(), c.free_symbols());
    }

    #[test]
    fn native_circuit_unchanged() {
        let c = QuantumCircuit::from_instructions(
            2,
            [Instruction::rz(0, 0.4), Instruction::single(GateKind::Sx, 1), Instruction::cx(1, 0), Instruction::single(GateKind::X, 0)],
        )
        .unwrap();
        let (out, _) = translate_to_native(&c, &default_native_gates()).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn unsupported_target() {
        let only_cx: BTreeSet<_> = [GateKind::Cx].into_iter().collect();
        let err = translate_to_native(&one(Instruction::single(GateKind::H, 0), 1), &only_cx).unwrap_err();
        assert_eq!(err, PassError::UnsupportedGate(GateKind::H));
    }

    #[test]
    fn x_and_id_fallbacks() {
        let reduced: BTreeSet<_> = [GateKind::Rz, GateKind::Sx, GateKind::Cx].into_iter().collect();
        let c = QuantumCircuit::from_instructions(1, [Instruction::single(GateKind::X, 0), Instruction::single(GateKind::Id, 0)]).unwrap();
        let (out, _) = translate_to_native(&c, &reduced).unwrap();
        assert_eq!(out.len(), 2);
        assert_equivalent(&out, &c);
    }
}
