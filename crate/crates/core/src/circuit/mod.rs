//! Circuit intermediate representation.
//!
//! Qubit ordering convention, used everywhere in the crate: qubit 0 is the
//! least-significant bit of a basis-state index. Global phase is never
//! tracked, so all equivalence checks hold modulo global phase.

mod param;
mod text;
pub(crate) mod unitary;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use param::ParamExpr;
pub use text::{from_text, to_text};
pub use unitary::{equal_up_to_phase, gate_matrix, unitary_of, Matrix, MAX_UNITARY_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("missing value for symbol `{0}`")]
    MissingSymbol(String),
    #[error("circuit still has unbound symbols: {0:?}")]
    UnboundSymbol(Vec<String>),
    #[error("{kind} expects {expected} qubit(s), got {got}")]
    Arity { kind: GateKind, expected: usize, got: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("duplicate qubit {0} in one instruction")]
    DuplicateQubit(usize),
    #[error("{kind} {} a parameter", if *.expected { "requires" } else { "does not take" })]
    Param { kind: GateKind, expected: bool },
    #[error("gate on qubit {0} after it was measured")]
    GateAfterMeasure(usize),
    #[error("circuit has {0} qubits, limit is {1}")]
    TooLarge(usize, usize),
    #[error("measurements are not unitary")]
    HasMeasurement,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Instruction kinds of the IR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Rz,
    Sx,
    X,
    Id,
    Cx,
    H,
    Ry,
    Swap,
    Measure,
    Barrier,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::Rz,
        GateKind::Sx,
        GateKind::X,
        GateKind::Id,
        GateKind::Cx,
        GateKind::H,
        GateKind::Ry,
        GateKind::Swap,
        GateKind::Measure,
        GateKind::Barrier,
    ];

    /// Fixed arity, `None` for BARRIER which spans any number of qubits.
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::Cx | GateKind::Swap => Some(2),
            GateKind::Barrier => None,
            _ => Some(1),
        }
    }

    pub fn takes_param(self) -> bool {
        matches!(self, GateKind::Rz | GateKind::Ry)
    }

    /// Unitary gate, as opposed to the MEASURE / BARRIER directives.
    pub fn is_gate(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Barrier)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rz => "RZ",
            GateKind::Sx => "SX",
            GateKind::X => "X",
            GateKind::Id => "ID",
            GateKind::Cx => "CX",
            GateKind::H => "H",
            GateKind::Ry => "RY",
            GateKind::Swap => "SWAP",
            GateKind::Measure => "MEASURE",
            GateKind::Barrier => "BARRIER",
        }
    }

    pub fn from_name(s: &str) -> Option<GateKind> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub param: Option<ParamExpr>,
}

impl Instruction {
    /// Builds an instruction, checking arity, distinct qubits and parameter presence.
    pub fn new(
        kind: GateKind,
        qubits: Vec<usize>,
        param: Option<ParamExpr>,
    ) -> Result<Self, CircuitError> {
        match kind.arity() {
            Some(n) if n != qubits.len() => {
                return Err(CircuitError::Arity { kind, expected: n, got: qubits.len() })
            }
            None if qubits.is_empty() => {
                return Err(CircuitError::Arity { kind, expected: 1, got: 0 })
            }
            _ => {}
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(CircuitError::DuplicateQubit(*q));
            }
        }
        if kind.takes_param() != param.is_some() {
            return Err(CircuitError::Param { kind, expected: kind.takes_param() });
        }
        Ok(Self { kind, qubits, param })
    }

    pub fn rz(q: usize, angle: impl Into<ParamExpr>) -> Self {
        Self { kind: GateKind::Rz, qubits: vec![q], param: Some(angle.into()) }
    }

    pub fn ry(q: usize, angle: impl Into<ParamExpr>) -> Self {
        Self { kind: GateKind::Ry, qubits: vec![q], param: Some(angle.into()) }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        debug_assert!(kind.arity() == Some(1) && !kind.takes_param());
        Self { kind, qubits: vec![q], param: None }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        debug_assert_ne!(control, target);
        Self { kind: GateKind::Cx, qubits: vec![control, target], param: None }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b);
        Self { kind: GateKind::Swap, qubits: vec![a, b], param: None }
    }

    pub fn measure(q: usize) -> Self {
        Self { kind: GateKind::Measure, qubits: vec![q], param: None }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.is_gate() && self.qubits.len() == 2
    }

    /// Constant angle of a fully bound RZ/RY.
    pub fn angle(&self) -> Option<f64> {
        self.param.as_ref().and_then(ParamExpr::as_constant)
    }
}

/// An ordered instruction list over `num_qubits` qubits.
///
/// Mutation goes through [`QuantumCircuit::push`], which enforces the
/// range and measure-last invariants; passes build fresh circuits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCircuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
}

impl QuantumCircuit {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, instructions: Vec::new() }
    }

    pub fn from_instructions(
        num_qubits: usize,
        instructions: impl IntoIterator<Item = Instruction>,
    ) -> Result<Self, CircuitError> {
        let mut c = Self::new(num_qubits);
        for inst in instructions {
            c.push(inst)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn push(&mut self, inst: Instruction) -> Result<&mut Self, CircuitError> {
        let inst = Instruction::new(inst.kind, inst.qubits, inst.param)?;
        for &q in &inst.qubits {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
            }
        }
        if inst.kind != GateKind::Barrier {
            for &q in &inst.qubits {
                if self.is_measured(q) {
                    return Err(CircuitError::GateAfterMeasure(q));
                }
            }
        }
        self.instructions.push(inst);
        Ok(self)
    }

    fn is_measured(&self, q: usize) -> bool {
        self.instructions
            .iter()
            .any(|i| i.kind == GateKind::Measure && i.qubits[0] == q)
    }

    /// Union of the symbols appearing in instruction parameters.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for inst in &self.instructions {
            if let Some(p) = &inst.param {
                p.collect_symbols(&mut out);
            }
        }
        out
    }

    pub fn is_bound(&self) -> bool {
        self.instructions
            .iter()
            .all(|i| i.param.as_ref().is_none_or(ParamExpr::is_constant))
    }

    /// Substitutes every symbol. Extra entries in `values` are ignored.
    pub fn bind_parameters(&self, values: &BTreeMap<String, f64>) -> Result<Self, CircuitError> {
        let instructions = self
            .instructions
            .iter()
            .map(|inst| {
                let param = match &inst.param {
                    Some(p) => Some(ParamExpr::Constant(p.evaluate(values)?)),
                    None => None,
                };
                Ok(Instruction { kind: inst.kind, qubits: inst.qubits.clone(), param })
            })
            .collect::<Result<Vec<_>, CircuitError>>()?;
        Ok(Self { num_qubits: self.num_qubits, instructions })
    }

    /// Binds by position against an ordered list of symbol names.
    pub fn bind_ordered(&self, names: &[String], values: &[f64]) -> Result<Self, CircuitError> {
        let map = names.iter().cloned().zip(values.iter().copied()).collect();
        self.bind_parameters(&map)
    }

    /// Number of two-qubit instructions; a SWAP counts once until decomposed.
    pub fn count_two_qubit_gates(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_two_qubit()).count()
    }

    /// ASAP layering depth. BARRIER aligns its qubits without occupying a layer.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for inst in &self.instructions {
            let top = inst.qubits.iter().map(|&q| level[q]).max().unwrap_or(0);
            let new = if inst.kind == GateKind::Barrier { top } else { top + 1 };
            for &q in &inst.qubits {
                level[q] = new;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Qubits read out, in MEASURE order. This is the outcome register: bit `k`
    /// of a measured outcome is the `k`-th measured qubit.
    pub fn measured_qubits(&self) -> Vec<usize> {
        self.instructions
            .iter()
            .filter(|i| i.kind == GateKind::Measure)
            .map(|i| i.qubits[0])
            .collect()
    }

    /// Outcome register: measured qubits if any MEASURE exists, else every qubit.
    pub fn output_register(&self) -> Vec<usize> {
        let m = self.measured_qubits();
        if m.is_empty() {
            (0..self.num_qubits).collect()
        } else {
            m
        }
    }

    /// Qubits touched by any gate or measurement.
    pub fn active_qubits(&self) -> BTreeSet<usize> {
        self.instructions
            .iter()
            .filter(|i| i.kind != GateKind::Barrier)
            .flat_map(|i| i.qubits.iter().copied())
            .collect()
    }

    /// Drops MEASURE and BARRIER, leaving the unitary part.
    pub fn without_directives(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            instructions: self.instructions.iter().filter(|i| i.kind.is_gate()).cloned().collect(),
        }
    }

    /// Appends MEASURE on every qubit in index order.
    pub fn measure_all(&mut self) -> Result<&mut Self, CircuitError> {
        for q in 0..self.num_qubits {
            self.push(Instruction::measure(q))?;
        }
        Ok(self)
    }

    pub(crate) fn from_parts_unchecked(num_qubits: usize, instructions: Vec<Instruction>) -> Self {
        Self { num_qubits, instructions }
    }
}

/// Injective map from logical qubit index to physical qubit index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout(Vec<usize>);

impl Layout {
    /// Checks injectivity and that every image is below `num_physical`.
    pub fn new(map: Vec<usize>, num_physical: usize) -> Result<Self, String> {
        for (i, &p) in map.iter().enumerate() {
            if p >= num_physical {
                return Err(format!("logical {i} maps to physical {p}, device has {num_physical}"));
            }
            if map[..i].contains(&p) {
                return Err(format!("physical {p} assigned twice"));
            }
        }
        Ok(Self(map))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.0[logical]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Extends to a full permutation of `num_physical` wires: ancilla wire
    /// `n + k` takes the `k`-th unused physical qubit in ascending order.
    pub fn to_permutation(&self, num_physical: usize) -> Vec<usize> {
        let mut perm = self.0.clone();
        perm.extend((0..num_physical).filter(|p| !self.0.contains(p)));
        perm
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().enumerate().map(|(l, p)| format!("q{l}->Q{p}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The 4-qubit circuit used to illustrate the compilation flow: an RZ(pi)
/// and two H gates, a first CX layer, one symbolic RZ per qubit, and a
/// second CX layer.
pub fn build_fig1_circuit() -> QuantumCircuit {
    let mut insts = vec![
        Instruction::rz(0, PI),
        Instruction::single(GateKind::H, 0),
        Instruction::single(GateKind::H, 1),
        Instruction::cx(0, 2),
        Instruction::cx(1, 3),
    ];
    insts.extend((0..4).map(|q| Instruction::rz(q, ParamExpr::symbol(format!("phi{q}")))));
    insts.push(Instruction::cx(0, 1));
    insts.push(Instruction::cx(2, 3));
    QuantumCircuit::from_parts_unchecked(4, insts)
}
