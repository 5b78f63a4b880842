//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 4
//! RZ q0 3.141592653589793
//! H q1
//! CX q0,q2
//! RZ q3 @phi3+1.5707963267948966
//! ```
//!
//! Angles are printed with the shortest representation that parses back to
//! the same `f64`, so `from_text(&to_text(c)) == c`. Blank lines and lines
//! starting with `#` are skipped on input.

use std::fmt::Write;

use super::{CircuitError, GateKind, Instruction, ParamExpr, QuantumCircuit};

pub fn to_text(circuit: &QuantumCircuit) -> String {
    let mut out = format!("qubits {}\n", circuit.num_qubits());
    for inst in circuit.instructions() {
        let qubits: Vec<String> = inst.qubits.iter().map(|q| format!("q{q}")).collect();
        write!(out, "{} {}", inst.kind.name(), qubits.join(",")).unwrap();
        if let Some(p) = &inst.param {
            out.push(' ');
            write_param(&mut out, p);
        }
        out.push('\n');
    }
    out
}

fn write_param(out: &mut String, p: &ParamExpr) {
    match p {
        ParamExpr::Constant(c) => write!(out, "{c}").unwrap(),
        ParamExpr::Symbol(s) => write!(out, "@{s}").unwrap(),
        ParamExpr::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    out.push('+');
                }
                write_param(out, t);
            }
        }
    }
}

pub fn from_text(text: &str) -> Result<QuantumCircuit, CircuitError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let err = |line: usize, msg: String| CircuitError::Parse { line, msg };

    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty circuit file".into()))?;
    let num_qubits = header
        .strip_prefix("qubits ")
        .and_then(|n| n.trim().parse::<usize>().ok())
        .ok_or_else(|| err(hline, format!("expected `qubits <n>`, got `{header}`")))?;

    let mut circuit = QuantumCircuit::new(num_qubits);
    for (lno, line) in lines {
        let mut fields = line.split_whitespace();
        let kind_s = fields.next().unwrap();
        let kind = GateKind::from_name(kind_s).ok_or_else(|| err(lno, format!("unknown gate `{kind_s}`")))?;
        let qubits = fields
            .next()
            .ok_or_else(|| err(lno, "missing qubit list".into()))?
            .split(',')
            .map(|q| {
                q.strip_prefix('q')
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| err(lno, format!("bad qubit `{q}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let param = fields.next().map(|p| parse_param(p).map_err(|m| err(lno, m))).transpose()?;
        if let Some(extra) = fields.next() {
            return Err(err(lno, format!("unexpected trailing `{extra}`")));
        }
        let inst = Instruction::new(kind, qubits, param).map_err(|e| err(lno, e.to_string()))?;
        circuit.push(inst).map_err(|e| err(lno, e.to_string()))?;
    }
    Ok(circuit)
}

fn parse_param(s: &str) -> Result<ParamExpr, String> {
    let terms = split_terms(s)
        .into_iter()
        .map(|t| {
            if let Some(name) = t.strip_prefix('@') {
                if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(format!("bad symbol `{t}`"));
                }
                Ok(ParamExpr::Symbol(name.to_string()))
            } else {
                t.parse::<f64>().map(ParamExpr::Constant).map_err(|_| format!("bad angle `{t}`"))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(if terms.len() == 1 { terms.into_iter().next().unwrap() } else { ParamExpr::Sum(terms) })
}

// Splits on '+' except inside an exponent such as `1e+5`.
fn split_terms(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..bytes.len() {
        if bytes[i] == b'+' && i > start && !matches!(bytes[i - 1], b'e' | b'E') {
            out.push(&s[start..i]);
            start = i + 1;
        }
    }
    out.push(&s[start..]);
    out
}
