//! Device models: coupling graph, native gate set and error rates.
//!
//! Device file schema (JSON, unknown fields rejected):
//!
//! ```json
//! {
//!   "name": "quito",
//!   "num_qubits": 5,
//!   "coupling_edges": [[0, 1], [1, 2], [1, 3], [3, 4]],
//!   "native_gates": ["rz", "sx", "cx", "x", "id"],
//!   "error_1q": 0.001,
//!   "error_2q": [0.01, 0.01, 0.012, 0.01],
//!   "readout_error": 0.02
//! }
//! ```
//!
//! Each error field is either a scalar (uniform) or a list: per qubit for
//! `error_1q`/`readout_error`, per edge in `coupling_edges` order for `error_2q`.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{GateKind, QuantumCircuit};

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("cannot read device file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("device parse error: {0}")]
    Parse(String),
    #[error("device validation error in `{field}`: {msg}")]
    Validation { field: &'static str, msg: String },
    #[error("unknown device `{0}` (expected quito, nairobi or montreal)")]
    UnknownDevice(String),
}

pub const DEFAULT_ERROR_1Q: f64 = 0.001;
pub const DEFAULT_ERROR_2Q: f64 = 0.01;
pub const DEFAULT_READOUT_ERROR: f64 = 0.02;

pub const MOCK_NAMES: [&str; 3] = ["quito", "nairobi", "montreal"];

const QUITO_EDGES: [(usize, usize); 4] = [(0, 1), (1, 2), (1, 3), (3, 4)];
const NAIROBI_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)];
// 27-qubit heavy-hex lattice of the Falcon family.
const MONTREAL_EDGES: [(usize, usize); 28] = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7), (7, 10), (8, 9),
    (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14), (14, 16), (15, 18), (16, 19), (17, 18),
    (18, 21), (19, 20), (19, 22), (21, 23), (22, 25), (23, 24), (24, 25), (25, 26),
];

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    pub name: String,
    pub num_qubits: usize,
    /// Unordered pairs, stored as given in the source.
    pub coupling_edges: Vec<(usize, usize)>,
    pub native_gates: BTreeSet<GateKind>,
    pub error_1q: Vec<f64>,
    /// Indexed like `coupling_edges`.
    pub error_2q: Vec<f64>,
    pub readout_error: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Rates {
    Uniform(f64),
    PerItem(Vec<f64>),
}

impl Rates {
    fn compress(v: &[f64]) -> Self {
        match v.first() {
            Some(&first) if v.iter().all(|&x| x.to_bits() == first.to_bits()) => Rates::Uniform(first),
            _ => Rates::PerItem(v.to_vec()),
        }
    }

    fn expand(self, n: usize, field: &'static str) -> Result<Vec<f64>, DeviceError> {
        match self {
            Rates::Uniform(x) => Ok(vec![x; n]),
            Rates::PerItem(v) if v.len() == n => Ok(v),
            Rates::PerItem(v) => Err(DeviceError::Validation {
                field,
                msg: format!("expected {n} entries, got {}", v.len()),
            }),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    name: String,
    num_qubits: usize,
    coupling_edges: Vec<(usize, usize)>,
    native_gates: Vec<GateKind>,
    error_1q: Rates,
    error_2q: Rates,
    readout_error: Rates,
}

impl DeviceModel {
    /// Builds a device with uniform error rates and validates it.
    pub fn uniform(
        name: &str,
        num_qubits: usize,
        edges: &[(usize, usize)],
        e1: f64,
        e2: f64,
        readout: f64,
    ) -> Result<Self, DeviceError> {
        let d = Self {
            name: name.to_string(),
            num_qubits,
            coupling_edges: edges.to_vec(),
            native_gates: default_native_gates(),
            error_1q: vec![e1; num_qubits],
            error_2q: vec![e2; edges.len()],
            readout_error: vec![readout; num_qubits],
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        let bad = |field, msg: String| Err(DeviceError::Validation { field, msg });
        if self.num_qubits == 0 {
            return bad("num_qubits", "must be positive".into());
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &self.coupling_edges {
            if a >= self.num_qubits || b >= self.num_qubits {
                return bad("coupling_edges", format!("edge ({a},{b}) outside 0..{}", self.num_qubits));
            }
            if a == b {
                return bad("coupling_edges", format!("self-loop on {a}"));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return bad("coupling_edges", format!("duplicate edge ({a},{b})"));
            }
        }
        for (field, rates, n) in [
            ("error_1q", &self.error_1q, self.num_qubits),
            ("error_2q", &self.error_2q, self.coupling_edges.len()),
            ("readout_error", &self.readout_error, self.num_qubits),
        ] {
            if rates.len() != n {
                return bad(field, format!("expected {n} entries, got {}", rates.len()));
            }
            if let Some(x) = rates.iter().find(|x| !(0.0..1.0).contains(*x)) {
                return bad(field, format!("rate {x} outside [0, 1)"));
            }
        }
        if let Some(k) = self.native_gates.iter().find(|k| !k.is_gate()) {
            return bad("native_gates", format!("{k} is not a gate"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DeviceError> {
        let f: DeviceFile = serde_json::from_str(text).map_err(|e| DeviceError::Parse(e.to_string()))?;
        let d = Self {
            error_1q: f.error_1q.expand(f.num_qubits, "error_1q")?,
            error_2q: f.error_2q.expand(f.coupling_edges.len(), "error_2q")?,
            readout_error: f.readout_error.expand(f.num_qubits, "readout_error")?,
            name: f.name,
            num_qubits: f.num_qubits,
            coupling_edges: f.coupling_edges,
            native_gates: f.native_gates.into_iter().collect(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        let f = DeviceFile {
            name: self.name.clone(),
            num_qubits: self.num_qubits,
            coupling_edges: self.coupling_edges.clone(),
            native_gates: self.native_gates.iter().copied().collect(),
            error_1q: Rates::compress(&self.error_1q),
            error_2q: Rates::compress(&self.error_2q),
            readout_error: Rates::compress(&self.readout_error),
        };
        let mut s = serde_json::to_string_pretty(&f).expect("device serializes");
        s.push('\n');
        s
    }

    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.coupling_edges
            .iter()
            .position(|&(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    pub fn error_2q_on(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_index(a, b).map(|i| self.error_2q[i])
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_qubits];
        for &(a, b) in &self.coupling_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj.iter_mut().for_each(|v| v.sort_unstable());
        adj
    }

    pub fn degree(&self, q: usize) -> usize {
        self.coupling_edges.iter().filter(|&&(a, b)| a == q || b == q).count()
    }

    /// All-pairs hop distances; `None` between different components.
    pub fn distances(&self) -> Vec<Vec<Option<usize>>> {
        let adj = self.adjacency();
        (0..self.num_qubits)
            .map(|src| {
                let mut dist = vec![None; self.num_qubits];
                dist[src] = Some(0);
                let mut queue = VecDeque::from([src]);
                while let Some(u) = queue.pop_front() {
                    let du = dist[u].unwrap();
                    for &v in &adj[u] {
                        if dist[v].is_none() {
                            dist[v] = Some(du + 1);
                            queue.push_back(v);
                        }
                    }
                }
                dist
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.distances()[0].iter().all(Option::is_some)
    }

    /// Copy with every error rate set to zero.
    pub fn noiseless(&self) -> Self {
        Self {
            error_1q: vec![0.0; self.num_qubits],
            error_2q: vec![0.0; self.coupling_edges.len()],
            readout_error: vec![0.0; self.num_qubits],
            ..self.clone()
        }
    }
}

pub fn default_native_gates() -> BTreeSet<GateKind> {
    [GateKind::Rz, GateKind::Sx, GateKind::Cx, GateKind::X, GateKind::Id].into_iter().collect()
}

/// One of the shipped mock-ups, with the default error rates.
pub fn mock_device(name: &str) -> Result<DeviceModel, DeviceError> {
    let (n, edges): (usize, &[(usize, usize)]) = match name {
        "quito" => (5, &QUITO_EDGES),
        "nairobi" => (7, &NAIROBI_EDGES),
        "montreal" => (27, &MONTREAL_EDGES),
        other => return Err(DeviceError::UnknownDevice(other.to_string())),
    };
    DeviceModel::uniform(name, n, edges, DEFAULT_ERROR_1Q, DEFAULT_ERROR_2Q, DEFAULT_READOUT_ERROR)
}

pub fn load_device(path: impl AsRef<Path>) -> Result<DeviceModel, DeviceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| DeviceError::Io { path: path.display().to_string(), source })?;
    DeviceModel::from_json(&text)
}

/// Mock name or path to a device file.
pub fn resolve_device(name_or_path: &str) -> Result<DeviceModel, DeviceError> {
    if MOCK_NAMES.contains(&name_or_path) {
        mock_device(name_or_path)
    } else {
        load_device(name_or_path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

/// Outcome of [`validate_executable`]; empty means executable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub non_native: Vec<Violation>,
    pub not_coupled: Vec<Violation>,
    pub out_of_range: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.non_native.is_empty() && self.not_coupled.is_empty() && self.out_of_range.is_empty()
    }
}

/// Lists gates outside the native set and two-qubit gates on uncoupled
/// pairs. MEASURE and BARRIER are directives and always allowed.
pub fn validate_executable(circuit: &QuantumCircuit, device: &DeviceModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (index, inst) in circuit.instructions().iter().enumerate() {
        let v = || Violation { index, kind: inst.kind, qubits: inst.qubits.clone() };
        if inst.qubits.iter().any(|&q| q >= device.num_qubits) {
            report.out_of_range.push(v());
            continue;
        }
        if !inst.kind.is_gate() {
            continue;
        }
        if !device.native_gates.contains(&inst.kind) {
            report.non_native.push(v());
        }
        if inst.qubits.len() == 2 && !device.is_coupled(inst.qubits[0], inst.qubits[1]) {
            report.not_coupled.push(v());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Instruction;

    fn devices_dir() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("devices")
    }

    #[test]
    fn shipped_files_match_mocks() {
        for name in MOCK_NAMES {
            let path = devices_dir().join(format!("{name}.json"));
            let loaded = load_device(&path).unwrap();
            let mock = mock_device(name).unwrap();
            assert_eq!(loaded, mock);
            assert_eq!(std::fs::read_to_string(&path).unwrap(), mock.to_json());
        }
    }

    /// Rewrites the shipped device files from the mock definitions.
    #[test]
    #[ignore]
    fn regenerate_device_files() {
        for name in MOCK_NAMES {
            let path = devices_dir().join(format!("{name}.json"));
            std::fs::write(path, mock_device(name).unwrap().to_json()).unwrap();
        }
    }

    #[test]
    fn mock_shapes() {
        let q = mock_device("quito").unwrap();
        assert_eq!(q.num_qubits, 5);
        assert_eq!(q.coupling_edges.len(), q.num_qubits - 1);
        assert!(q.is_connected(), "4 edges on 5 nodes and connected: a tree");
        assert_eq!(mock_device("nairobi").unwrap().num_qubits, 7);
        let m = mock_device("montreal").unwrap();
        assert_eq!(m.num_qubits, 27);
        assert!(m.is_connected());
        assert!(matches!(mock_device("tokyo"), Err(DeviceError::UnknownDevice(_))));
        for name in MOCK_NAMES {
            assert_eq!(mock_device(name).unwrap().native_gates, default_native_gates());
        }
    }

    #[test]
    fn rejects_bad_files() {
        let bad_edge = r#"{"name":"x","num_qubits":5,"coupling_edges":[[0,9]],"native_gates":["rz"],
            "error_1q":0.0,"error_2q":0.0,"readout_error":0.0}"#;
        assert!(matches!(
            DeviceModel::from_json(bad_edge),
            Err(DeviceError::Validation { field: "coupling_edges", .. })
        ));
        let unknown = r#"{"name":"x","num_qubits":1,"coupling_edges":[],"native_gates":[],
            "error_1q":0.0,"error_2q":0.0,"readout_error":0.0,"t1":5}"#;
        assert!(matches!(DeviceModel::from_json(unknown), Err(DeviceError::Parse(_))));
        let rate = r#"{"name":"x","num_qubits":1,"coupling_edges":[],"native_gates":[],
            "error_1q":1.0,"error_2q":0.0,"readout_error":0.0}"#;
        assert!(matches!(DeviceModel::from_json(rate), Err(DeviceError::Validation { field: "error_1q", .. })));
        assert!(matches!(DeviceModel::from_json("{"), Err(DeviceError::Parse(_))));
        assert!(matches!(load_device("/nonexistent/dev.json"), Err(DeviceError::Io { .. })));
    }

    #[test]
    fn per_item_rates_round_trip() {
        let mut d = mock_device("quito").unwrap();
        d.error_2q[2] = 0.012;
        d.readout_error[4] = 0.031;
        let text = d.to_json();
        assert!(text.contains("0.012"));
        assert_eq!(DeviceModel::from_json(&text).unwrap(), d);
    }

    #[test]
    fn validation_report() {
        let quito = mock_device("quito").unwrap();
        let h = QuantumCircuit::from_instructions(5, [Instruction::single(GateKind::H, 0)]).unwrap();
        let r = validate_executable(&h, &quito);
        assert_eq!(r.non_native.len(), 1);
        assert!(r.not_coupled.is_empty());

        let cx = QuantumCircuit::from_instructions(5, [Instruction::cx(0, 4)]).unwrap();
        let r = validate_executable(&cx, &quito);
        assert_eq!(r.not_coupled.len(), 1);
        assert!(r.non_native.is_empty());

        let ok = QuantumCircuit::from_instructions(5, [Instruction::cx(3, 1), Instruction::measure(0)]).unwrap();
        assert!(validate_executable(&ok, &quito).is_empty());
    }

    #[test]
    fn distances_on_quito() {
        let d = mock_device("quito").unwrap().distances();
        assert_eq!(d[0][4], Some(3));
        assert_eq!(d[2][3], Some(2));
        let split = DeviceModel::uniform("split", 4, &[(0, 1), (2, 3)], 0.0, 0.0, 0.0).unwrap();
        assert_eq!(split.distances()[0][3], None);
    }
}
