use super::{names, PassError, PassReport};
use crate::circuit::{GateKind, Instruction, Layout, QuantumCircuit};
use crate::device::DeviceModel;

/// Output of [`route`].
#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    /// Circuit over the device's physical qubits.
    pub circuit: QuantumCircuit,
    pub report: PassReport,
    /// Wire permutation before routing: wire `w` sits on physical `initial[w]`.
    /// Wires `0..n` are the logical qubits, the rest are ancillas.
    pub initial: Vec<usize>,
    /// Wire permutation after the last inserted SWAP.
    pub final_permutation: Vec<usize>,
}

impl Routed {
    /// Where each logical qubit ends up.
    pub fn final_layout(&self, num_logical: usize) -> Layout {
        Layout::new(self.final_permutation[..num_logical].to_vec(), self.final_permutation.len())
            .expect("prefix of a permutation")
    }
}

/// Greedy shortest-path SWAP router with a one-gate look-ahead.
///
/// Gates are processed in order. When a two-qubit gate acts on an uncoupled
/// pair, candidate SWAPs are the first hops (from either end) along a
/// shortest coupling path; each shortens the current gate by one, so the
/// candidate leaving the next two-qubit gate closest wins. Remaining ties
/// go to the lexicographically smallest physical pair. MEASURE instructions
/// are emitted after all gates, on the qubits' final positions and in their
/// original order.
pub fn route(circuit: &QuantumCircuit, device: &DeviceModel, layout: &Layout) -> Result<Routed, PassError> {
    let n = circuit.num_qubits();
    let num_phys = device.num_qubits;
    if n > num_phys {
        return Err(PassError::TooManyQubits { circuit: n, device: num_phys });
    }
    if layout.len() != n {
        return Err(PassError::InvalidLayout(format!("layout covers {} qubits, circuit has {n}", layout.len())));
    }
    Layout::new(layout.as_slice().to_vec(), num_phys).map_err(PassError::InvalidLayout)?;

    let dist = device.distances();
    let adj = device.adjacency();
    let initial = layout.to_permutation(num_phys);
    let mut phys_of = initial.clone();
    let mut wire_at = vec![0usize; num_phys];
    for (w, &p) in phys_of.iter().enumerate() {
        wire_at[p] = w;
    }

    let insts = circuit.instructions();
    let mut out: Vec<Instruction> = Vec::with_capacity(insts.len());
    let mut measures = Vec::new();
    let mut swaps = 0;

    for (idx, inst) in insts.iter().enumerate() {
        match inst.kind {
            GateKind::Measure => {
                measures.push(inst.qubits[0]);
                continue;
            }
            _ if inst.is_two_qubit() => {
                let (a, b) = (inst.qubits[0], inst.qubits[1]);
                loop {
                    let (pa, pb) = (phys_of[a], phys_of[b]);
                    let d = dist[pa][pb].ok_or(PassError::DisconnectedDevice(pa, pb))?;
                    if d <= 1 {
                        break;
                    }
                    let lookahead = insts[idx + 1..]
                        .iter()
                        .find(|i| i.is_two_qubit())
                        .map(|i| (i.qubits[0], i.qubits[1]));

                    let mut candidates: Vec<(usize, usize)> = Vec::new();
                    for (from, to) in [(pa, pb), (pb, pa)] {
                        for &nb in &adj[from] {
                            if dist[nb][to] == Some(d - 1) {
                                candidates.push((from.min(nb), from.max(nb)));
                            }
                        }
                    }
                    let score = |&(x, y): &(usize, usize)| -> usize {
                        let Some((la, lb)) = lookahead else { return 0 };
                        let swap_pos = |p: usize| if p == x { y } else if p == y { x } else { p };
                        dist[swap_pos(phys_of[la])][swap_pos(phys_of[lb])].unwrap_or(usize::MAX / 2)
                    };
                    let &(x, y) = candidates
                        .iter()
                        .min_by_key(|e| (score(e), **e))
                        .expect("a shortest path has a first hop");

                    out.push(Instruction::swap(x, y));
                    swaps += 1;
                    let (wx, wy) = (wire_at[x], wire_at[y]);
                    wire_at.swap(x, y);
                    phys_of[wx] = y;
                    phys_of[wy] = x;
                }
            }
            _ => {}
        }
        out.push(Instruction {
            kind: inst.kind,
            qubits: inst.qubits.iter().map(|&q| phys_of[q]).collect(),
            param: inst.param.clone(),
        });
    }
    out.extend(measures.into_iter().map(|q| Instruction::measure(phys_of[q])));

    let routed = QuantumCircuit::from_parts_unchecked(num_phys, out);
    let mut report = PassReport::new(names::ROUTE, circuit, &routed);
    report.swaps_inserted = swaps;
    Ok(Routed { circuit: routed, report, initial, final_permutation: phys_of })
}
