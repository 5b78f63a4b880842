use std::fmt;
use std::sync::Arc;

use super::SearchError;
use crate::circuit::{to_text, Layout, QuantumCircuit};
use crate::device::{validate_executable, DeviceModel};
use crate::passes::{
    cancel_inverse_pairs, drop_identity_rz, greedy_layout, merge_rz, names, random_layout, route, translate_to_native,
    trivial_layout, PassReport, DEFAULT_RZ_TOL,
};

pub const DEFAULT_MAX_STEPS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PassAction {
    Translate,
    MergeRz,
    DropIdRz,
    CancelPairs,
    LayoutTrivial,
    LayoutRandom { seed: u64 },
    LayoutGreedy,
    LayoutFixed(Vec<usize>),
    Route,
}

impl PassAction {
    pub fn name(&self) -> &'static str {
        match self {
            PassAction::Translate => names::TRANSLATE,
            PassAction::MergeRz => names::MERGE_RZ,
            PassAction::DropIdRz => names::DROP_ID_RZ,
            PassAction::CancelPairs => names::CANCEL_PAIRS,
            PassAction::LayoutTrivial => names::LAYOUT_TRIVIAL,
            PassAction::LayoutRandom { .. } => names::LAYOUT_RANDOM,
            PassAction::LayoutGreedy => names::LAYOUT_GREEDY,
            PassAction::LayoutFixed(_) => names::LAYOUT_FIXED,
            PassAction::Route => names::ROUTE,
        }
    }

    pub fn is_layout(&self) -> bool {
        matches!(self, PassAction::LayoutTrivial | PassAction::LayoutRandom { .. } | PassAction::LayoutGreedy | PassAction::LayoutFixed(_))
    }

    /// Parses `name`, `layout_random=<seed>` or `layout_fixed=<p0>,<p1>,...`.
    pub fn parse(s: &str) -> Result<Self, SearchError> {
        let s = s.trim();
        let (name, arg) = match s.split_once('=') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let bad = || SearchError::UnknownPass(s.to_string());
        let action = match (name, arg) {
            (names::TRANSLATE, None) => PassAction::Translate,
            (names::MERGE_RZ, None) => PassAction::MergeRz,
            (names::DROP_ID_RZ, None) => PassAction::DropIdRz,
            (names::CANCEL_PAIRS, None) => PassAction::CancelPairs,
            (names::LAYOUT_TRIVIAL, None) => PassAction::LayoutTrivial,
            (names::LAYOUT_GREEDY, None) => PassAction::LayoutGreedy,
            (names::ROUTE, None) => PassAction::Route,
            (names::LAYOUT_RANDOM, a) => PassAction::LayoutRandom { seed: a.map_or(Ok(0), str::parse).map_err(|_| bad())? },
            (names::LAYOUT_FIXED, Some(a)) => {
                PassAction::LayoutFixed(a.split(',').map(|p| p.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?)
            }
            _ => return Err(bad()),
        };
        Ok(action)
    }

    /// Parses a `;`-separated pass list.
    pub fn parse_list(s: &str) -> Result<Vec<Self>, SearchError> {
        s.split(';').filter(|p| !p.trim().is_empty()).map(Self::parse).collect()
    }
}

impl fmt::Display for PassAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PassAction::LayoutRandom { seed } => write!(f, "{}={seed}", self.name()),
            PassAction::LayoutFixed(map) => {
                let parts: Vec<String> = map.iter().map(usize::to_string).collect();
                write!(f, "{}={}", self.name(), parts.join(","))
            }
            _ => f.write_str(self.name()),
        }
    }
}

pub fn join_passes(history: &[PassAction]) -> String {
    history.iter().map(PassAction::to_string).collect::<Vec<_>>().join(";")
}

/// The action set offered by the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub max_steps: usize,
    /// One `layout_random` action per seed.
    pub random_layout_seeds: Vec<u64>,
    /// Extra `layout_fixed` actions.
    pub fixed_layouts: Vec<Vec<usize>>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { max_steps: DEFAULT_MAX_STEPS, random_layout_seeds: vec![0], fixed_layouts: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct CompilationState {
    pub circuit: QuantumCircuit,
    pub device: Arc<DeviceModel>,
    /// Logical width of the input circuit.
    pub num_logical: usize,
    pub layout: Option<Layout>,
    /// No gate outside the device's native set.
    pub translated: bool,
    pub laid_out: bool,
    pub routed: bool,
    pub history: Vec<PassAction>,
    pub steps: usize,
    pub max_steps: usize,
    /// Wire permutations recorded by `route`.
    pub initial: Option<Vec<usize>>,
    pub final_permutation: Option<Vec<usize>>,
    /// One report per circuit-rewriting pass applied so far.
    pub reports: Vec<PassReport>,
}

impl CompilationState {
    pub fn new(circuit: QuantumCircuit, device: Arc<DeviceModel>, max_steps: usize) -> Self {
        let translated = validate_executable(&circuit, &device).non_native.is_empty();
        Self {
            num_logical: circuit.num_qubits(),
            circuit,
            device,
            layout: None,
            translated,
            laid_out: false,
            routed: false,
            history: Vec::new(),
            steps: 0,
            max_steps,
            initial: None,
            final_permutation: None,
            reports: Vec::new(),
        }
    }

    /// Routed and executable on the device.
    pub fn is_terminal(&self) -> bool {
        self.routed && validate_executable(&self.circuit, &self.device).is_empty()
    }

    pub fn swaps_inserted(&self) -> usize {
        self.reports.iter().map(|r| r.swaps_inserted).sum()
    }

    /// Identity of the state for deduplication: circuit, layout and flags,
    /// not the path that produced them.
    pub fn key(&self) -> String {
        format!("{}|{:?}|{}{}{}", to_text(&self.circuit), self.layout, self.translated, self.laid_out, self.routed)
    }
}

pub fn actions_available(state: &CompilationState, cfg: &EnvConfig) -> Vec<PassAction> {
    if state.steps >= state.max_steps {
        return Vec::new();
    }
    let mut acts = vec![PassAction::Translate, PassAction::MergeRz, PassAction::DropIdRz, PassAction::CancelPairs];
    if !state.laid_out {
        acts.push(PassAction::LayoutTrivial);
        acts.push(PassAction::LayoutGreedy);
        acts.extend(cfg.random_layout_seeds.iter().map(|&seed| PassAction::LayoutRandom { seed }));
        acts.extend(cfg.fixed_layouts.iter().cloned().map(PassAction::LayoutFixed));
    } else if !state.routed {
        acts.push(PassAction::Route);
    }
    acts
}

/// Applies one pass, enforcing the gating rules of [`actions_available`]
/// (except membership of random seeds / fixed layouts in an [`EnvConfig`]).
pub fn step(state: &CompilationState, action: &PassAction) -> Result<CompilationState, SearchError> {
    let illegal = |why: &str| Err(SearchError::IllegalAction(format!("{action}: {why}")));
    if state.steps >= state.max_steps {
        return illegal("step budget exhausted");
    }
    if action.is_layout() && state.laid_out {
        return illegal("layout already chosen");
    }
    if *action == PassAction::Route && (!state.laid_out || state.routed) {
        return illegal(if state.routed { "already routed" } else { "no layout chosen" });
    }
    let device = &*state.device;
    let mut next = state.clone();
    let mut rewrite = |(c, r): (QuantumCircuit, PassReport)| {
        next.circuit = c;
        next.reports.push(r);
    };
    match action {
        PassAction::Translate => rewrite(translate_to_native(&state.circuit, &device.native_gates)?),
        PassAction::MergeRz => rewrite(merge_rz(&state.circuit)),
        PassAction::DropIdRz => rewrite(drop_identity_rz(&state.circuit, DEFAULT_RZ_TOL)),
        PassAction::CancelPairs => rewrite(cancel_inverse_pairs(&state.circuit)),
        PassAction::LayoutTrivial => next.layout = Some(trivial_layout(&state.circuit, device)?),
        PassAction::LayoutGreedy => next.layout = Some(greedy_layout(&state.circuit, device)?),
        PassAction::LayoutRandom { seed } => next.layout = Some(random_layout(&state.circuit, device, *seed)?),
        PassAction::LayoutFixed(map) => {
            if map.len() != state.circuit.num_qubits() {
                return Err(crate::passes::PassError::InvalidLayout(format!(
                    "{} entries for a {}-qubit circuit",
                    map.len(),
                    state.circuit.num_qubits()
                ))
                .into());
            }
            let layout = Layout::new(map.clone(), device.num_qubits).map_err(crate::passes::PassError::InvalidLayout)?;
            next.layout = Some(layout);
        }
        PassAction::Route => {
            let routed = route(&state.circuit, device, state.layout.as_ref().expect("laid out"))?;
            next.circuit = routed.circuit;
            next.reports.push(routed.report);
            next.initial = Some(routed.initial);
            next.final_permutation = Some(routed.final_permutation);
            next.routed = true;
        }
    }
    if action.is_layout() {
        next.laid_out = true;
    }
    next.translated = validate_executable(&next.circuit, device).non_native.is_empty();
    next.steps += 1;
    next.history.push(action.clone());
    Ok(next)
}

/// Runs a fixed pass sequence from a fresh state.
pub fn run_sequence(
    circuit: &QuantumCircuit,
    device: Arc<DeviceModel>,
    passes: &[PassAction],
) -> Result<CompilationState, SearchError> {
    let mut s = CompilationState::new(circuit.clone(), device, passes.len().max(DEFAULT_MAX_STEPS));
    for p in passes {
        s = step(&s, p)?;
    }
    Ok(s)
}
