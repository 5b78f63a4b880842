use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{run_sequence, CompilationState, EpisodeResult, PassAction, RewardSpec, SearchError};
use crate::circuit::QuantumCircuit;
use crate::device::DeviceModel;
use crate::fom::evaluate_fom_detailed;
use crate::seed::derive_seed;

/// Layout seeds tried by the o3-like preset.
pub const O3_LAYOUT_TRIALS: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "o1", alias = "o1_like")]
    O1Like,
    #[serde(rename = "o3", alias = "o3_like")]
    O3Like,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "o1" | "o1_like" => Ok(Preset::O1Like),
            "o3" | "o3_like" => Ok(Preset::O3Like),
            _ => Err(format!("unknown preset `{s}` (expected o1 or o3)")),
        }
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::O1Like => "o1",
            Preset::O3Like => "o3",
        }
    }

    /// Pass list; `layout_seed` only matters for o3.
    pub fn passes(self, layout_seed: u64) -> Vec<PassAction> {
        use PassAction::*;
        match self {
            Preset::O1Like => vec![Translate, LayoutTrivial, Route, Translate, MergeRz, DropIdRz],
            Preset::O3Like => vec![
                Translate,
                MergeRz,
                CancelPairs,
                LayoutRandom { seed: layout_seed },
                Route,
                Translate,
                CancelPairs,
                MergeRz,
                DropIdRz,
            ],
        }
    }
}

/// Compiles with a preset. o3 keeps the layout seed (of
/// [`O3_LAYOUT_TRIALS`] derived from `seed`) with the fewest two-qubit
/// gates, first one on ties.
pub fn compile_preset(
    preset: Preset,
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    seed: u64,
) -> Result<CompilationState, SearchError> {
    let device = Arc::new(device.clone());
    let state = match preset {
        Preset::O1Like => run_sequence(circuit, device, &preset.passes(0))?,
        Preset::O3Like => {
            let mut best: Option<CompilationState> = None;
            for k in 0..O3_LAYOUT_TRIALS {
                let s = run_sequence(circuit, device.clone(), &preset.passes(derive_seed(seed, "o3_layout", k)))?;
                if best.as_ref().is_none_or(|b| s.circuit.count_two_qubit_gates() < b.circuit.count_two_qubit_gates()) {
                    best = Some(s);
                }
            }
            best.expect("at least one trial")
        }
    };
    if !state.is_terminal() {
        return Err(SearchError::NotTerminal);
    }
    Ok(state)
}

/// [`compile_preset`] followed by the reward on the compiled circuit.
pub fn run_baseline(
    preset: Preset,
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    reward: &RewardSpec,
    seed: u64,
) -> Result<EpisodeResult, SearchError> {
    let state = compile_preset(preset, circuit, device, seed)?;
    let outcome = evaluate_fom_detailed(&reward.fom, &state.circuit, &state.device, reward.qcbm.as_ref())?;
    Ok(EpisodeResult::scored(&state, &outcome))
}
