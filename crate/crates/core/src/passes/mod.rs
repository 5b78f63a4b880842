//! Compilation passes: synthesis to native gates, peephole optimization,
//! layout selection and SWAP routing.
//!
//! Every pass is a pure function of its inputs. Circuit-to-circuit passes
//! return the new circuit together with a [`PassReport`].

mod layout;
mod optimize;
mod routing;
mod synthesis;

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{CircuitError, GateKind, QuantumCircuit};

pub use layout::{greedy_layout, random_layout, trivial_layout};
pub use optimize::{cancel_inverse_pairs, drop_identity_rz, merge_rz, DEFAULT_RZ_TOL};
pub use routing::{route, Routed};
pub use synthesis::translate_to_native;

/// Stable pass identifiers used by the search environment and the CLI.
pub mod names {
    pub const TRANSLATE: &str = "translate";
    pub const MERGE_RZ: &str = "merge_rz";
    pub const DROP_ID_RZ: &str = "drop_id_rz";
    pub const CANCEL_PAIRS: &str = "cancel_pairs";
    pub const LAYOUT_TRIVIAL: &str = "layout_trivial";
    pub const LAYOUT_RANDOM: &str = "layout_random";
    pub const LAYOUT_GREEDY: &str = "layout_greedy";
    pub const LAYOUT_FIXED: &str = "layout_fixed";
    pub const ROUTE: &str = "route";

    pub const ALL: [&str; 9] = [
        TRANSLATE, MERGE_RZ, DROP_ID_RZ, CANCEL_PAIRS, LAYOUT_TRIVIAL, LAYOUT_RANDOM, LAYOUT_GREEDY,
        LAYOUT_FIXED, ROUTE,
    ];
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PassError {
    #[error("no decomposition of {0} into the target gate set")]
    UnsupportedGate(GateKind),
    #[error("circuit needs {circuit} qubits, device has {device}")]
    TooManyQubits { circuit: usize, device: usize },
    #[error("physical qubits {0} and {1} lie in different components of the coupling graph")]
    DisconnectedDevice(usize, usize),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PassReport {
    pub pass: String,
    pub instructions_before: usize,
    pub instructions_after: usize,
    pub two_qubit_before: usize,
    pub two_qubit_after: usize,
    pub swaps_inserted: usize,
}

impl PassReport {
    pub(crate) fn new(pass: &str, before: &QuantumCircuit, after: &QuantumCircuit) -> Self {
        Self {
            pass: pass.to_string(),
            instructions_before: before.len(),
            instructions_after: after.len(),
            two_qubit_before: before.count_two_qubit_gates(),
            two_qubit_after: after.count_two_qubit_gates(),
            swaps_inserted: 0,
        }
    }
}
