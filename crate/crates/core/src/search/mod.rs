//! Pass-sequence search: an episodic environment over compilation passes,
//! preset baseline pipelines, and beam / tabular Q-learning strategies
//! rewarded by a figure of merit.

mod baseline;
mod env;
mod strategy;

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::circuit::{to_text, QuantumCircuit};
use crate::device::DeviceModel;
use crate::fom::{evaluate_fom_detailed, FigureOfMeritSpec, FomError, FomOutcome, QcbmContext};
use crate::passes::PassError;
use crate::qcbm::TrainingRecord;
use crate::seed::derive_seed;

pub use baseline::{compile_preset, run_baseline, Preset, O3_LAYOUT_TRIALS};
pub use env::{
    actions_available, join_passes, run_sequence, step, CompilationState, EnvConfig, PassAction, DEFAULT_MAX_STEPS,
};
pub use strategy::{optimize_sequence, RlParams, Strategy, DEFAULT_FAILURE_REWARD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("illegal action {0}")]
    IllegalAction(String),
    #[error("unknown pass `{0}`")]
    UnknownPass(String),
    #[error("state is not terminal")]
    NotTerminal,
    #[error("no episode reached a terminal state")]
    NoTerminalFound,
    #[error("improvement is undefined for a non-positive baseline ({0})")]
    DivisionByZero(f64),
    #[error("invalid search budget: {0}")]
    BadBudget(String),
    #[error(transparent)]
    Pass(#[from] PassError),
    #[error(transparent)]
    Fom(#[from] FomError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub circuit: QuantumCircuit,
    /// Present iff `terminal`.
    pub reward: Option<f64>,
    /// Metric value behind the reward, in natural units.
    pub raw: Option<f64>,
    pub passes: Vec<PassAction>,
    pub terminal: bool,
    pub initial: Option<Vec<usize>>,
    pub final_permutation: Option<Vec<usize>>,
    /// Training log when the figure of merit is `app_kl`.
    pub records: Vec<TrainingRecord>,
}

impl EpisodeResult {
    fn unfinished(state: &CompilationState) -> Self {
        Self {
            circuit: state.circuit.clone(),
            reward: None,
            raw: None,
            passes: state.history.clone(),
            terminal: false,
            initial: state.initial.clone(),
            final_permutation: state.final_permutation.clone(),
            records: Vec::new(),
        }
    }

    fn scored(state: &CompilationState, outcome: &FomOutcome) -> Self {
        Self {
            reward: Some(outcome.score),
            raw: Some(outcome.raw),
            terminal: true,
            records: outcome.records.clone(),
            ..Self::unfinished(state)
        }
    }
}

/// Figure of merit plus the optional QCBM context `app_kl` needs.
#[derive(Debug, Clone)]
pub struct RewardSpec {
    pub fom: FigureOfMeritSpec,
    pub qcbm: Option<QcbmContext>,
}

impl RewardSpec {
    pub fn new(fom: FigureOfMeritSpec) -> Self {
        Self { fom, qcbm: None }
    }
}

/// Reward on a terminal state.
pub fn terminal_reward(state: &CompilationState, reward: &RewardSpec) -> Result<f64, SearchError> {
    Ok(terminal_outcome(state, reward)?.score)
}

/// Training runs for `app_kl` are seeded from the context seed and the
/// compiled circuit's text, so equal circuits get equal rewards whatever
/// path reached them, and different circuits get independent trainings.
fn terminal_outcome(state: &CompilationState, reward: &RewardSpec) -> Result<FomOutcome, SearchError> {
    if !state.is_terminal() {
        return Err(SearchError::NotTerminal);
    }
    let ctx = reward.qcbm.as_ref().map(|c| {
        let mut c = c.clone();
        c.training.seed = derive_seed(c.training.seed, &to_text(&state.circuit), 0);
        c
    });
    Ok(evaluate_fom_detailed(&reward.fom, &state.circuit, &state.device, ctx.as_ref())?)
}

/// Memoizes rewards by compiled-circuit text, so identical circuits reached
/// along different pass sequences are evaluated once.
pub(crate) struct RewardCache<'a> {
    spec: &'a RewardSpec,
    cache: BTreeMap<String, FomOutcome>,
    pub evaluations: usize,
}

impl<'a> RewardCache<'a> {
    pub fn new(spec: &'a RewardSpec) -> Self {
        Self { spec, cache: BTreeMap::new(), evaluations: 0 }
    }

    pub fn get(&mut self, state: &CompilationState) -> Result<FomOutcome, SearchError> {
        let key = to_text(&state.circuit);
        if let Some(o) = self.cache.get(&key) {
            return Ok(o.clone());
        }
        let o = terminal_outcome(state, self.spec)?;
        self.evaluations += 1;
        self.cache.insert(key, o.clone());
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub episode: usize,
    pub terminal: bool,
    pub reward: Option<f64>,
    pub passes: Vec<PassAction>,
}

/// CSV with header `episode,terminal,reward,passes`; passes `;`-joined.
pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("episode,terminal,reward,passes\n");
    for r in rows {
        let reward = r.reward.map(|x| x.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},\"{}\"", r.episode, r.terminal, reward, join_passes(&r.passes)).unwrap();
    }
    out
}

/// `1 - min_proposed / min_baseline`, in percent.
pub fn improvement(min_proposed: f64, min_baseline: f64) -> Result<f64, SearchError> {
    if !(min_baseline > 0.0) {
        return Err(SearchError::DivisionByZero(min_baseline));
    }
    Ok(100.0 * (1.0 - min_proposed / min_baseline))
}

/// Convenience wrapper used by tests and the CLI.
pub fn compile_with(
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    passes: &[PassAction],
) -> Result<CompilationState, SearchError> {
    run_sequence(circuit, std::sync::Arc::new(device.clone()), passes)
}

#[cfg(test)]
mod tests;
