use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    actions_available, join_passes, step, CompilationState, EnvConfig, EpisodeResult, PassAction, RewardCache, RewardSpec,
    SearchError, TraceRow,
};
use crate::circuit::{GateKind, QuantumCircuit};
use crate::device::DeviceModel;
use crate::passes::{greedy_layout, route};
use crate::seed::derive_seed;

/// Reward assigned to an RL episode that ends without a terminal state.
pub const DEFAULT_FAILURE_REWARD: f64 = -100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlParams {
    pub episodes: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub failure_reward: f64,
}

impl Default for RlParams {
    fn default() -> Self {
        Self { episodes: 50, epsilon: 0.2, alpha: 0.5, gamma: 1.0, failure_reward: DEFAULT_FAILURE_REWARD }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Beam { width: usize },
    Rl(RlParams),
}

/// Searches pass sequences from `circuit` and returns the best terminal
/// episode together with one trace row per scored episode (beam: per
/// terminal state generated, kept or not; rl: per episode).
pub fn optimize_sequence(
    strategy: &Strategy,
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    reward: &RewardSpec,
    env: &EnvConfig,
    seed: u64,
) -> Result<(EpisodeResult, Vec<TraceRow>), SearchError> {
    let fresh = CompilationState::new(circuit.clone(), Arc::new(device.clone()), env.max_steps);
    match strategy {
        Strategy::Beam { width } => beam(fresh, *width, reward, env),
        Strategy::Rl(p) => q_learning(fresh, p, reward, env, seed),
    }
}

fn cx_equivalents(c: &QuantumCircuit) -> usize {
    c.instructions()
        .iter()
        .filter(|i| i.is_two_qubit())
        .map(|i| if i.kind == GateKind::Swap { 3 } else { 1 })
        .sum()
}

/// Two-qubit cost in CX units, including the SWAPs routing would still add
/// (under the chosen layout, or the greedy layout before one is chosen).
fn proxy(state: &CompilationState) -> usize {
    let base = cx_equivalents(&state.circuit);
    if state.routed {
        return base;
    }
    let layout = match &state.layout {
        Some(l) => l.clone(),
        None => match greedy_layout(&state.circuit, &state.device) {
            Ok(l) => l,
            Err(_) => return usize::MAX,
        },
    };
    match route(&state.circuit, &state.device, &layout) {
        Ok(r) => base + 3 * r.report.swaps_inserted,
        Err(_) => usize::MAX,
    }
}

fn beam(
    fresh: CompilationState,
    width: usize,
    reward: &RewardSpec,
    env: &EnvConfig,
) -> Result<(EpisodeResult, Vec<TraceRow>), SearchError> {
    if width == 0 {
        return Err(SearchError::BadBudget("beam width must be positive".into()));
    }
    let mut cache = RewardCache::new(reward);
    let mut seen = BTreeSet::from([fresh.key()]);
    let mut frontier = vec![fresh];
    let mut best: Option<EpisodeResult> = None;
    let mut trace = Vec::new();
    while !frontier.is_empty() {
        let mut children = Vec::new();
        for s in &frontier {
            for a in actions_available(s, env) {
                let c = step(s, &a)?;
                if seen.insert(c.key()) {
                    children.push(c);
                }
            }
        }
        for s in children.iter().filter(|s| s.is_terminal()) {
            let outcome = cache.get(s)?;
            trace.push(TraceRow { episode: trace.len(), terminal: true, reward: Some(outcome.score), passes: s.history.clone() });
            if best.as_ref().is_none_or(|b| outcome.score > b.reward.unwrap()) {
                best = Some(EpisodeResult::scored(s, &outcome));
            }
        }
        let mut ranked: Vec<(usize, CompilationState)> = children.into_iter().map(|c| (proxy(&c), c)).collect();
        ranked.sort_by_key(|(p, _)| *p);
        ranked.truncate(width);
        frontier = ranked.into_iter().map(|(_, c)| c).collect();
    }
    best.map(|b| (b, trace)).ok_or(SearchError::NoTerminalFound)
}

/// Tabular state: flags plus a hash of the pass history.
fn q_state(s: &CompilationState) -> String {
    let h = derive_seed(0, &join_passes(&s.history), 0);
    format!("{}{}{}{}:{:016x}", s.translated as u8, s.laid_out as u8, s.routed as u8, s.is_terminal() as u8, h)
}

/// Actions for the learner: the environment's, plus `stop` (None) once terminal.
fn rl_actions(s: &CompilationState, env: &EnvConfig) -> Vec<Option<PassAction>> {
    let mut acts: Vec<Option<PassAction>> = actions_available(s, env).into_iter().map(Some).collect();
    if s.is_terminal() {
        acts.push(None);
    }
    acts
}

fn action_key(a: &Option<PassAction>) -> String {
    a.as_ref().map_or_else(|| "stop".to_string(), PassAction::to_string)
}

fn q_learning(
    fresh: CompilationState,
    p: &RlParams,
    reward: &RewardSpec,
    env: &EnvConfig,
    seed: u64,
) -> Result<(EpisodeResult, Vec<TraceRow>), SearchError> {
    if p.episodes == 0 || !(0.0..=1.0).contains(&p.epsilon) || !(p.alpha > 0.0 && p.alpha <= 1.0) || !(0.0..=1.0).contains(&p.gamma) {
        return Err(SearchError::BadBudget(format!("{p:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut cache = RewardCache::new(reward);
    let mut best: Option<EpisodeResult> = None;
    let mut trace = Vec::new();

    let max_q = |q: &BTreeMap<(String, String), f64>, sk: &str, acts: &[Option<PassAction>]| -> f64 {
        acts.iter()
            .map(|a| *q.get(&(sk.to_string(), action_key(a))).unwrap_or(&0.0))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    for episode in 0..p.episodes {
        let mut s = fresh.clone();
        let mut acts = rl_actions(&s, env);
        let final_reward = loop {
            if acts.is_empty() {
                // Only reachable at episode start with max_steps = 0.
                break None;
            }
            let sk = q_state(&s);
            let a = if rng.random::<f64>() < p.epsilon {
                acts[rng.random_range(0..acts.len())].clone()
            } else {
                let mut best_a = &acts[0];
                let mut best_v = f64::NEG_INFINITY;
                for a in &acts {
                    let v = *q.get(&(sk.clone(), action_key(a))).unwrap_or(&0.0);
                    if v > best_v {
                        best_v = v;
                        best_a = a;
                    }
                }
                best_a.clone()
            };
            let key = (sk, action_key(&a));
            let (target, done) = match &a {
                None => {
                    let o = cache.get(&s)?;
                    (o.score, Some(o))
                }
                Some(action) => {
                    let next = step(&s, action)?;
                    let next_acts = rl_actions(&next, env);
                    s = next;
                    if next_acts.is_empty() {
                        // Step budget exhausted.
                        if s.is_terminal() {
                            let o = cache.get(&s)?;
                            (o.score, Some(o))
                        } else {
                            (p.failure_reward, None)
                        }
                    } else {
                        let t = p.gamma * max_q(&q, &q_state(&s), &next_acts);
                        acts = next_acts;
                        let entry = q.entry(key).or_insert(0.0);
                        *entry += p.alpha * (t - *entry);
                        continue;
                    }
                }
            };
            let entry = q.entry(key).or_insert(0.0);
            *entry += p.alpha * (target - *entry);
            break done;
        };
        match final_reward {
            Some(o) => {
                trace.push(TraceRow { episode, terminal: true, reward: Some(o.score), passes: s.history.clone() });
                if best.as_ref().is_none_or(|b| o.score > b.reward.unwrap()) {
                    best = Some(EpisodeResult::scored(&s, &o));
                }
            }
            None => trace.push(TraceRow { episode, terminal: false, reward: None, passes: s.history.clone() }),
        }
    }
    best.map(|b| (b, trace)).ok_or(SearchError::NoTerminalFound)
}
