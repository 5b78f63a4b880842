//! Experiment configuration and the runners behind the `compile`, `train`
//! and `experiment` commands. Every output is a pure function of the
//! configuration and its master seed.

mod bundle;
mod svg;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{to_text, CircuitError, QuantumCircuit};
use crate::device::{resolve_device, validate_executable, DeviceError, DeviceModel};
use crate::fom::{FigureOfMeritSpec, FomKind, QcbmContext, DEFAULT_KL_EPS};
use crate::passes::PassReport;
use crate::qcbm::{
    build_ansatz, make_x_target, min_kl, train, AnsatzSpec, Execution, QcbmError, TargetDistribution,
    TrainingConfig, TrainingRecord,
};
use crate::search::{
    compile_preset, compile_with, improvement, optimize_sequence, step, trace_to_csv, CompilationState, EnvConfig, PassAction,
    Preset, RewardSpec, SearchError, Strategy, DEFAULT_MAX_STEPS,
};
use crate::seed::derive_seed;

pub use bundle::{verify_bundle, BundleWriter, CurveEntry, Manifest, MANIFEST_FILE};
pub use svg::{render_chart, Series};

/// The committed defaults document; equal to [`ExperimentConfig::default`].
pub const DEFAULTS_JSON: &str = include_str!("../../configs/defaults.json");

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Qcbm(#[from] QcbmError),
    #[error("bundle check failed: {0}")]
    Bundle(String),
}

impl ExperimentError {
    /// Input problems (bad files, bad config) as opposed to runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, ExperimentError::Config(_) | ExperimentError::ConfigParse(_) | ExperimentError::Device(_) | ExperimentError::Circuit(_))
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceConfig {
    pub num_qubits: usize,
    pub grid_side: usize,
    pub layers: usize,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self { num_qubits: 4, grid_side: 4, layers: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub preset: Preset,
    pub num_runs: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { preset: Preset::O3Like, num_runs: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub max_steps: usize,
    /// Number of `layout_random` actions, seeds derived from the master seed.
    pub random_layouts: usize,
    pub fixed_layouts: Vec<Vec<usize>>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { strategy: Strategy::Beam { width: 8 }, max_steps: DEFAULT_MAX_STEPS, random_layouts: 25, fixed_layouts: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingBudget {
    pub epochs: usize,
    pub population: Option<usize>,
    pub sigma0: f64,
    pub shots: Option<u64>,
    pub kl_eps: f64,
    pub inject_mean: bool,
}

impl Default for TrainingBudget {
    fn default() -> Self {
        Self { epochs: 150, population: None, sigma0: 0.5, shots: None, kl_eps: DEFAULT_KL_EPS, inject_mean: true }
    }
}

impl TrainingBudget {
    pub fn with_seed(&self, seed: u64) -> TrainingConfig {
        TrainingConfig {
            epochs: self.epochs,
            population: self.population,
            sigma0: self.sigma0,
            seed,
            kl_eps: self.kl_eps,
            shots: self.shots,
            inject_mean: self.inject_mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceConfig,
    /// Mock device name or path to a device file.
    pub device: String,
    /// Reward of the pass-sequence search.
    pub fom: FigureOfMeritSpec,
    pub baseline: BaselineConfig,
    pub search: SearchConfig,
    pub training: TrainingBudget,
    pub seed: u64,
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: InstanceConfig::default(),
            device: "quito".into(),
            fom: FigureOfMeritSpec::new(FomKind::AppKl),
            baseline: BaselineConfig::default(),
            search: SearchConfig::default(),
            training: TrainingBudget::default(),
            seed: 0,
            output_dir: "results".into(),
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON; absent fields take their defaults.
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::ConfigParse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| ExperimentError::ConfigParse(format!("{}: {e}", path.display())))?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Checks the invariants and resolves the device.
    pub fn validate(&self) -> Result<DeviceModel, ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.baseline.num_runs == 0 {
            return bad("baseline.num_runs must be at least 1");
        }
        if self.training.epochs == 0 {
            return bad("training.epochs must be at least 1");
        }
        if !(self.training.sigma0 > 0.0 && self.training.sigma0.is_finite()) {
            return bad("training.sigma0 must be positive");
        }
        if !(self.training.kl_eps > 0.0) {
            return bad("training.kl_eps must be positive");
        }
        if self.training.population.is_some_and(|p| p < 2) {
            return bad("training.population must be at least 2");
        }
        if self.training.shots == Some(0) {
            return bad("training.shots must be positive");
        }
        if self.instance.layers == 0 {
            return bad("instance.layers must be at least 1");
        }
        if self.search.max_steps == 0 {
            return bad("search.max_steps must be at least 1");
        }
        match &self.search.strategy {
            Strategy::Beam { width: 0 } => return bad("search.strategy.width must be positive"),
            Strategy::Rl(p) if p.episodes == 0 => return bad("search.strategy.episodes must be positive"),
            _ => {}
        }
        make_x_target(self.instance.grid_side, self.instance.num_qubits).map_err(|e| ExperimentError::Config(e.to_string()))?;
        let device = resolve_device(&self.device)?;
        if self.instance.num_qubits > device.num_qubits {
            return Err(ExperimentError::Config(format!(
                "{} logical qubits do not fit on {} ({} qubits)",
                self.instance.num_qubits, device.name, device.num_qubits
            )));
        }
        Ok(device)
    }

    pub fn ansatz_spec(&self) -> AnsatzSpec {
        AnsatzSpec { num_qubits: self.instance.num_qubits, num_layers: self.instance.layers }
    }

    pub fn target(&self) -> Result<TargetDistribution, ExperimentError> {
        Ok(make_x_target(self.instance.grid_side, self.instance.num_qubits)?)
    }

    fn env(&self) -> EnvConfig {
        EnvConfig {
            max_steps: self.search.max_steps,
            random_layout_seeds: (0..self.search.random_layouts as u64).map(|k| derive_seed(self.seed, "search_layout", k)).collect(),
            fixed_layouts: self.search.fixed_layouts.clone(),
        }
    }
}

/// Summary written next to a compiled circuit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileReport {
    pub device: String,
    pub passes: String,
    pub two_qubit_gates: usize,
    pub depth: usize,
    pub swaps: usize,
    pub instructions: usize,
    pub executable: bool,
    pub initial_layout: Option<Vec<usize>>,
    pub final_permutation: Option<Vec<usize>>,
    pub reports: Vec<PassReport>,
}

impl CompileReport {
    pub fn new(state: &CompilationState) -> Self {
        Self {
            device: state.device.name.clone(),
            passes: crate::search::join_passes(&state.history),
            two_qubit_gates: state.circuit.count_two_qubit_gates(),
            depth: state.circuit.depth(),
            swaps: state.swaps_inserted(),
            instructions: state.circuit.len(),
            executable: validate_executable(&state.circuit, &state.device).is_empty(),
            initial_layout: state.initial.clone(),
            final_permutation: state.final_permutation.clone(),
            reports: state.reports.clone(),
        }
    }
}

/// How `compile` picks its passes.
#[derive(Debug, Clone, PartialEq)]
pub enum Pipeline {
    Preset(Preset),
    Passes(Vec<PassAction>),
}

/// Runs a preset or an explicit pass list. A routed pass list that still
/// holds non-native gates (e.g. the SWAPs routing inserted) gets a final
/// `translate`.
pub fn compile_circuit(
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    pipeline: &Pipeline,
    seed: u64,
) -> Result<CompilationState, ExperimentError> {
    Ok(match pipeline {
        Pipeline::Preset(p) => compile_preset(*p, circuit, device, seed)?,
        Pipeline::Passes(list) => {
            let mut state = compile_with(circuit, device, list)?;
            if state.routed && !state.translated {
                state.max_steps = state.max_steps.max(state.steps + 1);
                state = step(&state, &PassAction::Translate)?;
            }
            state
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub min_kl: f64,
    pub argmin_epoch: usize,
    pub epochs: usize,
    pub first_best_kl: f64,
    pub compile: CompileReport,
}

fn to_json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn context(cfg: &ExperimentConfig, seed: u64) -> Result<QcbmContext, ExperimentError> {
    Ok(QcbmContext { target: cfg.target()?, param_names: cfg.ansatz_spec().param_names(), training: cfg.training.with_seed(seed) })
}

fn train_compiled(
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    ctx: &QcbmContext,
) -> Result<Vec<TrainingRecord>, ExperimentError> {
    Ok(train(circuit, &ctx.param_names, &ctx.target, Execution::Noisy(device), &ctx.training)?)
}

/// Compiles the ansatz, trains it on the noisy device and writes
/// `compiled.qc`, `training.csv` and `summary.json` to `out`.
pub fn run_train(cfg: &ExperimentConfig, pipeline: &Pipeline, out: &Path) -> Result<TrainSummary, ExperimentError> {
    let device = cfg.validate()?;
    let ansatz = build_ansatz(&cfg.ansatz_spec())?;
    let state = compile_circuit(&ansatz, &device, pipeline, derive_seed(cfg.seed, "baseline_layout", 0))?;
    if !state.is_terminal() {
        return Err(SearchError::NotTerminal.into());
    }
    let ctx = context(cfg, derive_seed(cfg.seed, "baseline_train", 0))?;
    let records = train_compiled(&state.circuit, &device, &ctx)?;
    let (min, argmin) = min_kl(&records).expect("epochs >= 1");
    let summary = TrainSummary {
        min_kl: min,
        argmin_epoch: argmin,
        epochs: records.len(),
        first_best_kl: records[0].best_kl,
        compile: CompileReport::new(&state),
    };
    let mut w = BundleWriter::create(out)?;
    w.write("compiled.qc", &to_text(&state.circuit))?;
    w.write_curve("training.csv", &records, "train", None)?;
    w.write("summary.json", &to_json_line(&summary))?;
    w.finish()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub min_kl: f64,
    pub argmin_epoch: usize,
    pub two_qubit_gates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSummary {
    pub min_kl: f64,
    pub argmin_epoch: usize,
    pub passes: String,
    pub two_qubit_gates: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Improvements {
    pub vs_best: Option<f64>,
    pub vs_median: Option<f64>,
    pub vs_worst: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub num_runs: usize,
    pub best: RunSummary,
    pub median: RunSummary,
    pub worst: RunSummary,
    pub search: SearchSummary,
    /// Percent; absent when the baseline minimum is not positive.
    pub improvement: Improvements,
}

/// Best, lower-median and worst run by min KL; ties keep run order.
pub fn rank_runs(runs: &[RunSummary]) -> (RunSummary, RunSummary, RunSummary) {
    let mut sorted = runs.to_vec();
    sorted.sort_by(|a, b| a.min_kl.total_cmp(&b.min_kl));
    (sorted[0].clone(), sorted[(sorted.len() - 1) / 2].clone(), sorted[sorted.len() - 1].clone())
}

fn baseline_run(
    cfg: &ExperimentConfig,
    ansatz: &QuantumCircuit,
    device: &DeviceModel,
    run: usize,
) -> Result<(CompilationState, Vec<TrainingRecord>), ExperimentError> {
    let state = compile_preset(cfg.baseline.preset, ansatz, device, derive_seed(cfg.seed, "baseline_layout", run as u64))?;
    let ctx = context(cfg, derive_seed(cfg.seed, "baseline_train", run as u64))?;
    let records = train_compiled(&state.circuit, device, &ctx)?;
    Ok((state, records))
}

/// Baseline runs, the pass-sequence search and the comparison, written
/// to `out` as a bundle (see [`Manifest`]).
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentSummary, ExperimentError> {
    let device = cfg.validate()?;
    let ansatz = build_ansatz(&cfg.ansatz_spec())?;
    let mut w = BundleWriter::create(out)?;
    w.write("config.json", &cfg.to_json())?;

    let baseline: Vec<_> = (0..cfg.baseline.num_runs)
        .into_par_iter()
        .map(|run| baseline_run(cfg, &ansatz, &device, run))
        .collect();
    let width = (cfg.baseline.num_runs - 1).to_string().len().max(2);
    let mut runs = Vec::with_capacity(baseline.len());
    let mut curves = Vec::with_capacity(baseline.len());
    for (run, res) in baseline.into_iter().enumerate() {
        let (state, records) = res?;
        w.write_curve(&format!("baseline/run_{run:0width$}.csv"), &records, "baseline", Some(run))?;
        let (min, argmin) = min_kl(&records).expect("epochs >= 1");
        runs.push(RunSummary { run, min_kl: min, argmin_epoch: argmin, two_qubit_gates: state.circuit.count_two_qubit_gates() });
        curves.push(records);
    }
    let mut spread = String::from("run,min_kl,argmin_epoch\n");
    for r in &runs {
        spread.push_str(&format!("{},{},{}\n", r.run, r.min_kl, r.argmin_epoch));
    }
    w.write("spread.csv", &spread)?;

    let search_seed = derive_seed(cfg.seed, "search_train", 0);
    let ctx = context(cfg, search_seed)?;
    let mut fom = cfg.fom.clone();
    if fom.kind == FomKind::AppKl && fom.epochs.is_none() {
        fom.epochs = Some(cfg.training.epochs);
    }
    let reward = RewardSpec { fom, qcbm: Some(ctx.clone()) };
    let (best, trace) =
        optimize_sequence(&cfg.search.strategy, &ansatz, &device, &reward, &cfg.env(), derive_seed(cfg.seed, "search", 0))?;
    w.write("search/trace.csv", &trace_to_csv(&trace))?;
    w.write("search/compiled.qc", &to_text(&best.circuit))?;
    // A proxy reward leaves the chosen pipeline untrained; train it like a baseline run.
    let reused = reward.fom.kind == FomKind::AppKl
        && reward.fom.epochs == Some(cfg.training.epochs)
        && reward.fom.population.is_none_or(|p| Some(p) == cfg.training.population);
    let search_curve = if reused { best.records.clone() } else { train_compiled(&best.circuit, &device, &ctx)? };
    w.write_curve("search/curve.csv", &search_curve, "search", None)?;
    let (s_min, s_arg) = min_kl(&search_curve).expect("epochs >= 1");
    let search = SearchSummary {
        min_kl: s_min,
        argmin_epoch: s_arg,
        passes: crate::search::join_passes(&best.passes),
        two_qubit_gates: best.circuit.count_two_qubit_gates(),
        reward: best.reward.expect("terminal"),
    };

    let (b, m, wst) = rank_runs(&runs);
    let summary = ExperimentSummary {
        num_runs: runs.len(),
        improvement: Improvements {
            vs_best: improvement(s_min, b.min_kl).ok(),
            vs_median: improvement(s_min, m.min_kl).ok(),
            vs_worst: improvement(s_min, wst.min_kl).ok(),
        },
        best: b,
        median: m.clone(),
        worst: wst,
        search,
    };
    w.write("summary.json", &to_json_line(&summary))?;

    let band: Vec<&[TrainingRecord]> = curves.iter().map(Vec::as_slice).collect();
    let chart = render_chart(
        &band,
        &[
            Series { label: format!("baseline median (run {})", m.run), records: &curves[m.run], dashed: true },
            Series { label: "searched pipeline".into(), records: &search_curve, dashed: false },
        ],
    );
    w.write("chart.svg", &chart)?;
    w.finish()?;
    Ok(summary)
}

/// Default output location for a command when `--out` is absent.
pub fn default_out(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from(&cfg.output_dir)
}
