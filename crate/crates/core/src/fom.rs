//! Figures of merit: compiled-circuit proxies, output-distribution metrics,
//! and the application-aware QCBM objective.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::QuantumCircuit;
use crate::device::{validate_executable, DeviceModel, ValidationReport};
use crate::qcbm::{min_kl, objective, train, Execution, QcbmError, TargetDistribution, TrainingConfig, TrainingRecord};
use crate::scalar::Real;
use crate::sim::{simulate_ideal, simulate_noisy, Distribution, SimError};

pub const DEFAULT_KL_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FomError {
    #[error("outcome spaces differ: {0} vs {1} outcomes")]
    DimensionMismatch(usize, usize),
    #[error("smoothing epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("circuit is not executable on the device: {0:?}")]
    NotExecutable(Box<ValidationReport>),
    #[error("app_kl needs a QCBM context")]
    MissingContext,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Qcbm(Box<QcbmError>),
}

impl From<QcbmError> for FomError {
    fn from(e: QcbmError) -> Self {
        FomError::Qcbm(Box::new(e))
    }
}

/// Product of `1 - error` over gates and measured qubits.
pub fn expected_fidelity(circuit: &QuantumCircuit, device: &DeviceModel) -> Result<f64, FomError> {
    let report = validate_executable(circuit, device);
    if !report.is_empty() {
        return Err(FomError::NotExecutable(Box::new(report)));
    }
    let mut f = 1.0;
    for inst in circuit.instructions().iter().filter(|i| i.kind.is_gate()) {
        let e = match inst.qubits[..] {
            [q] => device.error_1q[q],
            [a, b] => device.error_2q_on(a, b).expect("validated coupling"),
            _ => unreachable!("gates have arity 1 or 2"),
        };
        f *= 1.0 - e;
    }
    for q in circuit.measured_qubits() {
        f *= 1.0 - device.readout_error[q];
    }
    Ok(f)
}

fn same_space<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> Result<(), FomError> {
    if p.num_outcomes() != q.num_outcomes() {
        return Err(FomError::DimensionMismatch(p.num_outcomes(), q.num_outcomes()));
    }
    Ok(())
}

/// `Σ_x min(P(x), Q(x))`.
pub fn histogram_intersection<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> Result<T, FomError> {
    same_space(p, q)?;
    Ok(p.probs().iter().zip(q.probs()).map(|(a, b)| a.min(*b)).sum())
}

/// `Σ_{P(x)>0} P(x) ln(P(x) / max(Q(x), eps))`.
pub fn kl_divergence<T: Real>(p: &Distribution<T>, q: &Distribution<T>, eps: T) -> Result<T, FomError> {
    same_space(p, q)?;
    if !(eps > T::zero()) {
        return Err(FomError::BadEpsilon(eps.to_f64_lossy()));
    }
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .filter(|(a, _)| **a > T::zero())
        .map(|(a, b)| *a * (*a / b.max(eps)).ln())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FomKind {
    TwoQubitCount,
    Depth,
    ExpectedFidelity,
    HistogramIntersection,
    AppKl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl FomKind {
    pub fn direction(self) -> Direction {
        match self {
            FomKind::TwoQubitCount | FomKind::Depth | FomKind::AppKl => Direction::Minimize,
            FomKind::ExpectedFidelity | FomKind::HistogramIntersection => Direction::Maximize,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FomKind::TwoQubitCount => "two_qubit_count",
            FomKind::Depth => "depth",
            FomKind::ExpectedFidelity => "expected_fidelity",
            FomKind::HistogramIntersection => "histogram_intersection",
            FomKind::AppKl => "app_kl",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [FomKind::TwoQubitCount, FomKind::Depth, FomKind::ExpectedFidelity, FomKind::HistogramIntersection, FomKind::AppKl]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// Metric plus, for `app_kl`, an optional training budget overriding the context's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureOfMeritSpec {
    pub kind: FomKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
}

impl FigureOfMeritSpec {
    pub fn new(kind: FomKind) -> Self {
        Self { kind, epochs: None, population: None }
    }

    pub fn app_kl(epochs: usize, population: Option<usize>) -> Self {
        Self { kind: FomKind::AppKl, epochs: Some(epochs), population }
    }

    pub fn direction(&self) -> Direction {
        self.kind.direction()
    }

    /// Maps a raw metric value so that larger is better.
    pub fn normalize(&self, raw: f64) -> f64 {
        match self.direction() {
            Direction::Minimize => -raw,
            Direction::Maximize => raw,
        }
    }
}

/// What `app_kl` needs beyond the circuit: the target, the ordered symbol
/// names of the compiled circuit, and the training settings.
#[derive(Debug, Clone)]
pub struct QcbmContext {
    pub target: TargetDistribution,
    pub param_names: Vec<String>,
    pub training: TrainingConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FomOutcome {
    /// Larger is better.
    pub score: f64,
    /// Metric in its natural units.
    pub raw: f64,
    /// Per-epoch training log, `app_kl` only.
    pub records: Vec<TrainingRecord>,
}

pub fn evaluate_fom(
    spec: &FigureOfMeritSpec,
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    ctx: Option<&QcbmContext>,
) -> Result<f64, FomError> {
    Ok(evaluate_fom_detailed(spec, circuit, device, ctx)?.score)
}

pub fn evaluate_fom_detailed(
    spec: &FigureOfMeritSpec,
    circuit: &QuantumCircuit,
    device: &DeviceModel,
    ctx: Option<&QcbmContext>,
) -> Result<FomOutcome, FomError> {
    let mut records = Vec::new();
    let raw = match spec.kind {
        FomKind::TwoQubitCount => circuit.count_two_qubit_gates() as f64,
        FomKind::Depth => circuit.depth() as f64,
        FomKind::ExpectedFidelity => expected_fidelity(circuit, device)?,
        FomKind::HistogramIntersection => {
            // Free symbols are evaluated at zero.
            let zeros: BTreeMap<String, f64> = circuit.free_symbols().into_iter().map(|s| (s, 0.0)).collect();
            let bound = circuit.bind_parameters(&zeros).map_err(QcbmError::from)?;
            let ideal = simulate_ideal::<f64>(&bound)?;
            let noisy = simulate_noisy::<f64>(&bound, device)?;
            histogram_intersection(&ideal, &noisy)?
        }
        FomKind::AppKl => {
            let ctx = ctx.ok_or(FomError::MissingContext)?;
            let mut cfg = ctx.training.clone();
            if let Some(e) = spec.epochs {
                cfg.epochs = e;
            }
            if spec.population.is_some() {
                cfg.population = spec.population;
            }
            let exec = Execution::Noisy(device);
            if cfg.epochs == 0 {
                let zeros = vec![0.0; ctx.param_names.len()];
                objective(circuit, &ctx.param_names, &ctx.target, exec, &zeros, &cfg, cfg.seed)?
            } else {
                records = train(circuit, &ctx.param_names, &ctx.target, exec, &cfg)?;
                min_kl(&records).expect("at least one epoch").0
            }
        }
    };
    Ok(FomOutcome { score: spec.normalize(raw), raw, records })
}
