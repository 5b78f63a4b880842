//! Quantum circuit Born machine: X-shaped target, layered RY/CX ansatz and
//! CMA-ES training against the KL divergence.

use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitError, GateKind, Instruction, ParamExpr, QuantumCircuit};
use crate::cmaes::{Candidate, CmaesError, CmaesState};
use crate::device::DeviceModel;
use crate::fom::{kl_divergence, FomError, DEFAULT_KL_EPS};
use crate::seed::derive_seed;
use crate::sim::{sample, simulate_ideal, simulate_noisy, Distribution, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcbmError {
    #[error("a {side}x{side} grid needs {} outcomes, {num_qubits} qubits give {}", side * side, 1u64 << num_qubits)]
    GridTooLarge { side: usize, num_qubits: usize },
    #[error("grid side must be at least 2, got {0}")]
    GridTooSmall(usize),
    #[error("ansatz needs at least one layer and one qubit")]
    EmptyAnsatz,
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("training needs at least one epoch")]
    NoEpochs,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Cmaes(#[from] CmaesError),
    #[error(transparent)]
    Fom(#[from] Box<FomError>),
}

impl From<FomError> for QcbmError {
    fn from(e: FomError) -> Self {
        QcbmError::Fom(Box::new(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    pub grid_side: usize,
    pub num_qubits: usize,
    pub dist: Distribution<f64>,
}

/// Uniform mass on the two diagonals of an `s x s` grid, tile `(i, j)` at
/// basis index `i*s + j`.
pub fn make_x_target(side: usize, num_qubits: usize) -> Result<TargetDistribution, QcbmError> {
    if side < 2 {
        return Err(QcbmError::GridTooSmall(side));
    }
    if num_qubits >= 63 || side * side > 1usize << num_qubits {
        return Err(QcbmError::GridTooLarge { side, num_qubits });
    }
    let mut probs = vec![0.0; 1 << num_qubits];
    let mut tiles = Vec::new();
    for i in 0..side {
        tiles.push(i * side + i);
        tiles.push(i * side + side - 1 - i);
    }
    tiles.sort_unstable();
    tiles.dedup();
    let mass = 1.0 / tiles.len() as f64;
    for t in tiles {
        probs[t] = mass;
    }
    Ok(TargetDistribution { grid_side: side, num_qubits, dist: Distribution::new(probs)? })
}

impl TargetDistribution {
    pub fn support_size(&self) -> usize {
        self.dist.support().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub num_qubits: usize,
    pub num_layers: usize,
}

impl AnsatzSpec {
    pub fn num_params(&self) -> usize {
        self.num_qubits * self.num_layers
    }

    /// Symbol names in parameter-vector order: `theta_<layer>_<qubit>`.
    pub fn param_names(&self) -> Vec<String> {
        (0..self.num_layers)
            .flat_map(|l| (0..self.num_qubits).map(move |q| format!("theta_{l}_{q}")))
            .collect()
    }
}

/// H on every qubit, then `L` layers of RY on every qubit followed by a CX
/// chain `(0,1), (1,2), ...`, then MEASURE on every qubit.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<QuantumCircuit, QcbmError> {
    let n = spec.num_qubits;
    if n == 0 || spec.num_layers == 0 {
        return Err(QcbmError::EmptyAnsatz);
    }
    let names = spec.param_names();
    let mut c = QuantumCircuit::new(n);
    for q in 0..n {
        c.push(Instruction::single(GateKind::H, q))?;
    }
    for l in 0..spec.num_layers {
        for q in 0..n {
            c.push(Instruction::ry(q, ParamExpr::symbol(&names[l * n + q])))?;
        }
        for q in 0..n.saturating_sub(1) {
            c.push(Instruction::cx(q, q + 1))?;
        }
    }
    c.measure_all()?;
    Ok(c)
}

#[derive(Debug, Clone, Copy)]
pub enum Execution<'a> {
    Ideal,
    Noisy(&'a DeviceModel),
}

/// Outcome distribution of `circuit` with `names` bound to `params`.
pub fn model_distribution(
    circuit: &QuantumCircuit,
    names: &[String],
    params: &[f64],
    exec: Execution<'_>,
) -> Result<Distribution<f64>, QcbmError> {
    if names.len() != params.len() {
        return Err(QcbmError::ParamCount { expected: names.len(), got: params.len() });
    }
    let bound = circuit.bind_ordered(names, params)?;
    Ok(match exec {
        Execution::Ideal => simulate_ideal(&bound)?,
        Execution::Noisy(device) => simulate_noisy(&bound, device)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    /// `None` selects the CMA-ES default for the parameter count.
    pub population: Option<usize>,
    pub sigma0: f64,
    pub seed: u64,
    pub kl_eps: f64,
    /// `None` uses exact probabilities; `Some(n)` estimates them from `n` shots.
    pub shots: Option<u64>,
    /// Evaluate the initial mean as the first candidate of epoch 0.
    pub inject_mean: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self { epochs: 150, population: None, sigma0: 0.5, seed: 0, kl_eps: DEFAULT_KL_EPS, shots: None, inject_mean: true }
    }
}

/// Default epoch budget for an `n`-qubit instance.
pub fn default_epochs(num_qubits: usize) -> usize {
    match num_qubits {
        0..=4 => 150,
        5..=6 => 300,
        _ => 500,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingRecord {
    pub epoch: usize,
    pub best_kl: f64,
    pub pop_best: f64,
    pub pop_median: f64,
    pub params: Vec<f64>,
}

fn lower_median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[(xs.len() - 1) / 2]
}

/// KL of `target` from the model at `params`.
pub fn objective(
    circuit: &QuantumCircuit,
    names: &[String],
    target: &TargetDistribution,
    exec: Execution<'_>,
    params: &[f64],
    cfg: &TrainingConfig,
    sample_seed: u64,
) -> Result<f64, QcbmError> {
    let mut q = model_distribution(circuit, names, params, exec)?;
    if let Some(shots) = cfg.shots {
        let counts = sample(&q, shots, sample_seed);
        q = Distribution::new(counts.iter().map(|c| *c as f64 / shots as f64).collect())?;
    }
    Ok(kl_divergence(&target.dist, &q, cfg.kl_eps)?)
}

/// CMA-ES over the circuit parameters from `θ = 0`, one record per epoch.
pub fn train(
    circuit: &QuantumCircuit,
    names: &[String],
    target: &TargetDistribution,
    exec: Execution<'_>,
    cfg: &TrainingConfig,
) -> Result<Vec<TrainingRecord>, QcbmError> {
    if cfg.epochs == 0 {
        return Err(QcbmError::NoEpochs);
    }
    let mut es = CmaesState::new(&vec![0.0; names.len()], cfg.sigma0, cfg.population, derive_seed(cfg.seed, "cmaes", 0))?;
    let mut records: Vec<TrainingRecord> = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut pop = es.ask();
        if epoch == 0 && cfg.inject_mean {
            pop[0] = es.mean().to_vec();
        }
        let fitness = pop
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let s = derive_seed(cfg.seed, "shots", (epoch * pop.len() + i) as u64);
                objective(circuit, names, target, exec, p, cfg, s)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let (arg, &pop_best) = fitness.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let record = match records.last() {
            Some(prev) if prev.best_kl <= pop_best => TrainingRecord { epoch, pop_best, ..prev.clone() },
            _ => TrainingRecord { epoch, best_kl: pop_best, pop_best, pop_median: 0.0, params: pop[arg].clone() },
        };
        records.push(TrainingRecord { pop_median: lower_median(fitness.clone()), ..record });
        let cands: Vec<Candidate<f64>> = pop.into_iter().zip(fitness).map(|(params, fitness)| Candidate { params, fitness }).collect();
        es.tell(&cands)?;
    }
    Ok(records)
}

/// CSV with header `epoch,best_kl,pop_best,pop_median`.
pub fn records_to_csv(records: &[TrainingRecord]) -> String {
    let mut out = String::from("epoch,best_kl,pop_best,pop_median\n");
    for r in records {
        writeln!(out, "{},{},{},{}", r.epoch, r.best_kl, r.pop_best, r.pop_median).unwrap();
    }
    out
}

/// Lowest best-so-far KL and the first epoch reaching it.
pub fn min_kl(records: &[TrainingRecord]) -> Option<(f64, usize)> {
    let last = records.last()?;
    let epoch = records.iter().find(|r| r.best_kl == last.best_kl).map_or(last.epoch, |r| r.epoch);
    Some((last.best_kl, epoch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::unitary_of;
    use crate::device::mock_device;
    use crate::passes::{merge_rz, route, translate_to_native, trivial_layout};
    use std::f64::consts::LN_2;

    #[test]
    fn x_targets() {
        let t = make_x_target(4, 4).unwrap();
        assert_eq!(t.support_size(), 8);
        assert!(t.dist.support().all(|x| t.dist.prob(x) == 0.125));
        assert_eq!(t.dist.support().collect::<Vec<_>>(), vec![0, 3, 5, 6, 9, 10, 12, 15]);
        assert_eq!(make_x_target(6, 6).unwrap().support_size(), 12);
        assert_eq!(make_x_target(2, 2).unwrap().support_size(), 4);
        assert_eq!(make_x_target(3, 4).unwrap().support_size(), 5);
        assert_eq!(make_x_target(5, 4), Err(QcbmError::GridTooLarge { side: 5, num_qubits: 4 }));
        assert_eq!(make_x_target(1, 4), Err(QcbmError::GridTooSmall(1)));
    }

    #[test]
    fn ansatz_shape() {
        let spec = AnsatzSpec { num_qubits: 4, num_layers: 2 };
        let c = build_ansatz(&spec).unwrap();
        assert_eq!(c.free_symbols().len(), 8);
        assert_eq!(c.free_symbols(), spec.param_names().into_iter().collect());
        assert_eq!(c.count_two_qubit_gates(), 6);
        assert_eq!(c.measured_qubits(), vec![0, 1, 2, 3]);
        assert!(build_ansatz(&AnsatzSpec { num_qubits: 4, num_layers: 0 }).is_err());
    }

    #[test]
    fn zero_angles_give_uniform_and_ln2() {
        let spec = AnsatzSpec { num_qubits: 4, num_layers: 3 };
        let c = build_ansatz(&spec).unwrap();
        let q = model_distribution(&c, &spec.param_names(), &[0.0; 12], Execution::Ideal).unwrap();
        assert!(q.total_variation(&Distribution::uniform(4)) < 1e-14);
        let t = make_x_target(4, 4).unwrap();
        assert!((kl_divergence(&t.dist, &q, 1e-12).unwrap() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn single_rotation_matches_unitary() {
        let spec = AnsatzSpec { num_qubits: 4, num_layers: 1 };
        let c = build_ansatz(&spec).unwrap();
        // RY(π) maps |+> to -|->, which keeps every magnitude equal; π/2 does not.
        let pi = [std::f64::consts::PI, 0.0, 0.0, 0.0];
        let q = model_distribution(&c, &spec.param_names(), &pi, Execution::Ideal).unwrap();
        assert!(q.total_variation(&Distribution::uniform(4)) < 1e-12);
        let theta = [std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0];
        let q = model_distribution(&c, &spec.param_names(), &theta, Execution::Ideal).unwrap();
        assert!(q.total_variation(&Distribution::uniform(4)) > 0.1);
        let u = unitary_of::<f64>(&c.bind_ordered(&spec.param_names(), &theta).unwrap().without_directives()).unwrap();
        for x in 0..16 {
            assert!((u.get(x, 0).norm_sqr() - q.prob(x)).abs() < 1e-12);
        }
    }

    fn compiled_on_quito(spec: &AnsatzSpec) -> (QuantumCircuit, DeviceModel) {
        let quito = mock_device("quito").unwrap();
        let c = build_ansatz(spec).unwrap();
        let (c, _) = translate_to_native(&c, &quito.native_gates).unwrap();
        let (c, _) = merge_rz(&c);
        let routed = route(&c, &quito, &trivial_layout(&c, &quito).unwrap()).unwrap();
        let (c, _) = translate_to_native(&routed.circuit, &quito.native_gates).unwrap();
        (c, quito)
    }

    #[test]
    fn noiseless_compiled_equals_ideal() {
        let spec = AnsatzSpec { num_qubits: 4, num_layers: 2 };
        let (c, quito) = compiled_on_quito(&spec);
        let names = spec.param_names();
        let theta: Vec<f64> = (0..8).map(|i| 0.3 * i as f64 - 1.0).collect();
        let a = model_distribution(&c, &names, &theta, Execution::Noisy(&quito.noiseless())).unwrap();
        let b = model_distribution(&build_ansatz(&spec).unwrap(), &names, &theta, Execution::Ideal).unwrap();
        assert!(a.total_variation(&b) < 1e-10);
    }

    #[test]
    fn training_records() {
        let spec = AnsatzSpec { num_qubits: 4, num_layers: 2 };
        let (c, quito) = compiled_on_quito(&spec);
        let t = make_x_target(4, 4).unwrap();
        let cfg = TrainingConfig { epochs: 1, seed: 3, ..Default::default() };
        let one = train(&c, &spec.param_names(), &t, Execution::Noisy(&quito), &cfg).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].best_kl, one[0].pop_best);
        assert!(one[0].best_kl <= LN_2 + 1e-9);

        let cfg = TrainingConfig { epochs: 8, seed: 3, ..Default::default() };
        let a = train(&c, &spec.param_names(), &t, Execution::Noisy(&quito), &cfg).unwrap();
        let b = train(&c, &spec.param_names(), &t, Execution::Noisy(&quito), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1].best_kl <= w[0].best_kl));
        assert!(a.iter().all(|r| r.pop_best <= r.pop_median));
        let csv = records_to_csv(&a);
        assert!(csv.starts_with("epoch,best_kl,pop_best,pop_median\n"));
        assert_eq!(csv.lines().count(), 9);
        assert_eq!(min_kl(&a).unwrap().0, a[7].best_kl);
    }

    #[test]
    fn finite_shots_are_seeded() {
        let spec = AnsatzSpec { num_qubits: 2, num_layers: 1 };
        let c = build_ansatz(&spec).unwrap();
        let t = make_x_target(2, 2).unwrap();
        let cfg = TrainingConfig { epochs: 3, seed: 1, shots: Some(500), ..Default::default() };
        let a = train(&c, &spec.param_names(), &t, Execution::Ideal, &cfg).unwrap();
        assert_eq!(a, train(&c, &spec.param_names(), &t, Execution::Ideal, &cfg).unwrap());
    }

    #[test]
    fn converges_without_noise() {
        let spec = AnsatzSpec { num_qubits: 4, num_layers: 3 };
        let c = build_ansatz(&spec).unwrap();
        let t = make_x_target(4, 4).unwrap();
        let cfg = TrainingConfig { epochs: 150, seed: 11, ..Default::default() };
        let rec = train(&c, &spec.param_names(), &t, Execution::Ideal, &cfg).unwrap();
        let (best, _) = min_kl(&rec).unwrap();
        assert!(best < 0.15, "best KL {best}");
    }
}
