//! Covariance matrix adaptation evolution strategy, minimizing.
//!
//! Strategy constants (d = dimension, λ = population, μ = ⌊λ/2⌋):
//!
//! | constant | value |
//! |----------|-------|
//! | λ (default) | 4 + ⌊3 ln d⌋ |
//! | w'_i | ln((λ+1)/2) − ln i, i = 1..μ, then normalised to Σw = 1 |
//! | μ_eff | 1 / Σ w_i² |
//! | c_σ | (μ_eff + 2) / (d + μ_eff + 5) |
//! | d_σ | 1 + 2·max(0, √((μ_eff − 1)/(d + 1)) − 1) + c_σ |
//! | c_c | (4 + μ_eff/d) / (d + 4 + 2μ_eff/d) |
//! | c_1 | 2 / ((d + 1.3)² + μ_eff) |
//! | c_μ | min(1 − c_1, 2(μ_eff − 2 + 1/μ_eff) / ((d + 2)² + μ_eff)) |
//! | E‖N(0,I)‖ | √d (1 − 1/(4d) + 1/(21d²)) |
//!
//! The eigendecomposition of C is recomputed after every `tell`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::symmetric_eigen;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmaesError {
    #[error("step size must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("population size must be at least 2, got {0}")]
    BadPopulation(usize),
    #[error("expected {expected} candidates, got {got}")]
    WrongPopulationSize { expected: usize, got: usize },
    #[error("candidate {0} has a non-finite fitness")]
    NonFiniteFitness(usize),
    #[error("candidate {0} has the wrong dimension")]
    CandidateDimension(usize),
    #[error("budget {budget} is smaller than one generation ({lambda})")]
    BudgetTooSmall { budget: usize, lambda: usize },
}

/// Default population size for dimension `d`.
pub fn default_population(d: usize) -> usize {
    4 + (3.0 * (d as f64).ln()).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constants<T> {
    pub mu_eff: T,
    pub c_sigma: T,
    pub d_sigma: T,
    pub c_c: T,
    pub c_1: T,
    pub c_mu: T,
    pub chi_n: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T> {
    pub params: Vec<T>,
    pub fitness: T,
}

#[derive(Debug, Clone)]
pub struct CmaesState<T: Real> {
    dim: usize,
    mean: Vec<T>,
    sigma: T,
    /// Row-major `d x d`.
    cov: Vec<T>,
    p_sigma: Vec<T>,
    p_c: Vec<T>,
    generation: usize,
    lambda: usize,
    weights: Vec<T>,
    consts: Constants<T>,
    // C = B diag(D²) Bᵀ, B column k is the k-th eigenvector.
    basis: Vec<T>,
    scales: Vec<T>,
    rng: ChaCha8Rng,
}

impl<T: Real> CmaesState<T> {
    pub fn new(x0: &[T], sigma0: T, lambda: Option<usize>, seed: u64) -> Result<Self, CmaesError> {
        let d = x0.len();
        if d == 0 {
            return Err(CmaesError::BadDimension);
        }
        if !(sigma0 > T::zero()) || !sigma0.is_finite() {
            return Err(CmaesError::BadSigma(sigma0.to_f64_lossy()));
        }
        let lambda = lambda.unwrap_or_else(|| default_population(d));
        if lambda < 2 {
            return Err(CmaesError::BadPopulation(lambda));
        }
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu).map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln()).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let mu_eff = 1.0 / w.iter().map(|x| x * x).sum::<f64>();
        let df = d as f64;
        let c_sigma = (mu_eff + 2.0) / (df + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (df + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / df) / (df + 4.0 + 2.0 * mu_eff / df);
        let c_1 = 2.0 / ((df + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((df + 2.0).powi(2) + mu_eff));
        let chi_n = df.sqrt() * (1.0 - 1.0 / (4.0 * df) + 1.0 / (21.0 * df * df));
        let mut eye = vec![T::zero(); d * d];
        for i in 0..d {
            eye[i * d + i] = T::one();
        }
        Ok(Self {
            dim: d,
            mean: x0.to_vec(),
            sigma: sigma0,
            cov: eye.clone(),
            p_sigma: vec![T::zero(); d],
            p_c: vec![T::zero(); d],
            generation: 0,
            lambda,
            weights: w.into_iter().map(T::lit).collect(),
            consts: Constants {
                mu_eff: T::lit(mu_eff),
                c_sigma: T::lit(c_sigma),
                d_sigma: T::lit(d_sigma),
                c_c: T::lit(c_c),
                c_1: T::lit(c_1),
                c_mu: T::lit(c_mu),
                chi_n: T::lit(chi_n),
            },
            basis: eye,
            scales: vec![T::one(); d],
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn covariance(&self) -> &[T] {
        &self.cov
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population_size(&self) -> usize {
        self.lambda
    }

    pub fn parents(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn constants(&self) -> &Constants<T> {
        &self.consts
    }

    pub fn paths(&self) -> (&[T], &[T]) {
        (&self.p_sigma, &self.p_c)
    }

    /// Eigenvalues of C from the last decomposition.
    pub fn eigenvalues(&self) -> Vec<T> {
        self.scales.iter().map(|s| *s * *s).collect()
    }

    /// Draws λ points `m + σ B D z`.
    pub fn ask(&mut self) -> Vec<Vec<T>> {
        let d = self.dim;
        (0..self.lambda)
            .map(|_| {
                let z: Vec<T> = (0..d).map(|_| T::lit(StandardNormal.sample(&mut self.rng))).collect();
                (0..d)
                    .map(|i| {
                        let bdz: T = (0..d).map(|k| self.basis[i * d + k] * self.scales[k] * z[k]).sum();
                        self.mean[i] + self.sigma * bdz
                    })
                    .collect()
            })
            .collect()
    }

    /// `C^{-1/2} v`.
    fn inv_sqrt_times(&self, v: &[T]) -> Vec<T> {
        let d = self.dim;
        let bt_v: Vec<T> = (0..d).map(|k| (0..d).map(|i| self.basis[i * d + k] * v[i]).sum::<T>() / self.scales[k]).collect();
        (0..d).map(|i| (0..d).map(|k| self.basis[i * d + k] * bt_v[k]).sum()).collect()
    }

    pub fn tell(&mut self, candidates: &[Candidate<T>]) -> Result<(), CmaesError> {
        let d = self.dim;
        if candidates.len() != self.lambda {
            return Err(CmaesError::WrongPopulationSize { expected: self.lambda, got: candidates.len() });
        }
        for (i, c) in candidates.iter().enumerate() {
            if !c.fitness.is_finite() {
                return Err(CmaesError::NonFiniteFitness(i));
            }
            if c.params.len() != d {
                return Err(CmaesError::CandidateDimension(i));
            }
        }
        let mut order: Vec<usize> = (0..self.lambda).collect();
        order.sort_by(|&a, &b| candidates[a].fitness.partial_cmp(&candidates[b].fitness).unwrap());

        let ys: Vec<Vec<T>> = order[..self.weights.len()]
            .iter()
            .map(|&i| candidates[i].params.iter().zip(&self.mean).map(|(x, m)| (*x - *m) / self.sigma).collect())
            .collect();
        let y_w: Vec<T> = (0..d).map(|j| self.weights.iter().zip(&ys).map(|(w, y)| *w * y[j]).sum()).collect();
        for (m, y) in self.mean.iter_mut().zip(&y_w) {
            *m += self.sigma * *y;
        }

        let k = &self.consts;
        let one = T::one();
        let two = T::lit(2.0);
        let cs_norm = (k.c_sigma * (two - k.c_sigma) * k.mu_eff).sqrt();
        let c_inv_y = self.inv_sqrt_times(&y_w);
        for (p, v) in self.p_sigma.iter_mut().zip(&c_inv_y) {
            *p = (one - k.c_sigma) * *p + cs_norm * *v;
        }
        let ps_norm = self.p_sigma.iter().map(|x| *x * *x).sum::<T>().sqrt();
        let decay = one - (one - k.c_sigma).powi(2 * (self.generation as i32 + 1));
        let threshold = (T::lit(1.4) + two / T::lit(d as f64 + 1.0)) * k.chi_n;
        let h_sigma = if ps_norm / decay.sqrt() < threshold { one } else { T::zero() };
        let cc_norm = (k.c_c * (two - k.c_c) * k.mu_eff).sqrt();
        for (p, y) in self.p_c.iter_mut().zip(&y_w) {
            *p = (one - k.c_c) * *p + h_sigma * cc_norm * *y;
        }

        let keep = one - k.c_1 - k.c_mu + (one - h_sigma) * k.c_1 * k.c_c * (two - k.c_c);
        for i in 0..d {
            for j in 0..=i {
                let rank_mu: T = self.weights.iter().zip(&ys).map(|(w, y)| *w * y[i] * y[j]).sum();
                let v = keep * self.cov[i * d + j] + k.c_1 * self.p_c[i] * self.p_c[j] + k.c_mu * rank_mu;
                self.cov[i * d + j] = v;
                self.cov[j * d + i] = v;
            }
        }
        self.sigma = self.sigma * ((k.c_sigma / k.d_sigma) * (ps_norm / k.chi_n - one)).exp();
        self.generation += 1;
        self.decompose();
        Ok(())
    }

    fn decompose(&mut self) {
        let (w, v) = symmetric_eigen(&self.cov, self.dim);
        let top = w.iter().copied().fold(T::zero(), T::max);
        let floor = top * T::eps();
        self.scales = w.into_iter().map(|x| x.max(floor).sqrt()).collect();
        self.basis = v;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSummary<T> {
    pub evaluations: usize,
    pub population_best: T,
    pub best_ever: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult<T> {
    pub best_params: Vec<T>,
    pub best_fitness: T,
    pub history: Vec<GenerationSummary<T>>,
}

/// Ask/evaluate/tell loop for `⌊budget / λ⌋` generations.
pub fn optimize<T: Real>(
    mut objective: impl FnMut(&[T]) -> T,
    x0: &[T],
    sigma0: T,
    budget: usize,
    seed: u64,
) -> Result<OptimizeResult<T>, CmaesError> {
    let mut es = CmaesState::new(x0, sigma0, None, seed)?;
    let lambda = es.population_size();
    if budget < lambda {
        return Err(CmaesError::BudgetTooSmall { budget, lambda });
    }
    let mut best: Option<Candidate<T>> = None;
    let mut history = Vec::new();
    for g in 0..budget / lambda {
        let pop: Vec<Candidate<T>> = es
            .ask()
            .into_iter()
            .map(|params| {
                let fitness = objective(&params);
                Candidate { params, fitness }
            })
            .collect();
        let gen_best = pop.iter().min_by(|a, b| a.fitness.partial_cmp(&b.fitness).unwrap()).unwrap();
        if best.as_ref().map_or(true, |b| gen_best.fitness < b.fitness) {
            best = Some(gen_best.clone());
        }
        let best_ever = best.as_ref().unwrap().fitness;
        history.push(GenerationSummary { evaluations: (g + 1) * lambda, population_best: gen_best.fitness, best_ever });
        es.tell(&pop)?;
    }
    let best = best.unwrap();
    Ok(OptimizeResult { best_params: best.params, best_fitness: best.fitness, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn init_defaults() {
        let es = CmaesState::new(&[0.0; 8], 0.5, None, 0).unwrap();
        assert_eq!(es.population_size(), 10);
        assert_eq!(es.parents(), 5);
        let w = es.weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w.windows(2).all(|p| p[0] > p[1]) && w[w.len() - 1] > 0.0);
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(es.covariance()[i * 8 + j], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn init_errors() {
        assert_eq!(CmaesState::new(&[0.0; 3], 0.5, Some(1), 0).unwrap_err(), CmaesError::BadPopulation(1));
        assert_eq!(CmaesState::<f64>::new(&[], 0.5, None, 0).unwrap_err(), CmaesError::BadDimension);
        assert!(matches!(CmaesState::new(&[0.0], -1.0, None, 0), Err(CmaesError::BadSigma(_))));
        assert!(matches!(CmaesState::new(&[0.0], f64::NAN, None, 0), Err(CmaesError::BadSigma(_))));
    }

    #[test]
    fn ask_is_deterministic_and_collapses_with_sigma() {
        let mut a = CmaesState::new(&[1.0, 2.0], 0.3, None, 7).unwrap();
        let mut b = a.clone();
        assert_eq!(a.ask(), b.ask());
        let mut tiny = CmaesState::new(&[1.0, 2.0], 1e-300, None, 7).unwrap();
        for x in tiny.ask() {
            assert_eq!(x, vec![1.0, 2.0]);
        }
    }

    #[test]
    fn sample_mean_clt() {
        let mut es = CmaesState::new(&[0.5, -1.0, 2.0], 0.7, Some(100_000), 3).unwrap();
        let pop = es.ask();
        let n = pop.len() as f64;
        for j in 0..3 {
            let m: f64 = pop.iter().map(|x| x[j]).sum::<f64>() / n;
            assert!((m - es.mean()[j]).abs() < 5.0 * 0.7 / n.sqrt());
        }
    }

    #[test]
    fn tell_errors_and_fixed_mean() {
        let mut es = CmaesState::new(&[0.2, 0.4], 0.5, None, 1).unwrap();
        let same: Vec<_> = (0..es.population_size()).map(|i| Candidate { params: vec![0.2, 0.4], fitness: i as f64 }).collect();
        assert!(matches!(es.clone().tell(&same[1..]), Err(CmaesError::WrongPopulationSize { .. })));
        let mut bad = same.clone();
        bad[2].fitness = f64::NAN;
        assert_eq!(es.clone().tell(&bad), Err(CmaesError::NonFiniteFitness(2)));
        es.tell(&same).unwrap();
        assert_eq!(es.mean(), &[0.2, 0.4]);
        assert_eq!(es.generation(), 1);
    }

    #[test]
    fn sphere_benchmark() {
        let r = optimize(sphere, &[1.0; 5], 0.5, 5000, 1).unwrap();
        assert!(r.best_fitness < 1e-10, "{}", r.best_fitness);
        assert!(r.history.windows(2).all(|w| w[1].best_ever <= w[0].best_ever));
    }

    #[test]
    fn rosenbrock_benchmark() {
        let rosen = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = optimize(rosen, &[-1.2, 1.0], 0.5, 20000, 1).unwrap();
        assert!(r.best_fitness < 1e-6, "{}", r.best_fitness);
    }

    #[test]
    fn constant_objective_and_single_generation() {
        let r = optimize(|_: &[f64]| 3.5, &[0.0; 4], 0.5, 100, 0).unwrap();
        assert_eq!(r.best_fitness, 3.5);
        let lambda = default_population(4);
        let r = optimize(sphere, &[1.0; 4], 0.5, lambda, 0).unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.best_fitness, r.history[0].population_best);
        assert!(matches!(optimize(sphere, &[1.0; 4], 0.5, lambda - 1, 0), Err(CmaesError::BudgetTooSmall { .. })));
    }

    #[test]
    fn covariance_stays_positive_definite() {
        let mut es = CmaesState::new(&[1.0; 4], 0.5, None, 5).unwrap();
        for _ in 0..1000 {
            let pop: Vec<_> = es.ask().into_iter().map(|p| Candidate { fitness: sphere(&p), params: p }).collect();
            es.tell(&pop).unwrap();
            let c = es.covariance();
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(c[i * 4 + j], c[j * 4 + i]);
                }
            }
            assert!(es.eigenvalues().iter().all(|v| *v > 0.0));
            assert!(es.sigma() > 0.0);
        }
    }

    #[test]
    fn single_precision_runs() {
        let r = optimize(|x: &[f32]| x.iter().map(|v| v * v).sum(), &[1.0f32; 3], 0.5, 600, 2).unwrap();
        assert!(r.best_fitness < 1e-4);
    }
}
