use std::fmt::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};

use super::SimError;
use crate::scalar::Real;

/// Probability mass over the `2^n` computational-basis outcomes of an
/// `n`-bit register; bit `k` of an outcome index is register bit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T: Real> {
    num_bits: usize,
    probs: Vec<T>,
}

fn tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::eps() * T::lit(64.0))
}

impl<T: Real> Distribution<T> {
    /// Validates non-negativity and normalisation (within 1e-9 for f64).
    pub fn new(probs: Vec<T>) -> Result<Self, SimError> {
        let len = probs.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(SimError::InvalidDistribution(format!("{len} outcomes is not a power of two")));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= T::zero()) || !p.is_finite()) {
            return Err(SimError::InvalidDistribution(format!("bad probability {p}")));
        }
        let total: T = probs.iter().copied().sum();
        if (total - T::one()).abs() > tolerance() {
            return Err(SimError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { num_bits: len.trailing_zeros() as usize, probs })
    }

    /// Clamps rounding-level negatives to zero before validating.
    pub(crate) fn from_raw(mut probs: Vec<T>) -> Result<Self, SimError> {
        for p in probs.iter_mut() {
            if *p < T::zero() {
                *p = T::zero();
            }
        }
        Self::new(probs)
    }

    pub fn uniform(num_bits: usize) -> Self {
        let dim = 1usize << num_bits;
        Self { num_bits, probs: vec![T::one() / T::lit(dim as f64); dim] }
    }

    pub fn point(num_bits: usize, outcome: usize) -> Self {
        let mut probs = vec![T::zero(); 1 << num_bits];
        probs[outcome] = T::one();
        Self { num_bits, probs }
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn num_outcomes(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, outcome: usize) -> T {
        self.probs[outcome]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.iter().enumerate().filter(|(_, p)| **p > T::zero()).map(|(i, _)| i)
    }

    /// Distribution of the bits `bits[0], bits[1], ...` (new bit `k` is old bit `bits[k]`).
    pub fn marginal(&self, bits: &[usize]) -> Self {
        let mut probs = vec![T::zero(); 1 << bits.len()];
        for (x, &p) in self.probs.iter().enumerate() {
            let y = bits.iter().enumerate().fold(0, |acc, (k, &b)| acc | (((x >> b) & 1) << k));
            probs[y] += p;
        }
        Self { num_bits: bits.len(), probs }
    }

    pub fn total_variation(&self, other: &Self) -> T {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (*a - *b).abs()).sum::<T>() / T::lit(2.0)
    }

    /// `outcome,probability` rows in ascending outcome order; outcomes are
    /// bitstrings with register bit 0 rightmost.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,probability\n");
        for (x, p) in self.probs.iter().enumerate() {
            writeln!(out, "{:0width$b},{}", x, p, width = self.num_bits.max(1)).unwrap();
        }
        out
    }
}

/// Multinomial draw of `shots` outcomes; deterministic per seed.
pub fn sample<T: Real>(dist: &Distribution<T>, shots: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; dist.num_outcomes()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (i, p) in dist.probs().iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.to_f64_lossy();
        if i + 1 == counts.len() || mass_left <= p {
            counts[i] = remaining;
            break;
        }
        let q = (p / mass_left).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).expect("valid binomial").sample(&mut rng);
        counts[i] = k;
        remaining -= k;
        mass_left -= p;
    }
    counts
}
