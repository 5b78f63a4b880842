//! Quantum circuit compilation with pass-sequence search rewarded by an
//! application figure of merit (QCBM training quality on a noisy device).
//!
//! Numeric kernels (simulators, distributions, CMA-ES) are generic over
//! [`scalar::Real`]; the aliases below fix the scalar type.

pub mod circuit;
mod kernels;
pub mod scalar;
pub mod device;
pub mod passes;
mod linalg;
pub mod sim;
pub mod cmaes;
pub mod fom;
pub mod qcbm;
pub mod seed;
pub mod search;
pub mod experiment;

pub type Distribution64 = sim::Distribution<f64>;
pub type Distribution32 = sim::Distribution<f32>;
pub type StateVector64 = sim::StateVector<f64>;
pub type StateVector32 = sim::StateVector<f32>;
pub type DensityState64 = sim::DensityState<f64>;
pub type DensityState32 = sim::DensityState<f32>;
pub type Cmaes64 = cmaes::CmaesState<f64>;
pub type Cmaes32 = cmaes::CmaesState<f32>;
