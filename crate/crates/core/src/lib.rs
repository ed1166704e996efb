//! Simulation and analysis toolkit for two-ion trapped-ion quantum logic:
//! Mølmer-Sørensen gate dynamics in a truncated spin-Fock space, per-source
//! gate error estimators, integrated-optics beam geometry, and the
//! measurement pipeline (parity contrast, thermometry, readout).
//!
//! The numerical core is generic over the scalar type through [`Real`];
//! the aliases below fix it to `f64`, which is what the estimators and
//! fitters use.

pub mod analysis;
pub mod consts;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod noise;
pub mod optics;
pub mod optimize;
pub mod physcore;
pub mod real;
pub mod shots;
pub mod special;

pub use error::{Error, Result};
pub use real::Real;

pub type IonSpecies = physcore::IonSpecies<f64>;
pub type MotionalMode = physcore::MotionalMode<f64>;
pub type ThermalDistribution = physcore::ThermalDistribution<f64>;
pub type GateDrive = dynamics::GateDrive<f64>;
pub type QuantumRegister = dynamics::QuantumRegister<f64>;
pub type EvolutionResult = dynamics::EvolutionResult<f64>;
pub type BeamProfile = optics::BeamProfile<f64>;
pub type LossLedger = optics::LossLedger<f64>;
