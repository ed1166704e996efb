//! State containers and time evolution: carrier and sideband flopping over
//! thermal states, the bichromatic gate in a truncated spin (x) Fock space,
//! pulsed sideband cooling and the three-level hybrid sequence.

pub mod carrier;
pub mod cooling;
pub mod drive;
pub mod hybrid;
pub mod ms;
pub mod register;
pub mod sideband;
pub mod spin;

use crate::linalg::CMatrix;
use crate::real::Real;

pub use carrier::carrier_flop;
pub use cooling::{sideband_cool, CoolingPulse};
pub use drive::{Envelope, GateDrive};
pub use hybrid::{hybrid_sequence_unitary, phase_invariant_distance};
pub use ms::{ms_evolve, ms_evolve_with, GatePerturbation, MsOptions, MsPath};
pub use register::{QuantumRegister, RegisterState};
pub use sideband::{sideband_flop, Sideband};

/// Two-ion spin populations in the order `[down-down, down-up, up-down, up-up]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpinPopulations<T: Real>(pub [T; 4]);

impl<T: Real> SpinPopulations<T> {
    pub fn both_down(&self) -> T {
        self.0[0]
    }

    pub fn both_up(&self) -> T {
        self.0[3]
    }

    /// `P(down-up) + P(up-down)`.
    pub fn mixed(&self) -> T {
        self.0[1] + self.0[2]
    }

    pub fn even(&self) -> T {
        self.0[0] + self.0[3]
    }

    /// Excitation probability of ion `i` (0 or 1).
    pub fn ion_up(&self, i: usize) -> T {
        if i == 0 {
            self.0[2] + self.0[3]
        } else {
            self.0[1] + self.0[3]
        }
    }

    pub fn parity(&self) -> T {
        self.even() - self.mixed()
    }

    pub fn total(&self) -> T {
        self.0.iter().copied().sum()
    }
}

/// Populations sampled along an evolution.
#[derive(Clone, Debug)]
pub struct EvolutionResult<T: Real> {
    pub times: Vec<T>,
    pub populations: Vec<SpinPopulations<T>>,
    pub final_state: Option<QuantumRegister<T>>,
    /// Reduced two-ion spin state at the last time.
    pub final_spin: Option<CMatrix<T>>,
    /// Overlap of the final spin state with the ideal-gate image of the
    /// initial spin state.
    pub fidelity_vs_target: Option<T>,
}

impl<T: Real> EvolutionResult<T> {
    pub fn last(&self) -> Option<&SpinPopulations<T>> {
        self.populations.last()
    }
}

pub(crate) fn check_times<T: Real>(times: &[T]) -> crate::Result<()> {
    if times.is_empty() {
        return crate::error::domain("no sample times");
    }
    for w in times.windows(2) {
        if w[1] < w[0] {
            return crate::error::domain("sample times must be non-decreasing");
        }
    }
    if times[0] < T::zero() || !times.iter().all(|t| t.is_finite()) {
        return crate::error::domain("sample times must be finite and non-negative");
    }
    Ok(())
}
