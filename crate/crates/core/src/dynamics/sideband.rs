//! First-order sideband flopping of one ion on one thermally occupied mode.

use super::check_times;
use crate::error::{domain, Result};
use crate::physcore::ThermalDistribution;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sideband {
    Blue,
    Red,
}

/// Excitation probability of a single ion versus pulse length.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationCurve<T: Real> {
    pub times: Vec<T>,
    pub excitation: Vec<T>,
}

/// `P_up(t) = sum_n p_n sin^2(Omega_n t / 2)` with `Omega_{n,n+1} = Omega eta sqrt(n+1)`
/// (blue) or `Omega_{n,n-1} = Omega eta sqrt(n)` (red).
pub fn sideband_flop<T: Real>(rabi: T, eta: T, dist: &ThermalDistribution<T>, sideband: Sideband, times: &[T]) -> Result<ExcitationCurve<T>> {
    check_times(times)?;
    if !(rabi >= T::zero()) {
        return domain("Rabi rate must be non-negative");
    }
    let rates: Vec<(T, T)> = dist
        .probabilities
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > T::zero())
        .map(|(n, p)| {
            let k = match sideband {
                Sideband::Blue => n + 1,
                Sideband::Red => n,
            };
            (*p, rabi * eta.abs() * T::from_usize_lossy(k).sqrt())
        })
        .collect();
    let excitation = times
        .iter()
        .map(|&t| rates.iter().map(|(p, w)| *p * (*w * t / T::two()).sin().powi(2)).sum())
        .collect();
    Ok(ExcitationCurve { times: times.to_vec(), excitation })
}
