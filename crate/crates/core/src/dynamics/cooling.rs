//! Pulsed sideband cooling on the Fock ladder.

use crate::error::{domain, Result};
use crate::physcore::ThermalDistribution;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoolingPulse<T> {
    /// Red-sideband pulse length, s.
    pub duration: T,
}

/// Apply red-sideband pulses, each followed by an ideal repump, so that
/// `|n> -> |n-1>` with probability `sin^2(Omega eta sqrt(n) t/2)`.
pub fn sideband_cool<T: Real>(initial: &ThermalDistribution<T>, pulses: &[CoolingPulse<T>], rabi: T, eta: T) -> Result<ThermalDistribution<T>> {
    if pulses.iter().any(|p| !(p.duration >= T::zero())) {
        return domain("pulse durations must be non-negative");
    }
    let mut p = initial.probabilities.clone();
    for pulse in pulses {
        for n in 1..p.len() {
            let s = (rabi * eta.abs() * T::from_usize_lossy(n).sqrt() * pulse.duration / T::two()).sin().powi(2);
            let moved = p[n] * s;
            p[n] = p[n] - moved;
            p[n - 1] = p[n - 1] + moved;
        }
    }
    let mut out = ThermalDistribution::from_probabilities(p)?;
    out.tail_mass = initial.tail_mass;
    Ok(out)
}

/// Pulse lengths `pi/(Omega eta sqrt(n))` for `n = n_start..=1`, the whole
/// sweep repeated `repeats` times.
pub fn swept_schedule<T: Real>(rabi: T, eta: T, n_start: usize, repeats: usize) -> Vec<CoolingPulse<T>> {
    let mut out = Vec::with_capacity(n_start * repeats);
    for _ in 0..repeats {
        for n in (1..=n_start).rev() {
            out.push(CoolingPulse { duration: T::PI() / (rabi * eta.abs() * T::from_usize_lossy(n).sqrt()) });
        }
    }
    out
}
