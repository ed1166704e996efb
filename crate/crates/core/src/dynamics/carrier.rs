//! Carrier Rabi flopping of two ions over thermally occupied modes.

use std::collections::BTreeMap;

use log::warn;

use super::{check_times, EvolutionResult, SpinPopulations};
use crate::error::{domain, Result};
use crate::physcore::MotionalMode;
use crate::real::{lit, Real};
use crate::special::debye_waller_table;

/// Above this many joint Fock configurations the Rabi-factor distribution is
/// binned.
const MAX_ATOMS: usize = 200_000;
const MIN_BIN_WIDTH: f64 = 1e-9;
const BINS_PER_AXIS: f64 = 4000.0;

/// Joint distribution of the per-ion carrier Rabi factors
/// `prod_k e^{-eta_ki^2/2} L_{n_k}(eta_ki^2)` over thermal Fock states of
/// `modes`, as `(weight, factor_ion1, factor_ion2)`.
pub fn rabi_factor_distribution<T: Real>(modes: &[MotionalMode<T>]) -> Result<Vec<(T, T, T)>> {
    let mut atoms = vec![(T::one(), T::one(), T::one())];
    for mode in modes {
        if mode.eta.len() != 2 {
            return domain("carrier flopping needs Lamb-Dicke factors for two ions");
        }
        let th = mode.thermal()?;
        if !th.is_adequate() {
            warn!("mode {:?}: thermal tail mass {} beyond the Fock cutoff", mode.label, th.tail_mass);
        }
        let n_max = th.probabilities.len() - 1;
        let dw1 = debye_waller_table(mode.eta[0], n_max);
        let dw2 = debye_waller_table(mode.eta[1], n_max);
        let levels: Vec<(T, T, T)> = th
            .probabilities
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > T::zero())
            .map(|(n, p)| (*p, dw1[n], dw2[n]))
            .collect();
        let mut next = Vec::with_capacity(atoms.len() * levels.len());
        for (w, a, b) in &atoms {
            for (p, x, y) in &levels {
                next.push((*w * *p, *a * *x, *b * *y));
            }
        }
        atoms = if next.len() > MAX_ATOMS { bin(next) } else { next };
    }
    Ok(atoms)
}

fn bin<T: Real>(atoms: Vec<(T, T, T)>) -> Vec<(T, T, T)> {
    let span = |pick: fn(&(T, T, T)) -> T| {
        let lo = atoms.iter().map(pick).fold(T::infinity(), T::min);
        let hi = atoms.iter().map(pick).fold(T::neg_infinity(), T::max);
        hi - lo
    };
    let range = span(|a| a.1).max(span(|a| a.2));
    let h = (range / lit::<T>(BINS_PER_AXIS)).max(lit(MIN_BIN_WIDTH));
    let mut bins: BTreeMap<(i64, i64), (T, T, T)> = BTreeMap::new();
    for (w, a, b) in atoms {
        let key = ((a / h).round().to_f64_lossy() as i64, (b / h).round().to_f64_lossy() as i64);
        let e = bins.entry(key).or_insert((T::zero(), T::zero(), T::zero()));
        e.0 = e.0 + w;
        e.1 = e.1 + w * a;
        e.2 = e.2 + w * b;
    }
    bins.into_values().filter(|e| e.0 > T::zero()).map(|(w, wa, wb)| (w, wa / w, wb / w)).collect()
}

/// Resonant carrier pulse on both ions with per-ion Rabi rates (`rabi` of
/// length 1 applies the same rate to both), thermally averaged over `modes`.
pub fn carrier_flop<T: Real>(rabi: &[T], modes: &[MotionalMode<T>], times: &[T]) -> Result<EvolutionResult<T>> {
    check_times(times)?;
    let rates = match rabi {
        [r] => [*r, *r],
        [a, b] => [*a, *b],
        _ => return domain("carrier_flop takes one or two Rabi rates"),
    };
    if rates.iter().any(|r| !(*r >= T::zero())) {
        return domain("Rabi rates must be non-negative");
    }
    let atoms = rabi_factor_distribution(modes)?;
    let populations = times
        .iter()
        .map(|&t| {
            let mut p = [T::zero(); 4];
            for (w, f1, f2) in &atoms {
                let s1 = (rates[0] * *f1 * t / T::two()).sin().powi(2);
                let s2 = (rates[1] * *f2 * t / T::two()).sin().powi(2);
                p[0] = p[0] + *w * (T::one() - s1) * (T::one() - s2);
                p[1] = p[1] + *w * (T::one() - s1) * s2;
                p[2] = p[2] + *w * s1 * (T::one() - s2);
                p[3] = p[3] + *w * s1 * s2;
            }
            SpinPopulations(p)
        })
        .collect();
    Ok(EvolutionResult { times: times.to_vec(), populations, final_state: None, final_spin: None, fidelity_vs_target: None })
}
