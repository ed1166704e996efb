//! Measurement pipeline: parity, contrast and Bell fidelity, sideband
//! thermometry, Ramsey decay and photon-count readout.

pub mod contrast;
pub mod ramsey;
pub mod readout;
pub mod thermometry;

use std::collections::BTreeMap;

use crate::dynamics::SpinPopulations;
use crate::error::{domain, Result};
use crate::optimize::bisect;

pub use contrast::{fit_parity_contrast, parity_counts, ParityCounts};
pub use ramsey::{fit_ramsey, ramsey_contrast_model, RamseyParams, RamseyPoint};
pub use readout::{calibrate_means, classify_counts, optimal_thresholds, poisson_misclassification, BrightCount, PoissonMeans, Thresholds};
pub use thermometry::{fit_sideband_nbar, FlopPoint, SidebandFitOptions};

const NORMALIZATION_TOL: f64 = 1e-6;

/// `P_uu + P_dd - P_ud - P_du`.
pub fn parity(p: &SpinPopulations<f64>) -> Result<f64> {
    if p.0.iter().any(|x| !(*x >= -NORMALIZATION_TOL)) || (p.total() - 1.0).abs() > NORMALIZATION_TOL {
        return domain(format!("populations must be non-negative and sum to one, got {:?}", p.0));
    }
    Ok(p.parity().clamp(-1.0, 1.0))
}

/// `F = (P_even + C) / 2`.
pub fn bell_fidelity(even_population: f64, contrast: f64) -> Result<f64> {
    let ok = |x: f64| (0.0..=1.0).contains(&x);
    if !ok(even_population) || !ok(contrast) {
        return domain(format!("even population and contrast must lie in [0, 1], got {even_population}, {contrast}"));
    }
    Ok(0.5 * (even_population + contrast))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitResult {
    pub params: BTreeMap<String, f64>,
    /// 68% intervals.
    pub confidence: BTreeMap<String, (f64, f64)>,
    pub log_likelihood: f64,
}

impl FitResult {
    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn interval(&self, name: &str) -> (f64, f64) {
        self.confidence[name]
    }

    pub(crate) fn insert(&mut self, name: &str, value: f64, interval: (f64, f64)) {
        self.params.insert(name.to_string(), value);
        self.confidence.insert(name.to_string(), (interval.0.min(value), interval.1.max(value)));
    }
}

/// Points either side of `best` where `profile` falls `0.5` below
/// `profile(best)`, or the search limits if it never does.
pub(crate) fn profile_interval<F: FnMut(f64) -> f64>(mut profile: F, best: f64, lo: f64, hi: f64) -> (f64, f64) {
    let peak = profile(best);
    let mut drop = |x: f64| profile(x) - (peak - 0.5);
    let tol = 1e-9 * (hi - lo).abs().max(1e-300);
    let left = if best > lo && drop(lo) < 0.0 { bisect(&mut drop, lo, best, tol).unwrap_or(lo) } else { lo };
    let right = if best < hi && drop(hi) < 0.0 { bisect(&mut drop, best, hi, tol).unwrap_or(hi) } else { hi };
    (left, right)
}

/// Outcome of one shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShotOutcome {
    BothDown,
    Mixed,
    BothUp,
    /// Raw photon counts before thresholding.
    Counts(u64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotRecord {
    pub outcome: ShotOutcome,
    /// rad
    pub analysis_phase: f64,
    pub shot_index: u64,
}

impl ShotRecord {
    /// Classified outcome; `down` is the fluorescing level.
    pub fn classified(&self, thresholds: Option<Thresholds>) -> Result<ShotOutcome> {
        match self.outcome {
            ShotOutcome::Counts(c) => {
                let Some(t) = thresholds else {
                    return domain("raw counts need thresholds");
                };
                Ok(match classify_counts(c, t) {
                    BrightCount::Zero => ShotOutcome::BothUp,
                    BrightCount::One => ShotOutcome::Mixed,
                    BrightCount::Two => ShotOutcome::BothDown,
                })
            }
            o => Ok(o),
        }
    }
}
