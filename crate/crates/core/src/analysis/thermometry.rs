//! Mean phonon number from blue-sideband flopping.

use super::{profile_interval, FitResult};
use crate::dynamics::{sideband_flop, Sideband};
use crate::error::{domain, Error, Result};
use crate::optimize::grid_then_brent;
use crate::physcore::{thermal_distribution, truncation_for_tail};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlopPoint {
    /// s
    pub time: f64,
    pub excitation: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SidebandFitOptions {
    pub nbar_max: f64,
    /// Also fit the carrier Rabi rate, within this fractional range of the
    /// supplied value.
    pub rabi_range: Option<f64>,
}

impl Default for SidebandFitOptions {
    fn default() -> Self {
        Self { nbar_max: 5.0, rabi_range: None }
    }
}

const STDERR_FLOOR: f64 = 1e-4;

fn chi2(data: &[FlopPoint], times: &[f64], rabi: f64, eta: f64, nbar: f64) -> f64 {
    let n_max = truncation_for_tail(nbar, 1e-10).max(2);
    let dist = match thermal_distribution(nbar, n_max) {
        Ok(d) => d,
        Err(_) => return f64::INFINITY,
    };
    let model = match sideband_flop(rabi, eta, &dist, Sideband::Blue, times) {
        Ok(m) => m,
        Err(_) => return f64::INFINITY,
    };
    data.iter()
        .zip(&model.excitation)
        .map(|(d, m)| {
            let r = (d.excitation - m) / d.stderr.max(STDERR_FLOOR);
            r * r
        })
        .sum()
}

/// Weighted least squares for `nbar` (and optionally the Rabi rate) against
/// the thermal blue-sideband model. Intervals at `Delta chi^2 = 1`.
pub fn fit_sideband_nbar(data: &[FlopPoint], rabi: f64, eta: f64, options: SidebandFitOptions) -> Result<FitResult> {
    if data.len() < 2 {
        return Err(Error::DegenerateData("sideband fit needs at least two points".into()));
    }
    if !(rabi > 0.0 && eta > 0.0) {
        return domain("Rabi rate and Lamb-Dicke factor must be positive");
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time));
    let t_max = sorted.last().map(|p| p.time).unwrap_or(0.0);
    if t_max * rabi * eta < std::f64::consts::FRAC_PI_2 {
        return Err(Error::NonIdentifiable(format!(
            "data span {t_max:.3e} s covers less than a quarter sideband period"
        )));
    }
    let times: Vec<f64> = sorted.iter().map(|p| p.time).collect();
    let nbar_max = options.nbar_max;

    let best_rabi = |nbar: f64| -> (f64, f64) {
        match options.rabi_range {
            None => (rabi, chi2(&sorted, &times, rabi, eta, nbar)),
            Some(r) => grid_then_brent(|w| chi2(&sorted, &times, w, eta, nbar), rabi * (1.0 - r), rabi * (1.0 + r), 21, 1e-10 * rabi),
        }
    };
    let (nbar, c2) = grid_then_brent(|n| best_rabi(n).1, 0.0, nbar_max, 41, 1e-9);
    let (w, _) = best_rabi(nbar);
    let nbar_int = profile_interval(|n| -0.5 * best_rabi(n).1, nbar, 0.0, nbar_max);

    let mut fit = FitResult { log_likelihood: -0.5 * c2, ..Default::default() };
    fit.insert("nbar", nbar, nbar_int);
    if options.rabi_range.is_some() {
        let r = options.rabi_range.unwrap_or(0.0);
        let w_int = profile_interval(|x| -0.5 * chi2(&sorted, &times, x, eta, nbar), w, rabi * (1.0 - r), rabi * (1.0 + r));
        fit.insert("rabi", w, w_int);
    }
    Ok(fit)
}
