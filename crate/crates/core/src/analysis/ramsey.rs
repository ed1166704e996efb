//! Ramsey contrast under a sinusoidal carrier-frequency excursion of random
//! phase plus a slow Gaussian decay.

use super::FitResult;
use crate::error::{Error, Result};
use crate::optimize::{bisect, nelder_mead};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamseyParams {
    /// rad/s
    pub excursion: f64,
    /// s
    pub period: f64,
    /// s
    pub gaussian_t1e: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamseyPoint {
    /// s
    pub time: f64,
    pub contrast: f64,
    pub stderr: f64,
}

const PHASE_SAMPLES: usize = 256;

/// `|<exp(i phi(t, theta))>_theta| exp(-(t/t_1e)^2)` with
/// `phi(t, theta) = int_0^t A sin(2 pi s / T + theta) ds`, averaged over a
/// uniform grid of `theta`.
pub fn ramsey_contrast_model(t: f64, params: &RamseyParams) -> f64 {
    let decay = if params.gaussian_t1e.is_finite() { (-(t / params.gaussian_t1e).powi(2)).exp() } else { 1.0 };
    if params.excursion == 0.0 || t == 0.0 {
        return decay;
    }
    let w = 2.0 * std::f64::consts::PI / params.period;
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..PHASE_SAMPLES {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / PHASE_SAMPLES as f64;
        let phi = params.excursion / w * (theta.cos() - (w * t + theta).cos());
        re += phi.cos();
        im += phi.sin();
    }
    let n = PHASE_SAMPLES as f64;
    (re.hypot(im) / n).min(1.0) * decay
}

fn chi2(data: &[RamseyPoint], p: &RamseyParams) -> f64 {
    if !(p.period > 0.0 && p.gaussian_t1e > 0.0) {
        return f64::INFINITY;
    }
    data.iter()
        .map(|d| {
            let r = (d.contrast - ramsey_contrast_model(d.time, p)) / d.stderr.max(1e-4);
            r * r
        })
        .sum()
}

fn from_vec(x: &[f64]) -> RamseyParams {
    RamseyParams { excursion: x[0].abs(), period: x[1], gaussian_t1e: x[2] }
}

/// Weighted least squares from `start`. Intervals are conditional
/// (`Delta chi^2 = 1` with the other parameters held at their optimum).
pub fn fit_ramsey(data: &[RamseyPoint], start: &RamseyParams) -> Result<FitResult> {
    if data.len() < 4 {
        return Err(Error::DegenerateData("Ramsey fit needs at least four points".into()));
    }
    let x0 = [start.excursion, start.period, start.gaussian_t1e];
    let scale = [0.2 * start.excursion.max(1.0), 0.05 * start.period, 0.2 * start.gaussian_t1e];
    let (mut x, mut best) = nelder_mead(|v| chi2(data, &from_vec(v)), &x0, &scale, 1e-12, 4000);
    for _ in 0..3 {
        let s: Vec<f64> = x.iter().map(|v| 0.05 * v.abs().max(1e-6)).collect();
        let (nx, nb) = nelder_mead(|v| chi2(data, &from_vec(v)), &x, &s, 1e-14, 4000);
        if nb >= best - 1e-12 {
            break;
        }
        x = nx;
        best = nb;
    }
    x[0] = x[0].abs();
    let mut fit = FitResult { log_likelihood: -0.5 * best, ..Default::default() };
    for (i, name) in ["excursion", "period", "gaussian_t1e"].iter().enumerate() {
        let along = |v: f64| {
            let mut y = x.clone();
            y[i] = v;
            chi2(data, &from_vec(&y)) - best - 1.0
        };
        let step = 0.5 * x[i].abs().max(1e-9);
        let edge = |dir: f64| -> f64 {
            let mut s = step;
            for _ in 0..40 {
                let v = x[i] + dir * s;
                if along(v) > 0.0 {
                    return bisect(along, x[i], v, 1e-10 * step).unwrap_or(v);
                }
                s *= 2.0;
            }
            x[i] + dir * s
        };
        fit.insert(name, x[i], (edge(-1.0), edge(1.0)));
    }
    Ok(fit)
}
