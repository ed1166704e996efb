//! Maximum-likelihood parity contrast from per-phase trinomial counts.

use std::collections::BTreeMap;

use super::{profile_interval, FitResult, ShotOutcome, ShotRecord, Thresholds};
use crate::error::{Error, Result};
use crate::optimize::{brent_min, grid_then_brent};

/// Outcome tallies at one analysis phase. Counts may be fractional to pass
/// exact frequencies.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ParityCounts {
    pub phase: f64,
    pub both_down: f64,
    pub both_up: f64,
    pub mixed: f64,
}

impl ParityCounts {
    pub fn even(&self) -> f64 {
        self.both_down + self.both_up
    }
}

/// Group shot records by analysis phase, in order of first appearance.
pub fn parity_counts(shots: &[ShotRecord], thresholds: Option<Thresholds>) -> Result<Vec<ParityCounts>> {
    let mut order: Vec<u64> = Vec::new();
    let mut groups: BTreeMap<u64, ParityCounts> = BTreeMap::new();
    for s in shots {
        let key = s.analysis_phase.to_bits();
        let g = groups.entry(key).or_insert_with(|| {
            order.push(key);
            ParityCounts { phase: s.analysis_phase, ..Default::default() }
        });
        match s.classified(thresholds)? {
            ShotOutcome::BothDown => g.both_down += 1.0,
            ShotOutcome::BothUp => g.both_up += 1.0,
            _ => g.mixed += 1.0,
        }
    }
    Ok(order.into_iter().map(|k| groups[&k]).collect())
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

struct Parity<'a> {
    data: &'a [ParityCounts],
}

impl Parity<'_> {
    /// Even-population model `(1 + a sin 2phi + b cos 2phi) / 2`.
    fn loglik_ab(&self, a: f64, b: f64) -> f64 {
        self.data
            .iter()
            .map(|d| {
                let p = 0.5 * (1.0 + a * (2.0 * d.phase).sin() + b * (2.0 * d.phase).cos());
                if (p <= 0.0 && d.even() > 0.0) || (p >= 1.0 && d.mixed > 0.0) {
                    return f64::NEG_INFINITY;
                }
                xlogy(d.even(), p) + xlogy(d.mixed, 1.0 - p)
            })
            .sum()
    }

    fn loglik(&self, c: f64, phi0: f64) -> f64 {
        self.loglik_ab(c * phi0.cos(), c * phi0.sin())
    }

    fn newton(&self) -> (f64, f64) {
        let (mut a, mut b) = (0.0, 0.0);
        let mut l = self.loglik_ab(a, b);
        for _ in 0..200 {
            let (mut g, mut h) = ([0.0; 2], [0.0; 3]);
            for d in self.data {
                let (s, c) = ((2.0 * d.phase).sin(), (2.0 * d.phase).cos());
                let p = 0.5 * (1.0 + a * s + b * c);
                let q = 1.0 - p;
                let g1 = 0.5 * (d.even() / p - d.mixed / q);
                let h1 = 0.25 * (d.even() / (p * p) + d.mixed / (q * q));
                g[0] += g1 * s;
                g[1] += g1 * c;
                h[0] += h1 * s * s;
                h[1] += h1 * s * c;
                h[2] += h1 * c * c;
            }
            let det = h[0] * h[2] - h[1] * h[1];
            if !(det > 0.0) {
                break;
            }
            let da = (h[2] * g[0] - h[1] * g[1]) / det;
            let db = (h[0] * g[1] - h[1] * g[0]) / det;
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-12 {
                let (na, nb) = (a + t * da, b + t * db);
                let nl = if na * na + nb * nb < 1.0 { self.loglik_ab(na, nb) } else { f64::NEG_INFINITY };
                if nl >= l {
                    moved = nl > l || (t * da).abs() + (t * db).abs() > 0.0;
                    a = na;
                    b = nb;
                    l = nl;
                    break;
                }
                t *= 0.5;
            }
            if !moved || (t * da).hypot(t * db) < 1e-15 {
                break;
            }
        }
        (a.hypot(b), b.atan2(a))
    }

    /// Best `phi0` at fixed contrast.
    fn best_phase(&self, c: f64, around: f64) -> (f64, f64) {
        let (x, v) = grid_then_brent(|p| -self.loglik(c, p), around - std::f64::consts::PI, around + std::f64::consts::PI, 73, 1e-12);
        (x, -v)
    }

    fn best_contrast(&self, phi0: f64) -> (f64, f64) {
        let (x, v) = brent_min(|c| -self.loglik(c, phi0), 0.0, 1.0, 1e-12);
        let at_one = self.loglik(1.0, phi0);
        if at_one > -v {
            (1.0, at_one)
        } else {
            (x, -v)
        }
    }
}

/// Fit `P(phi) = C sin(2 phi + phi0)` by maximum likelihood on the trinomial
/// outcome counts. The split of even outcomes between both-down and both-up
/// is a phase-independent nuisance `q`, profiled in closed form. Intervals
/// are profile-likelihood intervals at `Delta log L = 0.5`.
pub fn fit_parity_contrast(data: &[ParityCounts]) -> Result<FitResult> {
    let mut phases: Vec<f64> = data.iter().filter(|d| d.even() + d.mixed > 0.0).map(|d| (2.0 * d.phase).rem_euclid(2.0 * std::f64::consts::PI)).collect();
    phases.sort_by(f64::total_cmp);
    phases.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if phases.len() < 2 {
        return Err(Error::DegenerateData("parity fit needs at least two distinct analysis phases".into()));
    }
    if data.iter().any(|d| d.both_down < 0.0 || d.both_up < 0.0 || d.mixed < 0.0) {
        return Err(Error::DegenerateData("negative outcome counts".into()));
    }
    let model = Parity { data };
    let (mut c, mut phi0) = model.newton();
    // The unconstrained optimum may lie outside the physical disk.
    if c > 1.0 - 1e-6 {
        let (p, _) = model.best_phase(1.0, phi0);
        if model.loglik(1.0, p) > model.loglik(c, phi0) {
            c = 1.0;
            phi0 = p;
        }
    }
    if c < 1e-12 {
        c = 0.0;
        phi0 = 0.0;
    }
    let l = model.loglik(c, phi0);
    let c_int = profile_interval(|x| model.best_phase(x, phi0).1, c, 0.0, 1.0);
    let phi_int = if c > 0.0 {
        profile_interval(|p| model.best_contrast(p).1, phi0, phi0 - std::f64::consts::FRAC_PI_2, phi0 + std::f64::consts::FRAC_PI_2)
    } else {
        (phi0 - std::f64::consts::PI, phi0 + std::f64::consts::PI)
    };

    let dd: f64 = data.iter().map(|d| d.both_down).sum();
    let uu: f64 = data.iter().map(|d| d.both_up).sum();
    let q = if dd + uu > 0.0 { dd / (dd + uu) } else { 0.5 };
    let lq = xlogy(dd, q) + xlogy(uu, 1.0 - q);
    let n = dd + uu;
    let q_sd = if n > 0.0 { (q * (1.0 - q) / n).sqrt() } else { 0.5 };

    let mut fit = FitResult { log_likelihood: l + lq, ..Default::default() };
    fit.insert("contrast", c, c_int);
    fit.insert("phase", phi0, phi_int);
    fit.insert("down_fraction", q, ((q - q_sd).max(0.0), (q + q_sd).min(1.0)));
    Ok(fit)
}
