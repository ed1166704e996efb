//! Quasi-static channels: parameters frozen during one gate, redrawn from shot
//! to shot. Each expectation is taken over an [`InfidelityCurve`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::curve::{CurveKind, InfidelityCurve};
use super::{GateContext, Kerr, LaserSinusoid, MotionalDrift, SpectatorDephasing};
use crate::error::{domain, Result};
use crate::physcore::truncation_for_tail;
use crate::special::{chebyshev_nodes, debye_waller_table, gauss_legendre, laguerre_table};

/// Expectation with an error estimate: interpolation error for quadratures,
/// standard error for Monte Carlo.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub uncertainty: f64,
}

const TAIL: f64 = 1e-10;
const QUAD_NODES: usize = 64;
const MAX_BINS: usize = 20_000;

fn both<F: Fn(&dyn Fn(f64) -> f64) -> f64>(curve: &InfidelityCurve, expectation: F) -> Estimate {
    let fine = expectation(&|x| curve.eval(x));
    let coarse = expectation(&|x| curve.eval_coarse(x));
    Estimate { value: fine, uncertainty: (fine - coarse).abs() }
}

/// Expected excess infidelity for a frequency offset uniform on
/// `[0, magnitude]`.
pub fn drift_error(drift: &MotionalDrift, ctx: &GateContext, curve_nodes: usize) -> Result<Estimate> {
    if drift.magnitude_hz == 0.0 {
        return Ok(Estimate::default());
    }
    let d = 2.0 * std::f64::consts::PI * drift.magnitude_hz;
    let (lo, hi) = if d > 0.0 { (0.0, d) } else { (d, 0.0) };
    let curve = InfidelityCurve::build(ctx, CurveKind::MotionalOffset, lo, hi, curve_nodes)?;
    Ok(uniform_expectation(&curve, lo, hi))
}

/// `(1/(b-a)) int_a^b curve`.
pub fn uniform_expectation(curve: &InfidelityCurve, a: f64, b: f64) -> Estimate {
    let (x, w) = gauss_legendre(QUAD_NODES);
    both(curve, |f| {
        x.iter().zip(&w).map(|(xi, wi)| 0.5 * wi * f(0.5 * (a + b) + 0.5 * (b - a) * xi)).sum()
    })
}

/// Expected excess infidelity for a carrier offset `A sin(theta)` with uniform
/// `theta` (arcsine density on `[-A, A]`).
pub fn laser_noise_error(noise: &LaserSinusoid, ctx: &GateContext, curve_nodes: usize) -> Result<Estimate> {
    let a = noise.excursion_amplitude.abs();
    if a == 0.0 {
        return Ok(Estimate::default());
    }
    let curve = InfidelityCurve::build(ctx, CurveKind::CarrierOffset, -a, a, curve_nodes)?;
    Ok(arcsine_expectation(&curve, a))
}

/// Gauss-Chebyshev quadrature of the arcsine density on `[-a, a]`.
pub fn arcsine_expectation(curve: &InfidelityCurve, a: f64) -> Estimate {
    let nodes = chebyshev_nodes(QUAD_NODES);
    both(curve, |f| nodes.iter().map(|x| f(a * x)).sum::<f64>() / nodes.len() as f64)
}

fn mc_summary(samples: &[f64]) -> Estimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Estimate { value: mean, uncertainty: (var / n).sqrt() }
}

/// Monte Carlo over the sinusoid phase, evaluated on `curve`.
pub fn laser_noise_error_mc(curve: &InfidelityCurve, amplitude: f64, draws: usize, seed: u64) -> Estimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..draws)
        .map(|_| curve.eval(amplitude * (2.0 * std::f64::consts::PI * rng.random::<f64>()).sin()))
        .collect();
    mc_summary(&samples)
}

/// Distribution on a uniform grid: `x_i = start + i * step`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDistribution {
    pub start: f64,
    pub step: f64,
    pub weights: Vec<f64>,
}

impl GridDistribution {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().enumerate().map(|(i, w)| (self.start + self.step * i as f64, *w))
    }

    /// Smallest interval holding all but `tail` of the mass on each side.
    pub fn quantile_range(&self, tail: f64) -> (f64, f64) {
        let mut acc = 0.0;
        let mut lo = 0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if acc > tail {
                lo = i;
                break;
            }
        }
        acc = 0.0;
        let mut hi = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate().rev() {
            acc += w;
            if acc > tail {
                hi = i;
                break;
            }
        }
        (self.start + self.step * lo as f64, self.start + self.step * hi as f64)
    }
}

fn thermal_levels(nbar: f64) -> Vec<f64> {
    if nbar == 0.0 {
        return vec![1.0];
    }
    let n_max = truncation_for_tail(nbar, 1e-13);
    let r = nbar / (nbar + 1.0);
    let mut p = Vec::with_capacity(n_max + 1);
    let mut v = 1.0 / (nbar + 1.0);
    for _ in 0..=n_max {
        p.push(v);
        v *= r;
    }
    let s: f64 = p.iter().sum();
    p.into_iter().map(|x| x / s).collect()
}

/// Distribution of `sum_k chi_k (n_k - nbar_k)` for thermal `n_k`, on a grid
/// fine enough that every mode's spacing spans many cells.
pub fn kerr_shift_distribution(kerr: &Kerr) -> GridDistribution {
    let modes: Vec<(f64, Vec<f64>, f64)> = kerr
        .chi_per_phonon
        .iter()
        .zip(&kerr.spectator_nbars)
        .filter(|(c, n)| **c != 0.0 && **n > 0.0)
        .map(|(c, n)| (*c, thermal_levels(*n), *n))
        .collect();
    if modes.is_empty() {
        return GridDistribution { start: 0.0, step: 1.0, weights: vec![1.0] };
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    for (c, p, nbar) in &modes {
        let a = -c * nbar;
        let b = c * ((p.len() - 1) as f64 - nbar);
        lo += a.min(b);
        hi += a.max(b);
    }
    let step = (hi - lo) / 8000.0;
    let mut dist = vec![1.0];
    let mut start = 0.0;
    for (c, p, nbar) in &modes {
        let shifts: Vec<f64> = (0..p.len()).map(|n| c * (n as f64 - nbar)).collect();
        let m_lo = shifts.iter().copied().fold(f64::INFINITY, f64::min);
        let m_hi = shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cells = ((m_hi - m_lo) / step).ceil() as usize + 2;
        let mut local = vec![0.0; cells];
        for (x, w) in shifts.iter().zip(p) {
            let pos = (x - m_lo) / step;
            let i = pos.floor() as usize;
            let f = pos - i as f64;
            local[i] += w * (1.0 - f);
            local[i + 1] += w * f;
        }
        let mut next = vec![0.0; dist.len() + local.len() - 1];
        for (i, a) in dist.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in local.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        dist = next;
        start += m_lo;
    }
    GridDistribution { start, step, weights: dist }
}

fn kerr_curve(kerr: &Kerr, ctx: &GateContext, curve_nodes: usize) -> Result<(GridDistribution, InfidelityCurve)> {
    let dist = kerr_shift_distribution(kerr);
    let (lo, hi) = dist.quantile_range(TAIL);
    let curve = InfidelityCurve::build(ctx, CurveKind::MotionalOffset, lo.min(-1e-9), hi.max(1e-9), curve_nodes)?;
    Ok((dist, curve))
}

fn is_zero_kerr(kerr: &Kerr) -> bool {
    kerr.chi_per_phonon.iter().zip(&kerr.spectator_nbars).all(|(c, n)| *c == 0.0 || *n == 0.0)
}

/// Expected excess infidelity from thermal spectator occupancies shifting the
/// gate-mode frequency by `sum_k chi_k (n_k - nbar_k)` per shot. The mean
/// shift is absorbed by recalibration of the mode frequency.
pub fn kerr_error(kerr: &Kerr, ctx: &GateContext, curve_nodes: usize) -> Result<Estimate> {
    if is_zero_kerr(kerr) {
        return Ok(Estimate::default());
    }
    let (dist, curve) = kerr_curve(kerr, ctx, curve_nodes)?;
    Ok(kerr_expectation(&dist, &curve))
}

pub fn kerr_expectation(dist: &GridDistribution, curve: &InfidelityCurve) -> Estimate {
    both(curve, |f| dist.points().map(|(x, w)| w * f(x)).sum())
}

/// Variance propagation: `(f''(0)/2) sum_k chi_k^2 nbar_k (nbar_k + 1)`.
pub fn kerr_error_analytic(kerr: &Kerr, curve: &InfidelityCurve) -> f64 {
    let var: f64 = kerr.chi_per_phonon.iter().zip(&kerr.spectator_nbars).map(|(c, n)| c * c * n * (n + 1.0)).sum();
    0.5 * curve.curvature(0.0) * var
}

/// Monte Carlo over thermal draws of the spectator occupancies.
pub fn kerr_error_mc(kerr: &Kerr, curve: &InfidelityCurve, draws: usize, seed: u64) -> Result<Estimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geoms = kerr
        .spectator_nbars
        .iter()
        .map(|n| Geometric::new(1.0 / (n + 1.0)).map_err(|e| crate::Error::Domain(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<f64> = (0..draws)
        .map(|_| {
            let shift: f64 = kerr
                .chi_per_phonon
                .iter()
                .zip(&kerr.spectator_nbars)
                .zip(&geoms)
                .map(|((c, nbar), g)| c * (g.sample(&mut rng) as f64 - nbar))
                .sum();
            curve.eval(shift)
        })
        .collect();
    Ok(mc_summary(&samples))
}

/// Scale `chi_k = s * weights_k` so the Kerr estimate equals `target`.
pub fn calibrate_kerr_chi(weights: &[f64], nbars: &[f64], target: f64, ctx: &GateContext, curve_nodes: usize) -> Result<Vec<f64>> {
    if !(target > 0.0) || weights.len() != nbars.len() {
        return domain("calibration needs a positive target and matching weights and occupancies");
    }
    let var: f64 = weights.iter().zip(nbars).map(|(w, n)| w * w * n * (n + 1.0)).sum();
    if var == 0.0 {
        return domain("calibration needs non-zero weights and occupancies");
    }
    let probe = 2.0 * std::f64::consts::PI * 300.0;
    let curve = InfidelityCurve::build(ctx, CurveKind::MotionalOffset, -probe, probe, curve_nodes)?;
    let mut scale = (target / (0.5 * curve.curvature(0.0) * var)).sqrt();
    for _ in 0..4 {
        let kerr = Kerr { chi_per_phonon: weights.iter().map(|w| w * scale).collect(), spectator_nbars: nbars.to_vec() };
        let e = kerr_error(&kerr, ctx, curve_nodes)?.value;
        scale *= (target / e).sqrt();
    }
    Ok(weights.iter().map(|w| w * scale).collect())
}

/// Distribution of the per-shot Rabi factor `F / E[F]`,
/// `F = prod_k e^{-eta_k^2/2} L_{n_k}(eta_k^2)`, as `(weight, factor)`.
pub fn rabi_scale_distribution(model: &SpectatorDephasing) -> Vec<(f64, f64)> {
    let mut atoms = vec![(1.0, 1.0)];
    for (eta, nbar) in model.etas.iter().zip(&model.nbars) {
        if *eta == 0.0 || *nbar == 0.0 {
            continue;
        }
        let p = thermal_levels(*nbar);
        let dw = debye_waller_table(*eta, p.len() - 1);
        let mut next = Vec::with_capacity(atoms.len() * p.len());
        for (w, f) in &atoms {
            for (pn, d) in p.iter().zip(&dw) {
                next.push((w * pn, f * d));
            }
        }
        atoms = if next.len() > MAX_BINS { bin_atoms(next) } else { next };
    }
    let mean: f64 = atoms.iter().map(|(w, f)| w * f).sum();
    atoms.into_iter().map(|(w, f)| (w, f / mean)).collect()
}

/// Mean-preserving binning onto `MAX_BINS` equal cells.
fn bin_atoms(atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let lo = atoms.iter().map(|a| a.1).fold(f64::INFINITY, f64::min);
    let hi = atoms.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max);
    let h = ((hi - lo) / MAX_BINS as f64).max(1e-15);
    let mut bins = vec![(0.0, 0.0); MAX_BINS + 1];
    for (w, f) in atoms {
        let i = (((f - lo) / h) as usize).min(MAX_BINS);
        bins[i].0 += w;
        bins[i].1 += w * f;
    }
    bins.into_iter().filter(|b| b.0 > 0.0).map(|(w, wf)| (w, wf / w)).collect()
}

fn atom_range(atoms: &[(f64, f64)], tail: f64) -> (f64, f64) {
    let mut sorted: Vec<(f64, f64)> = atoms.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut acc = 0.0;
    let mut lo = sorted[0].1;
    for (w, f) in &sorted {
        acc += w;
        if acc > tail {
            lo = *f;
            break;
        }
    }
    acc = 0.0;
    let mut hi = sorted[sorted.len() - 1].1;
    for (w, f) in sorted.iter().rev() {
        acc += w;
        if acc > tail {
            hi = *f;
            break;
        }
    }
    (lo, hi)
}

fn is_zero_spectator(model: &SpectatorDephasing) -> bool {
    model.etas.iter().zip(&model.nbars).all(|(e, n)| *e == 0.0 || *n == 0.0)
}

/// Expected excess infidelity from shot-to-shot Rabi-rate fluctuations caused
/// by thermal spectator occupancies. The mean Debye-Waller reduction is taken
/// as calibrated into the drive.
pub fn spectator_dephasing_error(model: &SpectatorDephasing, ctx: &GateContext, curve_nodes: usize) -> Result<Estimate> {
    if is_zero_spectator(model) {
        return Ok(Estimate::default());
    }
    let atoms = rabi_scale_distribution(model);
    let curve = spectator_curve(&atoms, ctx, curve_nodes)?;
    Ok(both(&curve, |f| atoms.iter().map(|(w, r)| w * f(*r)).sum()))
}

pub fn spectator_curve(atoms: &[(f64, f64)], ctx: &GateContext, curve_nodes: usize) -> Result<InfidelityCurve> {
    let (lo, hi) = atom_range(atoms, TAIL);
    InfidelityCurve::build(ctx, CurveKind::RabiScale, lo.min(1.0 - 1e-9), hi.max(1.0 + 1e-9), curve_nodes)
}

/// Monte Carlo over thermal draws, Debye-Waller factors evaluated directly.
pub fn spectator_dephasing_error_mc(model: &SpectatorDephasing, curve: &InfidelityCurve, draws: usize, seed: u64) -> Result<Estimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean_f: f64 = rabi_scale_distribution_mean(model);
    let geoms = model
        .nbars
        .iter()
        .map(|n| Geometric::new(1.0 / (n + 1.0)).map_err(|e| crate::Error::Domain(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<f64> = (0..draws)
        .map(|_| {
            let f: f64 = model
                .etas
                .iter()
                .zip(&geoms)
                .map(|(eta, g)| {
                    let n = g.sample(&mut rng) as usize;
                    let x = eta * eta;
                    (-x / 2.0).exp() * laguerre_table(n, x)[n]
                })
                .product();
            curve.eval(f / mean_f)
        })
        .collect();
    Ok(mc_summary(&samples))
}

/// `E[F]`, which factorizes over modes.
fn rabi_scale_distribution_mean(model: &SpectatorDephasing) -> f64 {
    model.etas
        .iter()
        .zip(&model.nbars)
        .map(|(eta, nbar)| {
            let p = thermal_levels(*nbar);
            let dw = debye_waller_table(*eta, p.len() - 1);
            p.iter().zip(&dw).map(|(a, b)| a * b).sum::<f64>()
        })
        .product()
}

/// Scale `eta_k = s * weights_k` so the spectator estimate equals `target`.
pub fn calibrate_spectator_eta(weights: &[f64], nbars: &[f64], target: f64, ctx: &GateContext, curve_nodes: usize) -> Result<Vec<f64>> {
    if !(target > 0.0) || weights.len() != nbars.len() {
        return domain("calibration needs a positive target and matching weights and occupancies");
    }
    let probe = InfidelityCurve::build(ctx, CurveKind::RabiScale, 0.97, 1.03, curve_nodes)?;
    // Var(F/E[F]) ~ sum eta^4 nbar (nbar + 1) to leading order.
    let moment: f64 = weights.iter().zip(nbars).map(|(w, n)| w.powi(4) * n * (n + 1.0)).sum();
    if moment == 0.0 {
        return domain("calibration needs non-zero weights and occupancies");
    }
    let mut scale = (target / (0.5 * probe.curvature(1.0) * moment)).powf(0.25);
    for _ in 0..4 {
        let model = SpectatorDephasing { etas: weights.iter().map(|w| w * scale).collect(), nbars: nbars.to_vec() };
        let e = spectator_dephasing_error(&model, ctx, curve_nodes)?.value;
        scale *= (target / e).powf(0.25);
    }
    Ok(weights.iter().map(|w| w * scale).collect())
}
