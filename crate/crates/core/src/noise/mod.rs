//! Error sources of the entangling gate: channel descriptions, per-source
//! infidelity estimators and their composition into a budget.

pub mod curve;
pub mod quasistatic;
pub mod readout;

use crate::analysis::readout::{PoissonMeans, Thresholds};
use crate::dynamics::ms::{ground_register, ms_evolve_with, GatePerturbation, MsOptions};
use crate::dynamics::{EvolutionResult, GateDrive, QuantumRegister};
use crate::error::{domain, Result};
use crate::physcore::MotionalMode;

pub use curve::{CurveKind, InfidelityCurve};
pub use quasistatic::{
    drift_error, kerr_error, kerr_error_analytic, kerr_error_mc, laser_noise_error, laser_noise_error_mc, spectator_dephasing_error,
    spectator_dephasing_error_mc, Estimate,
};
pub use readout::{readout_error, ReadoutContribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftProfile {
    /// Linear drift between recalibrations: the offset is uniform on
    /// `[0, magnitude]`.
    LinearBetweenRecal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionalDrift {
    /// Drift accumulated between recalibrations, Hz.
    pub magnitude_hz: f64,
    /// s
    pub recalibration_interval: f64,
    pub profile: DriftProfile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaserSinusoid {
    /// Carrier frequency excursion amplitude, rad/s.
    pub excursion_amplitude: f64,
    /// s
    pub period: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kerr {
    /// Gate-mode frequency shift per phonon in each spectator mode, rad/s.
    pub chi_per_phonon: Vec<f64>,
    pub spectator_nbars: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectatorDephasing {
    /// Lamb-Dicke factor of the gate beam on each spectator mode.
    pub etas: Vec<f64>,
    pub nbars: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Readout {
    pub means: PoissonMeans,
    /// `None` selects the optimal thresholds.
    pub thresholds: Option<Thresholds>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseModel {
    /// quanta/s
    Heating { rate: f64 },
    MotionalDrift(MotionalDrift),
    LaserSinusoid(LaserSinusoid),
    /// Slow Gaussian decay of Ramsey contrast, `t_1e` in s. Enters the Ramsey
    /// model only.
    LaserGaussianDecay { t_1e: f64 },
    Kerr(Kerr),
    SpectatorDephasing(SpectatorDephasing),
    /// Upper qubit level lifetime, s.
    SpontaneousEmission { lifetime: f64 },
    Readout(Readout),
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Heating { .. } => "heating",
            NoiseModel::MotionalDrift(_) => "motional_drift",
            NoiseModel::LaserSinusoid(_) => "laser_sinusoid",
            NoiseModel::LaserGaussianDecay { .. } => "laser_gaussian_decay",
            NoiseModel::Kerr(_) => "kerr",
            NoiseModel::SpectatorDephasing(_) => "spectator_dephasing",
            NoiseModel::SpontaneousEmission { .. } => "spontaneous_emission",
            NoiseModel::Readout(_) => "readout",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |x: f64, what: &str| -> Result<()> {
            if !(x >= 0.0) || !x.is_finite() {
                return domain(format!("{what} must be finite and non-negative, got {x}"));
            }
            Ok(())
        };
        match self {
            NoiseModel::Heating { rate } => nonneg(*rate, "heating rate"),
            NoiseModel::MotionalDrift(d) => {
                nonneg(d.magnitude_hz, "drift magnitude")?;
                if !(d.recalibration_interval > 0.0) {
                    return domain("recalibration interval must be positive");
                }
                Ok(())
            }
            NoiseModel::LaserSinusoid(l) => {
                nonneg(l.excursion_amplitude, "excursion amplitude")?;
                if !(l.period > 0.0) {
                    return domain("noise period must be positive");
                }
                Ok(())
            }
            NoiseModel::LaserGaussianDecay { t_1e } => {
                if !(*t_1e > 0.0) {
                    return domain("1/e time must be positive");
                }
                Ok(())
            }
            NoiseModel::Kerr(k) => {
                if k.chi_per_phonon.len() != k.spectator_nbars.len() {
                    return domain("Kerr coefficients and occupancies differ in length");
                }
                k.spectator_nbars.iter().try_for_each(|n| nonneg(*n, "spectator occupancy"))?;
                k.chi_per_phonon.iter().try_for_each(|c| if c.is_finite() { Ok(()) } else { domain("Kerr coefficient must be finite") })
            }
            NoiseModel::SpectatorDephasing(s) => {
                if s.etas.len() != s.nbars.len() {
                    return domain("spectator Lamb-Dicke factors and occupancies differ in length");
                }
                s.nbars.iter().try_for_each(|n| nonneg(*n, "spectator occupancy"))?;
                s.etas.iter().try_for_each(|e| nonneg(e.abs(), "spectator Lamb-Dicke factor"))
            }
            NoiseModel::SpontaneousEmission { lifetime } => {
                if !(*lifetime > 0.0) {
                    return domain("lifetime must be positive");
                }
                Ok(())
            }
            NoiseModel::Readout(r) => {
                r.means.validate()?;
                if let Some(t) = r.thresholds {
                    if t.low >= t.high {
                        return domain("readout thresholds must satisfy low < high");
                    }
                }
                Ok(())
            }
        }
    }
}

/// A gate and its mode, with the noiseless infidelity cached so estimators
/// report only the excess caused by their channel.
#[derive(Clone, Debug)]
pub struct GateContext {
    pub drive: GateDrive<f64>,
    pub mode: MotionalMode<f64>,
    pub options: MsOptions<f64>,
    initial: QuantumRegister<f64>,
    baseline: f64,
}

impl GateContext {
    pub fn new(drive: GateDrive<f64>, mode: MotionalMode<f64>) -> Result<Self> {
        Self::with_options(drive, mode, MsOptions::default())
    }

    pub fn with_options(drive: GateDrive<f64>, mode: MotionalMode<f64>, options: MsOptions<f64>) -> Result<Self> {
        let initial = ground_register(&mode)?;
        let mut ctx = Self { drive, mode, options, initial, baseline: 0.0 };
        ctx.baseline = ctx.infidelity(&[])?;
        Ok(ctx)
    }

    pub fn gate_time(&self) -> f64 {
        self.drive.total_duration
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    /// Bell-state infidelity at the end of the gate.
    pub fn infidelity(&self, perturbations: &[GatePerturbation<f64>]) -> Result<f64> {
        let res = ms_evolve_with(&self.drive, &self.mode, &self.initial, perturbations, &[self.drive.total_duration], &self.options)?;
        Ok(1.0 - res.fidelity_vs_target.unwrap_or(0.0))
    }

    pub fn excess_infidelity(&self, perturbations: &[GatePerturbation<f64>]) -> Result<f64> {
        Ok(self.infidelity(perturbations)? - self.baseline)
    }

    /// Noiseless trajectory on `points` uniform samples over the gate.
    pub fn trajectory(&self, points: usize) -> Result<EvolutionResult<f64>> {
        let n = points.max(2) - 1;
        let times: Vec<f64> = (0..=n).map(|k| self.drive.total_duration * k as f64 / n as f64).collect();
        ms_evolve_with(&self.drive, &self.mode, &self.initial, &[], &times, &self.options)
    }
}

/// `rate * gate_time / 2`.
pub fn heating_error(rate: f64, gate_time: f64) -> Result<f64> {
    if !(rate >= 0.0) || !(gate_time >= 0.0) {
        return domain("heating rate and gate time must be non-negative");
    }
    Ok(rate * gate_time / 2.0)
}

/// `sum_i int P_up,i dt / lifetime` over the sampled trajectory (trapezoid rule).
pub fn spontaneous_emission_error(lifetime: f64, trajectory: &EvolutionResult<f64>) -> Result<f64> {
    if !(lifetime > 0.0) {
        return domain("lifetime must be positive");
    }
    if lifetime.is_infinite() {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for k in 1..trajectory.times.len() {
        let dt = trajectory.times[k] - trajectory.times[k - 1];
        let up = |p: &crate::dynamics::SpinPopulations<f64>| p.ion_up(0) + p.ion_up(1);
        acc += 0.5 * dt * (up(&trajectory.populations[k]) + up(&trajectory.populations[k - 1]));
    }
    Ok(acc / lifetime)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetEntry {
    pub source: String,
    pub infidelity: f64,
    pub uncertainty: f64,
}

/// Ordered infidelity contributions; `total` is their sum. Annotations are
/// reported alongside but not summed.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorBudget {
    pub entries: Vec<BudgetEntry>,
    pub total: f64,
    pub annotations: Vec<BudgetEntry>,
}

impl ErrorBudget {
    pub fn get(&self, source: &str) -> Option<&BudgetEntry> {
        self.entries.iter().find(|e| e.source == source)
    }
}

pub const HEATING: &str = "Motional mode heating";
pub const DRIFT: &str = "Motional frequency drifts";
pub const LASER: &str = "Laser frequency noise";
pub const READOUT: &str = "Two-ion readout error";
pub const KERR: &str = "Kerr cross-coupling";
pub const SPECTATOR: &str = "Spectator mode occupancies";
pub const EMISSION: &str = "Spontaneous emission";
pub const READOUT_TEXT_READING: &str = "Two-ion readout error (x0.1 reading)";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetOptions {
    /// Nodes per infidelity curve (odd).
    pub curve_nodes: usize,
    /// Samples of the noiseless trajectory for the emission integral.
    pub trajectory_points: usize,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        Self { curve_nodes: 13, trajectory_points: 401 }
    }
}

/// Run every estimator for the channels present; absent channels contribute
/// zero. Rows follow the order of the published budget.
pub fn total_budget(ctx: &GateContext, channels: &[NoiseModel], options: &BudgetOptions) -> Result<ErrorBudget> {
    for c in channels {
        c.validate()?;
    }
    let mut rows: Vec<BudgetEntry> = [HEATING, DRIFT, LASER, READOUT, KERR, SPECTATOR, EMISSION]
        .iter()
        .map(|s| BudgetEntry { source: s.to_string(), infidelity: 0.0, uncertainty: 0.0 })
        .collect();
    let mut annotations = Vec::new();
    let mut add = |name: &str, value: f64, unc: f64| {
        let row = rows.iter_mut().find(|r| r.source == name).expect("known row");
        row.infidelity += value.max(0.0);
        row.uncertainty = (row.uncertainty * row.uncertainty + unc * unc).sqrt();
    };
    for c in channels {
        match c {
            NoiseModel::Heating { rate } => add(HEATING, heating_error(*rate, ctx.gate_time())?, 0.0),
            NoiseModel::MotionalDrift(d) => {
                let e = drift_error(d, ctx, options.curve_nodes)?;
                add(DRIFT, e.value, e.uncertainty);
            }
            NoiseModel::LaserSinusoid(l) => {
                let e = laser_noise_error(l, ctx, options.curve_nodes)?;
                add(LASER, e.value, e.uncertainty);
            }
            NoiseModel::LaserGaussianDecay { .. } => {}
            NoiseModel::Kerr(k) => {
                let e = kerr_error(k, ctx, options.curve_nodes)?;
                add(KERR, e.value, e.uncertainty);
            }
            NoiseModel::SpectatorDephasing(s) => {
                let e = spectator_dephasing_error(s, ctx, options.curve_nodes)?;
                add(SPECTATOR, e.value, e.uncertainty);
            }
            NoiseModel::SpontaneousEmission { lifetime } => {
                let traj = ctx.trajectory(options.trajectory_points)?;
                add(EMISSION, spontaneous_emission_error(*lifetime, &traj)?, 0.0);
            }
            NoiseModel::Readout(r) => {
                let c = readout_error(r)?;
                add(READOUT, c.infidelity, 0.0);
                annotations.push(BudgetEntry { source: READOUT_TEXT_READING.to_string(), infidelity: c.infidelity * 0.1, uncertainty: 0.0 });
            }
        }
    }
    let total = rows.iter().fold(0.0, |acc, r| acc + r.infidelity);
    Ok(ErrorBudget { entries: rows, total, annotations })
}

/// Joint and separately summed excess infidelity over paired draws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointCheck {
    pub joint: Estimate,
    pub sum_of_parts: Estimate,
    /// Mean and standard error of `joint - sum_of_parts`, draw by draw.
    pub difference: Estimate,
}

/// Evolve with heating, a drawn drift offset and a drawn laser offset applied
/// together, and compare with the sum of each applied alone.
pub fn joint_cross_check(
    ctx: &GateContext,
    heating_rate: f64,
    drift: &MotionalDrift,
    laser: &LaserSinusoid,
    draws: usize,
    seed: u64,
) -> Result<JointCheck> {
    use rand::Rng;
    if draws < 2 {
        return domain("the cross-check needs at least two draws");
    }
    let heating = if heating_rate > 0.0 { ctx.excess_infidelity(&[GatePerturbation::Heating { rate: heating_rate }])? } else { 0.0 };
    let mut rng = crate::shots::stream_rng(seed, 0);
    let (mut joint, mut parts) = (Vec::with_capacity(draws), Vec::with_capacity(draws));
    for _ in 0..draws {
        let shift = 2.0 * std::f64::consts::PI * drift.magnitude_hz * rng.random::<f64>();
        let offset = laser.excursion_amplitude * (2.0 * std::f64::consts::PI * rng.random::<f64>()).sin();
        let d = GatePerturbation::MotionalOffset { shift };
        let l = GatePerturbation::CarrierOffset { offset };
        let mut all = vec![d, l];
        if heating_rate > 0.0 {
            all.push(GatePerturbation::Heating { rate: heating_rate });
        }
        joint.push(ctx.excess_infidelity(&all)?);
        parts.push(heating + ctx.excess_infidelity(&[d])? + ctx.excess_infidelity(&[l])?);
    }
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        Estimate { value: m, uncertainty: (var / n).sqrt() }
    };
    let diff: Vec<f64> = joint.iter().zip(&parts).map(|(a, b)| a - b).collect();
    Ok(JointCheck { joint: stats(&joint), sum_of_parts: stats(&parts), difference: stats(&diff) })
}
