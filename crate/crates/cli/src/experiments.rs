//! Simulated experiments with seeded projection noise.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use iontrap::analysis::{classify_counts, optimal_thresholds, BrightCount, PoissonMeans, Thresholds};
use iontrap::dynamics::sideband::sideband_flop;
use iontrap::dynamics::spin::{analysis_pulses, populations};
use iontrap::dynamics::{carrier_flop, ms_evolve, GatePerturbation, Sideband, SpinPopulations};
use iontrap::dynamics::ms::ground_register;
use iontrap::optics::{balanced_positions, rabi_from_power};
use iontrap::physcore::equilibrium_spacing;
use iontrap::shots::stream_rng;

use crate::error::{CliError, CliResult};
use crate::output::Table;
use crate::scenario::{Experiment, NoiseConfig, Scenario, SweepVariable};

/// One recorded shot.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotLine {
    pub shot_index: u64,
    pub sweep_value: f64,
    pub outcome: Outcome,
    /// Photon counts, present when the scenario has a readout channel.
    pub counts: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    BothDown,
    Mixed,
    BothUp,
    /// Single ion, fluorescing.
    Down,
    /// Single ion, dark.
    Up,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::BothDown => "dd",
            Outcome::Mixed => "mixed",
            Outcome::BothUp => "uu",
            Outcome::Down => "d",
            Outcome::Up => "u",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Some(match s {
            "dd" => Outcome::BothDown,
            "mixed" => Outcome::Mixed,
            "uu" => Outcome::BothUp,
            "d" => Outcome::Down,
            "u" => Outcome::Up,
            _ => return None,
        })
    }
}

pub struct RunOutput {
    pub table: Table,
    pub shots: Vec<ShotLine>,
}

/// Photon-count model applied to every shot.
#[derive(Clone, Copy, Debug)]
struct Detector {
    means: PoissonMeans,
    thresholds: Thresholds,
}

impl Detector {
    fn from_scenario(s: &Scenario) -> CliResult<Option<Self>> {
        Ok(match s.readout()? {
            Some(r) => {
                let thresholds = match r.thresholds {
                    Some(t) => t,
                    None => optimal_thresholds(&r.means)?,
                };
                Some(Detector { means: r.means, thresholds })
            }
            None => None,
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R, bright: usize) -> (u64, usize) {
        let mean = [self.means.dark, self.means.one_bright, self.means.two_bright][bright];
        let counts = if mean > 0.0 { Poisson::new(mean).expect("positive mean").sample(rng) as u64 } else { 0 };
        let seen = match classify_counts(counts, self.thresholds) {
            BrightCount::Zero => 0,
            BrightCount::One => 1,
            BrightCount::Two => 2,
        };
        (counts, seen)
    }
}

fn pick<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.max(0.0);
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Bright ions for spin index `2 s1 + s2`; `down` fluoresces.
fn bright_count(spin_index: usize) -> usize {
    2 - (spin_index >> 1) - (spin_index & 1)
}

fn pair_outcome(bright: usize) -> Outcome {
    [Outcome::BothUp, Outcome::Mixed, Outcome::BothDown][bright]
}

fn normalized(p: [f64; 4]) -> [f64; 4] {
    let p = p.map(|x| x.max(0.0));
    let s: f64 = p.iter().sum();
    p.map(|x| x / s)
}

/// Shots for two ions with spin populations `pops` at every sweep point.
fn pair_shots(s: &Scenario, seed: u64, values: &[f64], pops: &[[f64; 4]]) -> CliResult<(Vec<[f64; 3]>, Vec<ShotLine>)> {
    let detector = Detector::from_scenario(s)?;
    let n = s.shots_per_point;
    let per_point: Vec<([f64; 3], Vec<ShotLine>)> = values
        .par_iter()
        .zip(pops.par_iter())
        .enumerate()
        .map(|(k, (&v, p))| {
            let mut rng = stream_rng(seed, k as u64);
            let p = normalized(*p);
            let mut tally = [0u64; 3];
            let mut lines = Vec::with_capacity(n as usize);
            for j in 0..n {
                let bright = bright_count(pick(&mut rng, &p));
                let (counts, seen) = match &detector {
                    Some(d) => {
                        let (c, seen) = d.draw(&mut rng, bright);
                        (Some(c), seen)
                    }
                    None => (None, bright),
                };
                tally[2 - seen] += 1;
                lines.push(ShotLine { shot_index: k as u64 * n + j, sweep_value: v, outcome: pair_outcome(seen), counts });
            }
            (tally.map(|c| c as f64 / n as f64), lines)
        })
        .collect();
    let freqs = per_point.iter().map(|(f, _)| *f).collect();
    let shots = per_point.into_iter().flat_map(|(_, l)| l).collect();
    Ok((freqs, shots))
}

fn stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Theory and measured populations; measured order is `[dd, mixed, uu]`.
fn pair_table(axis: &str, values: &[f64], theory: &[[f64; 4]], measured: &[[f64; 3]], n: u64) -> Table {
    let mut table = Table::new(&[
        axis,
        "p_dd_theory [1]",
        "p_mixed_theory [1]",
        "p_uu_theory [1]",
        "parity_theory [1]",
        "p_dd [1]",
        "p_dd_stderr [1]",
        "p_mixed [1]",
        "p_mixed_stderr [1]",
        "p_uu [1]",
        "p_uu_stderr [1]",
        "parity [1]",
        "parity_stderr [1]",
    ]);
    for ((v, t), m) in values.iter().zip(theory).zip(measured) {
        let t = SpinPopulations(*t);
        let [dd, mixed, uu] = *m;
        let parity = dd + uu - mixed;
        table.push(vec![
            *v,
            t.both_down(),
            t.mixed(),
            t.both_up(),
            t.parity(),
            dd,
            stderr(dd, n),
            mixed,
            stderr(mixed, n),
            uu,
            stderr(uu, n),
            parity,
            ((1.0 - parity * parity).max(0.0) / n as f64).sqrt(),
        ]);
    }
    table
}

fn require(s: &Scenario, variable: SweepVariable) -> CliResult<Vec<f64>> {
    let sweep = s.sweep.as_ref().ok_or_else(|| CliError::Validation("scenario has no [sweep] section".into()))?;
    if sweep.variable != variable {
        return Err(CliError::Validation(format!(
            "experiment {:?} sweeps {}, not {}",
            s.experiment,
            variable.column(),
            sweep.variable.column()
        )));
    }
    let values = sweep.grid()?;
    if variable == SweepVariable::TimeUs && values.windows(2).any(|w| w[1] < w[0]) || values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Validation("sweep times must be finite and non-decreasing".into()));
    }
    Ok(values)
}

/// Heating rate applied to the gate: the heating channel if present, else the
/// gate mode's own rate.
pub fn gate_heating_rate(s: &Scenario) -> CliResult<f64> {
    if s.noise.iter().any(|n| matches!(n, NoiseConfig::Heating { .. })) {
        Ok(s.heating_rate())
    } else {
        Ok(s.gate_mode()?.heating_rate)
    }
}

fn gate_perturbations(s: &Scenario) -> CliResult<Vec<GatePerturbation<f64>>> {
    let rate = gate_heating_rate(s)?;
    Ok(if rate > 0.0 { vec![GatePerturbation::Heating { rate }] } else { Vec::new() })
}

/// Per-ion carrier Rabi rates from the beam at the balanced ion positions.
pub fn beam_rabi_rates(s: &Scenario) -> CliResult<[f64; 2]> {
    let (profile, ledger) = s.beam()?;
    let spacing = equilibrium_spacing(2.0 * std::f64::consts::PI * s.trap.omega_com_mhz * 1e6, &s.species()?)?;
    let (x1, x2) = balanced_positions(&profile, spacing)?;
    let y = profile.center[1];
    let p = s.beam.input_power_mw * 1e-3;
    let k = s.beam.coupling_rad_per_s_per_sqrt_w_per_m2;
    Ok([rabi_from_power(p, &ledger, &profile, [x1, y], k)?, rabi_from_power(p, &ledger, &profile, [x2, y], k)?])
}

pub fn run_experiment(s: &Scenario, seed: u64) -> CliResult<RunOutput> {
    s.validate()?;
    let n = s.shots_per_point;
    match s.experiment {
        Experiment::GatePopulations => {
            let values = require(s, SweepVariable::TimeUs)?;
            let mode = s.gate_mode()?;
            let drive = s.gate_drive()?;
            let times: Vec<f64> = values.iter().map(|t| t * 1e-6).collect();
            let res = ms_evolve(&drive, &mode, &ground_register(&mode)?, &gate_perturbations(s)?, &times)?;
            let theory: Vec<[f64; 4]> = res.populations.iter().map(|p| p.0).collect();
            let (measured, shots) = pair_shots(s, seed, &values, &theory)?;
            Ok(RunOutput { table: pair_table("time [us]", &values, &theory, &measured, n), shots })
        }
        Experiment::ParityScan => {
            let values = require(s, SweepVariable::AnalysisPhaseRad)?;
            let mode = s.gate_mode()?;
            let drive = s.gate_drive()?;
            let res = ms_evolve(&drive, &mode, &ground_register(&mode)?, &gate_perturbations(s)?, &[drive.total_duration])?;
            let rho = res.final_spin.expect("gate evolution returns the spin state");
            let theory: Vec<[f64; 4]> = values
                .iter()
                .map(|phi| {
                    let r = analysis_pulses(std::f64::consts::FRAC_PI_2, *phi);
                    populations(&(&(&r * &rho) * &r.dagger()))
                })
                .collect();
            let (measured, shots) = pair_shots(s, seed, &values, &theory)?;
            Ok(RunOutput { table: pair_table("analysis_phase [rad]", &values, &theory, &measured, n), shots })
        }
        Experiment::CarrierFlop => {
            let values = require(s, SweepVariable::TimeUs)?;
            let times: Vec<f64> = values.iter().map(|t| t * 1e-6).collect();
            let res = carrier_flop(&beam_rabi_rates(s)?, &s.modes()?, &times)?;
            let theory: Vec<[f64; 4]> = res.populations.iter().map(|p| p.0).collect();
            let (measured, shots) = pair_shots(s, seed, &values, &theory)?;
            Ok(RunOutput { table: pair_table("time [us]", &values, &theory, &measured, n), shots })
        }
        Experiment::SidebandFlop => {
            let values = require(s, SweepVariable::TimeUs)?;
            let mode = s.gate_mode()?;
            let rabi = beam_rabi_rates(s)?[0];
            let times: Vec<f64> = values.iter().map(|t| t * 1e-6).collect();
            let curve = sideband_flop(rabi, mode.eta[0], &mode.thermal()?, Sideband::Blue, &times)?;
            let detector = Detector::from_scenario(s)?;
            let per_point: Vec<(f64, Vec<ShotLine>)> = values
                .par_iter()
                .zip(curve.excitation.par_iter())
                .enumerate()
                .map(|(k, (&v, &p_up))| {
                    let mut rng = stream_rng(seed, k as u64);
                    let mut up = 0u64;
                    let mut lines = Vec::with_capacity(n as usize);
                    for j in 0..n {
                        let bright = if rng.random::<f64>() < p_up { 0 } else { 1 };
                        let (counts, seen) = match &detector {
                            Some(d) => {
                                let (c, seen) = d.draw(&mut rng, bright);
                                (Some(c), seen.min(1))
                            }
                            None => (None, bright),
                        };
                        if seen == 0 {
                            up += 1;
                        }
                        let outcome = if seen == 0 { Outcome::Up } else { Outcome::Down };
                        lines.push(ShotLine { shot_index: k as u64 * n + j, sweep_value: v, outcome, counts });
                    }
                    (up as f64 / n as f64, lines)
                })
                .collect();
            let mut table = Table::new(&["time [us]", "excitation_theory [1]", "excitation [1]", "excitation_stderr [1]"]);
            for ((v, t), (e, _)) in values.iter().zip(&curve.excitation).zip(&per_point) {
                table.push(vec![*v, *t, *e, stderr(*e, n)]);
            }
            let shots = per_point.into_iter().flat_map(|(_, l)| l).collect();
            Ok(RunOutput { table, shots })
        }
    }
}

/// Gate infidelity at every value of a gate parameter.
pub fn gate_sweep(s: &Scenario) -> CliResult<Table> {
    s.validate()?;
    let sweep = s.sweep.as_ref().ok_or_else(|| CliError::Validation("scenario has no [sweep] section".into()))?;
    let variable = sweep.variable;
    if matches!(variable, SweepVariable::TimeUs | SweepVariable::AnalysisPhaseRad) {
        return Err(CliError::Validation(format!("`sweep` varies a gate parameter, not {}", variable.column())));
    }
    let values = sweep.grid()?;
    let base_rate = gate_heating_rate(s)?;
    let rows: Vec<CliResult<Vec<f64>>> = values
        .par_iter()
        .map(|&v| {
            let mut mode = s.gate_mode()?;
            let mut detuning = s.drive.detuning_khz;
            let mut ramp = s.drive.ramp_us;
            let mut rate = base_rate;
            let mut extra = Vec::new();
            match variable {
                SweepVariable::DetuningKhz => detuning = v,
                SweepVariable::RampUs => ramp = v,
                SweepVariable::Nbar => mode.nbar = v,
                SweepVariable::HeatingRateQuantaPerS => rate = v,
                SweepVariable::MotionalOffsetHz => extra.push(GatePerturbation::MotionalOffset { shift: 2.0 * std::f64::consts::PI * v }),
                SweepVariable::CarrierOffsetHz => extra.push(GatePerturbation::CarrierOffset { offset: 2.0 * std::f64::consts::PI * v }),
                SweepVariable::RabiScale => extra.push(GatePerturbation::RabiScale { factor: v }),
                SweepVariable::TimeUs | SweepVariable::AnalysisPhaseRad => unreachable!(),
            }
            if rate > 0.0 {
                extra.push(GatePerturbation::Heating { rate });
            }
            let drive = s.drive_for(&mode, detuning, ramp)?;
            let inf = iontrap::dynamics::ms::gate_infidelity(&drive, &mode, &extra)?;
            Ok(vec![v, drive.total_duration * 1e6, inf])
        })
        .collect();
    let axis = sweep_axis_header(variable);
    let mut table = Table::new(&[axis.as_str(), "gate_time [us]", "infidelity [1]"]);
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}

fn sweep_axis_header(v: SweepVariable) -> String {
    match v {
        SweepVariable::TimeUs => "time [us]".into(),
        SweepVariable::AnalysisPhaseRad => "analysis_phase [rad]".into(),
        SweepVariable::DetuningKhz => "detuning [kHz]".into(),
        SweepVariable::RampUs => "ramp [us]".into(),
        SweepVariable::Nbar => "nbar [quanta]".into(),
        SweepVariable::HeatingRateQuantaPerS => "heating_rate [quanta/s]".into(),
        SweepVariable::MotionalOffsetHz => "motional_offset [Hz]".into(),
        SweepVariable::CarrierOffsetHz => "carrier_offset [Hz]".into(),
        SweepVariable::RabiScale => "rabi_scale [1]".into(),
    }
}
