//! Scenario files: TOML with the unit of every quantity in its key name.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use iontrap::analysis::{PoissonMeans, Thresholds};
use iontrap::dynamics::ms::refine_closure;
use iontrap::dynamics::GateDrive;
use iontrap::noise::{DriftProfile, GateContext, Kerr, LaserSinusoid, MotionalDrift, NoiseModel, Readout, SpectatorDephasing};
use iontrap::optics::{BeamProfile, LossLedger};
use iontrap::physcore::{grating_axial_projection, lamb_dicke, IonSpecies, ModeLabel, MotionalMode};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub shots_per_point: u64,
    pub experiment: Experiment,
    pub species: SpeciesConfig,
    pub trap: TrapConfig,
    pub modes: Vec<ModeConfig>,
    pub drive: DriveConfig,
    pub beam: BeamConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub budget: BudgetConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Spin populations during the gate (time sweep).
    GatePopulations,
    /// Parity after analysis pulses at the end of the gate (phase sweep).
    ParityScan,
    /// Blue-sideband flopping of one ion on the gate mode (time sweep).
    SidebandFlop,
    /// Carrier flopping of both ions over the spectator modes (time sweep).
    CarrierFlop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub name: String,
    pub mass_u: f64,
    pub charge_e: f64,
    pub upper_state_lifetime_s: f64,
    pub qubit_zeeman_hz_per_g: f64,
    pub qubit_wavelength_nm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub omega_com_mhz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Com,
    Stretch,
    Radial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub kind: ModeKind,
    /// Ordinary frequency, MHz. Axial modes default to the trap values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_mhz: Option<f64>,
    /// Per-ion Lamb-Dicke factors. Axial modes default to the grating
    /// projection of the beam wavevector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    pub nbar: f64,
    #[serde(default)]
    pub heating_rate_quanta_per_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Index into `modes` of the gate mode.
    #[serde(default)]
    pub mode_index: usize,
    pub detuning_khz: f64,
    pub ramp_us: f64,
    #[serde(default)]
    pub spin_phase_rad: f64,
    #[serde(default = "yes")]
    pub include_carrier: bool,
    /// Re-solve the Rabi rate so the loop closes with the carrier present.
    #[serde(default = "yes")]
    pub refine_closure: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub waist_x_um: f64,
    pub waist_y_um: f64,
    #[serde(default)]
    pub center_um: [f64; 2],
    pub emission_angle_deg: f64,
    pub input_power_mw: f64,
    /// Quadrupole coupling, (rad/s) / sqrt(W/m^2).
    pub coupling_rad_per_s_per_sqrt_w_per_m2: f64,
    pub losses: Vec<LossConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub stage: String,
    pub loss_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    Heating {
        rate_quanta_per_s: f64,
    },
    MotionalDrift {
        magnitude_hz: f64,
        recalibration_interval_s: f64,
    },
    LaserSinusoid {
        /// Excursion amplitude over 2 pi.
        excursion_amplitude_hz: f64,
        period_ms: f64,
    },
    LaserGaussianDecay {
        t_1e_ms: f64,
    },
    Kerr {
        chi_per_phonon_rad_per_s: Vec<f64>,
        spectator_nbars: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        calibration: Option<String>,
    },
    SpectatorDephasing {
        etas: Vec<f64>,
        nbars: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        calibration: Option<String>,
    },
    SpontaneousEmission {
        lifetime_s: f64,
    },
    Readout {
        dark_counts: f64,
        one_bright_counts: f64,
        two_bright_counts: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thresholds_counts: Option<[u64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        calibration: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    TimeUs,
    AnalysisPhaseRad,
    DetuningKhz,
    RampUs,
    Nbar,
    HeatingRateQuantaPerS,
    MotionalOffsetHz,
    CarrierOffsetHz,
    RabiScale,
}

impl SweepVariable {
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::TimeUs => "time_us",
            SweepVariable::AnalysisPhaseRad => "analysis_phase_rad",
            SweepVariable::DetuningKhz => "detuning_khz",
            SweepVariable::RampUs => "ramp_us",
            SweepVariable::Nbar => "nbar",
            SweepVariable::HeatingRateQuantaPerS => "heating_rate_quanta_per_s",
            SweepVariable::MotionalOffsetHz => "motional_offset_hz",
            SweepVariable::CarrierOffsetHz => "carrier_offset_hz",
            SweepVariable::RabiScale => "rabi_scale",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    /// Explicit values, or `start`/`stop`/`points` for a uniform grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Leave out the `stop` point (periodic grids).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub endpoint_excluded: bool,
}

impl SweepConfig {
    pub fn grid(&self) -> CliResult<Vec<f64>> {
        if let Some(v) = &self.values {
            if v.is_empty() {
                return Err(CliError::Validation("sweep values are empty".into()));
            }
            return Ok(v.clone());
        }
        match (self.start, self.stop, self.points) {
            (Some(a), Some(b), Some(n)) if n >= 1 => {
                if n == 1 {
                    return Ok(vec![a]);
                }
                let div = if self.endpoint_excluded { n } else { n - 1 } as f64;
                Ok((0..n).map(|k| a + (b - a) * k as f64 / div).collect())
            }
            _ => Err(CliError::Validation("sweep needs `values` or `start`, `stop` and `points`".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub curve_nodes: usize,
    pub trajectory_points: usize,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { curve_nodes: 13, trajectory_points: 401 }
    }
}

fn mhz(x: f64) -> f64 {
    2.0 * PI * x * 1e6
}

impl Scenario {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn species(&self) -> CliResult<IonSpecies<f64>> {
        let s = &self.species;
        Ok(IonSpecies::new(
            &s.name,
            s.mass_u * iontrap::consts::ATOMIC_MASS_UNIT,
            s.charge_e * iontrap::consts::ELEMENTARY_CHARGE,
            s.upper_state_lifetime_s,
            s.qubit_zeeman_hz_per_g,
        )?)
    }

    pub fn modes(&self) -> CliResult<Vec<MotionalMode<f64>>> {
        let species = self.species()?;
        let com = mhz(self.trap.omega_com_mhz);
        let k = grating_axial_projection(self.species.qubit_wavelength_nm * 1e-9, self.beam.emission_angle_deg.to_radians());
        let mut radial = 0;
        self.modes
            .iter()
            .map(|m| {
                let label = match m.kind {
                    ModeKind::Com => ModeLabel::ComAxial,
                    ModeKind::Stretch => ModeLabel::StretchAxial,
                    ModeKind::Radial => {
                        radial += 1;
                        ModeLabel::Radial(radial - 1)
                    }
                };
                let w = match (m.frequency_mhz, m.kind) {
                    (Some(f), _) => mhz(f),
                    (None, ModeKind::Com) => com,
                    (None, ModeKind::Stretch) => iontrap::physcore::stretch_frequency(com)?,
                    (None, ModeKind::Radial) => return Err(CliError::Validation("radial modes need frequency_mhz".into())),
                };
                let eta = match &m.eta {
                    Some(e) => e.clone(),
                    None if m.kind != ModeKind::Radial => lamb_dicke(k, &species, label, w)?,
                    None => return Err(CliError::Validation("radial modes need eta".into())),
                };
                Ok(MotionalMode::new(label, w, eta, m.nbar, m.heating_rate_quanta_per_s)?)
            })
            .collect()
    }

    pub fn gate_mode(&self) -> CliResult<MotionalMode<f64>> {
        self.modes()?
            .into_iter()
            .nth(self.drive.mode_index)
            .ok_or_else(|| CliError::Validation(format!("drive.mode_index {} has no mode", self.drive.mode_index)))
    }

    /// Single-loop drive for the gate mode.
    pub fn gate_drive(&self) -> CliResult<GateDrive<f64>> {
        let mode = self.gate_mode()?;
        self.drive_for(&mode, self.drive.detuning_khz, self.drive.ramp_us)
    }

    pub fn drive_for(&self, mode: &MotionalMode<f64>, detuning_khz: f64, ramp_us: f64) -> CliResult<GateDrive<f64>> {
        let d = &self.drive;
        let mut drive = GateDrive::single_loop(mode, 2.0 * PI * detuning_khz * 1e3, ramp_us * 1e-6, d.spin_phase_rad)?;
        if !d.include_carrier {
            drive = drive.without_carrier();
        } else if d.refine_closure {
            drive = refine_closure(&drive, mode)?.0;
        }
        Ok(drive)
    }

    pub fn gate_context(&self) -> CliResult<GateContext> {
        let mode = self.gate_mode()?;
        let drive = self.gate_drive()?;
        Ok(GateContext::new(drive, mode)?)
    }

    pub fn beam(&self) -> CliResult<(BeamProfile<f64>, LossLedger<f64>)> {
        let b = &self.beam;
        let profile = BeamProfile::new(
            b.waist_x_um * 1e-6,
            b.waist_y_um * 1e-6,
            [b.center_um[0] * 1e-6, b.center_um[1] * 1e-6],
            0.0,
            b.emission_angle_deg.to_radians(),
        )?;
        let ledger = LossLedger::new(b.losses.iter().map(|l| (l.stage.as_str(), l.loss_db)).collect())?;
        Ok((profile, ledger))
    }

    pub fn noise_models(&self) -> CliResult<Vec<NoiseModel>> {
        let models: Vec<NoiseModel> = self
            .noise
            .iter()
            .map(|n| match n {
                NoiseConfig::Heating { rate_quanta_per_s } => NoiseModel::Heating { rate: *rate_quanta_per_s },
                NoiseConfig::MotionalDrift { magnitude_hz, recalibration_interval_s } => NoiseModel::MotionalDrift(MotionalDrift {
                    magnitude_hz: *magnitude_hz,
                    recalibration_interval: *recalibration_interval_s,
                    profile: DriftProfile::LinearBetweenRecal,
                }),
                NoiseConfig::LaserSinusoid { excursion_amplitude_hz, period_ms } => NoiseModel::LaserSinusoid(LaserSinusoid {
                    excursion_amplitude: 2.0 * PI * excursion_amplitude_hz,
                    period: period_ms * 1e-3,
                }),
                NoiseConfig::LaserGaussianDecay { t_1e_ms } => NoiseModel::LaserGaussianDecay { t_1e: t_1e_ms * 1e-3 },
                NoiseConfig::Kerr { chi_per_phonon_rad_per_s, spectator_nbars, .. } => NoiseModel::Kerr(Kerr {
                    chi_per_phonon: chi_per_phonon_rad_per_s.clone(),
                    spectator_nbars: spectator_nbars.clone(),
                }),
                NoiseConfig::SpectatorDephasing { etas, nbars, .. } => {
                    NoiseModel::SpectatorDephasing(SpectatorDephasing { etas: etas.clone(), nbars: nbars.clone() })
                }
                NoiseConfig::SpontaneousEmission { lifetime_s } => NoiseModel::SpontaneousEmission { lifetime: *lifetime_s },
                NoiseConfig::Readout { dark_counts, one_bright_counts, two_bright_counts, thresholds_counts, .. } => {
                    NoiseModel::Readout(Readout {
                        means: PoissonMeans { dark: *dark_counts, one_bright: *one_bright_counts, two_bright: *two_bright_counts },
                        thresholds: thresholds_counts.map(|[low, high]| Thresholds { low, high }),
                    })
                }
            })
            .collect();
        for m in &models {
            m.validate()?;
        }
        Ok(models)
    }

    pub fn heating_rate(&self) -> f64 {
        self.noise
            .iter()
            .map(|n| if let NoiseConfig::Heating { rate_quanta_per_s } = n { *rate_quanta_per_s } else { 0.0 })
            .sum()
    }

    pub fn readout(&self) -> CliResult<Option<Readout>> {
        Ok(self.noise_models()?.into_iter().find_map(|m| if let NoiseModel::Readout(r) = m { Some(r) } else { None }))
    }

    pub fn sweep_grid(&self) -> CliResult<Vec<f64>> {
        match &self.sweep {
            Some(s) => s.grid(),
            None => Err(CliError::Validation("scenario has no [sweep] section".into())),
        }
    }

    /// Checks that need no gate simulation.
    pub fn validate(&self) -> CliResult<()> {
        if self.shots_per_point < 1 {
            return Err(CliError::Validation("shots_per_point must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(CliError::Validation("at least one mode is required".into()));
        }
        if self.budget.curve_nodes < 3 || self.budget.curve_nodes.is_multiple_of(2) {
            return Err(CliError::Validation("budget.curve_nodes must be odd and at least 3".into()));
        }
        self.modes()?;
        let mode = self.gate_mode()?;
        GateDrive::single_loop(&mode, 2.0 * PI * self.drive.detuning_khz * 1e3, self.drive.ramp_us * 1e-6, 0.0)?.validate()?;
        self.beam()?;
        self.noise_models()?;
        if let Some(s) = &self.sweep {
            s.grid()?;
            let allowed: &[SweepVariable] = match self.experiment {
                Experiment::ParityScan => &[SweepVariable::AnalysisPhaseRad],
                _ => &[SweepVariable::TimeUs],
            };
            let gate_params = [
                SweepVariable::DetuningKhz,
                SweepVariable::RampUs,
                SweepVariable::Nbar,
                SweepVariable::HeatingRateQuantaPerS,
                SweepVariable::MotionalOffsetHz,
                SweepVariable::CarrierOffsetHz,
                SweepVariable::RabiScale,
            ];
            if !allowed.contains(&s.variable) && !gate_params.contains(&s.variable) {
                return Err(CliError::Validation(format!("sweep variable {} does not apply to this experiment", s.variable.column())));
            }
        }
        Ok(())
    }
}
