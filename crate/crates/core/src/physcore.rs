//! Species constants, two-ion axial mode structure, Lamb-Dicke factors and
//! thermal phonon distributions.

use log::warn;

use crate::consts;
use crate::error::{domain, Result};
use crate::real::{lit, Real};

/// Tail mass above which a truncated thermal distribution is flagged.
pub const TAIL_MASS_WARNING: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct IonSpecies<T: Real> {
    pub name: String,
    /// kg
    pub mass: T,
    /// C
    pub charge: T,
    /// Lifetime of the upper qubit level, s.
    pub upper_state_lifetime: T,
    /// Hz/G
    pub qubit_zeeman_sensitivity: T,
}

impl<T: Real> IonSpecies<T> {
    pub fn new(name: &str, mass: T, charge: T, upper_state_lifetime: T, qubit_zeeman_sensitivity: T) -> Result<Self> {
        if !(mass > T::zero()) {
            return domain(format!("ion mass must be positive, got {mass}"));
        }
        if !(charge > T::zero()) {
            return domain(format!("ion charge must be positive, got {charge}"));
        }
        if !(upper_state_lifetime > T::zero()) {
            return domain(format!("upper-state lifetime must be positive, got {upper_state_lifetime}"));
        }
        Ok(Self { name: name.to_owned(), mass, charge, upper_state_lifetime, qubit_zeeman_sensitivity })
    }

    /// Singly ionized calcium-40 with the D5/2 optical qubit.
    pub fn calcium40() -> Self {
        let mass = consts::CA40_ATOMIC_MASS_U * consts::ATOMIC_MASS_UNIT - consts::ELECTRON_MASS;
        Self {
            name: "40Ca+".to_owned(),
            mass: lit(mass),
            charge: lit(consts::ELEMENTARY_CHARGE),
            upper_state_lifetime: lit(consts::CA40_D52_LIFETIME),
            qubit_zeeman_sensitivity: lit(consts::CA40_QUBIT_ZEEMAN_HZ_PER_G),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeLabel {
    ComAxial,
    StretchAxial,
    Radial(usize),
}

impl ModeLabel {
    /// Normalized participation of each ion. Radial spectators couple with
    /// equal magnitude to both ions.
    pub fn mode_vector<T: Real>(self) -> [T; 2] {
        let c = T::one() / T::two().sqrt();
        match self {
            ModeLabel::ComAxial | ModeLabel::Radial(_) => [c, c],
            ModeLabel::StretchAxial => [c, -c],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionalMode<T: Real> {
    pub label: ModeLabel,
    /// rad/s
    pub angular_frequency: T,
    /// Signed Lamb-Dicke factor per ion.
    pub eta: Vec<T>,
    pub nbar: T,
    /// quanta/s
    pub heating_rate: T,
}

impl<T: Real> MotionalMode<T> {
    pub fn new(label: ModeLabel, angular_frequency: T, eta: Vec<T>, nbar: T, heating_rate: T) -> Result<Self> {
        if !(angular_frequency > T::zero()) {
            return domain(format!("mode frequency must be positive, got {angular_frequency}"));
        }
        if !(nbar >= T::zero()) {
            return domain(format!("mean occupancy must be non-negative, got {nbar}"));
        }
        if !(heating_rate >= T::zero()) {
            return domain(format!("heating rate must be non-negative, got {heating_rate}"));
        }
        let mode = Self { label, angular_frequency, eta, nbar, heating_rate };
        if !mode.in_lamb_dicke_regime() {
            warn!("mode {:?} has |eta| >= 1; Lamb-Dicke expansion is not valid", label);
        }
        Ok(mode)
    }

    pub fn in_lamb_dicke_regime(&self) -> bool {
        self.eta.iter().all(|e| e.abs() < T::one())
    }

    /// Default Fock cutoff `max(20, ceil(8 nbar))`.
    pub fn fock_cutoff(&self) -> usize {
        default_fock_cutoff(self.nbar)
    }

    /// Largest per-ion |eta|.
    pub fn max_abs_eta(&self) -> T {
        self.eta.iter().fold(T::zero(), |m, e| m.max(e.abs()))
    }

    pub fn thermal(&self) -> Result<ThermalDistribution<T>> {
        thermal_distribution(self.nbar, self.fock_cutoff())
    }
}

pub fn default_fock_cutoff<T: Real>(nbar: T) -> usize {
    let scaled = (nbar * lit(8.0)).ceil().to_f64_lossy();
    20usize.max(scaled as usize)
}

/// Two-ion axial stretch frequency, `sqrt(3) * omega_com`.
pub fn stretch_frequency<T: Real>(omega_com: T) -> Result<T> {
    if !(omega_com > T::zero()) {
        return domain(format!("COM frequency must be positive, got {omega_com}"));
    }
    Ok(lit::<T>(3.0).sqrt() * omega_com)
}

/// Two-ion Coulomb crystal separation `d = (q^2 / (2 pi eps0 m w^2))^(1/3)`.
pub fn equilibrium_spacing<T: Real>(omega_com: T, species: &IonSpecies<T>) -> Result<T> {
    if !(omega_com > T::zero()) {
        return domain(format!("COM frequency must be positive, got {omega_com}"));
    }
    let eps0: T = lit(consts::VACUUM_PERMITTIVITY);
    let q2 = species.charge * species.charge;
    let denom = T::two() * T::PI() * eps0 * species.mass * omega_com * omega_com;
    Ok((q2 / denom).cbrt())
}

/// Relative mismatch between the Coulomb repulsion and the trap restoring
/// force on one ion at separation `d`.
pub fn force_balance_residual<T: Real>(d: T, omega_com: T, species: &IonSpecies<T>) -> T {
    let eps0: T = lit(consts::VACUUM_PERMITTIVITY);
    let coulomb = species.charge * species.charge / (lit::<T>(4.0) * T::PI() * eps0 * d * d);
    let restoring = species.mass * omega_com * omega_com * d / T::two();
    ((coulomb - restoring) / restoring).abs()
}

/// Axial projection `k0 sin(theta)` of a grating beam emitted at `theta`
/// from vertical.
pub fn grating_axial_projection<T: Real>(wavelength: T, emission_angle: T) -> T {
    T::two() * T::PI() / wavelength * emission_angle.sin()
}

/// Per-ion Lamb-Dicke factors `eta_i = k b_i sqrt(hbar / (2 m w))`.
pub fn lamb_dicke<T: Real>(k_projection: T, species: &IonSpecies<T>, label: ModeLabel, angular_frequency: T) -> Result<Vec<T>> {
    if !(angular_frequency > T::zero()) {
        return domain(format!("mode frequency must be positive, got {angular_frequency}"));
    }
    if !(species.mass > T::zero()) {
        return domain("ion mass must be positive");
    }
    let hbar: T = lit(consts::HBAR);
    let x0 = (hbar / (T::two() * species.mass * angular_frequency)).sqrt();
    Ok(label.mode_vector::<T>().iter().map(|b| k_projection * *b * x0).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThermalDistribution<T: Real> {
    /// `p_n` for `n = 0..=truncation`, renormalized.
    pub probabilities: Vec<T>,
    pub nbar_nominal: T,
    pub truncation: usize,
    /// Probability mass above the truncation before renormalization.
    pub tail_mass: T,
}

/// Bose-Einstein occupation truncated at `n_max` and renormalized.
pub fn thermal_distribution<T: Real>(nbar: T, n_max: usize) -> Result<ThermalDistribution<T>> {
    if !(nbar >= T::zero()) {
        return domain(format!("mean occupancy must be non-negative, got {nbar}"));
    }
    if n_max < 1 {
        return domain("Fock truncation must be at least 1");
    }
    let mut probabilities = Vec::with_capacity(n_max + 1);
    if nbar == T::zero() {
        probabilities.push(T::one());
        probabilities.resize(n_max + 1, T::zero());
        return Ok(ThermalDistribution { probabilities, nbar_nominal: nbar, truncation: n_max, tail_mass: T::zero() });
    }
    let ratio = nbar / (nbar + T::one());
    let mut p = T::one() / (nbar + T::one());
    for _ in 0..=n_max {
        probabilities.push(p);
        p = p * ratio;
    }
    let tail_mass = ratio.powi(n_max as i32 + 1);
    let kept: T = probabilities.iter().copied().sum();
    for p in &mut probabilities {
        *p = *p / kept;
    }
    if tail_mass.to_f64_lossy() > TAIL_MASS_WARNING {
        warn!("thermal distribution nbar={nbar} truncated at {n_max} leaves tail mass {tail_mass}");
    }
    Ok(ThermalDistribution { probabilities, nbar_nominal: nbar, truncation: n_max, tail_mass })
}

/// Smallest truncation whose thermal tail mass is below `tol`.
pub fn truncation_for_tail<T: Real>(nbar: T, tol: T) -> usize {
    if nbar <= T::zero() {
        return 1;
    }
    let ratio = nbar / (nbar + T::one());
    let n = (tol.ln() / ratio.ln()).ceil().to_f64_lossy() as usize;
    n.max(2) - 1
}

impl<T: Real> ThermalDistribution<T> {
    /// A pure Fock state `|n>` represented as a distribution.
    pub fn fock(n: usize, truncation: usize) -> Self {
        let truncation = truncation.max(n);
        let mut probabilities = vec![T::zero(); truncation + 1];
        probabilities[n] = T::one();
        Self { probabilities, nbar_nominal: T::from_usize_lossy(n), truncation, tail_mass: T::zero() }
    }

    pub fn from_probabilities(probabilities: Vec<T>) -> Result<Self> {
        if probabilities.is_empty() || probabilities.iter().any(|p| !(*p >= T::zero())) {
            return domain("probabilities must be non-empty and non-negative");
        }
        let total: T = probabilities.iter().copied().sum();
        if !(total > T::zero()) {
            return domain("probabilities sum to zero");
        }
        let probabilities: Vec<T> = probabilities.into_iter().map(|p| p / total).collect();
        let truncation = probabilities.len() - 1;
        let mut d = Self { probabilities, nbar_nominal: T::zero(), truncation, tail_mass: T::zero() };
        d.nbar_nominal = d.mean();
        Ok(d)
    }

    pub fn mean(&self) -> T {
        self.probabilities.iter().enumerate().map(|(n, p)| T::from_usize_lossy(n) * *p).sum()
    }

    pub fn is_adequate(&self) -> bool {
        self.tail_mass.to_f64_lossy() <= TAIL_MASS_WARNING
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn stretch_is_sqrt3_com() {
        let w = 2.0 * PI * 1.2e6;
        let s = stretch_frequency(w).unwrap();
        assert!((s / (2.0 * PI) - 2.078_46e6).abs() < 10.0);
        assert!(stretch_frequency(0.0_f64).is_err());
        assert!(stretch_frequency(-1.0_f64).is_err());
    }

    #[test]
    fn calcium_spacing_near_five_microns() {
        let ca = IonSpecies::calcium40();
        let w = 2.0 * PI * 1.2e6;
        let d = equilibrium_spacing(w, &ca).unwrap();
        assert!((d - 4.96e-6).abs() < 0.01e-6, "{d}");
        assert!(force_balance_residual(d, w, &ca) < 1e-9);
        let d2 = equilibrium_spacing(2.0 * w, &ca).unwrap();
        assert!((d2 / d - 2f64.powf(-2.0 / 3.0)).abs() < 1e-12);
        assert!(equilibrium_spacing(0.0, &ca).is_err());
    }

    #[test]
    fn species_validation() {
        assert!(IonSpecies::new("x", 0.0_f64, 1.0, 1.0, 0.0).is_err());
        assert!(IonSpecies::new("x", 1.0_f64, -1.0, 1.0, 0.0).is_err());
        assert!(IonSpecies::new("x", 1.0_f64, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn lamb_dicke_stretch_mode() {
        let ca = IonSpecies::calcium40();
        let k = grating_axial_projection(729e-9, 36f64.to_radians());
        let w = stretch_frequency(2.0 * PI * 1.2e6).unwrap();
        let eta = lamb_dicke(k, &ca, ModeLabel::StretchAxial, w).unwrap();
        assert!((eta[0].abs() - 0.028).abs() < 0.0005, "{eta:?}");
        assert!((eta[0] + eta[1]).abs() < 1e-15);
        let eta4 = lamb_dicke(k, &ca, ModeLabel::StretchAxial, 4.0 * w).unwrap();
        assert!((eta4[0] / eta[0] - 0.5).abs() < 1e-12);
        let zero = lamb_dicke(0.0, &ca, ModeLabel::ComAxial, w).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);
    }

    #[test]
    fn thermal_examples() {
        let d = thermal_distribution(0.0_f64, 10).unwrap();
        assert_eq!(d.probabilities[0], 1.0);
        assert!(d.probabilities[1..].iter().all(|p| *p == 0.0));

        let d = thermal_distribution(0.5_f64, 60).unwrap();
        assert!((d.probabilities[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((d.probabilities[1] - 2.0 / 9.0).abs() < 1e-12);

        let n_max = truncation_for_tail(12.0_f64, 1e-6);
        let d = thermal_distribution(12.0_f64, n_max).unwrap();
        assert!(d.tail_mass < 1e-6);
        assert!((d.mean() - 12.0).abs() / 12.0 < 1e-3);
        let coarse = thermal_distribution(12.0_f64, 20).unwrap();
        assert!(!coarse.is_adequate());
        assert!(thermal_distribution(-0.1_f64, 10).is_err());
        assert!(thermal_distribution(0.1_f64, 0).is_err());
    }

    #[test]
    fn default_cutoff_rule() {
        assert_eq!(default_fock_cutoff(0.05_f64), 20);
        assert_eq!(default_fock_cutoff(12.5_f64), 100);
    }

    #[test]
    fn generic_over_f32() {
        let w = 2.0 * std::f32::consts::PI * 1.2e6;
        let s: f32 = stretch_frequency(w).unwrap();
        assert!((s / w - 3f32.sqrt()).abs() < 1e-6);
    }
}
