//! Grating-beam geometry at the ions: intensity, Rabi rate from delivered
//! power, ion balancing, crosstalk and micromotion sidebands.

use crate::error::{domain, Result};
use crate::optimize::bisect;
use crate::real::{lit, Real};
use crate::special::bessel_j;

/// Single-ion quadrupole coupling, `Omega = kappa sqrt(I)` with `I` in W/m^2
/// and `Omega` in rad/s. Set to the predicted 2.0 us pi-time for 1.5 mW
/// through the default loss ledger at the beam peak.
pub const QUADRUPOLE_COUPLING_729: f64 = 520.7;

/// Elliptical Gaussian spot in the ion plane.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamProfile<T: Real> {
    /// 1/e^2 intensity radius along x, m.
    pub waist_x: T,
    /// 1/e^2 intensity radius along y, m.
    pub waist_y: T,
    /// m
    pub center: [T; 2],
    /// W
    pub power_at_ion_plane: T,
    /// Angle of the wavevector from vertical, in the xz plane, rad.
    pub emission_angle: T,
}

impl<T: Real> BeamProfile<T> {
    pub fn new(waist_x: T, waist_y: T, center: [T; 2], power_at_ion_plane: T, emission_angle: T) -> Result<Self> {
        if !(waist_x > T::zero() && waist_y > T::zero()) {
            return domain(format!("beam waists must be positive, got {waist_x}, {waist_y}"));
        }
        if !(power_at_ion_plane >= T::zero()) {
            return domain("beam power must be non-negative");
        }
        Ok(Self { waist_x, waist_y, center, power_at_ion_plane, emission_angle })
    }

    /// Measured spot of the fabricated coupler, centered, unit power.
    pub fn grating_spot() -> Self {
        Self {
            waist_x: lit(6.5e-6),
            waist_y: lit(3.7e-6),
            center: [T::zero(); 2],
            power_at_ion_plane: T::one(),
            emission_angle: lit(36f64.to_radians()),
        }
    }

    pub fn with_power(&self, power: T) -> Self {
        Self { power_at_ion_plane: power, ..self.clone() }
    }

    pub fn with_center(&self, center: [T; 2]) -> Self {
        Self { center, ..self.clone() }
    }

    /// Unit wavevector `(sin theta, 0, cos theta)`.
    pub fn k_vector(&self) -> [T; 3] {
        [self.emission_angle.sin(), T::zero(), self.emission_angle.cos()]
    }

    pub fn peak_intensity(&self) -> T {
        T::two() * self.power_at_ion_plane / (T::PI() * self.waist_x * self.waist_y)
    }
}

/// `I0 exp(-2 (dx/w_x)^2 - 2 (dy/w_y)^2)`, W/m^2.
pub fn beam_intensity<T: Real>(profile: &BeamProfile<T>, position: [T; 2]) -> T {
    let dx = (position[0] - profile.center[0]) / profile.waist_x;
    let dy = (position[1] - profile.center[1]) / profile.waist_y;
    profile.peak_intensity() * (-T::two() * (dx * dx + dy * dy)).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossStage<T: Real> {
    pub stage: String,
    pub loss_db: T,
}

/// Optical losses from the fibre input to the ion.
#[derive(Clone, Debug, PartialEq)]
pub struct LossLedger<T: Real> {
    pub entries: Vec<LossStage<T>>,
}

impl<T: Real> LossLedger<T> {
    pub fn new(entries: Vec<(&str, T)>) -> Result<Self> {
        let entries: Vec<LossStage<T>> = entries.into_iter().map(|(s, l)| LossStage { stage: s.to_owned(), loss_db: l }).collect();
        let ledger = Self { entries };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !(e.loss_db >= T::zero()) || !e.loss_db.is_finite() {
                return domain(format!("loss for '{}' must be finite and non-negative, got {}", e.stage, e.loss_db));
            }
        }
        Ok(())
    }

    /// Fibre-to-chip coupling, waveguide propagation, grating emission.
    pub fn fabricated_device() -> Self {
        Self::new(vec![("fibre-chip coupling", lit(2.4)), ("waveguide", lit(1.0)), ("grating emission", lit(3.0))]).expect("valid ledger")
    }

    pub fn total_db(&self) -> T {
        self.entries.iter().map(|e| e.loss_db).sum()
    }

    pub fn transmission(&self) -> T {
        T::lit(10.0).powf(-self.total_db() / T::lit(10.0))
    }
}

/// Carrier Rabi rate at `position` for `input_power` launched into the fibre.
pub fn rabi_from_power<T: Real>(input_power: T, ledger: &LossLedger<T>, profile: &BeamProfile<T>, position: [T; 2], coupling: T) -> Result<T> {
    if !(input_power >= T::zero()) {
        return domain("input power must be non-negative");
    }
    ledger.validate()?;
    let at_ion = profile.with_power(input_power * ledger.transmission());
    Ok(coupling * beam_intensity(&at_ion, position).sqrt())
}

/// `pi / Omega`.
pub fn pi_time<T: Real>(rabi: T) -> T {
    T::PI() / rabi
}

/// Positions along x, `spacing` apart, with equal intensity on both ions.
pub fn balanced_positions<T: Real>(profile: &BeamProfile<T>, spacing: T) -> Result<(T, T)> {
    if !(spacing > T::zero()) {
        return domain(format!("ion spacing must be positive, got {spacing}"));
    }
    let half = spacing / T::two();
    Ok((profile.center[0] - half, profile.center[0] + half))
}

/// `|1 - Omega_1 / Omega_2|` for two ions on the line `y = y`.
pub fn imbalance<T: Real>(profile: &BeamProfile<T>, x: (T, T), y: T) -> T {
    let a = beam_intensity(profile, [x.0, y]).sqrt();
    let b = beam_intensity(profile, [x.1, y]).sqrt();
    (T::one() - a / b).abs()
}

/// Relative intensity `20 log10(t_direct / t_cross)`, dB.
pub fn crosstalk_db<T: Real>(pi_time_direct: T, pi_time_cross: T) -> Result<T> {
    if !(pi_time_direct > T::zero() && pi_time_cross > T::zero()) {
        return domain("pi-times must be positive");
    }
    Ok(T::lit(20.0) * (pi_time_direct / pi_time_cross).log10())
}

/// First micromotion sideband to carrier Rabi ratio `J1(beta) / J0(beta)`.
pub fn micromotion_ratio<T: Real>(modulation_index: T) -> T {
    bessel_j(1, modulation_index) / bessel_j(0, modulation_index)
}

/// Modulation index for a measured sideband ratio, on the branch below the
/// first zero of `J0`.
pub fn micromotion_index(ratio: f64) -> Result<f64> {
    if !(ratio >= 0.0) || !ratio.is_finite() {
        return domain(format!("sideband ratio must be finite and non-negative, got {ratio}"));
    }
    if ratio == 0.0 {
        return Ok(0.0);
    }
    bisect(|b| micromotion_ratio(b) - ratio, 0.0, 2.4, 1e-15)
}
