//! Bichromatic drive description and single-loop closure.

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::integrate::{Integrator, Method};
use crate::linalg::C;
use crate::physcore::MotionalMode;
use crate::real::{lit, Real};

/// Amplitude envelope: `sin^2` rise over `ramp`, flat top, `sin^2` fall ending
/// at `duration`, zero outside `[0, duration]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope<T: Real> {
    pub ramp: T,
    pub duration: T,
}

impl<T: Real> Envelope<T> {
    pub fn new(ramp: T, duration: T) -> Result<Self> {
        if !(ramp >= T::zero()) || !(duration > T::zero()) || duration < T::two() * ramp {
            return domain(format!("invalid envelope: ramp {ramp}, duration {duration}"));
        }
        Ok(Self { ramp, duration })
    }

    pub fn value(&self, t: T) -> T {
        if t < T::zero() || t > self.duration {
            return T::zero();
        }
        if self.ramp <= T::zero() {
            return T::one();
        }
        let edge = if t < self.ramp {
            t
        } else if t > self.duration - self.ramp {
            self.duration - t
        } else {
            return T::one();
        };
        let s = (T::FRAC_PI_2() * edge / self.ramp).sin();
        s * s
    }

    /// Points where the envelope is not smooth.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut b = vec![T::zero()];
        if self.ramp > T::zero() {
            b.push(self.ramp);
            b.push(self.duration - self.ramp);
        }
        b.push(self.duration);
        b
    }
}

/// A symmetric bichromatic drive with tones at `omega_0 +/- tone_detuning`
/// (plus a common `carrier_freq_offset`), acting on two ions.
#[derive(Clone, Debug, PartialEq)]
pub struct GateDrive<T: Real> {
    /// Tone offset from the carrier, rad/s. The sideband detuning is this
    /// minus the mode frequency.
    pub tone_detuning: T,
    /// Carrier Rabi rate of each tone on each ion, rad/s.
    pub rabi_rates: Vec<T>,
    /// MS phase `phi`, rad.
    pub spin_phase: T,
    /// Extra optical phase per ion, rad.
    pub ion_phase_offsets: Vec<T>,
    pub ramp_duration: T,
    pub total_duration: T,
    /// Error in carrier frequency tracking, rad/s.
    pub carrier_freq_offset: T,
    /// Keep the off-resonant carrier coupling in the Hamiltonian.
    pub include_carrier: bool,
}

impl<T: Real> GateDrive<T> {
    /// Drive that closes a single phase-space loop on `mode` with sideband
    /// detuning `detuning` and `sin^2` ramps of length `ramp`. The gate time is
    /// `2 pi/|detuning| + ramp` and the Rabi rates are solved so the geometric
    /// phase equals the ideal MS phase.
    pub fn single_loop(mode: &MotionalMode<T>, detuning: T, ramp: T, spin_phase: T) -> Result<Self> {
        if detuning == T::zero() || !detuning.is_finite() {
            return domain("sideband detuning must be non-zero");
        }
        if mode.eta.len() != 2 || mode.eta.iter().any(|e| *e == T::zero()) {
            return domain("single_loop needs two ions with non-zero Lamb-Dicke factors");
        }
        let total = gate_time(detuning)? + ramp;
        let env = Envelope::new(ramp, total)?;
        let (_, phi_int) = loop_integrals(&env, detuning, &[total])?[0];
        let f = (T::PI() / (lit::<T>(8.0) * phi_int.abs())).sqrt();
        let rabi_rates = mode.eta.iter().map(|e| T::two() * f / e.abs()).collect();
        let ion_phase_offsets = mode.eta.iter().map(|e| if *e < T::zero() { T::PI() } else { T::zero() }).collect();
        Ok(Self {
            tone_detuning: mode.angular_frequency + detuning,
            rabi_rates,
            spin_phase,
            ion_phase_offsets,
            ramp_duration: ramp,
            total_duration: total,
            carrier_freq_offset: T::zero(),
            include_carrier: true,
        })
    }

    pub fn without_carrier(mut self) -> Self {
        self.include_carrier = false;
        self
    }

    pub fn with_duration(mut self, total_duration: T) -> Self {
        self.total_duration = total_duration;
        self
    }

    pub fn envelope(&self) -> Result<Envelope<T>> {
        Envelope::new(self.ramp_duration, self.total_duration)
    }

    /// Tone frequencies relative to the carrier, rad/s.
    pub fn tone_detunings(&self) -> [T; 2] {
        [-self.tone_detuning, self.tone_detuning]
    }

    /// Sideband detuning `delta` on `mode`.
    pub fn sideband_detuning(&self, mode: &MotionalMode<T>) -> T {
        self.tone_detuning - mode.angular_frequency
    }

    pub fn validate(&self) -> Result<()> {
        self.envelope()?;
        if self.rabi_rates.len() != 2 || self.ion_phase_offsets.len() != 2 {
            return domain("drive must address exactly two ions");
        }
        if self.rabi_rates.iter().any(|r| !(*r >= T::zero()) || !r.is_finite()) {
            return domain("Rabi rates must be finite and non-negative");
        }
        if !self.tone_detuning.is_finite() || !self.carrier_freq_offset.is_finite() || !self.spin_phase.is_finite() {
            return domain("drive frequencies and phases must be finite");
        }
        Ok(())
    }
}

/// Single-loop gate time `2 pi / |delta|`.
pub fn gate_time<T: Real>(detuning: T) -> Result<T> {
    if detuning == T::zero() || !detuning.is_finite() {
        return domain("sideband detuning must be non-zero");
    }
    Ok(T::two() * T::PI() / detuning.abs())
}

/// Loop integrals of the unit-amplitude force `g(t) = r(t) e^{-i delta t}`:
/// `G(t) = int_0^t g` and `Phi(t) = int_0^t Im(g* G)`, at each sample time.
pub fn loop_integrals<T: Real>(env: &Envelope<T>, delta: T, times: &[T]) -> Result<Vec<(C<T>, T)>> {
    // Work in units of the envelope duration so tolerances are scale free.
    let scale = env.duration;
    let d = delta * scale;
    let unit = Envelope { ramp: env.ramp / scale, duration: T::one() };
    let mut rhs = |u: T, y: &Vec<T>, dy: &mut Vec<T>| {
        let r = unit.value(u);
        let (s, c) = (d * u).sin_cos();
        let (gr, gi) = (r * c, -r * s);
        dy[0] = gr;
        dy[1] = gi;
        dy[2] = gr * y[1] - gi * y[0];
    };
    let tol = lit::<T>(1e-12).max(T::epsilon() * lit(100.0));
    let mut integ = Integrator::new(Method::Adaptive { rtol: tol, atol: tol * lit(1e-2) });
    let mut y = vec![T::zero(); 3];
    let mut u = T::zero();
    let breaks = unit.breakpoints();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let target = (t / scale).min(T::one()).max(T::zero());
        let start = u;
        for &b in breaks.iter().filter(|b| **b > start && **b < target) {
            integ.advance(&mut rhs, u, b, &mut y)?;
            u = b;
        }
        if target > u {
            integ.advance(&mut rhs, u, target, &mut y)?;
            u = target;
        }
        out.push((Complex::new(y[0] * scale, y[1] * scale), y[2] * scale * scale));
    }
    Ok(out)
}

/// Largest `|G(t)|` of the unit-amplitude loop over the envelope.
pub fn max_loop_radius<T: Real>(env: &Envelope<T>, delta: T) -> Result<T> {
    let n = 256;
    let times: Vec<T> = (0..=n).map(|k| env.duration * T::from_usize_lossy(k) / T::from_usize_lossy(n)).collect();
    Ok(loop_integrals(env, delta, &times)?.iter().map(|(g, _)| g.norm()).fold(T::zero(), T::max))
}
