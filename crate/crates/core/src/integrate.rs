//! Explicit Runge-Kutta propagation of `dy/dt = f(t, y)`.
//!
//! The adaptive stepper is Dormand-Prince 5(4) with local extrapolation; the
//! fixed stepper is classical RK4 for runs that must be reproducible
//! independently of tolerance heuristics.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::real::{lit, Real};

/// Vector-space operations the steppers need on a state.
pub trait OdeState<T: Real>: Clone {
    fn zeros_like(&self) -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: T, x: &Self);
    /// Sum over components of `(err_i / (atol + rtol * max(|y0_i|, |y1_i|)))^2`,
    /// and the component count.
    fn weighted_sq_error(&self, y0: &Self, y1: &Self, rtol: T, atol: T) -> (T, usize);
}

impl<T: Real> OdeState<T> for Vec<T> {
    fn zeros_like(&self) -> Self {
        vec![T::zero(); self.len()]
    }
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s = *s + a * *v;
        }
    }
    fn weighted_sq_error(&self, y0: &Self, y1: &Self, rtol: T, atol: T) -> (T, usize) {
        let mut acc = T::zero();
        for ((e, a), b) in self.iter().zip(y0).zip(y1) {
            let sc = atol + rtol * a.abs().max(b.abs());
            acc = acc + (*e / sc) * (*e / sc);
        }
        (acc, self.len())
    }
}

impl<T: Real> OdeState<T> for Vec<Complex<T>> {
    fn zeros_like(&self) -> Self {
        vec![Complex::zero(); self.len()]
    }
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s = *s + *v * a;
        }
    }
    fn weighted_sq_error(&self, y0: &Self, y1: &Self, rtol: T, atol: T) -> (T, usize) {
        let mut acc = T::zero();
        for ((e, a), b) in self.iter().zip(y0).zip(y1) {
            let sc = atol + rtol * a.norm().max(b.norm());
            let r = e.norm() / sc;
            acc = acc + r * r;
        }
        (acc, self.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method<T> {
    /// Dormand-Prince 5(4) with error control.
    Adaptive { rtol: T, atol: T },
    /// Classical RK4 with steps no longer than `max_step`.
    FixedRk4 { max_step: T },
}

impl<T: Real> Default for Method<T> {
    fn default() -> Self {
        Method::Adaptive { rtol: lit(1e-9), atol: lit(1e-12) }
    }
}

/// A stateful integrator that remembers its last accepted step size between
/// successive calls to [`Integrator::advance`].
#[derive(Clone, Debug)]
pub struct Integrator<T: Real> {
    method: Method<T>,
    step: Option<T>,
    max_steps: usize,
    pub accepted: usize,
    pub rejected: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl<T: Real> Integrator<T> {
    pub fn new(method: Method<T>) -> Self {
        Self { method, step: None, max_steps: 5_000_000, accepted: 0, rejected: 0 }
    }

    pub fn method(&self) -> Method<T> {
        self.method
    }

    /// Propagate `y` from `t0` to `t1` in place.
    pub fn advance<S, F>(&mut self, rhs: &mut F, t0: T, t1: T, y: &mut S) -> Result<()>
    where
        S: OdeState<T>,
        F: FnMut(T, &S, &mut S),
    {
        if t1 <= t0 {
            return Ok(());
        }
        match self.method {
            Method::FixedRk4 { max_step } => self.advance_rk4(rhs, t0, t1, y, max_step),
            Method::Adaptive { rtol, atol } => self.advance_dopri(rhs, t0, t1, y, rtol, atol),
        }
    }

    fn advance_rk4<S, F>(&mut self, rhs: &mut F, t0: T, t1: T, y: &mut S, max_step: T) -> Result<()>
    where
        S: OdeState<T>,
        F: FnMut(T, &S, &mut S),
    {
        let n = ((t1 - t0) / max_step).ceil().to_f64_lossy().max(1.0) as usize;
        let h = (t1 - t0) / T::from_usize_lossy(n);
        let half = T::half();
        let sixth = T::one() / lit(6.0);
        let mut k1 = y.zeros_like();
        let mut k2 = y.zeros_like();
        let mut k3 = y.zeros_like();
        let mut k4 = y.zeros_like();
        for i in 0..n {
            let t = t0 + h * T::from_usize_lossy(i);
            rhs(t, y, &mut k1);
            let mut tmp = y.clone();
            tmp.axpy(half * h, &k1);
            rhs(t + half * h, &tmp, &mut k2);
            let mut tmp = y.clone();
            tmp.axpy(half * h, &k2);
            rhs(t + half * h, &tmp, &mut k3);
            let mut tmp = y.clone();
            tmp.axpy(h, &k3);
            rhs(t + h, &tmp, &mut k4);
            y.axpy(h * sixth, &k1);
            y.axpy(h * sixth * T::two(), &k2);
            y.axpy(h * sixth * T::two(), &k3);
            y.axpy(h * sixth, &k4);
            self.accepted += 1;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn advance_dopri<S, F>(&mut self, rhs: &mut F, t0: T, t1: T, y: &mut S, rtol: T, atol: T) -> Result<()>
    where
        S: OdeState<T>,
        F: FnMut(T, &S, &mut S),
    {
        let span = t1 - t0;
        let mut h = self.step.unwrap_or(span * lit(1e-3)).min(span);
        let mut t = t0;
        let mut k1 = y.zeros_like();
        let mut k2 = y.zeros_like();
        let mut k3 = y.zeros_like();
        let mut k4 = y.zeros_like();
        let mut k5 = y.zeros_like();
        let mut k6 = y.zeros_like();
        let mut k7 = y.zeros_like();
        rhs(t, y, &mut k1);
        let mut steps = 0usize;
        let tiny = span * T::epsilon() * lit(16.0);
        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
            }
            let last = t + h >= t1 - tiny;
            if last {
                h = t1 - t;
            }
            let stage = |coeffs: &[(f64, &S)]| {
                let mut s = y.clone();
                for (c, k) in coeffs {
                    if *c != 0.0 {
                        s.axpy(h * lit::<T>(*c), k);
                    }
                }
                s
            };
            let y2 = stage(&[(A21, &k1)]);
            rhs(t + h * lit(0.2), &y2, &mut k2);
            let y3 = stage(&[(A31, &k1), (A32, &k2)]);
            rhs(t + h * lit(0.3), &y3, &mut k3);
            let y4 = stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]);
            rhs(t + h * lit(0.8), &y4, &mut k4);
            let y5 = stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            rhs(t + h * lit(8.0 / 9.0), &y5, &mut k5);
            let y6 = stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            rhs(t + h, &y6, &mut k6);
            let ynew = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            rhs(t + h, &ynew, &mut k7);
            let mut err = k1.zeros_like();
            for (c, k) in [(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)] {
                err.axpy(h * lit::<T>(c), k);
            }
            let (sq, n) = err.weighted_sq_error(y, &ynew, rtol, atol);
            let err_norm = (sq / T::from_usize_lossy(n.max(1))).sqrt();
            let factor = if err_norm <= T::zero() {
                lit(5.0)
            } else {
                (lit::<T>(0.9) * err_norm.powf(lit(-0.2))).min(lit(5.0)).max(lit(0.2))
            };
            if err_norm <= T::one() {
                t = if last { t1 } else { t + h };
                *y = ynew;
                std::mem::swap(&mut k1, &mut k7);
                self.accepted += 1;
                if !last {
                    self.step = Some(h * factor);
                }
                h = h * factor;
            } else {
                self.rejected += 1;
                h = h * factor.min(T::one());
                if h < tiny {
                    return Err(Error::Integration(format!("step size underflow at t = {t}")));
                }
            }
        }
        Ok(())
    }
}
