//! Gate infidelity as a smooth function of one quasi-static parameter,
//! sampled with `ms_evolve` on Chebyshev-Lobatto nodes and interpolated.

use super::GateContext;
use crate::dynamics::ms::GatePerturbation;
use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    /// Gate-mode frequency shift, rad/s.
    MotionalOffset,
    /// Carrier tracking error, rad/s.
    CarrierOffset,
    /// Common Rabi-rate factor.
    RabiScale,
}

impl CurveKind {
    pub fn perturbation(self, x: f64) -> GatePerturbation<f64> {
        match self {
            CurveKind::MotionalOffset => GatePerturbation::MotionalOffset { shift: x },
            CurveKind::CarrierOffset => GatePerturbation::CarrierOffset { offset: x },
            CurveKind::RabiScale => GatePerturbation::RabiScale { factor: x },
        }
    }
}

/// Excess infidelity over the context baseline on `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfidelityCurve {
    pub kind: CurveKind,
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

fn lobatto(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|j| 0.5 * (lo + hi) + 0.5 * (hi - lo) * (std::f64::consts::PI * j as f64 / m).cos()).collect()
}

fn barycentric(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..n {
        let d = x - nodes[j];
        if d == 0.0 {
            return values[j];
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n - 1 {
            w *= 0.5;
        }
        num += w * values[j] / d;
        den += w / d;
    }
    num / den
}

impl InfidelityCurve {
    /// Sample on `nodes` (odd, at least 5) Lobatto points.
    pub fn build(ctx: &GateContext, kind: CurveKind, lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        if !(hi > lo) {
            return domain(format!("empty curve interval [{lo}, {hi}]"));
        }
        if nodes < 5 || nodes.is_multiple_of(2) {
            return domain("curve needs an odd number of nodes, at least 5");
        }
        let xs = lobatto(lo, hi, nodes);
        let values = xs.iter().map(|x| ctx.excess_infidelity(&[kind.perturbation(*x)])).collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, lo, hi, nodes: xs, values })
    }

    /// Build from precomputed node values (used for tests and reloading).
    pub fn from_values(kind: CurveKind, lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 5 || values.len().is_multiple_of(2) {
            return domain("curve needs an odd number of nodes, at least 5");
        }
        Ok(Self { kind, lo, hi, nodes: lobatto(lo, hi, values.len()), values })
    }

    /// Interpolated value, clamped to the end points outside `[lo, hi]`.
    pub fn eval(&self, x: f64) -> f64 {
        barycentric(&self.nodes, &self.values, x.clamp(self.lo, self.hi))
    }

    /// Interpolant through every other node; its disagreement with
    /// [`InfidelityCurve::eval`] estimates the interpolation error.
    pub fn eval_coarse(&self, x: f64) -> f64 {
        let nodes: Vec<f64> = self.nodes.iter().step_by(2).copied().collect();
        let values: Vec<f64> = self.values.iter().step_by(2).copied().collect();
        barycentric(&nodes, &values, x.clamp(self.lo, self.hi))
    }

    /// Second derivative of the interpolant by central differences.
    pub fn curvature(&self, x: f64) -> f64 {
        let h = 1e-3 * (self.hi - self.lo);
        (self.eval(x + h) - 2.0 * self.eval(x) + self.eval(x - h)) / (h * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_smooth_functions() {
        let f = |x: f64| (0.3 * x).sin() + x * x * 1e-2;
        let xs = lobatto(-4.0, 7.0, 21);
        let c = InfidelityCurve::from_values(CurveKind::RabiScale, -4.0, 7.0, xs.iter().map(|x| f(*x)).collect()).unwrap();
        for x in [-3.9, -1.0, 0.0, 2.5, 6.99] {
            assert!((c.eval(x) - f(x)).abs() < 1e-12);
            assert!((c.eval_coarse(x) - f(x)).abs() < 1e-6);
        }
        assert!((c.curvature(1.0) - (-0.09 * (0.3_f64).sin() + 2e-2)).abs() < 1e-6);
    }
}
