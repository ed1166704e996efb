#![allow(dead_code)]

use std::f64::consts::PI;

use iontrap::dynamics::ms::refine_closure;
use iontrap::dynamics::GateDrive;
use iontrap::noise::GateContext;
use iontrap::physcore::{ModeLabel, MotionalMode};

pub const DETUNING: f64 = 2.0 * PI * 15e3;

pub fn stretch_mode(nbar: f64) -> MotionalMode<f64> {
    MotionalMode::new(ModeLabel::StretchAxial, 2.0 * PI * 2.078e6, vec![0.0279, -0.0279], nbar, 0.0).unwrap()
}

/// Spin-dependent force only, flat envelope.
pub fn ideal_drive(mode: &MotionalMode<f64>) -> GateDrive<f64> {
    GateDrive::single_loop(mode, DETUNING, 0.0, 0.0).unwrap().without_carrier()
}

/// Full drive with carrier terms and 5 us ramps, Rabi rate re-solved.
pub fn ramped_drive(mode: &MotionalMode<f64>) -> GateDrive<f64> {
    let d = GateDrive::single_loop(mode, DETUNING, 5e-6, 0.0).unwrap();
    refine_closure(&d, mode).unwrap().0
}

pub fn fast_context() -> GateContext {
    let mode = stretch_mode(0.05);
    GateContext::new(ideal_drive(&mode), mode).unwrap()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}
