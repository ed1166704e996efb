mod common;

use std::f64::consts::PI;

use common::*;
use iontrap::analysis::calibrate_means;
use iontrap::dynamics::ms::GatePerturbation;
use iontrap::dynamics::GateDrive;
use iontrap::noise::quasistatic::*;
use iontrap::noise::*;

const CHI: f64 = 33.53;
const ETAS: [f64; 4] = [0.02458, 0.02458, 0.01961, 0.01961];
const NBARS: [f64; 4] = [12.5, 12.5, 5.0, 5.0];

fn kerr(scale_nbar: f64) -> Kerr {
    Kerr { chi_per_phonon: vec![CHI; 4], spectator_nbars: NBARS.iter().map(|n| n * scale_nbar).collect() }
}

fn spectators(scale_nbar: f64) -> SpectatorDephasing {
    SpectatorDephasing { etas: ETAS.to_vec(), nbars: NBARS.iter().map(|n| n * scale_nbar).collect() }
}

fn drift(hz: f64) -> MotionalDrift {
    MotionalDrift { magnitude_hz: hz, recalibration_interval: 15.0, profile: DriftProfile::LinearBetweenRecal }
}

fn laser(hz: f64) -> LaserSinusoid {
    LaserSinusoid { excursion_amplitude: 2.0 * PI * hz, period: 1.0 / 175.0 }
}

#[test]
fn heating_formula() {
    assert!((heating_error(60.0, 66.7e-6).unwrap() - 2.0e-3).abs() < 0.01e-3);
    assert_eq!(heating_error(0.0, 66.7e-6).unwrap(), 0.0);
    assert!(heating_error(-1.0, 1.0).is_err());
}

#[test]
fn spontaneous_emission_scales_with_gate_time() {
    let ctx = fast_context();
    let traj = ctx.trajectory(401).unwrap();
    let e = spontaneous_emission_error(1.1, &traj).unwrap();
    assert!((e / 3e-5 - 1.0).abs() < 0.3, "{e}");
    assert_eq!(spontaneous_emission_error(f64::INFINITY, &traj).unwrap(), 0.0);

    let mode = stretch_mode(0.05);
    let slow = GateDrive::single_loop(&mode, DETUNING / 2.0, 0.0, 0.0).unwrap().without_carrier();
    let slow_ctx = GateContext::new(slow, mode).unwrap();
    let e2 = spontaneous_emission_error(1.1, &slow_ctx.trajectory(401).unwrap()).unwrap();
    assert!((e2 / e / 2.0 - 1.0).abs() < 0.1, "{e} {e2}");
}

#[test]
fn every_estimator_vanishes_without_noise() {
    let ctx = fast_context();
    assert_eq!(drift_error(&drift(0.0), &ctx, 13).unwrap().value, 0.0);
    assert_eq!(laser_noise_error(&laser(0.0), &ctx, 13).unwrap().value, 0.0);
    assert_eq!(kerr_error(&kerr(0.0), &ctx, 13).unwrap().value, 0.0);
    assert_eq!(spectator_dephasing_error(&spectators(0.0), &ctx, 13).unwrap().value, 0.0);
    let b = total_budget(&ctx, &[], &BudgetOptions::default()).unwrap();
    assert_eq!(b.total, 0.0);
    assert_eq!(b.entries.len(), 7);
}

#[test]
fn drift_offset_response_is_quadratic() {
    let mode = stretch_mode(0.05);
    let ctx = GateContext::new(ramped_drive(&mode), mode).unwrap();
    let offsets = [-200.0, -100.0, -50.0, 50.0, 100.0, 200.0];
    let values: Vec<f64> = offsets
        .iter()
        .map(|hz| ctx.excess_infidelity(&[GatePerturbation::MotionalOffset { shift: 2.0 * PI * hz }]).unwrap())
        .collect();
    let x2: Vec<f64> = offsets.iter().map(|h| h * h).collect();
    let c = x2.iter().zip(&values).map(|(a, b)| a * b).sum::<f64>() / x2.iter().map(|a| a * a).sum::<f64>();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let ss_res: f64 = x2.iter().zip(&values).map(|(a, b)| (b - c * a).powi(2)).sum();
    let ss_tot: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    assert!(r2 > 0.99, "R^2 = {r2}");
}

#[test]
fn drift_is_monotone() {
    let ctx = fast_context();
    let a = drift_error(&drift(100.0), &ctx, 13).unwrap().value;
    let b = drift_error(&drift(200.0), &ctx, 13).unwrap().value;
    assert!(a > 0.0 && b > a);
    // Uniform offsets on [0, D] of a quadratic response average to D^2/3.
    let edge = ctx.excess_infidelity(&[GatePerturbation::MotionalOffset { shift: 2.0 * PI * 200.0 }]).unwrap();
    assert!((b / (edge / 3.0) - 1.0).abs() < 0.05, "{b} {edge}");
}

#[test]
fn laser_quadrature_matches_sampled_phases() {
    let ctx = fast_context();
    let a = 2.0 * PI * 160.0;
    let curve = InfidelityCurve::build(&ctx, CurveKind::CarrierOffset, -a, a, 13).unwrap();
    let quad = arcsine_expectation(&curve, a);
    let mc = laser_noise_error_mc(&curve, a, 1000, 5);
    assert!((quad.value - mc.value).abs() < 2.0 * mc.uncertainty, "{quad:?} {mc:?}");
    assert!(laser_noise_error(&laser(80.0), &ctx, 13).unwrap().value < laser_noise_error(&laser(160.0), &ctx, 13).unwrap().value);
}

#[test]
fn kerr_is_quadratic_in_occupancy_and_matches_variance_propagation() {
    let ctx = fast_context();
    let full = kerr_error(&kerr(1.0), &ctx, 13).unwrap().value;
    let half = kerr_error(&kerr(0.5), &ctx, 13).unwrap().value;
    let ratio = full / half;
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");

    let k = kerr(1.0);
    let dist = kerr_shift_distribution(&k);
    let (lo, hi) = dist.quantile_range(1e-10);
    let curve = InfidelityCurve::build(&ctx, CurveKind::MotionalOffset, lo, hi, 13).unwrap();
    let analytic = kerr_error_analytic(&k, &curve);
    let mc = kerr_error_mc(&k, &curve, 20_000, 3).unwrap();
    assert!((analytic - mc.value).abs() < 2.0 * mc.uncertainty, "{analytic} {mc:?}");
    let quad = kerr_expectation(&dist, &curve);
    assert!((quad.value - mc.value).abs() < 2.0 * mc.uncertainty, "{quad:?} {mc:?}");
}

#[test]
fn spectator_error_is_quadratic_and_matches_sampling() {
    let ctx = fast_context();
    let full = spectator_dephasing_error(&spectators(1.0), &ctx, 13).unwrap().value;
    let half = spectator_dephasing_error(&spectators(0.5), &ctx, 13).unwrap().value;
    let ratio = full / half;
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");

    let s = spectators(1.0);
    let atoms = rabi_scale_distribution(&s);
    let curve = spectator_curve(&atoms, &ctx, 13).unwrap();
    let quad: f64 = atoms.iter().map(|(w, r)| w * curve.eval(*r)).sum();
    let mc = spectator_dephasing_error_mc(&s, &curve, 20_000, 4).unwrap();
    assert!((quad - mc.value).abs() < 2.0 * mc.uncertainty, "{quad} {mc:?}");
}

#[test]
fn budget_is_additive_and_reproducible() {
    let ctx = fast_context();
    let channels = vec![
        NoiseModel::Heating { rate: 60.0 },
        NoiseModel::MotionalDrift(drift(200.0)),
        NoiseModel::SpontaneousEmission { lifetime: 1.1 },
        NoiseModel::Readout(Readout { means: calibrate_means(0.5, 9e-4).unwrap(), thresholds: None }),
    ];
    let a = total_budget(&ctx, &channels, &BudgetOptions::default()).unwrap();
    let b = total_budget(&ctx, &channels, &BudgetOptions::default()).unwrap();
    assert_eq!(a, b);
    let sum: f64 = a.entries.iter().map(|e| e.infidelity).sum();
    assert!((a.total - sum).abs() < 1e-12);
    assert!(a.entries.iter().all(|e| e.infidelity >= 0.0));
    let names: Vec<&str> = a.entries.iter().map(|e| e.source.as_str()).collect();
    assert_eq!(names, [HEATING, DRIFT, LASER, READOUT, KERR, SPECTATOR, EMISSION]);
    let readout = a.get(READOUT).unwrap().infidelity;
    assert!((readout / 9e-4 - 1.0).abs() < 0.05, "{readout}");
    assert_eq!(a.annotations[0].source, READOUT_TEXT_READING);
    assert!((a.annotations[0].infidelity - 0.1 * readout).abs() < 1e-15);
}

#[test]
fn invalid_channels_are_rejected() {
    let ctx = fast_context();
    let bad = NoiseModel::Kerr(Kerr { chi_per_phonon: vec![1.0], spectator_nbars: vec![] });
    assert!(total_budget(&ctx, &[bad], &BudgetOptions::default()).is_err());
    let bad = NoiseModel::MotionalDrift(MotionalDrift { recalibration_interval: 0.0, ..drift(1.0) });
    assert!(bad.validate().is_err());
}

#[test]
fn independent_channels_add() {
    let ctx = fast_context();
    let check = joint_cross_check(&ctx, 60.0, &drift(200.0), &laser(160.0), 6, 9).unwrap();
    let rel = (check.joint.value - check.sum_of_parts.value).abs() / check.sum_of_parts.value;
    assert!(rel < 0.1, "{check:?}");
}
