mod common;

use std::f64::consts::PI;

use common::*;
use iontrap::dynamics::hybrid::{hybrid_sequence_unitary, phase_invariant_distance};
use iontrap::dynamics::ms::{ground_register, ground_register_with_cutoff, ms_evolve, ms_evolve_with, GatePerturbation, MsOptions};
use iontrap::dynamics::spin::{analysis_pulses, bell_target, ms_unitary, rotation, sigma_phi};
use iontrap::dynamics::{carrier_flop, sideband_flop, QuantumRegister, Sideband};
use iontrap::integrate::Method;
use iontrap::linalg::CMatrix;
use iontrap::physcore::{thermal_distribution, ModeLabel, MotionalMode};
use iontrap::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fidelity(drive: &iontrap::dynamics::GateDrive<f64>, mode: &MotionalMode<f64>, perts: &[GatePerturbation<f64>]) -> f64 {
    let reg = ground_register(mode).unwrap();
    ms_evolve(drive, mode, &reg, perts, &[drive.total_duration]).unwrap().fidelity_vs_target.unwrap()
}

#[test]
fn flat_gate_closes() {
    let mode = stretch_mode(0.0);
    let drive = ideal_drive(&mode);
    assert!((drive.total_duration - 2.0 * PI / DETUNING).abs() < 1e-15);
    assert!(1.0 - fidelity(&drive, &mode, &[]) < 1e-6);
}

#[test]
fn ramped_gate_with_carrier_closes() {
    let mode = stretch_mode(0.0);
    let drive = ramped_drive(&mode);
    assert!(1.0 - fidelity(&drive, &mode, &[]) < 1e-4);
}

#[test]
fn gate_time_populations() {
    let mode = stretch_mode(0.05);
    let drive = ideal_drive(&mode);
    let times = linspace(0.0, drive.total_duration, 41);
    let out = ms_evolve(&drive, &mode, &ground_register(&mode).unwrap(), &[], &times).unwrap();
    let last = out.last().unwrap();
    assert!(last.mixed() < 0.01);
    assert!((last.both_down() - 0.5).abs() < 1e-3 && (last.both_up() - 0.5).abs() < 1e-3);
    let mid = &out.populations[20];
    assert!(mid.mixed() > 0.1);
}

#[test]
fn analytic_and_numeric_paths_agree() {
    let mode = stretch_mode(0.3);
    let drive = GateDrive::single_loop(&mode, DETUNING, 5e-6, 0.4).unwrap().without_carrier();
    let reg = ground_register(&mode).unwrap();
    let times = linspace(0.0, drive.total_duration, 9);
    for perts in [vec![], vec![GatePerturbation::MotionalOffset { shift: 2.0 * PI * 300.0 }], vec![GatePerturbation::RabiScale { factor: 0.97 }]] {
        let a = ms_evolve_with(&drive, &mode, &reg, &perts, &times, &MsOptions::analytic()).unwrap();
        let n = ms_evolve_with(&drive, &mode, &reg, &perts, &times, &MsOptions::numeric()).unwrap();
        for (pa, pn) in a.populations.iter().zip(&n.populations) {
            for k in 0..4 {
                assert!((pa.0[k] - pn.0[k]).abs() < 1e-5, "{perts:?}: {pa:?} vs {pn:?}");
            }
        }
        assert!((a.fidelity_vs_target.unwrap() - n.fidelity_vs_target.unwrap()).abs() < 1e-5);
    }
}

use iontrap::dynamics::GateDrive;

#[test]
fn fock_truncation_converges() {
    let mode = stretch_mode(0.5);
    let drive = GateDrive::single_loop(&mode, DETUNING, 5e-6, 0.0).unwrap().without_carrier();
    let run = |dim: usize| {
        let reg = ground_register_with_cutoff(&mode, dim).unwrap();
        let out = ms_evolve_with(&drive, &mode, &reg, &[], &[drive.total_duration], &MsOptions::numeric()).unwrap();
        out.fidelity_vs_target.unwrap()
    };
    assert!((run(30) - run(60)).abs() < 1e-6);
}

#[test]
fn pure_evolution_preserves_norm() {
    let mode = stretch_mode(0.2);
    let drive = ramped_drive(&mode);
    let tight = MsOptions { method: Method::Adaptive { rtol: 1e-12, atol: 1e-14 }, ..MsOptions::numeric() };
    let times = linspace(0.0, drive.total_duration, 5);
    let out = ms_evolve_with(&drive, &mode, &ground_register(&mode).unwrap(), &[], &times, &tight).unwrap();
    let state = out.final_state.unwrap();
    assert!(state.normalization_defect() < 1e-9, "{}", state.normalization_defect());
    for p in &out.populations {
        assert!((p.total() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn heating_keeps_density_matrix_physical_and_matches_rate_formula() {
    let mode = stretch_mode(0.05);
    let drive = ideal_drive(&mode);
    let rate = 60.0;
    let reg = ground_register(&mode).unwrap();
    let out = ms_evolve(&drive, &mode, &reg, &[GatePerturbation::Heating { rate }], &[drive.total_duration]).unwrap();
    let state = out.final_state.unwrap();
    assert!(state.normalization_defect() < 1e-9);
    assert!(state.hermiticity_defect() < 1e-9);
    let base = 1.0 - fidelity(&drive, &mode, &[]);
    let excess = 1.0 - out.fidelity_vs_target.unwrap() - base;
    let formula = rate * drive.total_duration / 2.0;
    assert!((excess / formula - 1.0).abs() < 0.2, "{excess} vs {formula}");
}

#[test]
fn undersized_fock_space_is_an_error() {
    let mode = stretch_mode(2.0);
    let drive = ideal_drive(&mode);
    let reg = ground_register_with_cutoff(&mode, 4).unwrap();
    let r = ms_evolve(&drive, &mode, &reg, &[], &[drive.total_duration]);
    assert!(matches!(r, Err(Error::TruncationOverflow(_))));
}

#[test]
fn blue_sideband_after_cooling() {
    let eta = 0.0279;
    let rabi = 2.0 * PI * 100e3;
    let dist = thermal_distribution(0.05, 40).unwrap();
    let t_pi = PI / (rabi * eta);
    let times = linspace(0.0, 6.0 * t_pi, 601);
    let curve = sideband_flop(rabi, eta, &dist, Sideband::Blue, &times).unwrap();
    let first_max = curve.excitation[..150].iter().copied().fold(0.0, f64::max);
    assert!(first_max >= 0.95, "{first_max}");
    // The occupied n = 1 component keeps the excitation off zero where the
    // ground-state component returns.
    let at_two_pi = curve.excitation[200];
    assert!(at_two_pi > 1e-3 && at_two_pi < 0.05, "{at_two_pi}");
    let hot = thermal_distribution(0.5, 60).unwrap();
    let hot_curve = sideband_flop(rabi, eta, &hot, Sideband::Blue, &times).unwrap();
    let hot_max = hot_curve.excitation[..150].iter().copied().fold(0.0, f64::max);
    assert!(hot_max < first_max);
}

#[test]
fn carrier_flop_with_imbalance() {
    let modes: Vec<MotionalMode<f64>> = (0..2)
        .map(|k| MotionalMode::new(ModeLabel::Radial(k), 2.0 * PI * 3.5e6, vec![0.02, 0.02], 12.5, 0.0).unwrap())
        .collect();
    let rabi = PI / 2.4e-6;
    let times = linspace(0.0, 2.4e-6, 3);
    let out = carrier_flop(&[rabi, rabi * 0.99], &modes, &times).unwrap();
    let p = out.last().unwrap();
    assert!(p.both_up() > 0.95);
    assert!((p.total() - 1.0).abs() < 1e-12);
    let cold = carrier_flop(&[rabi], &[], &times).unwrap();
    assert!((cold.last().unwrap().both_up() - 1.0).abs() < 1e-12);
}

#[test]
fn hybrid_encoding_is_phase_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (a, b): (f64, f64) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        let d = phase_invariant_distance(&hybrid_sequence_unitary(a), &hybrid_sequence_unitary(b));
        assert!(d < 1e-10, "{a} {b}: {d}");
    }
}

#[test]
fn ideal_bell_parity_has_period_pi() {
    let u = ms_unitary(0.0_f64);
    let mut dd = vec![num_complex::Complex::new(0.0, 0.0); 4];
    dd[0] = num_complex::Complex::new(1.0, 0.0);
    let psi = u.matvec(&dd);
    let target = bell_target::<f64>();
    let overlap: f64 = psi.iter().zip(&target).map(|(a, b)| a.conj() * b).sum::<num_complex::Complex<f64>>().norm();
    assert!((overlap - 1.0).abs() < 1e-12);
    let rho = CMatrix::outer(&psi, &psi);
    let parity = |phi: f64| {
        let r = analysis_pulses(PI / 2.0, phi);
        let out = &(&r * &rho) * &r.dagger();
        let p: Vec<f64> = (0..4).map(|i| out[(i, i)].re).collect();
        p[0] + p[3] - p[1] - p[2]
    };
    let values: Vec<f64> = linspace(0.0, PI, 33).into_iter().map(parity).collect();
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    assert!((max - 1.0).abs() < 1e-9 && (min + 1.0).abs() < 1e-9);
    for phi in linspace(0.0, 2.0 * PI, 17) {
        assert!((parity(phi) - parity(phi + PI)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotations_are_unitary(theta in -10.0..10.0f64, phi in -10.0..10.0f64) {
        prop_assert!(rotation(theta, phi).unitarity_defect() < 1e-12);
        prop_assert!(analysis_pulses(theta, phi).unitarity_defect() < 1e-12);
        prop_assert!(sigma_phi(phi).hermiticity_defect() < 1e-15);
    }

    #[test]
    fn ms_unitary_is_unitary(phi in -10.0..10.0f64) {
        prop_assert!(ms_unitary(phi).unitarity_defect() < 1e-12);
    }

    #[test]
    fn register_density_matrix_is_physical(nbar in 0.0..2.0f64, theta in 0.0..PI) {
        let spin = iontrap::dynamics::spin::product_vector(
            &[num_complex::Complex::new((theta / 2.0).cos(), 0.0), num_complex::Complex::new(0.0, (theta / 2.0).sin())],
            &[num_complex::Complex::new(1.0, 0.0), num_complex::Complex::new(0.0, 0.0)],
        );
        let th = thermal_distribution(nbar, 30).unwrap();
        let reg = QuantumRegister::spin_with_motion(&spin, vec![2, 2], &th, 31).unwrap();
        let rho = reg.density_matrix();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(rho.hermiticity_defect() < 1e-12);
    }
}
