mod common;

use std::f64::consts::PI;

use common::linspace;
use iontrap::analysis::*;
use iontrap::dynamics::spin::{analysis_pulses, bell_target, populations};
use iontrap::dynamics::{sideband_flop, Sideband, SpinPopulations};
use iontrap::linalg::CMatrix;
use iontrap::physcore::thermal_distribution;
use iontrap::shots::{monte_carlo_shots, stream_rng, monte_carlo_shots_with};
use num_complex::Complex;
use proptest::prelude::*;
use rand_distr::{Distribution, Normal, Poisson};

/// Bell state mixed with its dephased counterpart so the parity contrast is `c`.
fn partially_dephased(c: f64) -> CMatrix<f64> {
    let psi = bell_target::<f64>();
    let pure = CMatrix::outer(&psi, &psi);
    let mut dephased = CMatrix::zeros(4, 4);
    dephased[(0, 0)] = Complex::new(0.5, 0.0);
    dephased[(3, 3)] = Complex::new(0.5, 0.0);
    &pure.scale(Complex::new(c, 0.0)) + &dephased.scale(Complex::new(1.0 - c, 0.0))
}

/// `[both_down, mixed, both_up]` after the analysis pulses.
fn outcome_probabilities(rho: &CMatrix<f64>, phase: f64) -> [f64; 3] {
    let r = analysis_pulses(PI / 2.0, phase);
    let p = populations(&(&(&r * rho) * &r.dagger()));
    [p[0], p[1] + p[2], p[3]]
}

fn synthetic_scan(c: f64, shots: u64, seed: u64) -> Vec<ParityCounts> {
    let rho = partially_dephased(c);
    let phases: Vec<f64> = (0..20).map(|k| 2.0 * PI * k as f64 / 20.0).collect();
    phases
        .iter()
        .enumerate()
        .map(|(k, &phase)| {
            let mut rng = stream_rng(seed, k as u64);
            let counts = monte_carlo_shots_with(&mut rng, &outcome_probabilities(&rho, phase), shots).unwrap().counts;
            ParityCounts { phase, both_down: counts[0] as f64, mixed: counts[1] as f64, both_up: counts[2] as f64 }
        })
        .collect()
}

#[test]
fn parity_examples() {
    assert_eq!(parity(&SpinPopulations([1.0, 0.0, 0.0, 0.0])).unwrap(), 1.0);
    assert_eq!(parity(&SpinPopulations([0.25; 4])).unwrap(), 0.0);
}

#[test]
fn contrast_fit_covers_truth() {
    let truth = 0.992;
    let mut covered = 0;
    for seed in 0..100 {
        let fit = fit_parity_contrast(&synthetic_scan(truth, 200, seed)).unwrap();
        let (lo, hi) = fit.interval("contrast");
        if lo <= truth && truth <= hi {
            covered += 1;
        }
    }
    assert!(covered >= 60, "{covered}/100");
}

#[test]
fn all_mixed_outcomes_give_zero_contrast() {
    let data: Vec<ParityCounts> = linspace(0.0, 2.0 * PI * 19.0 / 20.0, 20)
        .into_iter()
        .map(|phase| ParityCounts { phase, both_down: 0.0, both_up: 0.0, mixed: 200.0 })
        .collect();
    let fit = fit_parity_contrast(&data).unwrap();
    assert!(fit.param("contrast") < 1e-9);
}

#[test]
fn contrast_fit_on_exact_frequencies() {
    let rho = partially_dephased(0.5);
    let data: Vec<ParityCounts> = linspace(0.0, 2.0 * PI * 15.0 / 16.0, 16)
        .into_iter()
        .map(|phase| {
            let p = outcome_probabilities(&rho, phase);
            ParityCounts { phase, both_down: p[0], mixed: p[1], both_up: p[2] }
        })
        .collect();
    let fit = fit_parity_contrast(&data).unwrap();
    assert!((fit.param("contrast") - 0.5).abs() < 1e-6);
    let (lo, hi) = fit.interval("contrast");
    assert!(lo <= 0.5 && 0.5 <= hi);

    // A common shift of the analysis phase moves only the fitted offset.
    let shifted: Vec<ParityCounts> = data.iter().map(|d| ParityCounts { phase: d.phase + 0.3, ..*d }).collect();
    let g = fit_parity_contrast(&shifted).unwrap();
    assert!((g.param("contrast") - 0.5).abs() < 1e-6);
    let dphi = (g.param("phase") - fit.param("phase") + 0.6).rem_euclid(2.0 * PI);
    assert!(dphi < 1e-6 || (2.0 * PI - dphi) < 1e-6, "{dphi}");
}

#[test]
fn fits_are_deterministic() {
    let data = synthetic_scan(0.95, 200, 42);
    assert_eq!(fit_parity_contrast(&data).unwrap(), fit_parity_contrast(&data).unwrap());
}

#[test]
fn shot_records_group_by_phase() {
    let t = Thresholds { low: 5, high: 30 };
    let shots = [
        ShotRecord { outcome: ShotOutcome::Counts(2), analysis_phase: 0.0, shot_index: 0 },
        ShotRecord { outcome: ShotOutcome::Counts(40), analysis_phase: 0.0, shot_index: 1 },
        ShotRecord { outcome: ShotOutcome::Mixed, analysis_phase: 0.5, shot_index: 2 },
    ];
    let g = parity_counts(&shots, Some(t)).unwrap();
    assert_eq!(g.len(), 2);
    assert_eq!((g[0].both_up, g[0].both_down, g[1].mixed), (1.0, 1.0, 1.0));
    assert!(parity_counts(&shots, None).is_err());
}

fn flop_data(nbar: f64, seed: u64) -> (Vec<FlopPoint>, f64, f64) {
    let eta = 0.0279;
    let rabi = 2.0 * PI * 100e3;
    let t_pi = PI / (rabi * eta);
    let times = linspace(0.0, 3.0 * t_pi, 31);
    let dist = thermal_distribution(nbar, 80).unwrap();
    let model = sideband_flop(rabi, eta, &dist, Sideband::Blue, &times).unwrap();
    let n = 200;
    let points = times
        .iter()
        .zip(&model.excitation)
        .enumerate()
        .map(|(k, (&time, &p))| {
            let mut rng = stream_rng(seed, k as u64);
            let c = monte_carlo_shots_with(&mut rng, &[p.clamp(0.0, 1.0), 1.0 - p.clamp(0.0, 1.0)], n).unwrap();
            let f = c.frequencies()[0];
            FlopPoint { time, excitation: f, stderr: (f * (1.0 - f) / n as f64).sqrt().max(1.0 / n as f64) }
        })
        .collect();
    (points, rabi, eta)
}

#[test]
fn thermometry_round_trip() {
    for seed in 0..5 {
        let (data, rabi, eta) = flop_data(0.05, seed);
        let n = fit_sideband_nbar(&data, rabi, eta, SidebandFitOptions::default()).unwrap().param("nbar");
        assert!((0.02..=0.09).contains(&n), "seed {seed}: {n}");
    }
    let (data, rabi, eta) = flop_data(0.0, 1);
    assert!(fit_sideband_nbar(&data, rabi, eta, SidebandFitOptions::default()).unwrap().param("nbar") < 0.01);
    let (data, rabi, eta) = flop_data(0.5, 2);
    let n = fit_sideband_nbar(&data, rabi, eta, SidebandFitOptions::default()).unwrap().param("nbar");
    assert!((n / 0.5 - 1.0).abs() < 0.2, "{n}");
    let fit = fit_sideband_nbar(&data, rabi * 1.02, eta, SidebandFitOptions { rabi_range: Some(0.05), ..Default::default() }).unwrap();
    assert!((fit.param("rabi") / rabi - 1.0).abs() < 0.01);
}

#[test]
fn ramsey_model_and_fit() {
    let truth = RamseyParams { excursion: 2.0 * PI * 160.0, period: 1.0 / 175.0, gaussian_t1e: 11e-3 };
    let times = linspace(0.0, 20e-3, 81);
    // Partial revivals at multiples of the noise period.
    let at = |t: f64| ramsey_contrast_model(t, &truth);
    assert!(at(truth.period) > at(0.5 * truth.period) + 0.2);
    assert!(at(2.0 * truth.period) > at(1.5 * truth.period));

    let noise = Normal::new(0.0, 0.005).unwrap();
    let mut rng = stream_rng(3, 0);
    let data: Vec<RamseyPoint> =
        times.iter().map(|&t| RamseyPoint { time: t, contrast: at(t) + noise.sample(&mut rng), stderr: 0.005 }).collect();
    let start = RamseyParams { excursion: truth.excursion * 1.1, period: truth.period * 0.97, gaussian_t1e: 9e-3 };
    let fit = fit_ramsey(&data, &start).unwrap();
    assert!((fit.param("excursion") / truth.excursion - 1.0).abs() < 0.03);
    assert!((fit.param("period") / truth.period - 1.0).abs() < 0.01);
    assert!((fit.param("gaussian_t1e") / truth.gaussian_t1e - 1.0).abs() < 0.05);
}

#[test]
fn misclassification_matches_poisson_sampling() {
    let means = calibrate_means(0.5, 9e-4).unwrap();
    let t = optimal_thresholds(&means).unwrap();
    let m = poisson_misclassification(&means, t).unwrap();
    assert!(m[1][1] >= 0.999, "{m:?}");
    assert!((0.5 * (m[1][2] + m[2][1]) / 9e-4 - 1.0).abs() < 1e-6);
    let n = 1_000_000;
    let mut rng = stream_rng(17, 0);
    for (row, mean) in [means.dark, means.one_bright, means.two_bright].into_iter().enumerate() {
        let pois = Poisson::new(mean).unwrap();
        let mut tally = [0u64; 3];
        for _ in 0..n {
            tally[classify_counts(pois.sample(&mut rng) as u64, t).index()] += 1;
        }
        for col in 0..3 {
            let p = m[row][col];
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
            let f = tally[col] as f64 / n as f64;
            assert!((f - p).abs() < 3.0 * se, "row {row} col {col}: {f} vs {p}");
        }
    }
}

#[test]
fn identical_bright_means_are_indistinguishable() {
    let means = PoissonMeans { dark: 0.5, one_bright: 20.0, two_bright: 20.0 };
    let m = poisson_misclassification(&means, Thresholds { low: 5, high: 20 }).unwrap();
    assert!((m[1][1] - m[2][1]).abs() < 1e-15 && (m[1][2] - m[2][2]).abs() < 1e-15);
    assert!(poisson_misclassification(&PoissonMeans { dark: 5.0, one_bright: 2.0, two_bright: 9.0 }, Thresholds { low: 1, high: 3 }).is_err());
}

#[test]
fn shot_sampling_statistics() {
    let c = monte_carlo_shots(&[0.5, 0.5], 200, 1).unwrap();
    assert!((c.standard_errors()[0] - 0.0354).abs() < 0.003);
    let n = 100_000;
    let c = monte_carlo_shots(&[0.3, 0.7], n, 2).unwrap();
    let se = (0.3_f64 * 0.7 / n as f64).sqrt();
    assert!((c.frequencies()[0] - 0.3).abs() < 3.0 * se);
    assert_eq!(monte_carlo_shots(&[0.2, 0.3, 0.5], 1000, 9).unwrap(), monte_carlo_shots(&[0.2, 0.3, 0.5], 1000, 9).unwrap());
}

proptest! {
    #[test]
    fn misclassification_rows_are_stochastic(dark in 0.05..3.0f64, one in 5.0..60.0f64, gap in 1.0..3.0f64, low in 1u64..10, width in 1u64..60) {
        let means = PoissonMeans { dark, one_bright: one.max(dark), two_bright: one.max(dark) * gap };
        let m = poisson_misclassification(&means, Thresholds { low, high: low + width }).unwrap();
        for row in m {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn parity_is_bounded_and_linear(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64, s in 0.0..1.0f64) {
        let norm = a + b + c + d + 1e-9;
        let p = SpinPopulations([a / norm, b / norm, c / norm, d / norm]);
        let q = SpinPopulations([0.25; 4]);
        let v = parity(&p).unwrap();
        prop_assert!((-1.0..=1.0).contains(&v));
        let mix = SpinPopulations(std::array::from_fn(|i| s * p.0[i] + (1.0 - s) * q.0[i]));
        prop_assert!((parity(&mix).unwrap() - (s * v + (1.0 - s) * parity(&q).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn bell_fidelity_is_symmetric_and_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64, da in 0.0..0.1f64) {
        prop_assert_eq!(bell_fidelity(a, b).unwrap(), bell_fidelity(b, a).unwrap());
        let up = (a + da).min(1.0);
        prop_assert!(bell_fidelity(up, b).unwrap() >= bell_fidelity(a, b).unwrap());
    }
}
