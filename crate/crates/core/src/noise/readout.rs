//! Readout misclassification propagated into the measured Bell fidelity.

use crate::analysis::readout::{optimal_thresholds, poisson_misclassification, Thresholds};
use crate::dynamics::spin::{analysis_pulses, bell_target, populations};
use crate::error::Result;
use crate::linalg::CMatrix;

use super::Readout;

const SCAN_POINTS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct ReadoutContribution {
    /// `m[true][assigned]` over 0, 1, 2 bright ions.
    pub matrix: [[f64; 3]; 3],
    pub thresholds: Thresholds,
    pub even_population: f64,
    pub contrast: f64,
    /// `1 - (even + contrast) / 2` for the ideal Bell state seen through the
    /// misclassification matrix.
    pub infidelity: f64,
}

/// Number of bright ions for spin index `2 s1 + s2`; `down` fluoresces.
fn bright_count(spin_index: usize) -> usize {
    2 - (spin_index >> 1) - (spin_index & 1)
}

/// Measured even population of spin populations seen through `m`.
fn observed_even(p: &[f64; 4], m: &[[f64; 3]; 3]) -> f64 {
    let mut assigned = [0.0; 3];
    for (i, pi) in p.iter().enumerate() {
        for (j, a) in assigned.iter_mut().enumerate() {
            *a += pi * m[bright_count(i)][j];
        }
    }
    assigned[0] + assigned[2]
}

pub fn readout_error(model: &Readout) -> Result<ReadoutContribution> {
    let thresholds = match model.thresholds {
        Some(t) => t,
        None => optimal_thresholds(&model.means)?,
    };
    let matrix = poisson_misclassification(&model.means, thresholds)?;
    let psi = bell_target::<f64>();
    let rho = CMatrix::outer(&psi, &psi);
    let even_population = observed_even(&populations(&rho), &matrix);

    // Least-squares fit of a + b cos 2phi + c sin 2phi to the observed parity.
    let (mut sb, mut sc) = (0.0, 0.0);
    for k in 0..SCAN_POINTS {
        let phase = std::f64::consts::PI * k as f64 / SCAN_POINTS as f64;
        let r = analysis_pulses(std::f64::consts::FRAC_PI_2, phase);
        let out = &(&r * &rho) * &r.dagger();
        let parity = 2.0 * observed_even(&populations(&out), &matrix) - 1.0;
        sb += parity * (2.0 * phase).cos();
        sc += parity * (2.0 * phase).sin();
    }
    let n = SCAN_POINTS as f64;
    let contrast = 2.0 * (sb * sb + sc * sc).sqrt() / n;
    let infidelity = 1.0 - 0.5 * (even_population + contrast);
    Ok(ReadoutContribution { matrix, thresholds, even_population, contrast, infidelity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::readout::{calibrate_means, PoissonMeans};

    #[test]
    fn perfect_readout_costs_nothing() {
        let means = PoissonMeans { dark: 0.1, one_bright: 400.0, two_bright: 800.0 };
        let c = readout_error(&Readout { means, thresholds: None }).unwrap();
        assert!(c.infidelity.abs() < 1e-9, "{}", c.infidelity);
    }

    #[test]
    fn closed_form_matches_scan() {
        let means = calibrate_means(0.5, 9e-4).unwrap();
        let c = readout_error(&Readout { means, thresholds: None }).unwrap();
        let m = c.matrix;
        let expected = 0.5 * (m[2][1] + m[0][1]) + 0.5 * (m[1][0] + m[1][2]);
        assert!((c.infidelity - expected).abs() < 1e-12);
    }
}
