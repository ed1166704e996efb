//! Projection-noise sampling of measurement outcomes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{domain, Result};

const NORMALIZATION_TOL: f64 = 1e-6;

/// Outcome tallies from `n_shots` draws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotCounts {
    pub counts: Vec<u64>,
    pub n_shots: u64,
}

impl ShotCounts {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|c| *c as f64 / self.n_shots as f64).collect()
    }

    /// `sqrt(p (1 - p) / N)` per outcome, with `p` the observed frequency.
    pub fn standard_errors(&self) -> Vec<f64> {
        self.frequencies().iter().map(|p| (p * (1.0 - p) / self.n_shots as f64).sqrt()).collect()
    }
}

/// Generator for stream `stream` under root `seed`. Streams are independent
/// of how work is partitioned.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multinomial draw as a chain of conditional binomials.
pub fn monte_carlo_shots(probabilities: &[f64], n_shots: u64, seed: u64) -> Result<ShotCounts> {
    monte_carlo_shots_with(&mut ChaCha8Rng::seed_from_u64(seed), probabilities, n_shots)
}

pub fn monte_carlo_shots_with<R: rand::Rng + ?Sized>(rng: &mut R, probabilities: &[f64], n_shots: u64) -> Result<ShotCounts> {
    if probabilities.is_empty() || probabilities.iter().any(|p| !(*p >= -NORMALIZATION_TOL)) {
        return domain("outcome probabilities must be non-negative");
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return domain(format!("outcome probabilities must sum to one, got {total}"));
    }
    let mut counts = vec![0u64; probabilities.len()];
    let mut remaining = n_shots;
    let mut mass = total;
    for (i, p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if i + 1 == probabilities.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).map_err(|e| crate::Error::Domain(e.to_string()))?.sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(ShotCounts { counts, n_shots })
}
