//! Photon-count thresholding for 0, 1 or 2 bright ions.

use statrs::distribution::{DiscreteCDF, Poisson};

use crate::error::{domain, Result};
use crate::optimize::bisect;

/// Mean detected counts for 0, 1 and 2 bright ions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonMeans {
    pub dark: f64,
    pub one_bright: f64,
    pub two_bright: f64,
}

impl PoissonMeans {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dark > 0.0 && self.dark <= self.one_bright && self.one_bright <= self.two_bright && self.two_bright.is_finite();
        if !ok {
            return domain(format!(
                "Poisson means must be positive and ordered dark <= one <= two, got {} {} {}",
                self.dark, self.one_bright, self.two_bright
            ));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 3] {
        [self.dark, self.one_bright, self.two_bright]
    }
}

/// `counts < low` is 0 bright, `low <= counts < high` is 1 bright, else 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub low: u64,
    pub high: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BrightCount {
    Zero,
    One,
    Two,
}

impl BrightCount {
    pub fn index(self) -> usize {
        self as usize
    }
}

pub fn classify_counts(counts: u64, thresholds: Thresholds) -> BrightCount {
    if counts < thresholds.low {
        BrightCount::Zero
    } else if counts < thresholds.high {
        BrightCount::One
    } else {
        BrightCount::Two
    }
}

fn cdf_below(mean: f64, threshold: u64) -> f64 {
    if threshold == 0 {
        return 0.0;
    }
    Poisson::new(mean).expect("validated mean").cdf(threshold - 1)
}

/// `m[true][assigned]`, rows summing to one.
pub fn poisson_misclassification(means: &PoissonMeans, thresholds: Thresholds) -> Result<[[f64; 3]; 3]> {
    means.validate()?;
    if thresholds.low >= thresholds.high {
        return domain(format!("thresholds must satisfy low < high, got {thresholds:?}"));
    }
    let mut m = [[0.0; 3]; 3];
    for (row, mean) in means.as_array().into_iter().enumerate() {
        let below_low = cdf_below(mean, thresholds.low);
        let below_high = cdf_below(mean, thresholds.high);
        m[row] = [below_low, below_high - below_low, 1.0 - below_high];
    }
    Ok(m)
}

/// Thresholds minimizing the summed off-diagonal misclassification.
pub fn optimal_thresholds(means: &PoissonMeans) -> Result<Thresholds> {
    means.validate()?;
    let t_max = (means.two_bright + 10.0 * means.two_bright.sqrt() + 10.0).ceil() as u64;
    let cdf: Vec<[f64; 3]> = (0..=t_max + 1)
        .map(|t| {
            let a = means.as_array();
            [cdf_below(a[0], t), cdf_below(a[1], t), cdf_below(a[2], t)]
        })
        .collect();
    // Total off-diagonal mass separates into a low-cut and a high-cut part.
    let low_cost = |t: usize| (1.0 - cdf[t][0]) + cdf[t][1];
    let high_cost = |t: usize| (1.0 - cdf[t][1]) + cdf[t][2];
    let argmin = |range: std::ops::RangeInclusive<usize>, cost: &dyn Fn(usize) -> f64| {
        range.fold((usize::MAX, f64::INFINITY), |best, t| if cost(t) < best.1 { (t, cost(t)) } else { best })
    };
    let (low, _) = argmin(1..=t_max as usize, &low_cost);
    let (high, _) = argmin(low + 1..=t_max as usize + 1, &high_cost);
    Ok(Thresholds { low: low as u64, high: high as u64 })
}

/// Choose `one_bright` (with `two_bright = 2 one_bright`) so that at the
/// optimal thresholds the mean of the one-to-two and two-to-one
/// misclassification equals `target`. The resulting means are synthetic.
pub fn calibrate_means(dark: f64, target: f64) -> Result<PoissonMeans> {
    if !(target > 0.0 && target < 0.5) {
        return domain("target misclassification must be in (0, 0.5)");
    }
    let overlap = |one: f64| -> f64 {
        let means = PoissonMeans { dark, one_bright: one, two_bright: 2.0 * one };
        let t = optimal_thresholds(&means).expect("ordered means");
        let m = poisson_misclassification(&means, t).expect("ordered means");
        (0.5 * (m[1][2] + m[2][1])).ln() - target.ln()
    };
    let one = bisect(overlap, dark.max(1.0) * 2.0, 500.0, 1e-9)?;
    Ok(PoissonMeans { dark, one_bright: one, two_bright: 2.0 * one })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_bins() {
        let t = Thresholds { low: 3, high: 20 };
        assert_eq!(classify_counts(0, t), BrightCount::Zero);
        assert_eq!(classify_counts(2, t), BrightCount::Zero);
        assert_eq!(classify_counts(3, t), BrightCount::One);
        assert_eq!(classify_counts(20, t), BrightCount::Two);
    }

    #[test]
    fn rows_sum_to_one() {
        let means = PoissonMeans { dark: 0.3, one_bright: 18.0, two_bright: 36.0 };
        let m = poisson_misclassification(&means, optimal_thresholds(&means).unwrap()).unwrap();
        for row in m {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_means_split_evenly() {
        let means = PoissonMeans { dark: 0.3, one_bright: 20.0, two_bright: 20.0 };
        let m = poisson_misclassification(&means, Thresholds { low: 3, high: 20 }).unwrap();
        assert!((m[1][1] - m[2][1]).abs() < 1e-15 && (m[1][2] - m[2][2]).abs() < 1e-15);
        assert!(PoissonMeans { dark: 1.0, one_bright: 0.5, two_bright: 2.0 }.validate().is_err());
    }
}
