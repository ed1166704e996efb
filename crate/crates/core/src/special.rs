//! Special functions and quadrature rules.

use crate::real::{lit, Real};

/// Laguerre polynomials `L_0(x) ..= L_n_max(x)` by the three-term recurrence.
pub fn laguerre_table<T: Real>(n_max: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(T::one());
    if n_max == 0 {
        return out;
    }
    out.push(T::one() - x);
    for n in 1..n_max {
        let nf = T::from_usize_lossy(n);
        let next = ((lit::<T>(2.0) * nf + T::one() - x) * out[n] - nf * out[n - 1]) / (nf + T::one());
        out.push(next);
    }
    out
}

/// Carrier matrix element `<n| exp(i eta (a + a^dag)) |n> = exp(-eta^2/2) L_n(eta^2)`
/// for `n = 0..=n_max`.
pub fn debye_waller_table<T: Real>(eta: T, n_max: usize) -> Vec<T> {
    let x = eta * eta;
    let damp = (-x / T::two()).exp();
    laguerre_table(n_max, x).into_iter().map(|l| damp * l).collect()
}

/// Bessel function of the first kind of integer order, by its power series.
///
/// Accurate to near machine precision for `|x| < 20`, which covers every
/// modulation index used here.
pub fn bessel_j<T: Real>(order: u32, x: T) -> T {
    let half_x = x / T::two();
    let mut term = T::one();
    for k in 1..=order {
        term = term * half_x / T::from_u32(k).unwrap();
    }
    let mut sum = term;
    let q = -half_x * half_x;
    let mut k = 0u32;
    loop {
        k += 1;
        term = term * q / (T::from_u32(k).unwrap() * T::from_u32(k + order).unwrap());
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs().max(T::min_positive_value()) || k > 500 {
            break;
        }
    }
    sum
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes of the Gauss-Chebyshev rule of the first kind: with equal weights
/// `1/n` they integrate against the arcsine density on `[-1, 1]`.
pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| ((2 * k - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

/// Composite Simpson rule on a uniform grid of `2 * half_intervals` panels.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, half_intervals: usize) -> f64 {
    let n = 2 * half_intervals.max(1);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}
