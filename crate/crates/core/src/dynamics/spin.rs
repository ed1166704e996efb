//! Two-level spin operators. Single-ion basis order is `(|down>, |up>)`;
//! two-ion spin index is `2 * s1 + s2` with `down = 0`, `up = 1`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::linalg::{CMatrix, C};
use crate::real::Real;

/// `sigma_phi = cos(phi) sigma_x + sin(phi) sigma_y`, i.e.
/// `e^{-i phi} |up><down| + e^{i phi} |down><up|`.
pub fn sigma_phi<T: Real>(phi: T) -> CMatrix<T> {
    let mut m = CMatrix::zeros(2, 2);
    m[(1, 0)] = Complex::from_polar(T::one(), -phi);
    m[(0, 1)] = Complex::from_polar(T::one(), phi);
    m
}

/// Eigenvector of `sigma_phi` with eigenvalue `sign` (`+1` or `-1`).
pub fn sigma_phi_eigenvector<T: Real>(phi: T, sign: T) -> [C<T>; 2] {
    let norm = T::one() / T::two().sqrt();
    [Complex::from_polar(sign * norm, phi), Complex::new(norm, T::zero())]
}

/// Single-qubit rotation `exp(-i theta sigma_phi / 2)`.
pub fn rotation<T: Real>(theta: T, phi: T) -> CMatrix<T> {
    let c = (theta / T::two()).cos();
    let s = (theta / T::two()).sin();
    let mut m = CMatrix::identity(2).scale(Complex::new(c, T::zero()));
    let sp = sigma_phi(phi).scale(Complex::new(T::zero(), -s));
    m = &m + &sp;
    m
}

/// Identical analysis rotations on both ions.
pub fn analysis_pulses<T: Real>(theta: T, phase: T) -> CMatrix<T> {
    let r = rotation(theta, phase);
    r.kron(&r)
}

/// Ideal Mølmer-Sørensen unitary `exp(-i pi S_phi^2 / 8)` with
/// `S_phi = sigma_phi (x) 1 + 1 (x) sigma_phi`.
pub fn ms_unitary<T: Real>(phi: T) -> CMatrix<T> {
    let angle = T::PI() / T::lit(8.0);
    let mut u = CMatrix::zeros(4, 4);
    for s1 in [T::one(), -T::one()] {
        for s2 in [T::one(), -T::one()] {
            let v = product_vector(&sigma_phi_eigenvector(phi, s1), &sigma_phi_eigenvector(phi, s2));
            let lambda = s1 + s2;
            let phase = Complex::from_polar(T::one(), -angle * lambda * lambda);
            u = &u + &CMatrix::outer(&v, &v).scale(phase);
        }
    }
    u
}

pub fn product_vector<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(*x * *y);
        }
    }
    out
}

/// `|down, down>`
pub fn down_down<T: Real>() -> Vec<C<T>> {
    let mut v = vec![C::zero(); 4];
    v[0] = C::one();
    v
}

/// `(|down,down> - i |up,up>) / sqrt(2)`
pub fn bell_target<T: Real>() -> Vec<C<T>> {
    let h = T::one() / T::two().sqrt();
    vec![Complex::new(h, T::zero()), C::zero(), C::zero(), Complex::new(T::zero(), -h)]
}

/// `<psi| rho |psi>`
pub fn state_fidelity<T: Real>(rho: &CMatrix<T>, psi: &[C<T>]) -> T {
    crate::linalg::inner(psi, &rho.matvec(psi)).re
}

/// Diagonal of a density matrix, clamped to `[0, 1]` against rounding.
pub fn populations<T: Real>(rho: &CMatrix<T>) -> [T; 4] {
    let mut p = [T::zero(); 4];
    for (i, v) in p.iter_mut().enumerate() {
        *v = rho[(i, i)].re.max(T::zero()).min(T::one());
    }
    p
}

/// Parity `P_dd + P_uu - P_du - P_ud` of a two-ion spin density matrix after
/// `pi/2` analysis pulses with phase `phase`.
pub fn parity_after_analysis<T: Real>(rho: &CMatrix<T>, phase: T) -> T {
    let r = analysis_pulses(T::FRAC_PI_2(), phase);
    let out = &(&r * rho) * &r.dagger();
    let p = populations(&out);
    p[0] + p[3] - p[1] - p[2]
}
