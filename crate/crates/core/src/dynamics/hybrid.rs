//! Hybrid Zeeman/optical encoding on two three-level ions.
//!
//! Levels per ion are `|0>`, `|1>` (memory pair) and `|2>` (optical level);
//! two-ion index is `3 * a + b`. Optical operators use `|2>` as the upper
//! level in the same convention as the two-level `sigma_phi`.

use num_complex::Complex;
use num_traits::Zero;

use crate::linalg::{CMatrix, C};
use crate::real::Real;

/// `sigma_phi` between `lower` and the upper level `2`.
fn sigma_to_upper<T: Real>(lower: usize, phi: T) -> CMatrix<T> {
    let mut m = CMatrix::zeros(3, 3);
    m[(2, lower)] = Complex::from_polar(T::one(), -phi);
    m[(lower, 2)] = Complex::from_polar(T::one(), phi);
    m
}

/// `R_12(theta, phi) = exp(-i theta sigma_12(phi)/2)`, identity on `|0>`.
pub fn r12<T: Real>(theta: T, phi: T) -> CMatrix<T> {
    let (s, c) = (theta / T::two()).sin_cos();
    let mut m = CMatrix::zeros(3, 3);
    m[(0, 0)] = C::new(T::one(), T::zero());
    m[(1, 1)] = C::new(c, T::zero());
    m[(2, 2)] = C::new(c, T::zero());
    let sig = sigma_to_upper(1, phi).scale(C::new(T::zero(), -s));
    &m + &sig
}

/// `exp(-i pi S^2/8)` with `S` the sum of `sigma_02(phi)` on both ions; `|1>`
/// is a dark level.
pub fn ms02<T: Real>(phi: T) -> CMatrix<T> {
    let s1 = sigma_to_upper(0, phi);
    let id = CMatrix::identity(3);
    let s = &s1.kron(&id) + &id.kron(&s1);
    let generator = (&s * &s).scale(C::new(T::zero(), -T::PI() / T::lit(8.0)));
    generator.expm()
}

/// `R(phi) U_MS02(phi) R(phi)` with `R = R_12(pi, phi) (x) R_12(pi, phi)`.
pub fn hybrid_sequence_unitary<T: Real>(phi: T) -> CMatrix<T> {
    let r = r12(T::PI(), phi);
    let rr = r.kron(&r);
    &(&rr * &ms02(phi)) * &rr
}

/// `min_alpha max_ij |A - e^{i alpha} B|_ij`, with `alpha` from the overlap `tr(B^dag A)`.
pub fn phase_invariant_distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let overlap = (&b.dagger() * a).trace();
    let phase = if overlap.norm() > T::zero() { overlap / overlap.norm() } else { C::new(T::one(), T::zero()) };
    a.max_abs_diff(&b.scale(phase))
}

/// Purity `tr(rho_A^2)` of ion A's reduced state for a two-ion pure state
/// `psi` on `d x d` levels.
pub fn single_ion_purity<T: Real>(psi: &[C<T>], d: usize) -> T {
    let mut rho = vec![C::<T>::zero(); d * d];
    for a in 0..d {
        for a2 in 0..d {
            let mut acc = C::zero();
            for b in 0..d {
                acc = acc + psi[a * d + b] * psi[a2 * d + b].conj();
            }
            rho[a * d + a2] = acc;
        }
    }
    let mut p = T::zero();
    for a in 0..d {
        for a2 in 0..d {
            p = p + (rho[a * d + a2] * rho[a2 * d + a]).re;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_is_phase_independent() {
        let u0 = hybrid_sequence_unitary(0.0_f64);
        let u1 = hybrid_sequence_unitary(std::f64::consts::PI / 3.0);
        assert!(u0.unitarity_defect() < 1e-12);
        assert!(phase_invariant_distance(&u0, &u1) < 1e-10);
    }

    #[test]
    fn entangles_memory_pair() {
        let u = hybrid_sequence_unitary(0.4_f64);
        let mut psi = vec![C::zero(); 9];
        psi[0] = C::new(1.0, 0.0);
        let out = u.matvec(&psi);
        let leak: f64 = (0..9).filter(|k| k / 3 == 2 || k % 3 == 2).map(|k| out[k].norm_sqr()).sum();
        assert!(leak < 1e-20);
        assert!((single_ion_purity(&out, 3) - 0.5).abs() < 1e-9);
    }
}
