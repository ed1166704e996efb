//! Spin (x) Fock state containers.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{domain, Result};
use crate::linalg::{norm_sqr, CMatrix, C};
use crate::physcore::ThermalDistribution;
use crate::real::{lit, Real};

/// How the amplitudes of a register are held.
#[derive(Clone, Debug, PartialEq)]
pub enum RegisterState<T: Real> {
    Pure(Vec<C<T>>),
    /// Incoherent mixture of pure states with the given weights.
    Ensemble(Vec<(T, Vec<C<T>>)>),
    Mixed(CMatrix<T>),
}

/// A state of ions with `spin_dims` levels tensored with truncated motional
/// modes. Basis order is ion 1 (x) ion 2 (x) ... (x) mode 1 (x) ..., with the
/// last factor varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRegister<T: Real> {
    pub spin_dims: Vec<usize>,
    pub fock_dims: Vec<usize>,
    pub state: RegisterState<T>,
}

impl<T: Real> QuantumRegister<T> {
    pub fn spin_dim(&self) -> usize {
        self.spin_dims.iter().product()
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dims.iter().product()
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.fock_dim()
    }

    /// Pure product of a spin state and a single Fock state.
    pub fn spin_fock(spin: &[C<T>], spin_dims: Vec<usize>, n: usize, fock_dim: usize) -> Result<Self> {
        let sd: usize = spin_dims.iter().product();
        if spin.len() != sd {
            return domain(format!("spin state has length {}, expected {sd}", spin.len()));
        }
        if n >= fock_dim {
            return domain(format!("Fock level {n} outside truncation {fock_dim}"));
        }
        let mut amps = vec![C::zero(); sd * fock_dim];
        for (s, a) in spin.iter().enumerate() {
            amps[s * fock_dim + n] = *a;
        }
        let reg = Self { spin_dims, fock_dims: vec![fock_dim], state: RegisterState::Pure(amps) };
        reg.check()?;
        Ok(reg)
    }

    /// Pure spin state times a Fock-diagonal motional state, held as an
    /// ensemble over Fock levels. Levels with weight below `1e-15` are dropped.
    pub fn spin_with_motion(spin: &[C<T>], spin_dims: Vec<usize>, motion: &ThermalDistribution<T>, fock_dim: usize) -> Result<Self> {
        let sd: usize = spin_dims.iter().product();
        if spin.len() != sd {
            return domain(format!("spin state has length {}, expected {sd}", spin.len()));
        }
        let mut members = Vec::new();
        for (n, p) in motion.probabilities.iter().enumerate() {
            if *p <= lit(1e-15) {
                continue;
            }
            if n >= fock_dim {
                return domain(format!("motional population at n={n} exceeds Fock truncation {fock_dim}"));
            }
            let mut amps = vec![C::zero(); sd * fock_dim];
            for (s, a) in spin.iter().enumerate() {
                amps[s * fock_dim + n] = *a;
            }
            members.push((*p, amps));
        }
        let total: T = members.iter().map(|(w, _)| *w).sum();
        for m in &mut members {
            m.0 = m.0 / total;
        }
        let reg = Self { spin_dims, fock_dims: vec![fock_dim], state: RegisterState::Ensemble(members) };
        reg.check()?;
        Ok(reg)
    }

    /// Density matrix form of the register.
    pub fn density_matrix(&self) -> CMatrix<T> {
        match &self.state {
            RegisterState::Pure(v) => CMatrix::outer(v, v),
            RegisterState::Ensemble(members) => {
                let d = self.dim();
                let mut rho = CMatrix::zeros(d, d);
                for (w, v) in members {
                    rho = &rho + &CMatrix::outer(v, v).scale(Complex::new(*w, T::zero()));
                }
                rho
            }
            RegisterState::Mixed(m) => m.clone(),
        }
    }

    /// Reduced density matrix of the spins, tracing out all modes.
    pub fn reduced_spin(&self) -> CMatrix<T> {
        let sd = self.spin_dim();
        let fd = self.fock_dim();
        let mut out = CMatrix::zeros(sd, sd);
        let mut add_pure = |w: T, v: &[C<T>]| {
            for a in 0..sd {
                for b in 0..sd {
                    let mut acc = C::zero();
                    for n in 0..fd {
                        acc = acc + v[a * fd + n] * v[b * fd + n].conj();
                    }
                    out[(a, b)] = out[(a, b)] + acc * w;
                }
            }
        };
        match &self.state {
            RegisterState::Pure(v) => add_pure(T::one(), v),
            RegisterState::Ensemble(members) => {
                for (w, v) in members {
                    add_pure(*w, v);
                }
            }
            RegisterState::Mixed(rho) => {
                let d = self.dim();
                for a in 0..sd {
                    for b in 0..sd {
                        let mut acc = C::zero();
                        for n in 0..fd {
                            acc = acc + rho.as_slice()[(a * fd + n) * d + b * fd + n];
                        }
                        out[(a, b)] = acc;
                    }
                }
            }
        }
        out
    }

    /// Population of the highest retained Fock level of the (single) mode.
    pub fn top_fock_population(&self) -> T {
        let fd = self.fock_dim();
        let sd = self.spin_dim();
        let top = fd - 1;
        match &self.state {
            RegisterState::Pure(v) => (0..sd).map(|s| v[s * fd + top].norm_sqr()).sum(),
            RegisterState::Ensemble(members) => members
                .iter()
                .map(|(w, v)| *w * (0..sd).map(|s| v[s * fd + top].norm_sqr()).sum::<T>())
                .sum(),
            RegisterState::Mixed(rho) => (0..sd).map(|s| rho[(s * fd + top, s * fd + top)].re).sum(),
        }
    }

    /// Norm (pure), total weight (ensemble) or trace (mixed) minus one.
    pub fn normalization_defect(&self) -> T {
        match &self.state {
            RegisterState::Pure(v) => (norm_sqr(v) - T::one()).abs(),
            RegisterState::Ensemble(members) => {
                let total: T = members.iter().map(|(w, v)| *w * norm_sqr(v)).sum();
                (total - T::one()).abs()
            }
            RegisterState::Mixed(rho) => (rho.trace().re - T::one()).abs(),
        }
    }

    pub fn hermiticity_defect(&self) -> T {
        match &self.state {
            RegisterState::Mixed(rho) => rho.hermiticity_defect(),
            _ => T::zero(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.spin_dims.iter().any(|d| *d != 2 && *d != 3) {
            return domain(format!("spin dimensions must be 2 or 3, got {:?}", self.spin_dims));
        }
        let defect = self.normalization_defect();
        if defect > lit(1e-9) {
            return domain(format!("register not normalized (defect {defect})"));
        }
        Ok(())
    }
}
