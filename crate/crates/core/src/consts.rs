//! CODATA 2018 constants in SI units.

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Atomic mass of neutral 40Ca, u.
pub const CA40_ATOMIC_MASS_U: f64 = 39.962_590_863;
/// 3D5/2 radiative lifetime used for the optical qubit, s.
pub const CA40_D52_LIFETIME: f64 = 1.1;
/// Differential Zeeman sensitivity of S1/2(-1/2) <-> D5/2(-1/2), Hz/G.
pub const CA40_QUBIT_ZEEMAN_HZ_PER_G: f64 = 0.56e6;
/// Qubit transition wavelength, m.
pub const CA40_QUBIT_WAVELENGTH: f64 = 729e-9;
