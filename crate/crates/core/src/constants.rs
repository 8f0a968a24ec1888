//! Physical constants.
//!
//! Values are the CODATA 2022 recommended values. `e` and `h` are exact in
//! the 2019 SI; the reduced Planck constant is derived from `h` so the
//! `hbar * 2π == h` identity holds to rounding.

use std::f64::consts::TAU;

use serde::Serialize;

/// Elementary charge (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum electric permittivity (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_818_8e-12;
/// Planck constant (J s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const REDUCED_PLANCK: f64 = PLANCK / TAU;
/// Bohr magneton (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_065_7e-24;
/// Atomic mass constant (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_068_92e-27;

/// The constant table as a value, for reports and for code that wants to
/// carry the constants around explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub elementary_charge: f64,
    pub vacuum_permittivity: f64,
    pub reduced_planck: f64,
    pub planck: f64,
    pub bohr_magneton: f64,
    pub atomic_mass_unit: f64,
}

impl PhysicalConstants {
    pub const CODATA_2022: PhysicalConstants = PhysicalConstants {
        elementary_charge: ELEMENTARY_CHARGE,
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        reduced_planck: REDUCED_PLANCK,
        planck: PLANCK,
        bohr_magneton: BOHR_MAGNETON,
        atomic_mass_unit: ATOMIC_MASS_UNIT,
    };

    /// Coulomb constant times e², `e²/(4πε₀)` in J m.
    pub fn coulomb_coupling(&self) -> f64 {
        self.elementary_charge * self.elementary_charge
            / (4.0 * std::f64::consts::PI * self.vacuum_permittivity)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2022
    }
}

/// `e²/(4πε₀)` in J m.
pub fn coulomb_coupling() -> f64 {
    PhysicalConstants::CODATA_2022.coulomb_coupling()
}
