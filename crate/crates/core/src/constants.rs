//! Physical constants and unit conventions.
//!
//! All computation is carried out in SI. The spectral machinery uses the
//! wave conventions where spacetime coordinates carry length units and
//! energy–momentum coordinates carry inverse length: conversions are
//! `time = t/c`, `momentum = ħp`, `energy = ħcE`, with mass kept in
//! kilograms throughout. Helpers below expose those conversion factors
//! so the two pictures never mix implicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA value of the reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054571817e-34;
/// Speed of light in vacuum (m/s), exact.
pub const C: f64 = 2.99792458e8;
/// Newtonian constant of gravitation (m³/(kg·s²)).
pub const G: f64 = 6.67430e-11;

/// ħ, c, G bundle. Injectable so tests can run in synthetic unit systems;
/// defaults are the CODATA values above.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub g: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { hbar: HBAR, c: C, g: G }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, c: f64, g: f64) -> Result<Self> {
        if hbar <= 0.0 || c <= 0.0 || g <= 0.0 {
            return Err(Error::domain("physical constants must be strictly positive"));
        }
        Ok(PhysicalConstants { hbar, c, g })
    }

    /// Planck length √(ħG/c³) in metres.
    pub fn planck_length(&self) -> f64 {
        (self.hbar * self.g / self.c.powi(3)).sqrt()
    }

    /// Compton wavenumber m·c/ħ (1/m) of a mass in kg.
    pub fn compton_wavenumber(&self, mass: f64) -> f64 {
        mass * self.c / self.hbar
    }

    /// Rest energy m·c² (J).
    pub fn rest_energy(&self, mass: f64) -> f64 {
        mass * self.c * self.c
    }

    /// Convert a time in seconds to the length-unit time coordinate t = c·τ.
    pub fn time_to_length(&self, tau: f64) -> f64 {
        self.c * tau
    }

    /// Convert an energy in joules to inverse length, E/(ħc).
    pub fn energy_to_inverse_length(&self, e: f64) -> f64 {
        e / (self.hbar * self.c)
    }

    /// Convert an SI momentum (kg·m/s) to a wavenumber p/ħ (1/m).
    pub fn momentum_to_wavenumber(&self, p: f64) -> f64 {
        p / self.hbar
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codata_defaults() {
        let k = PhysicalConstants::default();
        assert_eq!(k.hbar, 1.054571817e-34);
        assert_eq!(k.c, 2.99792458e8);
        assert_eq!(k.g, 6.67430e-11);
    }

    #[test]
    fn planck_length_value() {
        // quoted as 1.6e-35 m to two figures
        let lp = PhysicalConstants::default().planck_length();
        assert!((lp - 1.6e-35).abs() / 1.6e-35 < 0.02, "{lp:.4e}");
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(PhysicalConstants::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, -1.0, 1.0).is_err());
    }
}
