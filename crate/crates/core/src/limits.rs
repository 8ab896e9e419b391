//! Classical-limit window checks for packet spreads.
//!
//! A packet of mass m and spread σ tracks a classical trajectory only
//! inside the window ħ/(mc) ≪ σ ≪ mc²/‖F(r_a)‖, where r_a is the
//! closest approach of the trajectory. The operations here evaluate the
//! window, the balanced gravity spread, and the residual potential-energy
//! bound that justifies dropping the ε term across the packet core.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Parameters of the "much less than" checks.
///
/// `lambda` is the support multiplier: the packet core is ‖x−q‖ ≤ λσ
/// with λ > 1 (λ = 2 covers ≈95% of the Gaussian mass per axis).
/// `much_less_threshold` operationalizes "≪" as a ratio bound.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LimitCheckConfig {
    pub lambda: f64,
    pub much_less_threshold: f64,
}

impl Default for LimitCheckConfig {
    fn default() -> Self {
        LimitCheckConfig { lambda: 2.0, much_less_threshold: 1e-3 }
    }
}

impl LimitCheckConfig {
    pub fn new(lambda: f64, much_less_threshold: f64) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(Error::domain("lambda must exceed 1"));
        }
        if !(much_less_threshold > 0.0 && much_less_threshold < 1.0) {
            return Err(Error::domain("much_less_threshold must lie in (0, 1)"));
        }
        Ok(LimitCheckConfig { lambda, much_less_threshold })
    }
}

/// Result of [`check_classical_limit`]. Each ratio must stay below the
/// configured threshold for the scenario to be compliant.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LimitReport {
    /// ħ²/(m²σ²c²): kinetic scale over rest energy (lower σ bound).
    pub nonrel_ratio: f64,
    /// ‖F(r_a)‖λσ/(mc²): potential drop across the core (upper σ bound).
    pub limpak_ratio: f64,
    /// Planck length over closest approach.
    pub planck_ratio: f64,
    pub compliant: bool,
}

/// Balanced spread for gravity: σ = (ħ²r_a²/G)^(1/3)/m, the value at
/// which the kinetic-scale bound equals the potential-drop bound.
pub fn gravity_sigma(mass: f64, r_a: f64, k: &PhysicalConstants) -> Result<f64> {
    if mass <= 0.0 || r_a <= 0.0 {
        return Err(Error::domain("gravity_sigma requires positive mass and separation"));
    }
    Ok((k.hbar * k.hbar * r_a * r_a / k.g).cbrt() / mass)
}

/// Admissible spread window (σ_min, σ_max) = (ħ/(mc), mc²/F_ra).
/// A free particle (F_ra = 0) has an unbounded window above.
pub fn sigma_window(mass: f64, f_ra: f64, k: &PhysicalConstants) -> Result<(f64, f64)> {
    if mass <= 0.0 {
        return Err(Error::domain("sigma_window requires positive mass"));
    }
    if f_ra < 0.0 {
        return Err(Error::domain("force magnitude cannot be negative"));
    }
    let lo = k.hbar / (mass * k.c);
    let hi = if f_ra == 0.0 {
        f64::INFINITY
    } else {
        k.rest_energy(mass) / f_ra
    };
    Ok((lo, hi))
}

/// Upper bound for |ε(x−q)| on the core ‖x−q‖ ≤ λσ:
/// F_ra·λσ + ħ²λ²/(8mσ²).
pub fn epsilon_bound(f_ra: f64, lambda: f64, sigma: f64, mass: f64, k: &PhysicalConstants) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(Error::domain("lambda must exceed 1"));
    }
    if sigma <= 0.0 || mass <= 0.0 {
        return Err(Error::domain("sigma and mass must be positive"));
    }
    let quad = k.hbar * k.hbar * lambda * lambda / (8.0 * mass * sigma * sigma);
    Ok(f_ra * lambda * sigma + quad)
}

/// Evaluate the three window ratios for a scenario.
pub fn check_classical_limit(
    mass: f64,
    sigma: f64,
    f_ra: f64,
    r_a: f64,
    cfg: &LimitCheckConfig,
    k: &PhysicalConstants,
) -> Result<LimitReport> {
    if mass <= 0.0 || sigma <= 0.0 || r_a <= 0.0 || f_ra < 0.0 {
        return Err(Error::domain("check_classical_limit requires positive inputs"));
    }
    let mc2 = k.rest_energy(mass);
    let nonrel_ratio = (k.hbar / (mass * sigma * k.c)).powi(2);
    let limpak_ratio = f_ra * cfg.lambda * sigma / mc2;
    let planck_ratio = k.planck_length() / r_a;
    let t = cfg.much_less_threshold;
    Ok(LimitReport {
        nonrel_ratio,
        limpak_ratio,
        planck_ratio,
        compliant: nonrel_ratio < t && limpak_ratio < t && planck_ratio < t,
    })
}
