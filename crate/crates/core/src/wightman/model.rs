//! Pluggable four-point model ingredients.

use std::fmt;
use std::sync::Arc;

use super::minkowski_sq;
use crate::rng::CounterRng;

/// Scalar function of a 4-vector used as a model ingredient. The
/// built-ins are Lorentz invariant; arbitrary plug-ins go through
/// `Custom`.
#[derive(Clone)]
pub enum ModelFunction {
    Constant(f64),
    /// exp(−(ℓ²·p²)²) with p² the Minkowski square: even, bounded,
    /// invariant; ℓ² sets the damping scale.
    GaussianDamped { ell2: f64 },
    Custom(Arc<dyn Fn([f64; 4]) -> f64 + Send + Sync>),
}

impl ModelFunction {
    pub fn eval(&self, p: [f64; 4]) -> f64 {
        match self {
            ModelFunction::Constant(c) => *c,
            ModelFunction::GaussianDamped { ell2 } => {
                let s = ell2 * minkowski_sq(&p);
                (-s * s).exp()
            }
            ModelFunction::Custom(f) => f(p),
        }
    }

    pub fn zero() -> Self {
        ModelFunction::Constant(0.0)
    }
}

impl fmt::Debug for ModelFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFunction::Constant(c) => write!(f, "Constant({c})"),
            ModelFunction::GaussianDamped { ell2 } => write!(f, "GaussianDamped({ell2})"),
            ModelFunction::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Four-point model: overall coefficient c₄, the combined pair
/// coefficient ½(β₂β₄ + β₃²), the even two-argument function U_e and the
/// cross-pair function Υ.
#[derive(Clone, Debug)]
pub struct WightmanModel {
    pub c4: f64,
    pub beta_combined: f64,
    pub u_even: ModelFunction,
    pub upsilon: ModelFunction,
}

impl WightmanModel {
    /// Constant-Υ model with the even term switched off; the kernel
    /// reduces to 2·β̄·κ².
    pub fn constant_upsilon(c4: f64, beta_combined: f64, kappa: f64) -> Self {
        WightmanModel {
            c4,
            beta_combined,
            u_even: ModelFunction::zero(),
            upsilon: ModelFunction::Constant(kappa),
        }
    }
}

/// Probe a model for constraint violations; an empty list is a pass.
/// Coefficients must be nonnegative (they are moments and Laplace
/// transforms of nonnegative measures), U_e must be even, and Υ must be
/// positive on timelike positive-energy probes.
pub fn validate_model(model: &WightmanModel) -> Vec<String> {
    let mut violations = Vec::new();
    if !(model.c4 >= 0.0) {
        violations.push(format!("c4 = {} is negative", model.c4));
    }
    if !(model.beta_combined >= 0.0) {
        violations.push(format!("beta_combined = {} is negative", model.beta_combined));
    }
    let mut rng = CounterRng::at(0x77AB, 0);
    for i in 0..64 {
        let p = [
            2.0 * rng.next_f64() - 1.0,
            2.0 * rng.next_f64() - 1.0,
            2.0 * rng.next_f64() - 1.0,
            2.0 * rng.next_f64() - 1.0,
        ];
        let a = model.u_even.eval(p);
        let b = model.u_even.eval([-p[0], -p[1], -p[2], -p[3]]);
        if (a - b).abs() > 1e-12 * (a.abs() + b.abs() + 1e-300) {
            violations.push(format!("U_e not even at probe {i}: {a} vs {b}"));
            break;
        }
    }
    for i in 0..64 {
        // timelike, positive energy: E exceeds the spatial norm
        let sp = [
            rng.next_f64() - 0.5,
            rng.next_f64() - 0.5,
            rng.next_f64() - 0.5,
        ];
        let n = (sp[0] * sp[0] + sp[1] * sp[1] + sp[2] * sp[2]).sqrt();
        let e = n * (1.0 + rng.next_f64()) + 0.1;
        let v = model.upsilon.eval([e, sp[0], sp[1], sp[2]]);
        if !(v > 0.0) {
            violations.push(format!("Upsilon not positive at timelike probe {i}: {v}"));
            break;
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_c4_flagged() {
        let m = WightmanModel::constant_upsilon(-1.0, 0.5, 1.0);
        assert!(validate_model(&m).iter().any(|v| v.contains("c4")));
    }

    #[test]
    fn minkowski_square_custom_is_even() {
        let m = WightmanModel {
            c4: 1.0,
            beta_combined: 1.0,
            u_even: ModelFunction::Custom(std::sync::Arc::new(|p| super::minkowski_sq(&p))),
            upsilon: ModelFunction::Constant(1.0),
        };
        assert!(validate_model(&m).is_empty());
    }

    #[test]
    fn exponential_energy_upsilon_passes() {
        // Laplace-transform style probe: e^{−sE} with s > 0
        let m = WightmanModel {
            c4: 1.0,
            beta_combined: 1.0,
            u_even: ModelFunction::GaussianDamped { ell2: 0.5 },
            upsilon: ModelFunction::Custom(std::sync::Arc::new(|p| (-0.7 * p[0]).exp())),
        };
        assert!(validate_model(&m).is_empty());
    }

    #[test]
    fn nonpositive_upsilon_flagged() {
        let m = WightmanModel {
            c4: 1.0,
            beta_combined: 1.0,
            u_even: ModelFunction::zero(),
            upsilon: ModelFunction::Constant(0.0),
        };
        assert!(validate_model(&m).iter().any(|v| v.contains("Upsilon")));
    }
}
