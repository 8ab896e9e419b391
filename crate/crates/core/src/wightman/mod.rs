//! Desk-scale evaluation of two- and four-point kernels on positive-shell
//! Gaussian labels.
//!
//! The two-point product is a deterministic on-shell quadrature. The
//! four-point free and connected contributions are importance-sampled
//! Monte Carlo estimates over the conservation-constrained on-shell
//! manifold; sampling is counter-based, so estimates are bitwise
//! reproducible for a given seed and independent of the worker count.

mod fourpoint;
mod model;
mod twopoint;

pub use fourpoint::{
    four_point_connected, four_point_free, AmplitudeEstimate, FreeLegWeight, GaussianProposal,
    OnShellSampler, TwoParticleLabel, MOMENTUM_CONSERVATION_NORM,
};
pub use model::{validate_model, ModelFunction, WightmanModel};
pub use twopoint::{overlap_integral, two_point_product, MomentumLabel};

use crate::constants::PhysicalConstants;
use crate::dd::Dd;

/// On-shell frequency ω(p) = √((mc/ħ)² + ‖p‖²) in inverse length.
pub fn omega(p: &[f64; 3], mass: f64, k: &PhysicalConstants) -> f64 {
    let mc = mass * k.c / k.hbar;
    let p2 = p.iter().fold(Dd::ZERO, |acc, &x| acc.add(Dd::prod(x, x)));
    Dd::prod(mc, mc).add(p2).sqrt().to_f64()
}

/// On-shell 4-vector (ω(p), p).
pub fn on_shell(p: &[f64; 3], mass: f64, k: &PhysicalConstants) -> [f64; 4] {
    [omega(p, mass, k), p[0], p[1], p[2]]
}

/// Minkowski square E² − ‖p‖².
pub fn minkowski_sq(p: &[f64; 4]) -> f64 {
    p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3]
}
