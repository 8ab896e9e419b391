//! Closed-form two-body dynamics for the attractive 1/r² force.
//!
//! The relative motion separates from the center-of-mass motion in
//! Jacobi coordinates; the relative orbit is a conic section in the
//! z = 0 plane, parametrized by the polar angle θ and mapped to
//! Newtonian time by τ(θ) = (1/L)∫ r(s)² ds.

mod conic;
mod timemap;

pub use conic::{ConicTrajectory, Regime};
pub use timemap::{write_trajectory_csv, TrajectoryState};

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Two-body mass bookkeeping: reduced mass μ = m₁m₂/(m₁+m₂) and total
/// mass m_T = m₁+m₂.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JacobiFrame {
    pub m1: f64,
    pub m2: f64,
    pub mu: f64,
    pub m_t: f64,
}

impl JacobiFrame {
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if m1 <= 0.0 || m2 <= 0.0 {
            return Err(Error::domain("masses must be positive"));
        }
        Ok(JacobiFrame { m1, m2, mu: m1 * m2 / (m1 + m2), m_t: m1 + m2 })
    }
}

/// Alias matching the operation vocabulary used by the scenario layer.
pub fn reduced_total_mass(m1: f64, m2: f64) -> Result<JacobiFrame> {
    JacobiFrame::new(m1, m2)
}

/// (x₁, x₂) → (q, q_o): relative coordinate and center of mass.
/// The same linear map applies to velocities.
pub fn jacobi_forward(x1: Vec3, x2: Vec3, frame: &JacobiFrame) -> (Vec3, Vec3) {
    let q = sub(x1, x2);
    let qo = scale(add(scale(x1, frame.m1), scale(x2, frame.m2)), 1.0 / frame.m_t);
    (q, qo)
}

/// (q, q_o) → (x₁, x₂), the exact inverse of [`jacobi_forward`].
pub fn jacobi_inverse(q: Vec3, qo: Vec3, frame: &JacobiFrame) -> (Vec3, Vec3) {
    let x1 = add(qo, scale(q, frame.m2 / frame.m_t));
    let x2 = sub(qo, scale(q, frame.m1 / frame.m_t));
    (x1, x2)
}

/// Total energy Ê = ½m₁‖q̇₁‖² + ½m₂‖q̇₂‖² − Gm₁m₂/‖q‖ + Ê_o in the
/// particle picture.
pub fn total_energy(
    frame: &JacobiFrame,
    q1_dot: Vec3,
    q2_dot: Vec3,
    q_rel: Vec3,
    e_o: f64,
    k: &PhysicalConstants,
) -> Result<f64> {
    let r = norm(q_rel);
    if r == 0.0 {
        return Err(Error::domain("zero separation in total_energy"));
    }
    Ok(0.5 * frame.m1 * dot(q1_dot, q1_dot) + 0.5 * frame.m2 * dot(q2_dot, q2_dot)
        - k.g * frame.m1 * frame.m2 / r
        + e_o)
}

/// The same energy in the Jacobi picture,
/// ½m_T‖q̇_o‖² + ½μ‖q̇‖² + V(q) + Ê_o.
pub fn total_energy_jacobi(
    frame: &JacobiFrame,
    q_dot: Vec3,
    qo_dot: Vec3,
    q_rel: Vec3,
    e_o: f64,
    k: &PhysicalConstants,
) -> Result<f64> {
    let r = norm(q_rel);
    if r == 0.0 {
        return Err(Error::domain("zero separation in total_energy_jacobi"));
    }
    Ok(0.5 * frame.m_t * dot(qo_dot, qo_dot) + 0.5 * frame.mu * dot(q_dot, q_dot)
        - k.g * frame.m1 * frame.m2 / r
        + e_o)
}

/// Gravitational potential V(r) = −Gm₁m₂/r of the relative separation.
pub fn potential(frame: &JacobiFrame, r: f64, k: &PhysicalConstants) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::domain("potential requires positive separation"));
    }
    Ok(-k.g * frame.m1 * frame.m2 / r)
}

/// Gravitational force on the relative coordinate, F = −(Gm₁m₂/r²)·û_r,
/// so that μq̈ = F.
pub fn gravity_force(frame: &JacobiFrame, q: Vec3, k: &PhysicalConstants) -> Result<Vec3> {
    let r = norm(q);
    if r == 0.0 {
        return Err(Error::domain("zero separation in gravity_force"));
    }
    let mag = -k.g * frame.m1 * frame.m2 / (r * r);
    Ok(scale(q, mag / r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_values() {
        let f = JacobiFrame::new(1.0, 1.0).unwrap();
        assert_eq!((f.mu, f.m_t), (0.5, 2.0));
        let f = JacobiFrame::new(2.0, 2.0).unwrap();
        assert_eq!((f.mu, f.m_t), (1.0, 4.0));
        let f = JacobiFrame::new(1.0, 3.0).unwrap();
        assert_eq!((f.mu, f.m_t), (0.75, 4.0));
        assert!(JacobiFrame::new(0.0, 1.0).is_err());
    }

    #[test]
    fn jacobi_examples() {
        let f = JacobiFrame::new(1.0, 1.0).unwrap();
        let v = [0.3, -0.4, 2.0];
        let (q, qo) = jacobi_forward(v, v, &f);
        assert_eq!(q, [0.0; 3]);
        assert_eq!(qo, v);
        let (q, qo) = jacobi_forward([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], &f);
        assert_eq!(q, [2.0, 0.0, 0.0]);
        assert_eq!(qo, [0.0; 3]);
        let f13 = JacobiFrame::new(1.0, 3.0).unwrap();
        let (q, qo) = jacobi_forward([4.0, 0.0, 0.0], [0.0; 3], &f13);
        assert_eq!(q, [4.0, 0.0, 0.0]);
        assert_eq!(qo, [1.0, 0.0, 0.0]);
        let (x1, x2) = jacobi_inverse(q, qo, &f13);
        assert_eq!(x1, [4.0, 0.0, 0.0]);
        assert_eq!(x2, [0.0; 3]);
    }

    #[test]
    fn energy_forms_agree() {
        let k = PhysicalConstants::default();
        let f = JacobiFrame::new(1.0, 3.0).unwrap();
        let (x1d, x2d) = ([0.1, -0.2, 0.05], [-0.3, 0.07, 0.4]);
        let q = [1.3, -0.2, 0.9];
        let e = total_energy(&f, x1d, x2d, q, 2.5, &k).unwrap();
        let (qd, qod) = jacobi_forward(x1d, x2d, &f);
        let ej = total_energy_jacobi(&f, qd, qod, q, 2.5, &k).unwrap();
        assert!((e - ej).abs() <= 1e-12 * e.abs().max(1.0), "{e} vs {ej}");
    }

    #[test]
    fn energy_special_cases() {
        let k = PhysicalConstants::default();
        let f = JacobiFrame::new(1.0, 1.0).unwrap();
        // at rest: pure potential
        let e = total_energy(&f, [0.0; 3], [0.0; 3], [2.0, 0.0, 0.0], 0.0, &k).unwrap();
        assert_eq!(e, -k.g * 1.0 * 1.0 / 2.0);
        // equal and opposite: center-of-mass term vanishes
        let v = [0.4, 0.1, -0.2];
        let (_, qod) = jacobi_forward(v, scale(v, -1.0), &f);
        assert_eq!(qod, [0.0; 3]);
        assert!(total_energy(&f, v, v, [0.0; 3], 0.0, &k).is_err());
    }
}
