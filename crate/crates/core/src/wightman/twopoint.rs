//! Deterministic on-shell overlap integrals of single-particle labels.

use num_complex::Complex64;

use super::omega;
use crate::constants::PhysicalConstants;
use crate::error::Result;
use crate::packets::MinimumPacket;
use crate::quad;

/// Single-particle momentum-space label: a Gaussian packet, optionally
/// carrying the positive-shell weight 2ω(p).
#[derive(Clone, Debug)]
pub struct MomentumLabel {
    pub packet: MinimumPacket,
    pub b_weighted: bool,
}

impl MomentumLabel {
    pub fn new(packet: MinimumPacket) -> Self {
        MomentumLabel { packet, b_weighted: false }
    }

    pub fn b_weighted(packet: MinimumPacket) -> Self {
        MomentumLabel { packet, b_weighted: true }
    }

    pub fn eval(&self, p: [f64; 3], k: &PhysicalConstants) -> Complex64 {
        let v = self.packet.eval_momentum(p, k);
        if self.b_weighted {
            v * (2.0 * omega(&p, self.packet.mass, k))
        } else {
            v
        }
    }

    /// Momentum-space support box center ± reach, for quadrature.
    pub(crate) fn support(&self, reach_sigmas: f64, k: &PhysicalConstants) -> ([f64; 3], f64) {
        let c = self.packet.momentum_center(k);
        (c, reach_sigmas * self.packet.sigma_p_wavenumber())
    }
}

/// ∫ d³p (2ω)^(−omega_power) conj(f)(p) g(p) by nested adaptive
/// quadrature over the union of the labels' supports.
pub fn overlap_integral(
    f: &MomentumLabel,
    g: &MomentumLabel,
    omega_power: i32,
    k: &PhysicalConstants,
) -> Result<Complex64> {
    let (cf, rf) = f.support(8.5, k);
    let (cg, rg) = g.support(8.5, k);
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for i in 0..3 {
        lo[i] = (cf[i] - rf).min(cg[i] - rg);
        hi[i] = (cf[i] + rf).max(cg[i] + rg);
    }
    let mass_f = f.packet.mass;
    let integrand = |px: f64, py: f64, pz: f64| -> Complex64 {
        let p = [px, py, pz];
        let w = omega(&p, mass_f, k);
        f.eval(p, k).conj() * g.eval(p, k) * (2.0 * w).powi(-omega_power)
    };
    let re = quad::integrate_3d(|x, y, z| integrand(x, y, z).re, lo, hi, 1e-8)?;
    let im = quad::integrate_3d(|x, y, z| integrand(x, y, z).im, lo, hi, 1e-8)?;
    Ok(Complex64::new(re, im))
}

/// Two-point product W₂(f* g) = ∫ d³p/(2ω) conj(f̃)(p) g̃(p), the
/// positive-frequency on-shell pairing.
pub fn two_point_product(
    f: &MomentumLabel,
    g: &MomentumLabel,
    k: &PhysicalConstants,
) -> Result<Complex64> {
    overlap_integral(f, g, 1, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> PhysicalConstants {
        // ħ = c = 1: wavenumbers equal momenta, mc/ħ = m
        PhysicalConstants::new(1.0, 1.0, 1.0).unwrap()
    }

    fn label(center: [f64; 3], sigma: f64, phi: f64) -> MomentumLabel {
        // q̇ = ħ·center/m with m = 1, ħ = 1
        MomentumLabel::new(
            MinimumPacket::new(1.0, sigma, [0.1, -0.2, 0.05], center, phi).unwrap(),
        )
    }

    #[test]
    fn diagonal_is_real_positive() {
        let kk = toy();
        let f = label([0.3, 0.0, -0.1], 0.9, 0.4);
        let v = two_point_product(&f, &f, &kk).unwrap();
        assert!(v.re > 0.0);
        assert!(v.im.abs() < 1e-9 * v.re, "{v}");
    }

    #[test]
    fn conjugate_symmetry() {
        let kk = toy();
        let f = label([0.3, 0.1, 0.0], 0.8, 0.2);
        let g = label([-0.2, 0.4, 0.1], 1.1, 1.3);
        let fg = two_point_product(&f, &g, &kk).unwrap();
        let gf = two_point_product(&g, &f, &kk).unwrap();
        assert!((fg - gf.conj()).norm() < 1e-8 * fg.norm(), "{fg} vs {gf}");
    }

    #[test]
    fn separated_supports_vanish() {
        let kk = toy();
        // momentum-width 1/(2σ) = 0.5; separate centers by 20 widths
        let f = label([0.0, 0.0, 0.0], 1.0, 0.0);
        let g = label([10.0, 0.0, 0.0], 1.0, 0.0);
        let ff = two_point_product(&f, &f, &kk).unwrap();
        let fg = two_point_product(&f, &g, &kk).unwrap();
        assert!(fg.norm() < 1e-12 * ff.norm(), "{fg} vs {ff}");
    }
}
