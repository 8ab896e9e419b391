//! Importance-sampled four-point contributions.
//!
//! Both four-point pieces reduce, after the momentum deltas are resolved
//! analytically, to integrals over on-shell momenta:
//!
//! - the free piece pairs the incoming and outgoing momenta, leaving a
//!   6-dimensional integral over (p₁, p₂);
//! - the connected piece carries the u-integral, performed analytically
//!   as (2π)⁴·δ⁴ of total on-shell energy–momentum. Three spatial
//!   momenta and one direction are sampled; the remaining magnitude
//!   solves the on-shell energy constraint by safeguarded Newton
//!   iteration, summing over both crossings of the recoil surface when
//!   the ray enters and leaves it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::WightmanModel;
use super::twopoint::MomentumLabel;
use super::{omega, on_shell};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::exec;
use crate::rng::CounterRng;

/// (2π)⁴ from the analytic u-integral over the exponential factors;
/// every conservation-constrained estimate carries it exactly once.
pub const MOMENTUM_CONSERVATION_NORM: f64 = 97.40909103400243;

/// Two-particle momentum label built as a product of single-particle
/// labels, optionally symmetrized over argument order.
#[derive(Clone, Debug)]
pub struct TwoParticleLabel {
    pub a: MomentumLabel,
    pub b: MomentumLabel,
    pub symmetrized: bool,
}

impl TwoParticleLabel {
    pub fn product(a: MomentumLabel, b: MomentumLabel) -> Self {
        TwoParticleLabel { a, b, symmetrized: false }
    }

    pub fn symmetrized(a: MomentumLabel, b: MomentumLabel) -> Self {
        TwoParticleLabel { a, b, symmetrized: true }
    }

    pub fn eval(&self, p1: [f64; 3], p2: [f64; 3], k: &PhysicalConstants) -> Complex64 {
        let direct = self.a.eval(p1, k) * self.b.eval(p2, k);
        if self.symmetrized {
            0.5 * (direct + self.a.eval(p2, k) * self.b.eval(p1, k))
        } else {
            direct
        }
    }

    pub fn mass(&self) -> f64 {
        self.a.packet.mass
    }

    fn centers(&self, k: &PhysicalConstants) -> ([f64; 3], [f64; 3]) {
        (self.a.packet.momentum_center(k), self.b.packet.momentum_center(k))
    }

    fn max_width(&self) -> f64 {
        self.a.packet.sigma_p_wavenumber().max(self.b.packet.sigma_p_wavenumber())
    }
}

/// Isotropic Gaussian importance density over the sampled momenta.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GaussianProposal {
    pub center1: [f64; 3],
    pub center2: [f64; 3],
    pub width: f64,
}

impl GaussianProposal {
    /// Cover the f- and g-side supports with margin.
    pub fn from_labels(
        f2: &TwoParticleLabel,
        g2: &TwoParticleLabel,
        k: &PhysicalConstants,
    ) -> Result<Self> {
        let (fc1, fc2) = f2.centers(k);
        let (gc1, gc2) = g2.centers(k);
        let mut center1 = [0.0; 3];
        let mut center2 = [0.0; 3];
        let mut sep: f64 = 0.0;
        for i in 0..3 {
            center1[i] = 0.5 * (fc1[i] + gc1[i]);
            center2[i] = 0.5 * (fc2[i] + gc2[i]);
            sep = sep.max((fc1[i] - gc1[i]).abs()).max((fc2[i] - gc2[i]).abs());
        }
        let width = 1.5 * f2.max_width().max(g2.max_width()) + 0.5 * sep;
        Self::new(center1, center2, width)
    }

    pub fn new(center1: [f64; 3], center2: [f64; 3], width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::config(format!("degenerate proposal width {width}")));
        }
        Ok(GaussianProposal { center1, center2, width })
    }

    fn draw(&self, rng: &mut CounterRng) -> ([f64; 3], [f64; 3], f64) {
        let mut p1 = [0.0; 3];
        let mut p2 = [0.0; 3];
        let (a, b) = rng.next_normal_pair();
        let (c, d) = rng.next_normal_pair();
        let (e, f) = rng.next_normal_pair();
        let n = [a, b, c, d, e, f];
        for i in 0..3 {
            p1[i] = self.center1[i] + self.width * n[i];
            p2[i] = self.center2[i] + self.width * n[3 + i];
        }
        // joint density of the draw
        let mut q = 0.0;
        for x in n {
            q += x * x;
        }
        let pdf = (-0.5 * q).exp()
            / (2.0 * std::f64::consts::PI * self.width * self.width).powi(3);
        (p1, p2, pdf)
    }
}

/// Counter-based sampling plan.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OnShellSampler {
    pub seed: u64,
    pub samples: usize,
    pub proposal: GaussianProposal,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AmplitudeEstimate {
    pub value: Complex64,
    pub std_error: f64,
    pub samples: usize,
    pub rejection_rate: f64,
    pub seed: u64,
}

impl AmplitudeEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value_re": self.value.re,
            "value_im": self.value.im,
            "std_error": self.std_error,
            "samples": self.samples,
            "rejection_rate": self.rejection_rate,
            "seed": self.seed,
        })
    }
}

/// Leg-weight convention of the free four-point kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreeLegWeight {
    /// 1/√(2ω) per leg as printed: (2ω)⁻³ per particle after pairing.
    AsPrinted,
    /// 1/(2ω) per leg, matching the connected kernel: (2ω)⁻⁴.
    Harmonized,
}

struct Accum {
    sum: Complex64,
    sum_sq: f64,
    rejected: usize,
}

fn finish(parts: Vec<Accum>, n: usize, seed: u64) -> (Complex64, f64, f64) {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    let mut rejected = 0usize;
    for p in parts {
        sum += p.sum;
        sum_sq += p.sum_sq;
        rejected += p.rejected;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean.norm_sqr()).max(0.0);
    let std_error = (var / (n as f64 - 1.0)).sqrt();
    let _ = seed;
    (mean, std_error, rejected as f64 / n as f64)
}

/// Free four-point contribution: after resolving the pairing deltas,
/// ∫ d³p₁ d³p₂ conj(f̃₂)(p₁,p₂)·[g̃₂(p₁,p₂) + g̃₂(p₂,p₁)]·∏(2ω)⁻ᵉ.
pub fn four_point_free(
    f2: &TwoParticleLabel,
    g2: &TwoParticleLabel,
    sampler: &OnShellSampler,
    leg_weight: FreeLegWeight,
    k: &PhysicalConstants,
) -> Result<AmplitudeEstimate> {
    check_masses(f2, g2)?;
    let mass = f2.mass();
    let expo = match leg_weight {
        FreeLegWeight::AsPrinted => -3,
        FreeLegWeight::Harmonized => -4,
    };
    let n = sampler.samples.max(2);
    let parts = exec::map_index_chunks(n, 4096, |range| {
        let mut acc = Accum { sum: Complex64::new(0.0, 0.0), sum_sq: 0.0, rejected: 0 };
        for i in range {
            let mut rng = CounterRng::at(sampler.seed, i as u64);
            let (p1, p2, pdf) = sampler.proposal.draw(&mut rng);
            let w1 = 2.0 * omega(&p1, mass, k);
            let w2 = 2.0 * omega(&p2, mass, k);
            let v = f2.eval(p1, p2, k).conj()
                * (g2.eval(p1, p2, k) + g2.eval(p2, p1, k))
                * w1.powi(expo)
                * w2.powi(expo)
                / pdf;
            acc.sum += v;
            acc.sum_sq += v.norm_sqr();
        }
        acc
    });
    let (value, std_error, rejection_rate) = finish(parts, n, sampler.seed);
    Ok(AmplitudeEstimate { value, std_error, samples: n, rejection_rate, seed: sampler.seed })
}

/// Connected four-point function: conservation-constrained on-shell
/// Monte Carlo of
/// c₄·(2π)⁴·∫ ∏(2ω)⁻² δ⁴(Σ) conj(f̃₂)(p₁,p₂) g̃₂(p₃,p₄) K,
/// with K the even-function and cross-pair kernel of the model.
pub fn four_point_connected(
    f2: &TwoParticleLabel,
    g2: &TwoParticleLabel,
    model: &WightmanModel,
    sampler: &OnShellSampler,
    k: &PhysicalConstants,
) -> Result<AmplitudeEstimate> {
    check_masses(f2, g2)?;
    let mass = f2.mass();
    let mc = mass * k.c / k.hbar;
    let n = sampler.samples.max(2);
    let beta = model.beta_combined;
    let c4 = model.c4;

    let parts = exec::map_index_chunks(n, 4096, |range| {
        let mut acc = Accum { sum: Complex64::new(0.0, 0.0), sum_sq: 0.0, rejected: 0 };
        for i in range {
            let mut rng = CounterRng::at(sampler.seed, i as u64);
            let (p1, p2, pdf) = sampler.proposal.draw(&mut rng);
            let u = rng.next_unit_vector();
            let e_tot = omega(&p1, mass, k) + omega(&p2, mass, k);
            let big_p = [p1[0] + p2[0], p1[1] + p2[1], p1[2] + p2[2]];
            let roots = recoil_roots(&big_p, u, e_tot, mc);
            if roots.is_empty() {
                acc.rejected += 1;
                continue;
            }
            let mut v = Complex64::new(0.0, 0.0);
            for (r, dh) in roots {
                let p3 = [r * u[0], r * u[1], r * u[2]];
                let p4 = [big_p[0] - p3[0], big_p[1] - p3[1], big_p[2] - p3[2]];
                let q1 = on_shell(&p1, mass, k);
                let q2 = on_shell(&p2, mass, k);
                let q3 = on_shell(&p3, mass, k);
                let q4 = on_shell(&p4, mass, k);
                let diff = |a: [f64; 4], b: [f64; 4]| [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]];
                let summ = |a: [f64; 4], b: [f64; 4]| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                let kernel = model.u_even.eval(diff(q1, q2)) * model.u_even.eval(diff(q3, q4))
                    + beta
                        * (model.upsilon.eval(summ(q1, q3)) * model.upsilon.eval(summ(q2, q4))
                            + model.upsilon.eval(summ(q1, q4)) * model.upsilon.eval(summ(q2, q3)));
                let weights = (2.0 * q1[0]).powi(-2)
                    * (2.0 * q2[0]).powi(-2)
                    * (2.0 * q3[0]).powi(-2)
                    * (2.0 * q4[0]).powi(-2);
                v += f2.eval(p1, p2, k).conj()
                    * g2.eval(p3, p4, k)
                    * kernel
                    * weights
                    * (r * r / dh.abs());
            }
            v *= c4 * MOMENTUM_CONSERVATION_NORM * 4.0 * std::f64::consts::PI / pdf;
            acc.sum += v;
            acc.sum_sq += v.norm_sqr();
        }
        acc
    });
    let (value, std_error, rejection_rate) = finish(parts, n, sampler.seed);
    if rejection_rate > 0.5 {
        return Err(Error::config(format!(
            "proposal rejected {:.1}% of samples; recenter or widen it",
            rejection_rate * 100.0
        )));
    }
    Ok(AmplitudeEstimate { value, std_error, samples: n, rejection_rate, seed: sampler.seed })
}

fn check_masses(f2: &TwoParticleLabel, g2: &TwoParticleLabel) -> Result<()> {
    let m = f2.mass();
    for lbl in [&f2.a, &f2.b, &g2.a, &g2.b] {
        if (lbl.packet.mass - m).abs() > 1e-12 * m {
            return Err(Error::precondition(
                "all labels must share the field mass (single-species shell)",
            ));
        }
    }
    Ok(())
}

/// Roots of h(r) = ω(r·û) + ω(P − r·û) = E along the sampled ray, with
/// h'(r) at each root. h is convex in r: zero, one, or two crossings.
fn recoil_roots(big_p: &[f64; 3], u: [f64; 3], e_tot: f64, mc: f64) -> Vec<(f64, f64)> {
    let p_dot_u = big_p[0] * u[0] + big_p[1] * u[1] + big_p[2] * u[2];
    let p2 = big_p[0] * big_p[0] + big_p[1] * big_p[1] + big_p[2] * big_p[2];
    let m2 = mc * mc;
    let h = |r: f64| -> f64 {
        let w3 = (m2 + r * r).sqrt();
        let w4 = (m2 + p2 - 2.0 * r * p_dot_u + r * r).sqrt();
        w3 + w4
    };
    let dh = |r: f64| -> f64 {
        let w3 = (m2 + r * r).sqrt();
        let w4 = (m2 + p2 - 2.0 * r * p_dot_u + r * r).sqrt();
        r / w3 + (r - p_dot_u) / w4
    };
    let tol = 1e-12 * e_tot;
    let r_max = e_tot;

    // locate the minimum of h on [0, r_max]
    let r_min = if p_dot_u <= 0.0 {
        0.0
    } else {
        // h' is increasing; bisect its sign change
        let (mut lo, mut hi) = (0.0f64, r_max);
        if dh(hi) < 0.0 {
            return Vec::new(); // numerically impossible, but stay safe
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if dh(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let h0 = h(0.0);
    let hmin = h(r_min);
    if hmin >= e_tot - tol {
        return Vec::new();
    }
    let mut roots = Vec::with_capacity(2);
    if r_min > 0.0 && h0 > e_tot + tol {
        if let Some(r) = newton_bracketed(&h, &dh, e_tot, 0.0, r_min, tol) {
            roots.push((r, dh(r)));
        }
    }
    if let Some(r) = newton_bracketed(&h, &dh, e_tot, r_min, r_max, tol) {
        roots.push((r, dh(r)));
    }
    roots
}

/// Safeguarded Newton for h(r) = target on a bracket with a sign change.
fn newton_bracketed(
    h: &impl Fn(f64) -> f64,
    dh: &impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Option<f64> {
    let (flo, fhi) = (h(lo) - target, h(hi) - target);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo * fhi > 0.0 {
        return None;
    }
    let rising = fhi > 0.0;
    let mut r = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = h(r) - target;
        if f.abs() <= tol {
            return Some(r);
        }
        if (f > 0.0) == rising {
            hi = r;
        } else {
            lo = r;
        }
        let d = dh(r);
        let newton = r - f / d;
        r = if d != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < f64::EPSILON * hi.abs() {
            return Some(r);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packets::MinimumPacket;

    fn toy() -> PhysicalConstants {
        PhysicalConstants::new(1.0, 1.0, 1.0).unwrap()
    }

    fn label(center: [f64; 3], sigma: f64) -> MomentumLabel {
        MomentumLabel::b_weighted(
            MinimumPacket::new(1.0, sigma, [0.0; 3], center, 0.0).unwrap(),
        )
    }

    fn sampler(n: usize, seed: u64, f2: &TwoParticleLabel, g2: &TwoParticleLabel) -> OnShellSampler {
        let kk = toy();
        OnShellSampler {
            seed,
            samples: n,
            proposal: GaussianProposal::from_labels(f2, g2, &kk).unwrap(),
        }
    }

    #[test]
    fn free_diagonal_positive_within_errors() {
        let kk = toy();
        let f2 = TwoParticleLabel::symmetrized(label([0.3, 0.0, 0.0], 0.8), label([-0.3, 0.0, 0.0], 0.8));
        let s = sampler(20_000, 7, &f2, &f2);
        let est = four_point_free(&f2, &f2, &s, FreeLegWeight::AsPrinted, &kk).unwrap();
        assert!(est.value.re > 3.0 * est.std_error, "{est:?}");
        assert!(est.value.im.abs() <= 3.0 * est.std_error);
    }

    #[test]
    fn free_seed_determinism_bitwise() {
        let kk = toy();
        let f2 = TwoParticleLabel::product(label([0.2, 0.1, 0.0], 0.9), label([-0.1, 0.0, 0.2], 0.7));
        let s = sampler(5_000, 42, &f2, &f2);
        let a = four_point_free(&f2, &f2, &s, FreeLegWeight::AsPrinted, &kk).unwrap();
        crate::exec::set_parallel(false);
        let b = four_point_free(&f2, &f2, &s, FreeLegWeight::AsPrinted, &kk).unwrap();
        crate::exec::set_parallel(true);
        assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
        assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn symmetrized_label_exchange_invariance() {
        let kk = toy();
        let g2 = TwoParticleLabel::symmetrized(label([0.2, 0.3, 0.0], 0.8), label([-0.2, 0.1, 0.0], 0.9));
        let (p1, p2) = ([0.15, -0.2, 0.3], [0.05, 0.4, -0.1]);
        let a = g2.eval(p1, p2, &kk);
        let b = g2.eval(p2, p1, &kk);
        assert!((a - b).norm() < 1e-14 * a.norm().max(1e-300));
    }

    #[test]
    fn connected_zero_when_c4_vanishes() {
        let kk = toy();
        let f2 = TwoParticleLabel::symmetrized(label([0.4, 0.0, 0.0], 0.8), label([-0.4, 0.0, 0.0], 0.8));
        let model = WightmanModel::constant_upsilon(0.0, 1.0, 1.0);
        let s = sampler(2_000, 3, &f2, &f2);
        let est = four_point_connected(&f2, &f2, &model, &s, &kk).unwrap();
        assert_eq!(est.value, Complex64::new(0.0, 0.0));
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn connected_rejection_reported() {
        let kk = toy();
        let f2 = TwoParticleLabel::product(label([0.5, 0.0, 0.0], 0.8), label([-0.5, 0.0, 0.0], 0.8));
        let model = WightmanModel::constant_upsilon(1.0, 0.5, 1.0);
        let s = sampler(4_000, 11, &f2, &f2);
        let est = four_point_connected(&f2, &f2, &model, &s, &kk).unwrap();
        assert!(est.rejection_rate < 0.5, "{}", est.rejection_rate);
        assert!(est.value.re > 0.0);
    }

    #[test]
    fn estimate_json_fields() {
        let est = AmplitudeEstimate {
            value: Complex64::new(1.0, -2.0),
            std_error: 0.1,
            samples: 10,
            rejection_rate: 0.25,
            seed: 5,
        };
        let j = est.to_json();
        for key in ["value_re", "value_im", "std_error", "samples", "rejection_rate", "seed"] {
            assert!(j.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn degenerate_proposal_rejected() {
        assert!(GaussianProposal::new([0.0; 3], [0.0; 3], 0.0).is_err());
    }
}
