//! Double-double arithmetic for phase accumulation.
//!
//! Propagator and packet phases at laboratory scale reach 1e10–1e28
//! radians while the experiments resolve phase differences far below
//! 1e-6 rad; plain f64 accumulation would put the roundoff floor above
//! the physics. Phases are therefore accumulated as unevaluated sums
//! `hi + lo` of two f64 (roughly 31 significant digits) and reduced
//! modulo 2π before exponentiation.
//!
//! The primitives are the classical error-free transformations (Dekker,
//! Knuth); products use FMA.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: f64::mul_add(a, b, -p) }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    /// 2π to double-double precision.
    pub const TWO_PI: Dd = Dd {
        hi: 6.283185307179586,
        lo: 2.4492935982947064e-16,
    };
    pub const PI: Dd = Dd {
        hi: 3.141592653589793,
        lo: 1.2246467991473532e-16,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact sum of two f64 (captures the sub-ulp part of a + b).
    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Dd {
        two_sum(a, b)
    }

    /// Exact product of two f64.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        two_prod(a, b)
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        quick_two_sum(s.hi, lo)
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        let s = two_sum(self.hi, x);
        quick_two_sum(s.hi, s.lo + self.lo)
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let p = two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        quick_two_sum(p.hi, lo)
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let p = two_prod(self.hi, x);
        quick_two_sum(p.hi, p.lo + self.lo * x)
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r2 = r.sub(other.mul_f64(q2));
        let q3 = r2.hi / other.hi;
        quick_two_sum(q1, q2).add_f64(q3)
    }

    /// Square root, one Newton refinement of the f64 seed.
    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        let s = self.hi.sqrt();
        let e = self.sub(two_prod(s, s));
        let corr = e.hi / (2.0 * s);
        quick_two_sum(s, corr)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Reduce into (-π, π]. Exact for |hi| below ~1e15; the quotient must
    /// stay an exact integer in f64.
    pub fn rem_2pi(self) -> Dd {
        let n = (self.to_f64() / Dd::TWO_PI.hi).round();
        if n == 0.0 {
            return self;
        }
        let m = Dd::TWO_PI.mul_f64(n);
        let mut r = self.sub(m);
        while r.hi > Dd::PI.hi {
            r = r.sub(Dd::TWO_PI);
        }
        while r.hi < -Dd::PI.hi {
            r = r.add(Dd::TWO_PI);
        }
        r
    }

    /// exp(i·self) with the argument reduced in double-double precision.
    pub fn cis(self) -> Complex64 {
        let r = self.rem_2pi();
        let (s, c) = r.hi.sin_cos();
        // first-order correction for the low word
        Complex64::new(c - r.lo * s, s + r.lo * c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_free_sum_and_product() {
        let a = Dd::from_f64(1.0).add_f64(1e-20);
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        let p = Dd::prod(1.0 + 2f64.powi(-30), 1.0 + 2f64.powi(-30));
        // (1+u)^2 = 1 + 2u + u^2, u^2 = 2^-60 is captured by the low word
        assert_eq!(p.lo, 2f64.powi(-60));
    }

    #[test]
    fn rem_2pi_recovers_constructed_residue() {
        // x = k·2π + r built in dd; reduction must return r to ~1e-28
        for (k, r) in [(1.0e11f64, 0.7f64), (3.0e12, -1.2), (9.9e13, 2.9)] {
            let x = Dd::TWO_PI.mul_f64(k).add_f64(r);
            let red = x.rem_2pi();
            assert!(
                (red.to_f64() - r).abs() < 1e-15 && (red.hi - r).abs() < 1e-10,
                "k={k} r={r} got {red:?}"
            );
            let err = red.add_f64(-r).to_f64().abs();
            assert!(err < 2e-17, "residue error {err:.3e}");
        }
    }

    // Reference values computed with 50-digit decimal arithmetic.
    #[test]
    fn frozen_references() {
        // (1e12 + 0.25) mod 2π, mapped into (-π, π]
        let x = Dd::from_f64(1.0e12).add_f64(0.25);
        let want = -0.40762475913678647; // 50-digit check: 1e12+0.25 - round(.)·2π
        assert!(
            (x.rem_2pi().to_f64() - want).abs() < 1e-13,
            "got {:.16e}",
            x.rem_2pi().to_f64()
        );
        // sqrt(2) in dd
        let s = Dd::from_f64(2.0).sqrt();
        assert!((s.hi - std::f64::consts::SQRT_2).abs() == 0.0);
        assert!((s.lo - (-9.667293313452913e-17)).abs() < 1e-30);
        // division 1/3
        let t = Dd::from_f64(1.0).div(Dd::from_f64(3.0));
        let back = t.mul_f64(3.0);
        assert!((back.to_f64() - 1.0).abs() < 1e-31);
    }

    #[test]
    fn cis_magnitude_and_angle() {
        let x = Dd::TWO_PI.mul_f64(7.0e10).add_f64(1.0);
        let z = x.cis();
        assert!((z.norm() - 1.0).abs() < 1e-14);
        assert!((z.re - 1f64.cos()).abs() < 1e-15);
        assert!((z.im - 1f64.sin()).abs() < 1e-15);
    }
}
