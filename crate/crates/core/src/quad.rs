//! Adaptive Gauss–Kronrod quadrature.
//!
//! 15-point Kronrod rule with the embedded 7-point Gauss rule for the
//! error estimate, refined by interval bisection on the worst interval
//! first. Tolerances combine absolute and relative targets.

use crate::error::{Error, Result};

// QUADPACK 15-point Kronrod abscissae on [0, 1] side (symmetric).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Kronrod panel: returns (kronrod, |kronrod - gauss|).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        res_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    (res_k * h, ((res_k - res_g) * h).abs())
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Integrate `f` over [a, b] to tolerance `abs_tol + rel_tol·|I|`.
/// Returns the value and the achieved error estimate.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let max_panels = 2000;
    let (v, e) = qk15(&f, a, b);
    let mut panels = vec![Panel { a, b, value: v, err: e }];
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let tol = abs_tol + rel_tol * total.abs();
        if err <= tol {
            return Ok((total, err));
        }
        if panels.len() >= max_panels {
            return Err(Error::Numerical {
                context: format!("adaptive quadrature stalled on [{a:.6e}, {b:.6e}]"),
                achieved: err,
                wanted: tol,
            });
        }
        // split the worst panel
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("nonempty");
        let p = panels.swap_remove(i);
        let m = 0.5 * (p.a + p.b);
        if m == p.a || m == p.b {
            return Err(Error::Numerical {
                context: "interval too small to bisect".into(),
                achieved: err,
                wanted: tol,
            });
        }
        let (v1, e1) = qk15(&f, p.a, m);
        let (v2, e2) = qk15(&f, m, p.b);
        panels.push(Panel { a: p.a, b: m, value: v1, err: e1 });
        panels.push(Panel { a: m, b: p.b, value: v2, err: e2 });
    }
}

/// Nested 3D integration over a box, adaptive in every direction.
pub fn integrate_3d<F>(f: F, lo: [f64; 3], hi: [f64; 3], rel_tol: f64) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    // inner tolerances are tightened one order below the outer request
    let inner = rel_tol * 0.1;
    let (v, _) = integrate(
        |x| {
            let (vy, _) = integrate(
                |y| {
                    let (vz, _) = integrate(|z| f(x, y, z), lo[2], hi[2], 0.0, inner)
                        .unwrap_or((f64::NAN, f64::NAN));
                    vz
                },
                lo[1],
                hi[1],
                0.0,
                inner,
            )
            .unwrap_or((f64::NAN, f64::NAN));
            vy
        },
        lo[0],
        hi[0],
        0.0,
        rel_tol,
    )?;
    if v.is_nan() {
        return Err(Error::Numerical {
            context: "inner quadrature failed".into(),
            achieved: f64::NAN,
            wanted: rel_tol,
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let (v, _) = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-14, 1e-14).unwrap();
        // antiderivative x⁴/4 - x² + x over [-1, 3]
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let (v, _) = integrate(|x| (-x * x).exp(), -8.0, 8.0, 1e-14, 1e-13).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-13, "{v}");
    }

    #[test]
    fn oscillatory() {
        let (v, _) = integrate(|x| (40.0 * x).sin(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        let exact = (1.0 - (40.0f64).cos()) / 40.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn box_3d_separable_gaussian() {
        let v = integrate_3d(
            |x, y, z| (-(x * x + y * y + z * z)).exp(),
            [-7.0; 3],
            [7.0; 3],
            1e-9,
        )
        .unwrap();
        assert!((v - PI.powf(1.5)).abs() / PI.powf(1.5) < 1e-8, "{v}");
    }
}
