//! Unitary discrete Fourier transforms between position and momentum
//! windows.
//!
//! Convention (spatial part): position → momentum uses the e^{+ipx}
//! kernel with 1/√(2π) per axis,
//!
//! ```text
//! f̃(p_k) = Δx/√(2π) · Σ_j e^{+i p_k x_j} f(x_j)
//! ```
//!
//! so a sampled packet transform matches the closed-form momentum
//! packet pointwise, and Parseval holds exactly in the measure-weighted
//! norms. Both windows may be offset; the window phases are accumulated
//! in double-double before exponentiation (see [`crate::dd`]).
//!
//! Multi-axis transforms are separable per-axis passes over strided
//! lines; slabs are disjoint, so the parallel path is bit-identical to
//! the sequential one.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::dd::Dd;
use crate::error::Result;
use crate::exec;
use crate::grid::{Space, WaveFunction};

/// Transform a wavefunction to the dual space (tag-aware), in place.
pub fn transform_in_place(wf: &mut WaveFunction) {
    let dims = wf.grid.dims();
    for axis in 0..dims {
        transform_axis(wf, axis);
    }
    wf.space = match wf.space {
        Space::Position => Space::Momentum,
        Space::Momentum => Space::Position,
    };
}

/// Transform into a fresh wavefunction, leaving the input untouched.
pub fn transform(wf: &WaveFunction) -> WaveFunction {
    let mut out = wf.clone();
    transform_in_place(&mut out);
    out
}

/// Round trip for convenience in tests: transform there and back.
pub fn round_trip(wf: &WaveFunction) -> Result<WaveFunction> {
    let mut out = wf.clone();
    transform_in_place(&mut out);
    transform_in_place(&mut out);
    Ok(out)
}

fn transform_axis(wf: &mut WaveFunction, axis: usize) {
    let ax = wf.grid.axes()[axis];
    let n = ax.points;
    let forward = wf.space == Space::Position;

    // per-axis phase tables; the alternating sign folds the half-window
    // index shift into the plain FFT. Window phases are split into
    // center·center and center·offset double-double products: evaluating
    // p_c·x(j) directly would round the offset away at laboratory scale.
    let window_phase = |sign: f64, j: usize| -> Dd {
        Dd::prod(sign * ax.p_center, ax.x_center).add(Dd::prod(sign * ax.p_center, ax.x_offset(j)))
    };
    let (pre, post): (Vec<Complex64>, Vec<Complex64>) = if forward {
        let scale = ax.dx / (2.0 * std::f64::consts::PI).sqrt();
        let pre = (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                window_phase(1.0, j).cis() * sign
            })
            .collect();
        let post = (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { scale } else { -scale };
                Dd::prod(ax.p_offset(k), ax.x_center).cis() * sign
            })
            .collect();
        (pre, post)
    } else {
        let scale = ax.dp() / (2.0 * std::f64::consts::PI).sqrt();
        let pre = (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                Dd::prod(-ax.p_offset(k), ax.x_center).cis() * sign
            })
            .collect();
        let post = (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { scale } else { -scale };
                window_phase(-1.0, j).cis() * sign
            })
            .collect();
        (pre, post)
    };

    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft(
        n,
        if forward { FftDirection::Inverse } else { FftDirection::Forward },
    );

    let strides = wf.grid.strides();
    let inner = strides[axis];
    let slab = n * inner;
    let scratch_len = fft.get_inplace_scratch_len();

    exec::for_each_slab_mut(&mut wf.values, slab, |_, slab_data| {
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        for ii in 0..inner {
            for t in 0..n {
                line[t] = slab_data[ii + t * inner] * pre[t];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for t in 0..n {
                slab_data[ii + t * inner] = line[t] * post[t];
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use crate::grid::{AxisSpec, GridSpec};
    use crate::packets::MinimumPacket;
    use crate::rng::CounterRng;

    fn random_wf(grid: GridSpec) -> WaveFunction {
        let mut wf = WaveFunction::zeros(grid, Space::Position);
        let mut rng = CounterRng::at(99, 0);
        for v in wf.values.iter_mut() {
            *v = Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5);
        }
        wf
    }

    #[test]
    fn round_trip_restores_values() {
        for dims in [1usize, 2] {
            let wf = random_wf(GridSpec::uniform(dims, 32, 2.0).unwrap());
            let back = round_trip(&wf).unwrap();
            for (a, b) in wf.values.iter().zip(&back.values) {
                assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn parseval() {
        let wf = random_wf(GridSpec::uniform(2, 64, 3.0).unwrap());
        let t = transform(&wf);
        assert_eq!(t.space, Space::Momentum);
        assert!((wf.norm() - t.norm()).abs() < 1e-12 * wf.norm());
    }

    #[test]
    fn impulse_has_flat_modulus() {
        let mut wf = WaveFunction::zeros(GridSpec::uniform(1, 64, 1.0).unwrap(), Space::Position);
        wf.values[13] = Complex64::new(1.0, 0.0);
        let t = transform(&wf);
        let m0 = t.values[0].norm();
        assert!(m0 > 0.0);
        for v in &t.values {
            assert!((v.norm() - m0).abs() < 1e-12 * m0);
        }
    }

    #[test]
    fn matches_direct_dft() {
        // oracle: O(N²) sum with the same continuum convention
        let grid = GridSpec::new(vec![AxisSpec {
            points: 32,
            dx: 0.11,
            x_center: 0.37,
            p_center: 5.0,
        }])
        .unwrap();
        let wf = random_wf(grid);
        let t = transform(&wf);
        let ax = wf.grid.axes()[0];
        let scale = ax.dx / (2.0 * std::f64::consts::PI).sqrt();
        for k in 0..ax.points {
            let p = ax.p(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..ax.points {
                acc += wf.values[j] * Complex64::from_polar(1.0, p * ax.x(j));
            }
            acc *= scale;
            assert!((acc - t.values[k]).norm() < 1e-12, "k={k}: {acc} vs {}", t.values[k]);
        }
    }

    #[test]
    fn sampled_packet_matches_momentum_form() {
        let k = PhysicalConstants::default();
        // proton-scale numbers keep every phase well inside f64 range
        let mass = 1.67e-27;
        let sigma = 1e-9;
        let vel = 150.0;
        let pk = MinimumPacket::new(mass, sigma, [2e-9, 0.0, 0.0], [vel, 0.0, 0.0], 0.4).unwrap();
        let kc = pk.momentum_center(&k);

        let n = 256;
        let dx = 16.0 * sigma / n as f64;
        let dp = 2.0 * std::f64::consts::PI / (n as f64 * dx);
        let grid = GridSpec::new(vec![AxisSpec {
            points: n,
            dx,
            x_center: pk.q[0],
            p_center: (kc[0] / dp).round() * dp,
        }])
        .unwrap();

        // 1D slice along x of the 3D packet: drop the two transverse factors
        let transverse = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.5);
        let mut wf = WaveFunction::zeros(grid, Space::Position);
        let ax = wf.grid.axes()[0].clone();
        for j in 0..n {
            let x = [ax.x(j), pk.q[1], pk.q[2]];
            wf.values[j] = pk.eval(x, &k) / transverse;
        }
        let t = transform(&wf);
        let peak = (2.0 * sigma * sigma / std::f64::consts::PI).powf(0.25);
        let mut checked = 0;
        for kk in 0..n {
            let p = [ax.p(kk), kc[1], kc[2]];
            let expect = pk.eval_momentum(p, &k)
                / (2.0 * sigma * sigma / std::f64::consts::PI).powf(0.5);
            if expect.norm() > 1e-3 * peak {
                assert!(
                    (t.values[kk] - expect).norm() < 1e-8 * expect.norm(),
                    "k={kk} got {} want {}",
                    t.values[kk],
                    expect
                );
                checked += 1;
            }
        }
        assert!(checked > 10, "peak region too small: {checked}");
    }

    #[test]
    fn four_axis_round_trip_small() {
        let wf = {
            let mut w =
                WaveFunction::zeros(GridSpec::uniform(4, 16, 1.5).unwrap(), Space::Position);
            let mut rng = CounterRng::at(3, 1);
            for v in w.values.iter_mut() {
                *v = Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5);
            }
            w
        };
        let t = transform(&wf);
        assert!((t.norm() - wf.norm()).abs() < 1e-12 * wf.norm());
        let back = transform(&t);
        for (a, b) in wf.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
