//! Two-particle state assembly from relative and center-of-mass packets.
//!
//! The joint momentum label is
//!
//! ```text
//! f̃₂(p₁, p₂) = 2ω₁·2ω₂ · φ̃_rel((m₂p₁ − m₁p₂)/m_T) · φ̃_cm(p₁ + p₂)
//! ```
//!
//! with the relative packet carrying the reduced mass and the
//! center-of-mass packet the total mass. On the grid the product
//! factorizes over paired axes (one per spatial dimension), so assembly
//! fills the joint buffer from small per-pair tables.
//!
//! All arguments are phrased as offsets from the grid's window anchors:
//! the relative-argument anchor is k₀ = w₁c₁ − w₂c₂ and the total anchor
//! P₀ = c₁ + c₂, built from the per-particle window centers c. Absolute
//! wavenumbers never appear in the factor evaluation, so window centers
//! twenty orders of magnitude above the grid extent cost no precision.
//! Phases are accumulated in double-double.

use num_complex::Complex64;

use super::ParticleAxes;
use crate::constants::PhysicalConstants;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Space, WaveFunction};
use crate::kepler::JacobiFrame;
use crate::packets::MinimumPacket;

/// Momentum-space packet data for one Jacobi factor on a D-dimensional
/// sub-space, expressed relative to the grid anchor of its argument.
///
/// The represented factor is
/// `exp(-σ²(off - k_shift)²) · exp(i·off·(base + shift)) · exp(i·phase)`
/// per dimension, where `off` is the argument's offset from the anchor.
/// `phase` must contain every constant term, including the
/// −Σ k_shift·position part of the packet's own label phase; the
/// constructors below handle that.
#[derive(Clone, Debug)]
pub(crate) struct FactorParams {
    pub sigma: f64,
    /// Packet center minus grid anchor, per dimension.
    pub k_shift: Vec<f64>,
    /// Position label split into a base and a small displacement so the
    /// displacement survives bases that round it away.
    pub position_base: Vec<f64>,
    pub position_shift: Vec<f64>,
    /// Total constant phase.
    pub phase: Dd,
}

impl FactorParams {
    fn norm_factor(&self) -> f64 {
        let d = self.k_shift.len() as f64;
        (2.0 * self.sigma * self.sigma / std::f64::consts::PI).powf(d / 4.0)
    }

    /// One-dimensional slice at argument offset `off` along `dim`.
    fn eval_1d(&self, dim: usize, off: f64) -> Complex64 {
        let s2 = self.sigma * self.sigma;
        let d = off - self.k_shift[dim];
        let amp = (-s2 * d * d).exp();
        let mut ph = Dd::prod(off, self.position_base[dim])
            .add(Dd::prod(off, self.position_shift[dim]));
        if dim == 0 {
            ph = ph.add(self.phase);
        }
        amp * ph.cis()
    }

    /// Constant phase −Σ k_shift·(base + shift) that completes
    /// (off − k_shift)·position; kept separate so callers with a more
    /// precise k_shift can supply their own version.
    pub(crate) fn center_phase(
        k_shift: &[f64],
        base: &[f64],
        shift: &[f64],
    ) -> Dd {
        let mut ph = Dd::ZERO;
        for i in 0..k_shift.len() {
            ph = ph.sub(Dd::prod(k_shift[i], base[i]));
            ph = ph.sub(Dd::prod(k_shift[i], shift[i]));
        }
        ph
    }
}

/// Joint momentum-space state of two particles together with the frame
/// that defines its Jacobi split.
#[derive(Clone, Debug)]
pub struct TwoParticleState {
    pub wf: WaveFunction,
    pub frame: JacobiFrame,
    pub dims_per_particle: usize,
}

impl TwoParticleState {
    pub fn groups(&self) -> [ParticleAxes; 2] {
        let d = self.dims_per_particle;
        [
            ParticleAxes { mass: self.frame.m1, axes: 0..d },
            ParticleAxes { mass: self.frame.m2, axes: d..2 * d },
        ]
    }

    /// Grid anchors of the relative and total arguments, per dimension.
    pub fn argument_anchors(&self) -> (Vec<f64>, Vec<f64>) {
        argument_anchors(&self.wf.grid, &self.frame)
    }
}

/// (k₀, P₀): anchors of the relative and total momentum arguments
/// implied by the grid's per-particle window centers.
pub fn argument_anchors(grid: &GridSpec, frame: &JacobiFrame) -> (Vec<f64>, Vec<f64>) {
    let d = grid.dims() / 2;
    let axes = grid.axes();
    let w1 = frame.m2 / frame.m_t;
    let w2 = frame.m1 / frame.m_t;
    let k0 = (0..d).map(|i| w1 * axes[i].p_center - w2 * axes[i + d].p_center).collect();
    let p0 = (0..d).map(|i| axes[i].p_center + axes[i + d].p_center).collect();
    (k0, p0)
}

pub(crate) fn assemble_from_factors(
    grid: &GridSpec,
    frame: &JacobiFrame,
    rel: &FactorParams,
    cm: &FactorParams,
    with_shell_weight: bool,
    k: &PhysicalConstants,
) -> Result<TwoParticleState> {
    let dims = grid.dims();
    if dims != 2 && dims != 4 {
        return Err(Error::config("two-particle grids use 2 or 4 axes"));
    }
    let d = dims / 2;
    if rel.k_shift.len() != d || cm.k_shift.len() != d {
        return Err(Error::config("factor dimensionality does not match the grid"));
    }
    let axes = grid.axes();
    for i in 0..d {
        if (axes[i].points != axes[i + d].points) || (axes[i].dx - axes[i + d].dx).abs() > 0.0 {
            return Err(Error::config("paired axes must share points and spacing"));
        }
    }
    // resolution check: both packets must be resolvable on the dual grid
    for i in 0..d {
        let dp = axes[i].dp();
        let rel_width = 1.0 / (2.0 * rel.sigma);
        let cm_width = 1.0 / (2.0 * cm.sigma);
        if rel_width < dp || cm_width < dp {
            return Err(Error::config(format!(
                "axis {i}: momentum grid too coarse to resolve the packets \
                 (dp {dp:.3e}, widths {rel_width:.3e}/{cm_width:.3e})"
            )));
        }
    }

    let mut wf = WaveFunction::zeros(grid.clone(), Space::Momentum);
    let w1 = frame.m2 / frame.m_t;
    let w2 = frame.m1 / frame.m_t;

    // per-pair tables over the offsets of (p1_i, p2_i)
    let mut tables: Vec<Vec<Complex64>> = Vec::new();
    for i in 0..d {
        let n1 = axes[i].points;
        let n2 = axes[i + d].points;
        let mut table = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for a in 0..n1 {
            let o1 = axes[i].p_offset(a);
            for b in 0..n2 {
                let o2 = axes[i + d].p_offset(b);
                let krel_off = w1 * o1 - w2 * o2;
                let ptot_off = o1 + o2;
                table[a * n2 + b] = rel.eval_1d(i, krel_off) * cm.eval_1d(i, ptot_off);
            }
        }
        tables.push(table);
    }

    let norm = rel.norm_factor() * cm.norm_factor();
    fill_from_pair_tables(&mut wf, &tables, d, norm);

    if with_shell_weight {
        super::b_map(
            &mut wf,
            &[
                ParticleAxes { mass: frame.m1, axes: 0..d },
                ParticleAxes { mass: frame.m2, axes: d..dims },
            ],
            k,
        )?;
    }
    Ok(TwoParticleState { wf, frame: *frame, dims_per_particle: d })
}

/// Multiply out ∏_i table_i(p1_i, p2_i) over the joint grid.
fn fill_from_pair_tables(wf: &mut WaveFunction, tables: &[Vec<Complex64>], d: usize, norm: f64) {
    let n: Vec<usize> = wf.grid.axes().iter().map(|a| a.points).collect();
    match d {
        1 => {
            let t = &tables[0];
            let n2 = n[1];
            for a in 0..n[0] {
                for b in 0..n2 {
                    wf.values[a * n2 + b] = t[a * n2 + b] * norm;
                }
            }
        }
        2 => {
            let tx = &tables[0];
            let ty = &tables[1];
            let (n1, n2, n3) = (n[1], n[2], n[3]);
            let chunk = n2 * n3;
            crate::exec::for_each_slab_mut(&mut wf.values, n1 * chunk, |a, slab| {
                for b in 0..n1 {
                    for c in 0..n2 {
                        let base = b * chunk + c * n3;
                        let txa = tx[a * n2 + c] * norm;
                        for e in 0..n3 {
                            slab[base + e] = txa * ty[b * n3 + e];
                        }
                    }
                }
            });
        }
        _ => unreachable!("two-particle grids have 1 or 2 dims per particle"),
    }
}

/// Assemble the shell-weighted two-particle label from minimum packets:
/// the relative packet must carry the reduced mass and the
/// center-of-mass packet the total mass. Packet data beyond the grid's
/// dimensionality (z components on planar grids) must be zero.
pub fn assemble_two_particle(
    pk_rel: &MinimumPacket,
    pk_cm: &MinimumPacket,
    grid: &GridSpec,
    frame: &JacobiFrame,
    k: &PhysicalConstants,
) -> Result<TwoParticleState> {
    let (rel, cm) = factors_from_packets(pk_rel, pk_cm, grid, frame, k)?;
    assemble_from_factors(grid, frame, &rel, &cm, true, k)
}

/// The bare Jacobi product without the shell weights, for factorization
/// checks.
pub fn assemble_product_only(
    pk_rel: &MinimumPacket,
    pk_cm: &MinimumPacket,
    grid: &GridSpec,
    frame: &JacobiFrame,
    k: &PhysicalConstants,
) -> Result<TwoParticleState> {
    let (rel, cm) = factors_from_packets(pk_rel, pk_cm, grid, frame, k)?;
    assemble_from_factors(grid, frame, &rel, &cm, false, k)
}

fn factors_from_packets(
    pk_rel: &MinimumPacket,
    pk_cm: &MinimumPacket,
    grid: &GridSpec,
    frame: &JacobiFrame,
    k: &PhysicalConstants,
) -> Result<(FactorParams, FactorParams)> {
    let d = grid.dims() / 2;
    let tol = 1e-12;
    if (pk_rel.mass - frame.mu).abs() > tol * frame.mu {
        return Err(Error::precondition("relative packet must use the reduced mass"));
    }
    if (pk_cm.mass - frame.m_t).abs() > tol * frame.m_t {
        return Err(Error::precondition("center-of-mass packet must use the total mass"));
    }
    for i in d..3 {
        if pk_rel.q[i] != 0.0 || pk_rel.q_dot[i] != 0.0 || pk_cm.q[i] != 0.0 || pk_cm.q_dot[i] != 0.0
        {
            return Err(Error::precondition(format!(
                "packet component {i} must vanish on a {d}-dimension-per-particle grid"
            )));
        }
    }
    let (k0, p0) = argument_anchors(grid, frame);
    let kc_rel = pk_rel.momentum_center(k);
    let kc_cm = pk_cm.momentum_center(k);
    let shift_rel: Vec<f64> = (0..d).map(|i| kc_rel[i] - k0[i]).collect();
    let shift_cm: Vec<f64> = (0..d).map(|i| kc_cm[i] - p0[i]).collect();
    let zero = vec![0.0; d];
    let rel_pos: Vec<f64> = pk_rel.q[..d].to_vec();
    let cm_pos: Vec<f64> = pk_cm.q[..d].to_vec();
    Ok((
        FactorParams {
            sigma: pk_rel.sigma,
            phase: Dd::from_f64(pk_rel.phi)
                .add(FactorParams::center_phase(&shift_rel, &rel_pos, &zero)),
            k_shift: shift_rel,
            position_base: rel_pos,
            position_shift: zero.clone(),
        },
        FactorParams {
            sigma: pk_cm.sigma,
            phase: Dd::from_f64(pk_cm.phi)
                .add(FactorParams::center_phase(&shift_cm, &cm_pos, &zero)),
            k_shift: shift_cm,
            position_base: cm_pos,
            position_shift: zero,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisSpec;

    fn k() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn planar_grid(n: usize, dx: f64, centers: [f64; 4]) -> GridSpec {
        GridSpec::new(
            (0..4)
                .map(|i| AxisSpec { points: n, dx, x_center: 0.0, p_center: centers[i] })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn even_relative_packet_gives_exchange_symmetry() {
        let kk = k();
        let frame = JacobiFrame::new(1e-20, 1e-20).unwrap();
        let sigma = 1e-9;
        let pk_rel = MinimumPacket::new(frame.mu, sigma, [0.0; 3], [0.0; 3], 0.0).unwrap();
        let pk_cm = MinimumPacket::new(frame.m_t, sigma, [0.0; 3], [0.0; 3], 0.0).unwrap();
        let n = 16;
        let grid = planar_grid(n, sigma / 3.0, [0.0; 4]);
        let st = assemble_two_particle(&pk_rel, &pk_cm, &grid, &frame, &kk).unwrap();
        // swap (p1x,p1y) <-> (p2x,p2y): index permutation (a,b,c,e) -> (c,e,a,b)
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        let i = ((a * n + b) * n + c) * n + e;
                        let j = ((c * n + e) * n + a) * n + b;
                        let (x, y) = (st.wf.values[i], st.wf.values[j]);
                        assert!((x - y).norm() <= 1e-12 * (x.norm() + 1e-300), "{x} {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn product_form_matches_direct_evaluation() {
        let kk = k();
        let frame = JacobiFrame::new(2e-20, 6e-20).unwrap();
        let sigma = 2e-9;
        let pk_rel =
            MinimumPacket::new(frame.mu, sigma, [1e-9, -2e-9, 0.0], [3e-4, 1e-4, 0.0], 0.3)
                .unwrap();
        let pk_cm =
            MinimumPacket::new(frame.m_t, 1.5 * sigma, [2e-9, 1e-9, 0.0], [-1e-4, 2e-4, 0.0], 0.1)
                .unwrap();
        let n = 16;
        let kc1 = pk_rel.momentum_center(&kk);
        let kc2 = pk_cm.momentum_center(&kk);
        let grid = planar_grid(
            n,
            sigma / 3.0,
            // particle windows: rough centering suffices for this check
            [kc1[0] + kc2[0] / 2.0, kc1[1] + kc2[1] / 2.0, -kc1[0] + kc2[0] / 2.0,
             -kc1[1] + kc2[1] / 2.0],
        );
        let st = assemble_product_only(&pk_rel, &pk_cm, &grid, &frame, &kk).unwrap();
        let axes = grid.axes();
        let w1 = frame.m2 / frame.m_t;
        let w2 = frame.m1 / frame.m_t;
        for (flat, idx) in [(0usize, [0usize; 4]), (123, [0, 0, 7, 11]), (45056, [0, 11, 0, 0])] {
            let mut id = [0usize; 4];
            st.wf.grid.decode(flat, &mut id);
            assert_eq!(id, idx);
            let p1 = [axes[0].p(id[0]), axes[1].p(id[1])];
            let p2 = [axes[2].p(id[2]), axes[3].p(id[3])];
            let krel = [w1 * p1[0] - w2 * p2[0], w1 * p1[1] - w2 * p2[1]];
            let ptot = [p1[0] + p2[0], p1[1] + p2[1]];
            // 2D normalization: divide the 3D closed forms by their
            // transverse 1D factors
            let rel3 = pk_rel.eval_momentum([krel[0], krel[1], kc1[2]], &kk)
                / (2.0 * sigma * sigma / std::f64::consts::PI).powf(0.25);
            let cm3 = pk_cm.eval_momentum([ptot[0], ptot[1], kc2[2]], &kk)
                / (2.0 * (1.5 * sigma).powi(2) / std::f64::consts::PI).powf(0.25);
            let expect = rel3 * cm3;
            let got = st.wf.values[flat];
            assert!(
                (got - expect).norm() <= 1e-9 * expect.norm().max(1e-300),
                "flat {flat}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn marginal_peaks_sit_at_particle_wavenumbers() {
        let kk = k();
        let m = 1e-20;
        let frame = JacobiFrame::new(m, m).unwrap();
        let sigma = 1e-9;
        // relative motion along x, cm drifting along y
        let q_dot_rel = [2e-4, 0.0, 0.0];
        let q_dot_cm = [0.0, 1e-4, 0.0];
        let pk_rel = MinimumPacket::new(frame.mu, sigma, [0.0; 3], q_dot_rel, 0.0).unwrap();
        let pk_cm = MinimumPacket::new(frame.m_t, sigma, [0.0; 3], q_dot_cm, 0.0).unwrap();
        // particle velocities from the inverse Jacobi map
        let (v1, v2) = crate::kepler::jacobi_inverse(q_dot_rel, q_dot_cm, &frame);
        let c1 = [m * v1[0] / kk.hbar, m * v1[1] / kk.hbar];
        let c2 = [m * v2[0] / kk.hbar, m * v2[1] / kk.hbar];
        let n = 32;
        let dx = sigma / 3.0;
        let dp = 2.0 * std::f64::consts::PI / (n as f64 * dx);
        // offset the windows so the peaks sit off-center by a few cells
        let grid = planar_grid(
            n,
            dx,
            [c1[0] - 2.0 * dp, c1[1] + 3.0 * dp, c2[0] + 2.0 * dp, c2[1] - 3.0 * dp],
        );
        let st = assemble_two_particle(&pk_rel, &pk_cm, &grid, &frame, &kk).unwrap();
        let dens: Vec<f64> = st.wf.values.iter().map(|v| v.norm_sqr()).collect();
        let axes = st.wf.grid.axes();
        let mut best = (0usize, 0usize, 0usize, 0usize, -1.0f64);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        let v = dens[((a * n + b) * n + c) * n + e];
                        if v > best.4 {
                            best = (a, b, c, e, v);
                        }
                    }
                }
            }
        }
        let got1 = [axes[0].p(best.0), axes[1].p(best.1)];
        let got2 = [axes[2].p(best.2), axes[3].p(best.3)];
        for i in 0..2 {
            assert!((got1[i] - c1[i]).abs() <= dp, "p1[{i}] {} vs {}", got1[i], c1[i]);
            assert!((got2[i] - c2[i]).abs() <= dp, "p2[{i}] {} vs {}", got2[i], c2[i]);
        }
    }

    #[test]
    fn mass_mismatch_rejected() {
        let kk = k();
        let frame = JacobiFrame::new(1e-20, 1e-20).unwrap();
        let pk_bad = MinimumPacket::new(frame.m_t, 1e-9, [0.0; 3], [0.0; 3], 0.0).unwrap();
        let pk_cm = MinimumPacket::new(frame.m_t, 1e-9, [0.0; 3], [0.0; 3], 0.0).unwrap();
        let grid = planar_grid(16, 1e-9 / 3.0, [0.0; 4]);
        assert!(assemble_two_particle(&pk_bad, &pk_cm, &grid, &frame, &kk).is_err());
    }

    #[test]
    fn coarse_grid_rejected() {
        let kk = k();
        let frame = JacobiFrame::new(1e-20, 1e-20).unwrap();
        let sigma = 1e-9;
        let pk_rel = MinimumPacket::new(frame.mu, sigma, [0.0; 3], [0.0; 3], 0.0).unwrap();
        let pk_cm = MinimumPacket::new(frame.m_t, sigma, [0.0; 3], [0.0; 3], 0.0).unwrap();
        // dx so large that dp exceeds the packet momentum widths
        let grid = planar_grid(16, 50.0 * sigma, [0.0; 4]);
        assert!(assemble_two_particle(&pk_rel, &pk_cm, &grid, &frame, &kk).is_err());
    }
}
