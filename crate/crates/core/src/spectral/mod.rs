//! Spectral evolution of momentum-space states.
//!
//! States live on 2- or 4-axis momentum grids split into per-particle
//! axis groups. The free Hamiltonian acts multiplicatively: the group
//! phases are ω(p) per particle, with ω² = (mc/ħ)² + p². Because the
//! rest-mass part of the phase is an overall constant shared by the
//! compared states, the propagator can apply it explicitly or omit it
//! (the rotating-frame gauge); trajectory tracking uses the latter, as
//! laboratory-scale rest phases exceed any floating-point resolution.
//!
//! Group phase tables are small (one entry per point of the group's own
//! sub-grid), so the pointwise application over the joint grid is a few
//! table lookups per value.

mod tracking;
mod twoparticle;

pub use tracking::{
    kinetic_evolution_factor, write_tracking_csv, RelativeMotion, TrackingResult,
    TrackingScenario,
};
pub use twoparticle::{
    argument_anchors, assemble_product_only, assemble_two_particle, TwoParticleState,
};

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{Space, WaveFunction};

/// One particle's share of the grid axes (contiguous, in axis order).
#[derive(Clone, Debug)]
pub struct ParticleAxes {
    pub mass: f64,
    pub axes: std::ops::Range<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationMode {
    /// Exact dispersion ω − mc/ħ = p²/(ω + mc/ħ).
    Uqft,
    /// Quadratic approximation ħp²/(2mc).
    NonRelativistic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestPhase {
    /// Apply exp(−i(mc/ħ)·ct) per particle as well.
    Full,
    /// Kinetic phases only (rotating-frame gauge).
    Omitted,
}

fn validate_groups(wf: &WaveFunction, groups: &[ParticleAxes]) -> Result<()> {
    if wf.space != Space::Momentum {
        return Err(Error::precondition("operation requires a momentum-space state"));
    }
    let mut covered = vec![false; wf.grid.dims()];
    for g in groups {
        if g.mass <= 0.0 {
            return Err(Error::domain("particle mass must be positive"));
        }
        for a in g.axes.clone() {
            if a >= covered.len() || covered[a] {
                return Err(Error::config("axis groups must be disjoint and in range"));
            }
            covered[a] = true;
        }
    }
    if covered.iter().any(|c| !c) {
        return Err(Error::config("axis groups must cover every axis"));
    }
    Ok(())
}

/// Geometry of one axis group inside the row-major layout: the group's
/// flat sub-index is (flat / stride) % size when the group's axes are
/// contiguous.
pub(crate) struct GroupLayout {
    size: usize,
    stride: usize,
}

pub(crate) fn group_layout(grid: &crate::grid::GridSpec, g: &ParticleAxes) -> GroupLayout {
    let strides = grid.strides();
    let axes = grid.axes();
    let size: usize = g.axes.clone().map(|a| axes[a].points).product();
    let stride = strides[g.axes.end - 1];
    GroupLayout { size, stride }
}

/// Iterate the group's sub-grid, calling `f` with (sub-index, p²) where
/// p² is accumulated in double-double. Each wavenumber is represented as
/// the exact sum of the window center and the grid offset, so sub-ulp
/// structure survives window centers that dwarf the grid extent.
fn for_group_points<F: FnMut(usize, Dd)>(grid: &crate::grid::GridSpec, g: &ParticleAxes, mut f: F) {
    let axes = grid.axes();
    let dims: Vec<usize> = g.axes.clone().map(|a| axes[a].points).collect();
    let total: usize = dims.iter().product();
    for sub in 0..total {
        let mut rem = sub;
        let mut p2 = Dd::ZERO;
        for (i, a) in g.axes.clone().enumerate() {
            let later: usize = dims[i + 1..].iter().product();
            let idx = rem / later;
            rem %= later;
            let p = Dd::from_sum(axes[a].p_center, axes[a].p_offset(idx));
            p2 = p2.add(p.mul(p));
        }
        f(sub, p2);
    }
}

/// Kinetic dispersion phase rate ω − mc/ħ = p²/(ω + mc/ħ), in dd.
pub(crate) fn omega_kinetic_dd(p2: Dd, mass: f64, mode: PropagationMode, k: &PhysicalConstants) -> Dd {
    let mc_over_hbar = mass * k.c / k.hbar;
    match mode {
        PropagationMode::Uqft => {
            let m2 = Dd::prod(mc_over_hbar, mc_over_hbar);
            let omega = m2.add(p2).sqrt();
            p2.div(omega.add_f64(mc_over_hbar))
        }
        PropagationMode::NonRelativistic => p2.mul_f64(k.hbar / (2.0 * mass * k.c)),
    }
}

/// Multiply a momentum-space state by the positive-shell factor
/// ∏ (E_k + ω_k) with E_k = ω_k, i.e. 2ω per particle.
pub fn b_map(wf: &mut WaveFunction, groups: &[ParticleAxes], k: &PhysicalConstants) -> Result<()> {
    validate_groups(wf, groups)?;
    let tables: Vec<(GroupLayout, Vec<Complex64>)> = groups
        .iter()
        .map(|g| {
            let layout = group_layout(&wf.grid, g);
            let mut table = vec![Complex64::new(0.0, 0.0); layout.size];
            let mc_over_hbar = g.mass * k.c / k.hbar;
            for_group_points(&wf.grid, g, |sub, p2| {
                let w = Dd::prod(mc_over_hbar, mc_over_hbar).add(p2).sqrt().to_f64();
                table[sub] = Complex64::new(2.0 * w, 0.0);
            });
            (layout, table)
        })
        .collect();
    apply_tables(&mut wf.values, &tables);
    Ok(())
}

/// Shell multiplier value 2ω(p) for a single particle, used by tests
/// and assembly.
pub fn shell_multiplier(p: &[f64], mass: f64, k: &PhysicalConstants) -> f64 {
    let mc_over_hbar = mass * k.c / k.hbar;
    let p2 = p.iter().fold(Dd::ZERO, |acc, &x| acc.add(Dd::prod(x, x)));
    2.0 * Dd::prod(mc_over_hbar, mc_over_hbar).add(p2).sqrt().to_f64()
}

/// Evolve a momentum-space state by `tau` seconds: multiply by
/// exp(−i ω_k t) per particle with t = c·τ in length units.
pub fn propagate(
    wf: &mut WaveFunction,
    groups: &[ParticleAxes],
    tau: f64,
    mode: PropagationMode,
    rest: RestPhase,
    k: &PhysicalConstants,
) -> Result<()> {
    validate_groups(wf, groups)?;
    let t = k.time_to_length(tau);
    let tables: Vec<(GroupLayout, Vec<Complex64>)> = groups
        .iter()
        .map(|g| {
            let layout = group_layout(&wf.grid, g);
            let mut table = vec![Complex64::new(0.0, 0.0); layout.size];
            let rest_phase = match rest {
                RestPhase::Full => Dd::prod(g.mass * k.c / k.hbar, t),
                RestPhase::Omitted => Dd::ZERO,
            };
            for_group_points(&wf.grid, g, |sub, p2| {
                let theta = omega_kinetic_dd(p2, g.mass, mode, k).mul_f64(t).add(rest_phase);
                table[sub] = theta.neg().cis();
            });
            (layout, table)
        })
        .collect();
    apply_tables(&mut wf.values, &tables);
    Ok(())
}

/// Pointwise multiplication of the joint state by per-group tables.
pub(crate) fn apply_tables(values: &mut [Complex64], tables: &[(GroupLayout, Vec<Complex64>)]) {
    let slab = exec::REDUCE_CHUNK.min(values.len());
    exec::for_each_slab_mut(values, slab, |i, chunk| {
        let base = i * slab;
        for (j, v) in chunk.iter_mut().enumerate() {
            let flat = base + j;
            let mut m = Complex64::new(1.0, 0.0);
            for (layout, table) in tables {
                m *= table[(flat / layout.stride) % layout.size];
            }
            *v *= m;
        }
    });
}

/// Location of the modulus peak, refined per axis by quadratic
/// interpolation of log|ψ| (exact for Gaussians). Errors on fields with
/// no isolated maximum.
pub fn peak_track(wf: &WaveFunction) -> Result<Vec<f64>> {
    if wf.space != Space::Position {
        return Err(Error::precondition("peak_track expects a position-space state"));
    }
    let off = peak_of_density(
        &wf.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>(),
        &wf.grid,
    )?;
    Ok(off
        .iter()
        .enumerate()
        .map(|(d, o)| wf.grid.axes()[d].x_center + o)
        .collect())
}

/// Peak of a nonnegative density sampled on a grid, reported as offsets
/// from the window centers (exact small numbers even when the absolute
/// coordinates cannot resolve a grid cell).
pub(crate) fn peak_of_density(density: &[f64], grid: &crate::grid::GridSpec) -> Result<Vec<f64>> {
    let (imax, &vmax) = density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    if vmax <= 0.0 {
        return Err(Error::DegeneratePeak("field is identically zero".into()));
    }
    // a second, non-adjacent cell at the same height means there is no
    // single peak to report
    let mut idx_max = [0usize; 4];
    grid.decode(imax, &mut idx_max);
    for (i, &v) in density.iter().enumerate() {
        if i != imax && v >= vmax * (1.0 - 1e-9) {
            let mut idx = [0usize; 4];
            grid.decode(i, &mut idx);
            let adjacent = (0..grid.dims())
                .all(|d| idx[d].abs_diff(idx_max[d]) <= 1);
            if !adjacent {
                return Err(Error::DegeneratePeak(format!(
                    "two equal maxima at flat indices {imax} and {i}"
                )));
            }
        }
    }
    let strides = grid.strides();
    let mut loc = Vec::with_capacity(grid.dims());
    for d in 0..grid.dims() {
        let ax = grid.axes()[d];
        let j = idx_max[d];
        let mut x = ax.x_offset(j);
        if j > 0 && j + 1 < ax.points {
            let lm = density[imax - strides[d]].max(1e-300).ln();
            let l0 = density[imax].ln();
            let lp = density[imax + strides[d]].max(1e-300).ln();
            let denom = lm - 2.0 * l0 + lp;
            if denom < 0.0 {
                let off = 0.5 * (lm - lp) / denom;
                x += off.clamp(-0.5, 0.5) * ax.dx;
            }
        }
        loc.push(x);
    }
    Ok(loc)
}

/// |ψ|² marginal over one particle's axes: integrates the density over
/// all other axes, returning it on the group's own sub-grid.
pub fn particle_marginal(
    wf: &WaveFunction,
    group: &ParticleAxes,
) -> Result<(Vec<f64>, crate::grid::GridSpec)> {
    if wf.space != Space::Position {
        return Err(Error::precondition("marginals are taken in position space"));
    }
    let layout = group_layout(&wf.grid, group);
    let other_measure: f64 = (0..wf.grid.dims())
        .filter(|d| !group.axes.contains(d))
        .map(|d| wf.grid.axes()[d].dx)
        .product();
    let mut dens = vec![0.0f64; layout.size];
    for (flat, v) in wf.values.iter().enumerate() {
        dens[(flat / layout.stride) % layout.size] += v.norm_sqr();
    }
    for d in dens.iter_mut() {
        *d *= other_measure;
    }
    let sub_axes: Vec<_> = group.axes.clone().map(|a| wf.grid.axes()[a]).collect();
    let sub_grid = if sub_axes.len() == 1 || sub_axes.len() == 2 || sub_axes.len() == 4 {
        crate::grid::GridSpec::new(sub_axes)?
    } else {
        return Err(Error::config("marginal group must have 1, 2 or 4 axes"));
    };
    Ok((dens, sub_grid))
}
