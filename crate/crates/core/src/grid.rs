//! Uniform Cartesian grids and complex fields sampled on them.
//!
//! A grid carries 1, 2 or 4 axes. Each axis has a power-of-two point
//! count, a spacing, a position-window center and a momentum-window
//! center: momentum windows need not be centered at zero, which lets a
//! narrow packet with an enormous carrier wavenumber stay resolvable.
//! The dual spacing is fixed by the axis extent, Δp = 2π/(N·Δx).
//!
//! Values are stored row-major in axis order and interpreted as samples
//! of the continuum function, so norms carry the grid measure ∏Δ.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"UQFTWF01";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Position,
    Momentum,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AxisSpec {
    pub points: usize,
    pub dx: f64,
    pub x_center: f64,
    pub p_center: f64,
}

impl AxisSpec {
    pub fn extent(&self) -> f64 {
        self.points as f64 * self.dx
    }

    /// Dual grid spacing 2π/extent.
    pub fn dp(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.extent()
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_center + self.x_offset(j)
    }

    #[inline]
    pub fn p(&self, k: usize) -> f64 {
        self.p_center + self.p_offset(k)
    }

    /// Sample position relative to the window center. Offsets are small
    /// and keep full relative precision even when the window center is
    /// many orders of magnitude larger; laboratory-scale physics must be
    /// phrased in offsets wherever the center would round them away.
    #[inline]
    pub fn x_offset(&self, j: usize) -> f64 {
        (j as f64 - self.points as f64 / 2.0) * self.dx
    }

    /// Sample wavenumber relative to the window center.
    #[inline]
    pub fn p_offset(&self, k: usize) -> f64 {
        (k as f64 - self.points as f64 / 2.0) * self.dp()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<AxisSpec>,
}

impl GridSpec {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self> {
        if !matches!(axes.len(), 1 | 2 | 4) {
            return Err(Error::config(format!(
                "grids carry 1, 2 or 4 axes, got {}",
                axes.len()
            )));
        }
        for (i, ax) in axes.iter().enumerate() {
            if ax.points < 16 || !ax.points.is_power_of_two() {
                return Err(Error::config(format!(
                    "axis {i}: points must be a power of two >= 16, got {}",
                    ax.points
                )));
            }
            if !(ax.dx > 0.0) || !ax.dx.is_finite() {
                return Err(Error::config(format!("axis {i}: spacing must be positive")));
            }
        }
        Ok(GridSpec { axes })
    }

    /// All axes identical, centered windows.
    pub fn uniform(dims: usize, points: usize, extent: f64) -> Result<Self> {
        let dx = extent / points as f64;
        Self::new(vec![AxisSpec { points, dx, x_center: 0.0, p_center: 0.0 }; dims])
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element of the position grid.
    pub fn dx_measure(&self) -> f64 {
        self.axes.iter().map(|a| a.dx).product()
    }

    /// Volume element of the dual grid.
    pub fn dp_measure(&self) -> f64 {
        self.axes.iter().map(|a| a.dp()).product()
    }

    /// Decode a flat row-major index into per-axis indices (up to 4).
    #[inline]
    pub fn decode(&self, mut flat: usize, out: &mut [usize; 4]) {
        for d in (0..self.axes.len()).rev() {
            let n = self.axes[d].points;
            out[d] = flat % n;
            flat /= n;
        }
    }

    /// Strides of the row-major layout.
    pub fn strides(&self) -> [usize; 4] {
        let mut s = [0usize; 4];
        let mut acc = 1;
        for d in (0..self.axes.len()).rev() {
            s[d] = acc;
            acc *= self.axes[d].points;
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct WaveFunction {
    pub grid: GridSpec,
    pub space: Space,
    pub values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn zeros(grid: GridSpec, space: Space) -> Self {
        let n = grid.len();
        WaveFunction { grid, space, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn measure(&self) -> f64 {
        match self.space {
            Space::Position => self.grid.dx_measure(),
            Space::Momentum => self.grid.dp_measure(),
        }
    }

    /// L2 norm including the grid measure; deterministic reduction.
    pub fn norm(&self) -> f64 {
        let s = exec::reduce_chunks(&self.values, |_, c| c.iter().map(|v| v.norm_sqr()).sum());
        (s * self.measure()).sqrt()
    }

    /// ‖self − other‖ with the same measure convention.
    pub fn l2_distance(&self, other: &WaveFunction) -> Result<f64> {
        if self.values.len() != other.values.len() || self.space != other.space {
            return Err(Error::precondition("wavefunctions live on different grids"));
        }
        let other_vals = &other.values;
        let s = exec::reduce_chunks(&self.values, |i, c| {
            let base = i * exec::REDUCE_CHUNK;
            c.iter()
                .enumerate()
                .map(|(j, v)| (*v - other_vals[base + j]).norm_sqr())
                .sum()
        });
        Ok((s * self.measure()).sqrt())
    }

    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.values.len() != other.values.len() || self.space != other.space {
            return Err(Error::precondition("wavefunctions live on different grids"));
        }
        let other_vals = &other.values;
        let s = exec::reduce_chunks_c(&self.values, |i, c| {
            let base = i * exec::REDUCE_CHUNK;
            c.iter()
                .enumerate()
                .map(|(j, v)| v.conj() * other_vals[base + j])
                .sum()
        });
        Ok(s * self.measure())
    }

    /// Write the snapshot format: a 64-byte header (magic, axis count,
    /// space tag, per-axis points, per-axis extents) followed by
    /// little-endian interleaved re/im f64 pairs.
    pub fn save_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = [0u8; 64];
        header[..8].copy_from_slice(SNAPSHOT_MAGIC);
        header[8] = self.grid.dims() as u8;
        header[9] = match self.space {
            Space::Position => 0,
            Space::Momentum => 1,
        };
        for (i, ax) in self.grid.axes().iter().enumerate() {
            header[16 + 4 * i..16 + 4 * (i + 1)].copy_from_slice(&(ax.points as u32).to_le_bytes());
            header[32 + 8 * i..32 + 8 * (i + 1)].copy_from_slice(&ax.extent().to_le_bytes());
        }
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Read a snapshot. Window centers are not part of the format, so
    /// the reconstructed grid is centered at zero in both spaces.
    pub fn load_snapshot<R: Read>(mut r: R) -> Result<WaveFunction> {
        let mut header = [0u8; 64];
        r.read_exact(&mut header)?;
        if &header[..8] != SNAPSHOT_MAGIC {
            return Err(Error::config("bad snapshot magic"));
        }
        let dims = header[8] as usize;
        let space = match header[9] {
            0 => Space::Position,
            1 => Space::Momentum,
            t => return Err(Error::config(format!("bad space tag {t}"))),
        };
        let mut axes = Vec::with_capacity(dims);
        for i in 0..dims {
            let points =
                u32::from_le_bytes(header[16 + 4 * i..16 + 4 * (i + 1)].try_into().unwrap())
                    as usize;
            let extent = f64::from_le_bytes(header[32 + 8 * i..32 + 8 * (i + 1)].try_into().unwrap());
            if points == 0 || extent <= 0.0 {
                return Err(Error::config("bad axis in snapshot header"));
            }
            axes.push(AxisSpec {
                points,
                dx: extent / points as f64,
                x_center: 0.0,
                p_center: 0.0,
            });
        }
        let grid = GridSpec::new(axes)?;
        let n = grid.len();
        let mut buf = vec![0u8; n * 16];
        r.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(WaveFunction { grid, space, values })
    }
}
