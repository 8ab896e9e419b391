//! Numerical laboratory for classical-limit experiments on scalar-field states.
//!
//! The crate combines four pieces that the experiments share:
//!
//! - [`kepler`] — closed-form two-body dynamics for the attractive 1/r²
//!   force: Jacobi coordinates, conic trajectories and their Newtonian
//!   time map, conserved quantities.
//! - [`packets`] — minimum-uncertainty Gaussian packets riding classical
//!   trajectories, their phase schedule, and the residual of the free
//!   Schrödinger identity they satisfy.
//! - [`spectral`] — grid wavefunctions, unitary Fourier transforms, the
//!   positive-shell multiplier map, two-particle state assembly, the
//!   multiplicative free propagator and trajectory-tracking experiments.
//! - [`wightman`] — desk-scale evaluation of two- and four-point kernels
//!   with pluggable model ingredients and reproducible Monte Carlo.
//!
//! All public computations are deterministic: Monte Carlo streams are
//! counter-based, and grid reductions use fixed-shape chunking so results
//! do not depend on the number of worker threads (see [`exec`]).

pub mod constants;
pub mod dd;
pub mod error;
pub mod exec;
pub mod fft;
pub mod grid;
pub mod kepler;
pub mod limits;
pub mod packets;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod wightman;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use grid::{GridSpec, Space, WaveFunction};
pub use kepler::{ConicTrajectory, JacobiFrame, Regime, TrajectoryState};
pub use limits::{LimitCheckConfig, LimitReport};
pub use packets::{MinimumPacket, PhaseSchedule, ResidualReport};
pub use spectral::{PropagationMode, TrackingResult, TwoParticleState};
pub use wightman::{AmplitudeEstimate, WightmanModel};
