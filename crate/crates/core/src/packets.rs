//! Minimum-uncertainty Gaussian packets riding classical trajectories.
//!
//! A packet is labeled by (m, σ, q, q̇, φ). In position space
//!
//! ```text
//! φ(x) = (2πσ²)^(-3/4) exp(-(x-q)²/(4σ²) - i m q̇·x/ħ + iφ)
//! ```
//!
//! and its momentum-space form is the dual Gaussian centered on the
//! wavenumber m·q̇/ħ with width 1/(2σ). The packets saturate
//! σ_X·σ_P = ħ/2 per axis. With the phase schedule below they satisfy a
//! free Schrödinger identity in the trajectory's Newtonian time exactly,
//! up to the residual potential term ε(x−q) that vanishes at the peak.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::kepler::{dot, norm, sub, ConicTrajectory, JacobiFrame, Vec3};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MinimumPacket {
    pub mass: f64,
    pub sigma: f64,
    pub q: Vec3,
    pub q_dot: Vec3,
    pub phi: f64,
}

impl MinimumPacket {
    pub fn new(mass: f64, sigma: f64, q: Vec3, q_dot: Vec3, phi: f64) -> Result<Self> {
        if mass <= 0.0 || sigma <= 0.0 {
            return Err(Error::domain("packet mass and sigma must be positive"));
        }
        Ok(MinimumPacket { mass, sigma, q, q_dot, phi })
    }

    /// Wavenumber of the momentum-space peak, m·q̇/ħ (1/m).
    pub fn momentum_center(&self, k: &PhysicalConstants) -> Vec3 {
        [
            self.mass * self.q_dot[0] / k.hbar,
            self.mass * self.q_dot[1] / k.hbar,
            self.mass * self.q_dot[2] / k.hbar,
        ]
    }

    /// Momentum-space Gaussian width 1/(2σ) (1/m).
    pub fn sigma_p_wavenumber(&self) -> f64 {
        1.0 / (2.0 * self.sigma)
    }

    /// Position-space value at x.
    pub fn eval(&self, x: Vec3, k: &PhysicalConstants) -> Complex64 {
        let s2 = self.sigma * self.sigma;
        let u = sub(x, self.q);
        let amp = (2.0 * std::f64::consts::PI * s2).powf(-0.75) * (-dot(u, u) / (4.0 * s2)).exp();
        let kc = self.momentum_center(k);
        // phase -m q̇·x/ħ + φ accumulated in double-double
        let mut ph = Dd::from_f64(self.phi);
        for i in 0..3 {
            ph = ph.sub(Dd::prod(kc[i], x[i]));
        }
        amp * ph.cis()
    }

    /// Momentum-space value at wavenumber p (1/m).
    pub fn eval_momentum(&self, p: Vec3, k: &PhysicalConstants) -> Complex64 {
        let s2 = self.sigma * self.sigma;
        let kc = self.momentum_center(k);
        let d = sub(p, kc);
        let amp = (2.0 * s2 / std::f64::consts::PI).powf(0.75) * (-s2 * dot(d, d)).exp();
        let mut ph = Dd::from_f64(self.phi);
        for i in 0..3 {
            ph = ph.add(Dd::prod(d[i], self.q[i]));
        }
        amp * ph.cis()
    }
}

/// Linear-in-τ phase schedule
/// ħφ̇ = rest·c² + (Ê − Ê_o) + d·ħ²/(4mσ²).
///
/// The σ term enters once per Laplacian axis; `dims` is the spatial
/// dimension the packet lives in (3 for the full identity, 2 for planar
/// evolution grids, 1 per axis). `rest_mass` is the mass whose rest
/// energy the phase carries: for a lone packet that is the packet mass,
/// while a two-particle assembly puts the pair's total rest energy on
/// the center-of-mass factor and none on the relative factor.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub mass: f64,
    pub sigma: f64,
    /// Ê − Ê_o of the motion this packet describes (J).
    pub energy_offset: f64,
    pub rest_mass: f64,
    pub dims: u32,
}

impl PhaseSchedule {
    pub fn new(mass: f64, sigma: f64, energy_offset: f64, dims: u32) -> Result<Self> {
        if mass <= 0.0 || sigma <= 0.0 {
            return Err(Error::domain("schedule mass and sigma must be positive"));
        }
        Ok(PhaseSchedule { mass, sigma, energy_offset, rest_mass: mass, dims })
    }

    pub fn with_rest_mass(mut self, rest_mass: f64) -> Self {
        self.rest_mass = rest_mass;
        self
    }

    /// dφ/dτ in rad/s, constant in τ.
    pub fn rate(&self, k: &PhysicalConstants) -> f64 {
        self.rate_dd(k).to_f64()
    }

    /// dφ/dτ with the rest-energy term removed (the gauge used when
    /// comparing against the kinetic-only propagator).
    pub fn reduced_rate(&self, k: &PhysicalConstants) -> f64 {
        PhaseSchedule { rest_mass: 0.0, ..*self }.rate(k)
    }

    pub(crate) fn rate_dd(&self, k: &PhysicalConstants) -> Dd {
        let sigma_term = self.dims as f64 * k.hbar * k.hbar
            / (4.0 * self.mass * self.sigma * self.sigma);
        Dd::prod(self.rest_mass, k.c * k.c)
            .add_f64(self.energy_offset)
            .add_f64(sigma_term)
            .div(Dd::from_f64(k.hbar))
    }

    pub(crate) fn reduced_rate_dd(&self, k: &PhysicalConstants) -> Dd {
        PhaseSchedule { rest_mass: 0.0, ..*self }.rate_dd(k)
    }
}

/// Residual potential term of the Schrödinger identity:
/// ε(x−q) = F·(x−q) − (ħ²/2m)(x−q)²/(4σ⁴), with ε(0) = 0.
pub fn epsilon_field(
    f: Vec3,
    x: Vec3,
    q: Vec3,
    mass: f64,
    sigma: f64,
    k: &PhysicalConstants,
) -> f64 {
    let u = sub(x, q);
    let s4 = sigma.powi(4);
    dot(f, u) - k.hbar * k.hbar / (2.0 * mass) * dot(u, u) / (4.0 * s4)
}

/// Grid used by [`packet_moments`]: per-axis window reaching
/// `half_width_sigmas`·σ on each side of the packet center.
#[derive(Clone, Copy, Debug)]
pub struct MomentGrid {
    pub points: usize,
    pub half_width_sigmas: f64,
}

impl Default for MomentGrid {
    fn default() -> Self {
        MomentGrid { points: 256, half_width_sigmas: 12.0 }
    }
}

#[derive(Clone, Debug)]
pub struct Moments {
    pub norm: f64,
    pub mean_x: Vec3,
    /// ⟨P⟩ in SI momentum units (kg·m/s).
    pub mean_p: Vec3,
    /// Per-axis position spread.
    pub sigma_x: f64,
    /// Per-axis momentum spread (kg·m/s).
    pub sigma_p: f64,
    pub warnings: Vec<String>,
}

/// Grid moments of a packet. The packet factorizes per axis, so each
/// axis is handled by a 1D grid and an explicit discrete transform with
/// the e^{+ipx} kernel; this doubles as an independent oracle for the
/// FFT module's sign convention.
pub fn packet_moments(pk: &MinimumPacket, grid: &MomentGrid, k: &PhysicalConstants) -> Moments {
    let n = grid.points;
    let w = grid.half_width_sigmas * pk.sigma;
    let dx = 2.0 * w / n as f64;
    let kc = pk.momentum_center(k);
    let mut warnings = Vec::new();
    if grid.half_width_sigmas < 6.0 {
        warnings.push(format!(
            "window of {:.1} sigma truncates the Gaussian tails",
            grid.half_width_sigmas
        ));
    }
    if pk.sigma < 4.0 * dx {
        warnings.push("fewer than 4 grid points per sigma".to_string());
    }

    let mut norm = 1.0;
    let mut mean_x = [0.0; 3];
    let mut mean_p = [0.0; 3];
    let mut var_x = [0.0; 3];
    let mut var_p = [0.0; 3];
    let s2 = pk.sigma * pk.sigma;
    let amp1 = (2.0 * std::f64::consts::PI * s2).powf(-0.25);

    for axis in 0..3 {
        // position-space samples of the 1D factor
        let mut psi: Vec<Complex64> = Vec::with_capacity(n);
        let mut xs: Vec<f64> = Vec::with_capacity(n);
        for j in 0..n {
            let x = pk.q[axis] + (j as f64 - n as f64 / 2.0) * dx;
            let a = amp1 * (-(x - pk.q[axis]).powi(2) / (4.0 * s2)).exp();
            let ph = Dd::prod(-kc[axis], x)
                .add_f64(if axis == 0 { pk.phi } else { 0.0 });
            psi.push(a * ph.cis());
            xs.push(x);
        }
        let nrm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx;
        let mx: f64 = psi.iter().zip(&xs).map(|(c, x)| c.norm_sqr() * x).sum::<f64>() * dx / nrm;
        let vx: f64 =
            psi.iter().zip(&xs).map(|(c, x)| c.norm_sqr() * (x - mx).powi(2)).sum::<f64>() * dx
                / nrm;

        // dual grid centered on the nearest representable peak wavenumber
        let dp = 2.0 * std::f64::consts::PI / (n as f64 * dx);
        let pc = (kc[axis] / dp).round() * dp;
        let mut psit: Vec<Complex64> = Vec::with_capacity(n);
        let mut ps: Vec<f64> = Vec::with_capacity(n);
        let scale = dx / (2.0 * std::f64::consts::PI).sqrt();
        for kk in 0..n {
            let p = pc + (kk as f64 - n as f64 / 2.0) * dp;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += psi[j] * Dd::prod(p, xs[j]).cis();
            }
            psit.push(acc * scale);
            ps.push(p);
        }
        let nrm_p: f64 = psit.iter().map(|c| c.norm_sqr()).sum::<f64>() * dp;
        let mp: f64 =
            psit.iter().zip(&ps).map(|(c, p)| c.norm_sqr() * p).sum::<f64>() * dp / nrm_p;
        let vp: f64 =
            psit.iter().zip(&ps).map(|(c, p)| c.norm_sqr() * (p - mp).powi(2)).sum::<f64>() * dp
                / nrm_p;

        norm *= nrm;
        mean_x[axis] = mx;
        mean_p[axis] = k.hbar * mp;
        var_x[axis] = vx;
        var_p[axis] = k.hbar * k.hbar * vp;
    }
    let achieved = (norm - 1.0).abs();
    if achieved > 1e-8 {
        warnings.push(format!("norm deviates from 1 by {achieved:.3e}"));
    }
    Moments {
        norm,
        mean_x,
        mean_p,
        sigma_x: (var_x.iter().sum::<f64>() / 3.0).sqrt(),
        sigma_p: (var_p.iter().sum::<f64>() / 3.0).sqrt(),
        warnings,
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    /// max |(−iħ∂_τ − mc² + (ħ²/2m)∇² + ε)φ| / (mc²|φ|) over the core.
    pub identity_residual: f64,
    /// max |ε|/mc² over ‖x−q‖ ≤ λσ.
    pub core_epsilon_ratio: f64,
    pub lambda_used: f64,
}

impl ResidualReport {
    /// JSON export with the scenario parameters attached.
    pub fn to_json(&self, sigma: f64, mass: f64, tau: f64) -> serde_json::Value {
        serde_json::json!({
            "identity_residual": self.identity_residual,
            "core_epsilon_ratio": self.core_epsilon_ratio,
            "lambda": self.lambda_used,
            "sigma": sigma,
            "m": mass,
            "tau": tau,
        })
    }
}

/// Evaluate the Schrödinger identity residual for a packet riding a
/// trajectory. ∂_τ and ∇² enter through their closed forms, so the
/// residual isolates construction errors from discretization; it must
/// vanish to roundoff when the packet, schedule and trajectory are
/// consistent. The force is evaluated at the trajectory point q(τ),
/// constant across the packet, matching the use of Newton's equation in
/// the derivation.
pub fn lemma_residual(
    pk: &MinimumPacket,
    ps: &PhaseSchedule,
    traj: &ConicTrajectory,
    frame: &JacobiFrame,
    tau: f64,
    lambda: f64,
    samples_per_axis: usize,
    k: &PhysicalConstants,
) -> Result<ResidualReport> {
    let st = traj.state_at(frame, tau)?;
    let tol = 1e-9;
    if norm(sub(st.q, pk.q)) > tol * (1.0 + norm(st.q)) {
        return Err(Error::precondition("packet q does not match the trajectory"));
    }
    if norm(sub(st.q_dot, pk.q_dot)) > tol * (1.0 + norm(st.q_dot)) {
        return Err(Error::precondition("packet q_dot does not match the trajectory"));
    }
    if ps.dims != 3 {
        return Err(Error::precondition("the identity holds for the 3-axis Laplacian"));
    }

    let force = crate::kepler::gravity_force(frame, st.q, k)?;
    let qddot = crate::kepler::scale(force, 1.0 / pk.mass);
    let mc2 = k.rest_energy(pk.mass);
    let hbar = k.hbar;
    let s2 = pk.sigma * pk.sigma;
    let phi_dot = ps.rate(k);

    let n = samples_per_axis.max(2);
    let mut identity_residual: f64 = 0.0;
    let mut core_eps: f64 = 0.0;
    let step = 2.0 * lambda * pk.sigma / (n as f64 - 1.0);
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let u = [
                    -lambda * pk.sigma + ix as f64 * step,
                    -lambda * pk.sigma + iy as f64 * step,
                    -lambda * pk.sigma + iz as f64 * step,
                ];
                if dot(u, u) > (lambda * pk.sigma).powi(2) {
                    continue;
                }
                let x = crate::kepler::add(pk.q, u);
                // -iħ ∂_τφ/φ = ħφ̇ - m q̈·x - iħ (u·q̇)/(2σ²)
                let t_dtau = Complex64::new(
                    hbar * phi_dot - pk.mass * dot(qddot, x),
                    -hbar * dot(u, pk.q_dot) / (2.0 * s2),
                );
                // (ħ²/2m) ∇²φ/φ with v = -(u/(2σ²) + i m q̇/ħ)
                let mut v2 = Complex64::new(0.0, 0.0);
                for i in 0..3 {
                    let vi = Complex64::new(u[i] / (2.0 * s2), pk.mass * pk.q_dot[i] / hbar);
                    v2 += vi * vi;
                }
                let t_lap = (hbar * hbar / (2.0 * pk.mass))
                    * (v2 - Complex64::new(3.0 / (2.0 * s2), 0.0));
                let eps = epsilon_field(force, x, pk.q, pk.mass, pk.sigma, k);
                let resid = (t_dtau - mc2 + t_lap + eps).norm() / mc2;
                identity_residual = identity_residual.max(resid);
                core_eps = core_eps.max(eps.abs() / mc2);
            }
        }
    }
    Ok(ResidualReport { identity_residual, core_epsilon_ratio: core_eps, lambda_used: lambda })
}

/// Secondary finite-difference check of the τ-derivative used in
/// [`lemma_residual`]: compares (φ(τ+h) − φ(τ−h))/2h against the closed
/// form at sample points, returning the worst relative deviation.
/// Meaningful in unit systems where the absolute phases stay well below
/// the f64 resolution limit.
pub fn finite_difference_tau_check(
    pk_mass: f64,
    sigma: f64,
    ps: &PhaseSchedule,
    traj: &ConicTrajectory,
    frame: &JacobiFrame,
    tau: f64,
    h: f64,
    k: &PhysicalConstants,
) -> Result<f64> {
    let rate = ps.rate(k);
    let mk = |t: f64| -> Result<MinimumPacket> {
        let st = traj.state_at(frame, t)?;
        MinimumPacket::new(pk_mass, sigma, st.q, st.q_dot, rate * (t - tau))
    };
    let pk0 = mk(tau)?;
    let pkp = mk(tau + h)?;
    let pkm = mk(tau - h)?;
    let st = traj.state_at(frame, tau)?;
    let force = crate::kepler::gravity_force(frame, st.q, k)?;
    let qddot = crate::kepler::scale(force, 1.0 / pk_mass);
    let s2 = sigma * sigma;

    let mut worst: f64 = 0.0;
    for offs in [[0.3, -0.2, 0.1], [1.0, 0.5, -0.8], [-1.5, 0.2, 0.9]] {
        let x = crate::kepler::add(st.q, crate::kepler::scale(offs, sigma));
        let fd = (pkp.eval(x, k) - pkm.eval(x, k)) / (2.0 * h);
        let u = sub(x, st.q);
        let dtau_ratio = Complex64::new(
            dot(u, st.q_dot) / (2.0 * s2),
            -pk_mass * dot(qddot, x) / k.hbar + rate,
        );
        let analytic = dtau_ratio * pk0.eval(x, k);
        let scale = analytic.norm().max(1e-300);
        worst = worst.max((fd - analytic).norm() / scale);
    }
    Ok(worst)
}
