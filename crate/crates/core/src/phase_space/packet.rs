use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::quantum_baker::QuantumState;
use crate::{Error, Result, C64};

/// Real 2×2 matrix acting on column vectors `(x, ξ)`.
pub type Sp2 = [[f64; 2]; 2];

pub const IDENTITY: Sp2 = [[1.0, 0.0], [0.0, 1.0]];
/// Quarter rotation `(x, ξ) ↦ (ξ, −x)`, quantized by the `h`-Fourier transform.
pub const ROTATION: Sp2 = [[0.0, 1.0], [-1.0, 0.0]];

const DET_TOL: f64 = 1e-12;

pub fn compose(a: Sp2, b: Sp2) -> Sp2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn det(a: Sp2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn check_symplectic(a: Sp2) -> Result<()> {
    let d = det(a);
    if (d - 1.0).abs() > DET_TOL || a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NotSymplectic { det: d });
    }
    Ok(())
}

/// Normalized Hermite functions without the Gaussian, `H_n(y)/√(2ⁿn!)`,
/// for `n = 0..len`.
pub(crate) fn hermite(y: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len > 0 {
        out.push(1.0);
    }
    if len > 1 {
        out.push(2f64.sqrt() * y);
    }
    for n in 1..len.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * y * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// `T(center) · 𝓜(frame) · Σ cₙ φ_{0,n}` times a unit phase, where `φ_{0,n}`
/// are the normalized excited states of the harmonic oscillator at scale `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct WavePacket {
    h: f64,
    center: [f64; 2],
    frame: Sp2,
    hermite_coeffs: Vec<C64>,
    phase: C64,
}

impl WavePacket {
    pub fn new(h: f64, center: [f64; 2], frame: Sp2, hermite_coeffs: Vec<C64>, phase: C64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("h = {h} must be positive")));
        }
        check_symplectic(frame)?;
        if hermite_coeffs.is_empty() {
            return Err(Error::InvalidArgument("no Hermite coefficients".into()));
        }
        if (phase.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("phase {phase} is not unimodular")));
        }
        Ok(WavePacket { h, center, frame, hermite_coeffs, phase })
    }

    /// Ground-state coherent state `φ_ρ`.
    pub fn coherent(h: f64, center: [f64; 2]) -> Result<Self> {
        Self::new(h, center, IDENTITY, vec![C64::new(1.0, 0.0)], C64::new(1.0, 0.0))
    }

    pub fn excited(h: f64, center: [f64; 2], coeffs: Vec<C64>) -> Result<Self> {
        Self::new(h, center, IDENTITY, coeffs, C64::new(1.0, 0.0))
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn frame(&self) -> Sp2 {
        self.frame
    }

    pub fn hermite_coeffs(&self) -> &[C64] {
        &self.hermite_coeffs
    }

    pub fn phase(&self) -> C64 {
        self.phase
    }

    /// `γ = (c + id)/(a + ib)` for the frame `[[a, b], [c, d]]`.
    pub fn squeeze(&self) -> C64 {
        let [[a, b], [c, d]] = self.frame;
        C64::new(c, d) / C64::new(a, b)
    }

    /// `T(ρ)` applied; the centers add and the phase picks up the Weyl
    /// cocycle `e^{−i(ρ∧c)/2h}` with `ρ∧c = x_ρ ξ_c − ξ_ρ x_c`.
    pub fn translate(&self, rho: [f64; 2]) -> WavePacket {
        let c = self.center;
        let wedge = rho[0] * c[1] - rho[1] * c[0];
        let mut out = self.clone();
        out.center = [c[0] + rho[0], c[1] + rho[1]];
        out.phase = self.phase * C64::cis(-wedge / (2.0 * self.h));
        out
    }

    /// `𝓜(κ)` applied: exact Egorov covariance moves the center to `κc`
    /// and composes the frame; the global phase is left as is.
    pub fn metaplectic(&self, kappa: Sp2) -> Result<WavePacket> {
        check_symplectic(kappa)?;
        let c = self.center;
        let mut out = self.clone();
        out.center = [kappa[0][0] * c[0] + kappa[0][1] * c[1], kappa[1][0] * c[0] + kappa[1][1] * c[1]];
        out.frame = compose(kappa, self.frame);
        Ok(out)
    }

    /// Value at `x` on the real line.
    pub fn eval(&self, x: f64) -> C64 {
        let [[a, b], _] = self.frame;
        let s = a.hypot(b);
        let rot = b.atan2(a);
        let gamma = self.squeeze();
        let u = x - self.center[0];
        let y = u / (self.h.sqrt() * s);
        let herm = hermite(y, self.hermite_coeffs.len());
        let poly: C64 = self
            .hermite_coeffs
            .iter()
            .zip(&herm)
            .enumerate()
            .map(|(n, (c, hn))| c * C64::cis(-(n as f64) * rot) * *hn)
            .sum();
        let norm = (s * s * PI * self.h).powf(-0.25);
        let gauss = (C64::new(0.0, 1.0) * gamma * (u * u / (2.0 * self.h))).exp();
        let [x0, xi0] = self.center;
        let shift = C64::cis((x * xi0 - 0.5 * x0 * xi0) / self.h);
        self.phase * shift * poly * gauss * norm
    }

    /// Half-width beyond which every term is below `1e-16` of the peak.
    fn reach(&self) -> f64 {
        let [[a, b], _] = self.frame;
        let s = a.hypot(b);
        let order = self.hermite_coeffs.len() as f64;
        s * self.h.sqrt() * (9.0 + (2.0 * order + 1.0).sqrt())
    }

    /// Restriction to the torus space of dimension `n`: samples at
    /// `x_j = (j + θ)/n`, periodized with `ψ(x + 1) = e^{2πiθ}ψ(x)` and scaled
    /// by `n^{-1/2}`. Requires `h = 1/(2πn)`.
    pub fn to_torus(&self, n: usize, theta: f64) -> Result<QuantumState> {
        let want = 1.0 / (TAU * n as f64);
        if ((self.h - want) / want).abs() > 1e-12 {
            return Err(Error::DimensionMismatch { expected: n, got: (1.0 / (TAU * self.h)).round() as usize });
        }
        let reach = self.reach();
        let x0 = self.center[0];
        let scale = 1.0 / (n as f64).sqrt();
        let amps = (0..n)
            .map(|j| {
                let x = (j as f64 + theta) / n as f64;
                let lo = (x0 - reach - x).floor() as i64;
                let hi = (x0 + reach - x).ceil() as i64;
                (lo..=hi)
                    .map(|shift| C64::cis(-TAU * theta * shift as f64) * self.eval(x + shift as f64))
                    .sum::<C64>()
                    * scale
            })
            .collect();
        QuantumState::new(amps)
    }
}

/// Where to evaluate a packet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GridTarget {
    Line { x_min: f64, x_max: f64, points: usize },
    Torus { n: usize, theta: f64 },
}

/// Samples of the packet; line points include both ends.
pub fn to_grid(wp: &WavePacket, target: GridTarget) -> Result<Vec<C64>> {
    match target {
        GridTarget::Line { x_min, x_max, points } => {
            if points < 2 || !(x_max > x_min) {
                return Err(Error::InvalidArgument("line grid needs two points and x_max > x_min".into()));
            }
            let dx = (x_max - x_min) / (points - 1) as f64;
            Ok((0..points).map(|i| wp.eval(x_min + dx * i as f64)).collect())
        }
        GridTarget::Torus { n, theta } => Ok(wp.to_torus(n, theta)?.into_amps()),
    }
}

/// `min_φ ‖u − e^{iφ}v‖ / ‖u‖`.
pub fn phase_fitted_distance(u: &[C64], v: &[C64]) -> f64 {
    let inner: C64 = u.iter().zip(v).map(|(a, b)| b.conj() * a).sum();
    let rot = if inner.norm() > 0.0 { inner / inner.norm() } else { C64::new(1.0, 0.0) };
    let err: f64 = u.iter().zip(v).map(|(a, b)| (a - rot * b).norm_sqr()).sum();
    let nu: f64 = u.iter().map(|a| a.norm_sqr()).sum();
    (err / nu).sqrt()
}
