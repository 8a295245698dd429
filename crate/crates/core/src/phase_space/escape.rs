use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use super::torus::{CoherentFrame, PhaseField};
use crate::baker_classical::{cylinder_distance, BakerSpec, TorusPoint};
use crate::{Error, Result, C64};

/// Escape-function parameters. The regularization `ε = h^{2δ}` and the cover
/// depth follow from `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeParams {
    pub delta: f64,
    pub m_const: f64,
    pub t: f64,
}

impl EscapeParams {
    pub fn new(delta: f64, m_const: f64, t: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0, 1/2)")));
        }
        if !(m_const > 0.0) || !(t >= 0.0) || !t.is_finite() || !m_const.is_finite() {
            return Err(Error::InvalidArgument(format!("need M > 0 and t >= 0, got M = {m_const}, t = {t}")));
        }
        Ok(EscapeParams { delta, m_const, t })
    }

    pub fn epsilon(&self, h: f64) -> f64 {
        h.powf(2.0 * self.delta)
    }

    /// Smallest `k` with `a^-k <= ε`.
    pub fn depth(&self, spec: &BakerSpec, h: f64) -> usize {
        let ratio = 2.0 * self.delta * (1.0 / h).ln() / (spec.base() as f64).ln();
        (ratio - 1e-12).ceil().max(0.0) as usize
    }
}

/// Distances `(d₋, d₊)` from `x` to the cover of the forward-trapped set and
/// from `ξ` to the cover of the backward-trapped set.
pub fn trapped_distances(spec: &BakerSpec, p: TorusPoint, depth: usize) -> (f64, f64) {
    (cylinder_distance(spec, p.x, depth), cylinder_distance(spec, p.xi, depth))
}

/// `g = log(Mε + d₋² + ε) − log(Mε + d₊² + ε)`; grows along the map away
/// from the trapped set.
pub fn escape_g(spec: &BakerSpec, p: TorusPoint, params: &EscapeParams, h: f64) -> f64 {
    let eps = params.epsilon(h);
    let (dm, dp) = trapped_distances(spec, p, params.depth(spec, h));
    let floor = params.m_const * eps + eps;
    (floor + dm * dm).ln() - (floor + dp * dp).ln()
}

/// `g` on the `N×N` frame grid.
pub fn escape_field(spec: &BakerSpec, params: &EscapeParams, n: usize) -> PhaseField {
    let h = 1.0 / (std::f64::consts::TAU * n as f64);
    let eps = params.epsilon(h);
    let depth = params.depth(spec, h);
    let floor = params.m_const * eps + eps;
    let dist: Vec<f64> = (0..n).map(|i| cylinder_distance(spec, i as f64 / n as f64, depth)).collect();
    let mut values = vec![0.0; n * n];
    for q in 0..n {
        for p in 0..n {
            values[q * n + p] = (floor + dist[p] * dist[p]).ln() - (floor + dist[q] * dist[q]).ln();
        }
    }
    PhaseField { k: n, values }
}

/// Smallest one-step growth `g(F(ρ)) − g(ρ)` over sampled surviving points
/// at distance at least `c1·√ε` from the depth-`k` cover of the trapped set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub c1: f64,
    pub samples: usize,
    pub min_growth: f64,
}

pub fn escape_growth(
    spec: &BakerSpec,
    params: &EscapeParams,
    h: f64,
    c1: f64,
    samples: usize,
    seed: u64,
) -> Result<GrowthCheck> {
    use crate::baker_classical::forward;
    use crate::rng::{self, RngExt};
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let depth = params.depth(spec, h);
    let cutoff = c1 * params.epsilon(h).sqrt();
    let mut g = rng::stream(seed, 0);
    let mut min_growth = f64::INFINITY;
    let mut accepted = 0;
    let mut tries = 0usize;
    while accepted < samples {
        tries += 1;
        if tries > 1000 * samples {
            return Err(Error::TooFewSurvivors);
        }
        let p = TorusPoint::new(g.random(), g.random());
        let Some(image) = forward(spec, p) else { continue };
        let (dm, dp) = trapped_distances(spec, p, depth);
        if dm.hypot(dp) < cutoff {
            continue;
        }
        accepted += 1;
        min_growth = min_growth.min(escape_g(spec, image, params, h) - escape_g(spec, p, params, h));
    }
    Ok(GrowthCheck { c1, samples, min_growth })
}

/// Smallest `c1` among `candidates` (ascending) whose sampled growth is at
/// least `1/c1`.
pub fn calibrate_growth_constant(
    spec: &BakerSpec,
    params: &EscapeParams,
    h: f64,
    candidates: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Option<GrowthCheck>> {
    for &c1 in candidates {
        let check = escape_growth(spec, params, h, c1, samples, seed)?;
        log::debug!("growth calibration c1={c1}: min {}", check.min_growth);
        if check.min_growth >= 1.0 / c1 {
            return Ok(Some(check));
        }
    }
    Ok(None)
}

/// Anti-Wick quantization `G` of the escape function with its spectral
/// decomposition, giving `e^{sG}` for any real `s`.
pub struct Damping {
    generator: Mat<C64>,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<C64>,
}

pub fn damping_operator(spec: &BakerSpec, params: &EscapeParams, n: usize, theta: f64) -> Result<Damping> {
    let frame = CoherentFrame::new(n, theta)?;
    let generator = frame.anti_wick(&escape_field(spec, params, n))?;
    let eig = generator
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NoConvergence(format!("Hermitian eigensolver: {e:?}")))?;
    let s = eig.S();
    let eigenvalues = (0..n).map(|k| s[k].re).collect();
    Ok(Damping { eigenvectors: eig.U().to_owned(), eigenvalues, generator })
}

impl Damping {
    pub fn generator(&self) -> &Mat<C64> {
        &self.generator
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Orthonormal eigenvectors of `G`, in the order of [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &Mat<C64> {
        &self.eigenvectors
    }

    /// `e^{sG}` as a dense matrix.
    pub fn exp(&self, s: f64) -> Mat<C64> {
        let u = &self.eigenvectors;
        let scaled = Mat::<C64>::from_fn(u.nrows(), u.ncols(), |i, k| u[(i, k)] * (s * self.eigenvalues[k]).exp());
        &scaled * u.adjoint()
    }

    /// `v ← e^{sG} v`.
    pub fn apply_exp(&self, s: f64, v: &mut [C64]) {
        let u = &self.eigenvectors;
        let n = self.dim();
        let coeffs: Vec<C64> = (0..n)
            .map(|k| (0..n).map(|i| u[(i, k)].conj() * v[i]).sum::<C64>() * (s * self.eigenvalues[k]).exp())
            .collect();
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = (0..n).map(|k| u[(i, k)] * coeffs[k]).sum();
        }
    }
}
