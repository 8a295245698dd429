use std::f64::consts::TAU;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::escape::{damping_operator, EscapeParams};
use super::packet::WavePacket;
use super::torus::CoherentFrame;
use crate::baker_classical::{slope, BakerSpec, TorusPoint};
use crate::quantum_baker::{OpenMapOperator, Variant, DEFAULT_PHASE, DENSE_CAP};
use crate::{Error, Result, C64};

/// Number of propagation steps `n(h) = ⌊ϑ (1 + slack) log(1/h)⌋`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub vartheta: f64,
    pub slack: f64,
}

pub const DEFAULT_SLACK: f64 = 1.0;

impl ExperimentParams {
    /// `ϑ_ε = (1 − 4ε) / (6 λ_max (1 + ε)²)`.
    pub fn from_epsilon(eps: f64, lambda_max: f64, slack: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.25) || !(lambda_max > 0.0) || !(slack >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < ε < 1/4, λ > 0, slack >= 0; got {eps}, {lambda_max}, {slack}"
            )));
        }
        Ok(ExperimentParams { vartheta: (1.0 - 4.0 * eps) / (6.0 * lambda_max * (1.0 + eps).powi(2)), slack })
    }

    pub fn steps(&self, h: f64) -> usize {
        (self.vartheta * (1.0 + self.slack) * (1.0 / h).ln()).floor() as usize
    }
}

/// `w_n = ‖M_tⁿ φ_ρ‖²` for `n = 0..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationSeries {
    #[serde(rename = "N")]
    pub dim: usize,
    pub t: f64,
    pub delta: f64,
    pub rho: TorusPoint,
    pub n: Vec<usize>,
    pub w: Vec<f64>,
}

impl PropagationSeries {
    /// Least-squares slope of `log w_n` against `n` over `1..=up_to`.
    pub fn log_slope(&self, up_to: usize) -> f64 {
        let pts: Vec<(f64, f64)> =
            self.n.iter().zip(&self.w).filter(|(n, _)| (1..=up_to).contains(*n)).map(|(n, w)| (*n as f64, w.ln())).collect();
        slope(&pts)
    }
}

/// Propagates a coherent state under the damped map
/// `M_t = e^{−tG} M_N e^{tG}`, `G` the quantized escape function.
pub fn damped_propagation_experiment(
    spec: &BakerSpec,
    dim: usize,
    rho: TorusPoint,
    escape: &EscapeParams,
    n_max: usize,
) -> Result<PropagationSeries> {
    let op = OpenMapOperator::build(spec, dim, Variant::Fft)?;
    let h = op.h();
    let phi = WavePacket::coherent(h, [rho.x, rho.xi])?.to_torus(dim, DEFAULT_PHASE)?;
    let nrm = phi.norm();
    let mut v: Vec<C64> = phi.into_amps().into_iter().map(|z| z / nrm).collect();
    let damping = if escape.t > 0.0 { Some(damping_operator(spec, escape, dim, DEFAULT_PHASE)?) } else { None };
    let mut w = vec![1.0];
    if let Some(d) = &damping {
        d.apply_exp(escape.t, &mut v);
    }
    for _ in 0..n_max {
        op.apply_in_place(&mut v)?;
        let mut out = v.clone();
        if let Some(d) = &damping {
            d.apply_exp(-escape.t, &mut out);
        }
        w.push(out.iter().map(|z| z.norm_sqr()).sum());
    }
    log::info!("propagation N={dim} t={} rho=({}, {}): w = {w:?}", escape.t, rho.x, rho.xi);
    Ok(PropagationSeries { dim, t: escape.t, delta: escape.delta, rho, n: (0..=n_max).collect(), w })
}

/// `tr (M_tⁿ)* M_tⁿ` per dimension, once as a Frobenius norm and once by
/// coherent-state quadrature, with the fitted growth exponent in `1/h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsTraceSeries {
    #[serde(rename = "N")]
    pub dims: Vec<usize>,
    pub t: f64,
    pub delta: f64,
    pub n: Vec<usize>,
    pub w: Vec<f64>,
    pub quadrature: Vec<f64>,
    pub exponent: f64,
}

impl HsTraceSeries {
    pub fn max_relative_gap(&self) -> f64 {
        self.w.iter().zip(&self.quadrature).map(|(a, b)| ((a - b) / a).abs()).fold(0.0, f64::max)
    }
}

/// Dense `M_tⁿ`.
pub fn damped_power(spec: &BakerSpec, dim: usize, escape: &EscapeParams, steps: usize) -> Result<Mat<C64>> {
    let op = OpenMapOperator::build(spec, dim, Variant::Fft)?;
    let damping = if escape.t > 0.0 { Some(damping_operator(spec, escape, dim, DEFAULT_PHASE)?) } else { None };
    let start = match &damping {
        Some(d) => d.exp(escape.t),
        None => Mat::<C64>::identity(dim, dim),
    };
    let mut cols: Vec<Vec<C64>> = (0..dim).map(|j| (0..dim).map(|i| start[(i, j)]).collect()).collect();
    for col in cols.iter_mut() {
        for _ in 0..steps {
            op.apply_in_place(col)?;
        }
    }
    let pushed = Mat::<C64>::from_fn(dim, dim, |i, j| cols[j][i]);
    Ok(match &damping {
        Some(d) => &d.exp(-escape.t) * &pushed,
        None => pushed,
    })
}

pub fn hs_trace_experiment(
    spec: &BakerSpec,
    dims: &[usize],
    escape: &EscapeParams,
    steps: &ExperimentParams,
) -> Result<HsTraceSeries> {
    if dims.len() < 2 {
        return Err(Error::InsufficientDepths { needed: 2, got: dims.len() });
    }
    if let Some(&big) = dims.iter().find(|&&d| d > DENSE_CAP) {
        return Err(Error::DimensionCap { n: big, cap: DENSE_CAP });
    }
    let mut n = Vec::new();
    let mut w = Vec::new();
    let mut quadrature = Vec::new();
    for &dim in dims {
        let h = 1.0 / (TAU * dim as f64);
        let k = steps.steps(h);
        let p = damped_power(spec, dim, escape, k)?;
        let frob = p.norm_l2().powi(2);
        let q = p.adjoint() * &p;
        let quad = CoherentFrame::new(dim, DEFAULT_PHASE)?.trace(&q)?.re;
        log::info!("trace N={dim} n={k}: frobenius {frob:.6e}, quadrature {quad:.6e}");
        n.push(k);
        w.push(frob);
        quadrature.push(quad);
    }
    let pts: Vec<(f64, f64)> = dims.iter().zip(&w).map(|(d, v)| ((TAU * *d as f64).ln(), v.ln())).collect();
    Ok(HsTraceSeries { dims: dims.to_vec(), t: escape.t, delta: escape.delta, n, w, quadrature, exponent: slope(&pts) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor() -> BakerSpec {
        BakerSpec::new(3, vec![0, 2]).unwrap()
    }

    #[test]
    fn step_count() {
        let p = ExperimentParams::from_epsilon(0.01, 3f64.ln(), 0.0).unwrap();
        assert!((p.vartheta - 0.96 / (6.0 * 3f64.ln() * 1.0201)).abs() < 1e-15);
        assert_eq!(p.steps(1.0 / (TAU * 2187.0)), 1);
        assert!(ExperimentParams::from_epsilon(0.3, 1.0, 0.0).is_err());
    }

    #[test]
    fn undamped_propagation_keeps_norm_on_the_trapped_set() {
        let esc = EscapeParams::new(0.4, 1.0, 0.0).unwrap();
        let s = damped_propagation_experiment(&cantor(), 243, TorusPoint::new(0.0, 0.0), &esc, 2).unwrap();
        assert!((s.w[0] - 1.0).abs() < 1e-12);
        assert!(s.w.windows(2).all(|p| p[1] <= p[0] + 1e-12));
        assert!(s.w[1] > 0.5);
    }

    #[test]
    fn trace_paths_agree_without_damping() {
        let esc = EscapeParams::new(0.4, 1.0, 0.0).unwrap();
        let steps = ExperimentParams { vartheta: 0.2, slack: 0.0 };
        let s = hs_trace_experiment(&cantor(), &[27, 81], &esc, &steps).unwrap();
        // one step of the open map has rank 2N/3
        assert_eq!(s.n, vec![1, 1]);
        assert!((s.w[0] - 18.0).abs() < 1e-9 && (s.w[1] - 54.0).abs() < 1e-9);
        assert!(s.max_relative_gap() < 1e-10);
        assert!((s.exponent - 1.0).abs() < 1e-9);
    }
}
