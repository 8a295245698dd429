use serde::{Deserialize, Serialize};

use super::table::CylinderTable;
use crate::{Error, Result};

/// Absolute tolerance in the bracketed coefficient for every root search.
pub const BISECTION_TOL: f64 = 1e-8;

/// Pressure extrapolated from several cylinder depths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    #[serde(rename = "coeff_J")]
    pub coeff_j: f64,
    pub coeff_t: f64,
    /// `(n, p_n)` for every supplied depth, `n` strictly increasing.
    pub per_depth: Vec<(usize, f64)>,
    pub value: f64,
    /// `|p_{n_max} - value|`.
    pub uncertainty: f64,
}

/// Cover-formula pressure at one depth,
/// `p_n = (1/n) log Σ_w exp(coeff_J·logJ(w) + coeff_t·t(w))`,
/// accumulated as a log-sum-exp.
pub fn finite_pressure(table: &CylinderTable, coeff_j: f64, coeff_t: f64) -> Result<f64> {
    if !coeff_j.is_finite() || !coeff_t.is_finite() {
        return Err(Error::InvalidArgument("pressure coefficients must be finite".into()));
    }
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let weights: Vec<f64> = table.iter().map(|(_, e)| coeff_j * e.log_j + coeff_t * e.t).collect();
    Ok(log_sum_exp(&weights) / table.depth() as f64)
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Fits `p_n = P + c/n` by least squares on the three deepest tables.
pub fn pressure(tables: &[CylinderTable], coeff_j: f64, coeff_t: f64) -> Result<PressureEstimate> {
    if tables.len() < 3 {
        return Err(Error::InsufficientDepths { needed: 3, got: tables.len() });
    }
    if tables.windows(2).any(|w| w[0].depth() >= w[1].depth()) {
        return Err(Error::InvalidArgument("table depths must be strictly increasing".into()));
    }
    let per_depth = tables
        .iter()
        .map(|t| finite_pressure(t, coeff_j, coeff_t).map(|p| (t.depth(), p)))
        .collect::<Result<Vec<_>>>()?;
    let tail = &per_depth[per_depth.len() - 3..];
    let xs: Vec<f64> = tail.iter().map(|&(n, _)| 1.0 / n as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|&(_, p)| p).collect();
    let (intercept, _) = line_fit(&xs, &ys);
    let p_last = per_depth.last().unwrap().1;
    Ok(PressureEstimate {
        coeff_j,
        coeff_t,
        per_depth,
        value: intercept,
        uncertainty: (p_last - intercept).abs(),
    })
}

/// Ordinary least squares `y = a + b·x`, returns `(a, b)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Root of a monotone function on `[lo, hi]` by bisection. Returns the
/// midpoint of the final bracket.
pub(crate) fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root `s₀` of `P(-s·φ_u) = 0` inside `s_bracket`: the dimension of the
/// trapped set along the unstable direction (the full trapped set of a
/// surface map has dimension `2·s₀`).
pub fn bowen_dimension(tables: &[CylinderTable], s_bracket: (f64, f64)) -> Result<f64> {
    let (lo, hi) = s_bracket;
    bisect(|s| pressure(tables, -s, 0.0).map(|p| p.value), lo, hi, BISECTION_TOL)
}

/// Root `γ_cl` of `s ↦ P(-φ_u + s·t_ret)`, the classical decay rate in
/// flow-time units.
pub fn classical_decay_rate(tables: &[CylinderTable]) -> Result<f64> {
    let f = |s: f64| pressure(tables, -1.0, s).map(|p| p.value);
    let p0 = f(0.0)?;
    if p0 >= -1e-12 {
        return Err(Error::NotOpen { pressure: p0 });
    }
    let mut hi = 1.0;
    let mut tries = 0;
    while f(hi)? <= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoSignChange { lo: 0.0, hi });
        }
    }
    bisect(f, 0.0, hi, BISECTION_TOL)
}

/// `p(β) = -P(-φ_u + 2β·t_ret) / (6 λ_max)`, without clamping.
pub fn p_of_beta(tables: &[CylinderTable], beta: f64, lambda_max: f64) -> Result<f64> {
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda_max must be positive, got {lambda_max}")));
    }
    Ok(-pressure(tables, -1.0, 2.0 * beta)?.value / (6.0 * lambda_max))
}

/// `σ(γ) = max(0, p(γ))`. Returns exactly zero once `2γ` reaches the
/// classical decay rate.
pub fn sigma_of_gamma(tables: &[CylinderTable], gamma: f64, lambda_max: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be nonnegative, got {gamma}")));
    }
    let raw = p_of_beta(tables, gamma, lambda_max)?;
    if raw <= 0.0 {
        return Ok(0.0);
    }
    match classical_decay_rate(tables) {
        Ok(gamma_cl) if 2.0 * gamma >= gamma_cl => Ok(0.0),
        Ok(_) => Ok(raw),
        Err(Error::NotOpen { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}
