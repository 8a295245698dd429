//! Dense spectra of the quantized maps, annulus counts and Weyl-law fits.
//!
//! The long-lived part of the spectrum is `{|λ| ≥ ν}`; its size against `N`
//! is fitted on a log-log scale and compared with `N^{d_H − Σ(ν)}`.

use std::io::Write;

use faer::{Mat, MatRef};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baker_classical::BakerSpec;
use crate::quantum_baker::{OpenMapOperator, Variant};
use crate::{Error, Result, C64};

/// Eigenvalues within this distance below `ν` still count as `≥ ν`.
pub const DEAD_BAND: f64 = 1e-10;

mod complex_pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::C64;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    #[serde(rename = "N")]
    pub n: usize,
    /// Sorted by decreasing modulus.
    #[serde(with = "complex_pairs")]
    pub eigenvalues: Vec<C64>,
    /// Largest `‖Mv − λv‖` over unit eigenvectors.
    pub residual_max: f64,
}

impl SpectrumRecord {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |z| z.norm())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Serialization(e.to_string());
        wtr.write_record(["re", "im", "modulus"]).map_err(err)?;
        for z in &self.eigenvalues {
            wtr.write_record([format!("{:?}", z.re), format!("{:?}", z.im), format!("{:?}", z.norm())])
                .map_err(err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn frobenius(m: &Mat<C64>) -> f64 {
    m.norm_l2()
}

/// Squared singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-14;
/// Deflation only happens when every other squared singular value is above
/// this fraction, so that the kernel is cleanly separated.
pub const GAP_TOL: f64 = 1e-6;

/// Eigenpairs with the numerical kernel split off first. With `V` an
/// orthonormal basis of the complement of the kernel, `M = (M V) V^*`, so the
/// nonzero spectrum is that of `V^* M V`; each eigenvector `y` of the
/// compression lifts to `M V y`. The compression is deflated again until it
/// has full rank.
fn deflated_eigen(m: MatRef<'_, C64>) -> Result<(Vec<C64>, Mat<C64>)> {
    let n = m.nrows();
    let gram = m.adjoint() * m;
    let evd = gram
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::NoConvergence(format!("gram eigensolver: {e:?}")))?;
    let (s2, v) = (evd.S(), evd.U());
    let smax = (0..n).map(|i| s2[i].re).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| smax > 0.0 && s2[i].re > RANK_TOL * smax).collect();
    let clean = keep.iter().all(|&i| s2[i].re >= GAP_TOL * smax);
    if keep.len() == n || !clean {
        let evd = m.eigen().map_err(|e| Error::NoConvergence(format!("eigensolver: {e:?}")))?;
        let lam = (0..n).map(|k| evd.S()[k]).collect();
        return Ok((lam, evd.U().to_owned()));
    }
    let r = keep.len();
    let kernel: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let v_r = Mat::from_fn(n, r, |i, j| v[(i, keep[j])]);
    let mv = m * &v_r;
    let (mut lam, y) = if r == 0 { (Vec::new(), Mat::zeros(0, 0)) } else { deflated_eigen((v_r.adjoint() * &mv).as_ref())? };
    let lifted = &mv * &y;
    let vectors = Mat::from_fn(n, n, |i, j| if j < r { lifted[(i, j)] } else { v[(i, kernel[j - r])] });
    lam.extend(std::iter::repeat_n(C64::new(0.0, 0.0), n - r));
    Ok((lam, vectors))
}

/// All eigenvalues of a square matrix, with the eigen-residual of each pair.
///
/// Rank-deficient matrices are deflated so that a nilpotent part shows up as
/// exact zeros rather than a ring of roundoff-sized eigenvalues.
pub fn eigenvalues(m: &Mat<C64>) -> Result<SpectrumRecord> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
    }
    if n == 0 {
        return Err(Error::BadDimension("empty matrix".into()));
    }
    let (s, u) = deflated_eigen(m.as_ref())?;
    let mu = m * &u;
    let mut residual_max: f64 = 0.0;
    for k in 0..n {
        let lam = s[k];
        let vn: f64 = (0..n).map(|i| u[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let r: f64 = (0..n).map(|i| (mu[(i, k)] - lam * u[(i, k)]).norm_sqr()).sum::<f64>().sqrt();
        residual_max = residual_max.max(r / vn);
    }
    let mut eigenvalues = s;
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
    let bound = 1e-8 * frobenius(m).max(f64::MIN_POSITIVE);
    if residual_max > bound {
        log::warn!("eigen-residual {residual_max:e} above {bound:e}");
    }
    Ok(SpectrumRecord { n, eigenvalues, residual_max })
}

/// Spectrum of the quantized open baker map at dimension `n`.
pub fn baker_spectrum(spec: &BakerSpec, n: usize, variant: Variant) -> Result<SpectrumRecord> {
    let op = OpenMapOperator::build(spec, n, variant)?;
    eigenvalues(op.dense()?)
}

/// Spectra for several dimensions, computed in parallel.
pub fn baker_spectra(spec: &BakerSpec, dims: &[usize], variant: Variant) -> Result<Vec<SpectrumRecord>> {
    dims.par_iter().map(|&n| baker_spectrum(spec, n, variant)).collect()
}

/// `#{λ : |λ| ≥ ν}` with the dead band.
pub fn count_annulus(record: &SpectrumRecord, nu: f64) -> usize {
    record.eigenvalues.iter().filter(|z| z.norm() >= nu - DEAD_BAND).count()
}

/// Counts in `[edges[i], edges[i+1])`, the last bin closed above; the dead
/// band is applied at every edge so the bins partition the spectrum.
pub fn annulus_histogram(record: &SpectrumRecord, edges: &[f64]) -> Vec<usize> {
    let mut out = vec![0; edges.len().saturating_sub(1)];
    for z in &record.eigenvalues {
        let r = z.norm();
        let bin = edges.iter().rposition(|&e| r >= e - DEAD_BAND).unwrap_or(0);
        let last = out.len().saturating_sub(1);
        if let Some(slot) = out.get_mut(bin.min(last)) {
            *slot += 1;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylFit {
    pub nu: f64,
    /// `(N, count)` pairs entering the fit.
    pub points: Vec<(usize, usize)>,
    pub slope: f64,
    pub stderr: f64,
    /// Dimensions left out because their count was zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<usize>,
}

/// Slope of `log count` against `log N`; zero counts are dropped.
pub fn fit_counts(nu: f64, points: &[(usize, usize)]) -> Result<WeylFit> {
    let (kept, dropped): (Vec<_>, Vec<_>) = points.iter().partition(|p| p.1 > 0);
    if kept.len() < 3 {
        return Err(Error::DegenerateCounts { nonzero: kept.len() });
    }
    let xy: Vec<(f64, f64)> = kept.iter().map(|&&(n, c)| ((n as f64).ln(), (c as f64).ln())).collect();
    let m = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / m;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xy.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let stderr = (rss / (m - 2.0) / sxx).sqrt();
    Ok(WeylFit {
        nu,
        points: kept.into_iter().copied().collect(),
        slope,
        stderr,
        excluded: dropped.into_iter().map(|p| p.0).collect(),
    })
}

/// Weyl exponent from spectra at geometrically spaced dimensions.
pub fn weyl_exponent(records: &[SpectrumRecord], nu: f64) -> Result<WeylFit> {
    if records.len() < 3 {
        return Err(Error::InsufficientDepths { needed: 3, got: records.len() });
    }
    let dims: Vec<usize> = records.iter().map(|r| r.n).collect();
    let ratio = dims[1] / dims[0].max(1);
    if ratio < 2 || dims.windows(2).any(|w| w[1] != w[0] * ratio) {
        return Err(Error::InvalidArgument(format!("dimensions {dims:?} are not a geometric sequence")));
    }
    let points: Vec<(usize, usize)> = records.iter().map(|r| (r.n, count_annulus(r, nu))).collect();
    fit_counts(nu, &points)
}

/// `max(1 − d_H − 2γ, 0)` with `γ = −log ν / log J`, `J` the expansion per step.
pub fn weyl_gap_exponent(d_h: f64, nu: f64, log_expansion: f64) -> f64 {
    let gamma = -nu.ln() / log_expansion;
    (1.0 - d_h - 2.0 * gamma).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub count: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub nu: f64,
    pub exponent: f64,
    pub rows: Vec<BoundRow>,
    /// Ratios grow monotonically by more than a factor 2 over the range.
    pub unbounded: bool,
}

/// Tabulates `count / N^{d_H − Σ(ν)}` for each fitted dimension.
pub fn bound_report(fit: &WeylFit, d_h: f64, sigma_nu: f64) -> BoundReport {
    let exponent = d_h - sigma_nu;
    let rows: Vec<BoundRow> = fit
        .points
        .iter()
        .map(|&(n, count)| BoundRow { n, count, ratio: count as f64 / (n as f64).powf(exponent) })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let unbounded = monotone
        && rows.len() >= 2
        && rows.last().unwrap().ratio > 2.0 * rows.first().unwrap().ratio;
    BoundReport { nu: fit.nu, exponent, rows, unbounded }
}
