//! The open baker map `F_{a,A}` on the torus.
//!
//! A point `(x, ξ)` with `x ∈ [j/a, (j+1)/a)` and `j ∈ A` maps to
//! `(a·x − j, (ξ + j)/a)`; points in the other strips fall into the hole.
//! The map expands `x` and contracts `ξ` by the constant factor `a`, so every
//! thermodynamic quantity is available in closed form and the module doubles
//! as an oracle for the generic machinery.
//!
//! Trapped-set covers are built from digit strings, never by iterating
//! floats: the forward-trapped set `T₋` is `{x : every base-a digit lies in A}`
//! times the full `ξ` circle, the backward-trapped set `T₊` is the same
//! Cantor set in `ξ`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{self, RngExt};
use crate::symbolic_pressure::{CylinderTable, Subshift};
use crate::{Error, Result};

const BOUNDARY_GUARD: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BakerSpec {
    a: usize,
    alphabet: Vec<usize>,
}

impl BakerSpec {
    pub fn new(a: usize, alphabet: Vec<usize>) -> Result<Self> {
        if a < 2 {
            return Err(Error::InvalidBaker(format!("base must be at least 2, got {a}")));
        }
        if alphabet.is_empty() {
            return Err(Error::InvalidBaker("alphabet is empty".into()));
        }
        if alphabet.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBaker(format!("alphabet {alphabet:?} is not strictly increasing")));
        }
        if alphabet.iter().any(|&j| j >= a) {
            return Err(Error::InvalidBaker(format!("alphabet {alphabet:?} has letters >= {a}")));
        }
        Ok(BakerSpec { a, alphabet })
    }

    pub fn base(&self) -> usize {
        self.a
    }

    pub fn alphabet(&self) -> &[usize] {
        &self.alphabet
    }

    pub fn symbol_count(&self) -> usize {
        self.alphabet.len()
    }

    pub fn contains(&self, digit: usize) -> bool {
        self.alphabet.binary_search(&digit).is_ok()
    }

    pub fn is_closed(&self) -> bool {
        self.alphabet.len() == self.a
    }

    /// `log m / log a`, the dimension of the trapped set along `x`.
    pub fn dimension(&self) -> f64 {
        (self.symbol_count() as f64).ln() / (self.a as f64).ln()
    }

    /// Decay rate `1 − d_H` in units of the step time `log a`.
    pub fn decay_rate(&self) -> f64 {
        1.0 - self.dimension()
    }

    /// Strip index of a coordinate, floored with a small guard band so that
    /// values a hair below an integer multiple of `1/a` due to round-off
    /// land in the upper strip.
    pub fn digit(&self, coord: f64) -> usize {
        let scaled = self.a as f64 * coord;
        let mut j = scaled.floor();
        if scaled - j > 1.0 - BOUNDARY_GUARD {
            j += 1.0;
        }
        (j.max(0.0) as usize).min(self.a - 1)
    }
}

/// Point on the unit torus, both coordinates reduced into `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: f64,
    pub xi: f64,
}

impl TorusPoint {
    pub fn new(x: f64, xi: f64) -> Self {
        TorusPoint { x: wrap(x), xi: wrap(xi) }
    }
}

pub(crate) fn wrap(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub fn forward(spec: &BakerSpec, p: TorusPoint) -> Option<TorusPoint> {
    let j = spec.digit(p.x);
    if !spec.contains(j) {
        return None;
    }
    let a = spec.a as f64;
    Some(TorusPoint::new(a * p.x - j as f64, (p.xi + j as f64) / a))
}

pub fn inverse(spec: &BakerSpec, p: TorusPoint) -> Option<TorusPoint> {
    let j = spec.digit(p.xi);
    if !spec.contains(j) {
        return None;
    }
    let a = spec.a as f64;
    Some(TorusPoint::new((p.x + j as f64) / a, a * p.xi - j as f64))
}

/// Axis-aligned box `[x0, x0+side_x) × [xi0, xi0+side_xi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverBox {
    pub x0: f64,
    pub xi0: f64,
    pub side_x: f64,
    pub side_xi: f64,
}

impl CoverBox {
    pub fn area(&self) -> f64 {
        self.side_x * self.side_xi
    }

    pub fn contains_box(&self, other: &CoverBox, tol: f64) -> bool {
        other.x0 >= self.x0 - tol
            && other.x0 + other.side_x <= self.x0 + self.side_x + tol
            && other.xi0 >= self.xi0 - tol
            && other.xi0 + other.side_xi <= self.xi0 + self.side_xi + tol
    }
}

/// Image of a box lying inside one allowed strip; `None` if the box is in
/// the hole or straddles a strip boundary.
pub fn forward_box(spec: &BakerSpec, b: &CoverBox) -> Option<CoverBox> {
    let a = spec.a as f64;
    let j = spec.digit(b.x0);
    if !spec.contains(j) || b.x0 + b.side_x > (j + 1) as f64 / a + BOUNDARY_GUARD {
        return None;
    }
    Some(CoverBox {
        x0: a * b.x0 - j as f64,
        xi0: (b.xi0 + j as f64) / a,
        side_x: a * b.side_x,
        side_xi: b.side_xi / a,
    })
}

/// Left endpoints (as integers in units of `a^-n`) of the `m^n` depth-`n`
/// cylinder intervals of the Cantor set with digits in the alphabet.
fn cylinder_offsets(spec: &BakerSpec, n: usize) -> Vec<u64> {
    let mut offsets = vec![0u64];
    for _ in 0..n {
        offsets = offsets
            .into_iter()
            .flat_map(|o| spec.alphabet.iter().map(move |&j| o * spec.a as u64 + j as u64))
            .collect();
    }
    offsets
}

/// Cover of `T = T₊ ∩ T₋` by `m^{n_f}·m^{n_b}` boxes of side
/// `a^{-n_f} × a^{-n_b}`.
pub fn trapped_cover(spec: &BakerSpec, n_forward: usize, n_backward: usize) -> Result<Vec<CoverBox>> {
    if n_forward == 0 || n_backward == 0 {
        return Err(Error::InvalidArgument("cover depths must be at least 1".into()));
    }
    let a = spec.a as f64;
    let sx = a.powi(-(n_forward as i32));
    let sxi = a.powi(-(n_backward as i32));
    let xs = cylinder_offsets(spec, n_forward);
    let xis = cylinder_offsets(spec, n_backward);
    Ok(xs
        .iter()
        .flat_map(|&ox| {
            xis.iter().map(move |&oxi| CoverBox {
                x0: ox as f64 * sx,
                xi0: oxi as f64 * sxi,
                side_x: sx,
                side_xi: sxi,
            })
        })
        .collect())
}

pub fn write_cover_csv<W: Write>(boxes: &[CoverBox], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for b in boxes {
        wtr.serialize(b).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Slope of `log N(ε)` against `−log ε` for the trace of the `T₋` cover on
/// a line `ξ = const`, with `ε = a^{-n}` for each requested depth.
pub fn box_dimension_estimate(spec: &BakerSpec, depths: &[usize]) -> Result<f64> {
    if depths.len() < 2 {
        return Err(Error::InsufficientDepths { needed: 2, got: depths.len() });
    }
    let la = (spec.a as f64).ln();
    let points: Vec<(f64, f64)> = depths
        .iter()
        .map(|&n| {
            // boxes of side a^-n indexed by integer left endpoints
            let mut idx = cylinder_offsets(spec, n);
            idx.sort_unstable();
            idx.dedup();
            (n as f64 * la, (idx.len() as f64).ln())
        })
        .collect();
    Ok(slope(&points))
}

pub(crate) fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

/// Lebesgue measure of the `n`-step forward survivors, exact and sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalMeasure {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub exact: f64,
    pub mc: f64,
    /// `5·sqrt(exact/samples)`
    pub tolerance: f64,
    pub within_tolerance: bool,
}

const MC_CHUNK: u64 = 1 << 16;

pub fn survival_measure(spec: &BakerSpec, n: usize, samples: u64, rng_seed: u64) -> Result<SurvivalMeasure> {
    if n == 0 || samples == 0 {
        return Err(Error::InvalidArgument("n and samples must be at least 1".into()));
    }
    let exact = (spec.symbol_count() as f64 / spec.a as f64).powi(n as i32);
    let chunks = samples.div_ceil(MC_CHUNK);
    let survivors: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(rng_seed, c);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            (0..count)
                .filter(|_| {
                    let mut p = TorusPoint::new(rng.random::<f64>(), rng.random::<f64>());
                    for _ in 0..n {
                        match forward(spec, p) {
                            Some(q) => p = q,
                            None => return false,
                        }
                    }
                    true
                })
                .count() as u64
        })
        .sum();
    let mc = survivors as f64 / samples as f64;
    let tolerance = 5.0 * (exact / samples as f64).sqrt();
    let within_tolerance = (mc - exact).abs() <= tolerance;
    if !within_tolerance {
        log::warn!("survival Monte-Carlo {mc} outside {tolerance} of exact {exact}");
    }
    Ok(SurvivalMeasure { n, samples, seed: rng_seed, exact, mc, tolerance, within_tolerance })
}

/// Depth-`n` table: every word of the full shift on the alphabet carries
/// `logJ = t = n·log a`.
pub fn cylinder_table(spec: &BakerSpec, n: usize) -> Result<CylinderTable> {
    let la = (spec.a as f64).ln();
    CylinderTable::constant(Subshift::full(spec.symbol_count())?, n, la, la)
}

/// Circle distance from `coord` to the union of the `m^depth` cylinder
/// intervals of length `a^-depth` whose digits all lie in the alphabet.
///
/// Applied to `x` this is the distance to the depth-`depth` cover of `T₋`,
/// applied to `ξ` the distance to the cover of `T₊`.
pub fn cylinder_distance(spec: &BakerSpec, coord: f64, depth: usize) -> f64 {
    let a = spec.a as f64;
    let lo_digit = spec.alphabet[0] as f64;
    let hi_digit = *spec.alphabet.last().unwrap() as f64;
    // extremes of the depth-k cover: lo_k = Σ_{i<=k} lo·a^-i, hi_k = Σ hi·a^-i + a^-k
    let extremes = |k: usize| {
        let geo = if k == 0 { 0.0 } else { (1.0 - a.powi(-(k as i32))) / (a - 1.0) };
        (lo_digit * geo, hi_digit * geo + a.powi(-(k as i32)))
    };
    fn line(spec: &BakerSpec, x: f64, k: usize, extremes: &dyn Fn(usize) -> (f64, f64)) -> f64 {
        let (lo, hi) = extremes(k);
        if x < lo {
            return lo - x;
        }
        if x > hi {
            return x - hi;
        }
        if k == 0 {
            return 0.0;
        }
        let a = spec.a as f64;
        let (sub_lo, sub_hi) = extremes(k - 1);
        let own = spec.digit(x);
        let mut best = f64::INFINITY;
        for &j in &spec.alphabet {
            let d = if j == own {
                line(spec, a * x - j as f64, k - 1, extremes) / a
            } else {
                let l = (j as f64 + sub_lo) / a;
                let h = (j as f64 + sub_hi) / a;
                if x < l {
                    l - x
                } else if x > h {
                    x - h
                } else {
                    0.0
                }
            };
            best = best.min(d);
        }
        best
    }
    let x = wrap(coord);
    let (lo, hi) = extremes(depth);
    line(spec, x, depth, &extremes)
        .min(lo + 1.0 - x)
        .min(x - (hi - 1.0))
}
