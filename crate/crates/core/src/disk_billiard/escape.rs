use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{billiard_step, BoundaryCoord, DiskConfig};
use crate::rng::{self, RngExt};
use crate::{Error, Result};

const FIT_LO: f64 = 1e-3;
const FIT_HI: f64 = 1e-1;
const FIT_LEVELS: usize = 40;
const MC_CHUNK: usize = 1 << 14;

/// Sampled escape rate, per unit flight time and per bounce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeEstimate {
    pub rate_per_time: f64,
    pub stderr: f64,
    pub rate_per_bounce: f64,
    pub stderr_per_bounce: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Escape time and number of completed bounces of one trajectory.
fn escape(config: &DiskConfig, mut c: BoundaryCoord, max_bounces: usize) -> (f64, usize) {
    let mut time = 0.0;
    for k in 0..max_bounces {
        match billiard_step(config, c) {
            Ok(Some(b)) => {
                time += b.flight;
                c = b.coord;
            }
            // a grazing ray leaves the disk tangentially
            _ => return (time, k),
        }
    }
    (time, max_bounces)
}

/// Least-squares slope and its standard error.
fn regression(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    let stderr = if points.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, stderr)
}

/// Lebesgue-uniform samples on the boundary phase space, followed until they
/// escape; the survivor fraction is fitted as `exp(−rate·time)` where it lies
/// between `1e-3` and `1e-1`.
pub fn escape_rate_mc(config: &DiskConfig, samples: usize, max_bounces: usize, rng_seed: u64) -> Result<EscapeEstimate> {
    if samples < 10_000 {
        return Err(Error::InvalidArgument(format!("need at least 10^4 samples, got {samples}")));
    }
    let perims: Vec<f64> = (0..config.len()).map(|d| config.perimeter(d)).collect();
    let total: f64 = perims.iter().sum();
    let chunks = samples.div_ceil(MC_CHUNK);
    let mut runs: Vec<(f64, usize)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|ci| {
            let mut rng = rng::stream(rng_seed, ci as u64);
            let count = MC_CHUNK.min(samples - ci * MC_CHUNK);
            let perims = &perims;
            (0..count)
                .map(|_| {
                    let mut u = rng.random::<f64>() * total;
                    let mut disk = 0;
                    while disk + 1 < perims.len() && u >= perims[disk] {
                        u -= perims[disk];
                        disk += 1;
                    }
                    let eta = 2.0 * rng.random::<f64>() - 1.0;
                    let c = BoundaryCoord { disk, y: u.min(perims[disk]), eta };
                    escape(config, c, max_bounces)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let n = runs.len() as f64;

    runs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut time_pts = Vec::with_capacity(FIT_LEVELS);
    for i in 0..FIT_LEVELS {
        let s = FIT_LO * (FIT_HI / FIT_LO).powf(i as f64 / (FIT_LEVELS - 1) as f64);
        let k = (s * n).ceil() as usize;
        if k == 0 || k > runs.len() {
            continue;
        }
        time_pts.push((runs[k - 1].0, (k as f64 / n).ln()));
    }
    time_pts.dedup_by(|a, b| a.0 == b.0);
    if time_pts.len() < 3 {
        return Err(Error::TooFewSurvivors);
    }
    let (slope, stderr) = regression(&time_pts);

    let mut alive = vec![0usize; max_bounces + 1];
    for &(_, b) in &runs {
        alive[b] += 1;
    }
    // survivors of at least k bounces
    for k in (0..max_bounces).rev() {
        alive[k] += alive[k + 1];
    }
    let mut bounce_pts: Vec<(f64, f64)> = alive
        .iter()
        .enumerate()
        .map(|(k, &a)| (k as f64, a as f64 / n))
        .filter(|&(_, s)| (FIT_LO..=FIT_HI).contains(&s))
        .map(|(k, s)| (k, s.ln()))
        .collect();
    if bounce_pts.len() < 2 {
        // widen to the nearest levels on either side of the window
        bounce_pts = alive
            .iter()
            .enumerate()
            .map(|(k, &a)| (k as f64, a as f64 / n))
            .filter(|&(_, s)| s > 0.0 && (FIT_LO * 0.1..=FIT_HI * 5.0).contains(&s))
            .map(|(k, s)| (k, s.ln()))
            .collect();
    }
    let (bslope, bstderr) = if bounce_pts.len() >= 2 { regression(&bounce_pts) } else { (f64::NAN, f64::NAN) };
    Ok(EscapeEstimate {
        rate_per_time: -slope,
        stderr,
        rate_per_bounce: -bslope,
        stderr_per_bounce: bstderr,
        samples,
        seed: rng_seed,
    })
}

/// Box-counting estimate of the dimension of the forward-trapped set on a
/// one-parameter family of outgoing rays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceDimension {
    pub dimension: f64,
    /// `(box size, occupied boxes)` used in the fit.
    pub counts: Vec<(f64, usize)>,
    pub depth: usize,
    pub intervals: usize,
}

fn survives(config: &DiskConfig, c: BoundaryCoord, k: usize) -> bool {
    escape(config, c, k).1 >= k
}

/// Rays leaving `disk` at the point facing the centroid of the other disks,
/// parametrized by `η ∈ (−1, 1)`. The set of `η` surviving `depth` bounces is
/// a union of intervals, refined one bounce at a time with endpoints located
/// by bisection; boxes of side `2^-k` that meet it are counted for every `k`
/// whose boxes are still ten times wider than the widest interval.
pub fn trapped_slice_dimension(config: &DiskConfig, disk: usize, depth: usize) -> Result<SliceDimension> {
    if disk >= config.len() || depth < 2 {
        return Err(Error::InvalidArgument(format!("bad slice disk {disk} or depth {depth}")));
    }
    let others: Vec<_> = (0..config.len()).filter(|&d| d != disk).collect();
    let cx = others.iter().map(|&d| config.centers()[d][0]).sum::<f64>() / others.len() as f64;
    let cy = others.iter().map(|&d| config.centers()[d][1]).sum::<f64>() / others.len() as f64;
    let c0 = config.centers()[disk];
    let y = config.radii()[disk] * (cy - c0[1]).atan2(cx - c0[0]);
    let ray = |eta: f64| BoundaryCoord { disk, y, eta };

    const SAMPLES: usize = 256;
    let mut intervals = vec![(-1.0 + 1e-15, 1.0 - 1e-15)];
    for k in 1..=depth {
        let next: Vec<Vec<(f64, f64)>> = intervals
            .par_iter()
            .map(|&(lo, hi)| {
                let pts: Vec<f64> = (0..=SAMPLES).map(|i| lo + (hi - lo) * i as f64 / SAMPLES as f64).collect();
                let alive: Vec<bool> = pts.iter().map(|&e| survives(config, ray(e), k)).collect();
                let edge = |mut inside: f64, mut outside: f64| {
                    for _ in 0..64 {
                        let mid = 0.5 * (inside + outside);
                        if mid == inside || mid == outside {
                            break;
                        }
                        if survives(config, ray(mid), k) {
                            inside = mid;
                        } else {
                            outside = mid;
                        }
                    }
                    inside
                };
                let mut out = Vec::new();
                let mut i = 0;
                while i <= SAMPLES {
                    if !alive[i] {
                        i += 1;
                        continue;
                    }
                    let start = i;
                    while i <= SAMPLES && alive[i] {
                        i += 1;
                    }
                    let l = if start == 0 { pts[0] } else { edge(pts[start], pts[start - 1]) };
                    let r = if i > SAMPLES { pts[SAMPLES] } else { edge(pts[i - 1], pts[i]) };
                    out.push((l, r));
                }
                out
            })
            .collect();
        intervals = next.into_iter().flatten().collect();
        if intervals.is_empty() {
            return Err(Error::TooFewSurvivors);
        }
    }
    let widest = intervals.iter().map(|(l, r)| r - l).fold(0.0, f64::max);
    let mut counts = Vec::new();
    for k in 1..60 {
        let eps = 2f64.powi(-k);
        if eps < 10.0 * widest {
            break;
        }
        let mut boxes: Vec<i64> = intervals
            .iter()
            .flat_map(|&(l, r)| ((l / eps).floor() as i64)..=((r / eps).floor() as i64))
            .collect();
        boxes.sort_unstable();
        boxes.dedup();
        counts.push((eps, boxes.len()));
    }
    // drop the coarsest boxes, which see the whole window of escaping rays
    let fit: Vec<(f64, f64)> = counts.iter().skip(3).map(|&(e, c)| (-e.ln(), (c as f64).ln())).collect();
    if fit.len() < 3 {
        return Err(Error::InsufficientDepths { needed: 3, got: fit.len() });
    }
    let (dimension, _) = regression(&fit);
    Ok(SliceDimension { dimension, counts, depth, intervals: intervals.len() })
}
