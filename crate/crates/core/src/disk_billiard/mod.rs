//! Scattering by `J` disjoint disks in the plane.
//!
//! The billiard map acts on outgoing boundary coordinates `(disk, y, η)`:
//! `y` is arclength along the boundary measured counter-clockwise from the
//! point of the disk on the positive `x` axis, and `η = v·t` is the
//! component of the unit velocity along the counter-clockwise tangent.
//!
//! Periodic orbits are found symbolically by minimizing the total flight
//! length ([`orbit_for_word`]), their unstable multipliers come from the
//! transfer-matrix product ([`stability`]) and feed [`cylinder_table`].
//! [`escape_rate_mc`] and [`trapped_slice_dimension`] are direct-sampling
//! estimates that do not use the symbolic coding at all.

mod escape;
mod orbit;

pub use escape::{escape_rate_mc, trapped_slice_dimension, EscapeEstimate, SliceDimension};
pub use orbit::{cylinder_table, orbit_for_word, stability, write_orbits_csv, OrbitSegment};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub(crate) type Vec2 = [f64; 2];

pub(crate) fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

/// Disk centers and radii; TOML keys `centers` and `radii`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiskConfig")]
pub struct DiskConfig {
    centers: Vec<Vec2>,
    radii: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDiskConfig {
    centers: Vec<Vec2>,
    radii: Vec<f64>,
}

impl TryFrom<RawDiskConfig> for DiskConfig {
    type Error = Error;
    fn try_from(raw: RawDiskConfig) -> Result<Self> {
        DiskConfig::new(raw.centers, raw.radii)
    }
}

impl DiskConfig {
    pub fn new(centers: Vec<Vec2>, radii: Vec<f64>) -> Result<Self> {
        if centers.len() != radii.len() {
            return Err(Error::InvalidDiskConfig(format!(
                "{} centers but {} radii",
                centers.len(),
                radii.len()
            )));
        }
        if centers.len() < 2 {
            return Err(Error::InvalidDiskConfig("need at least two disks".into()));
        }
        if centers.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDiskConfig("non-finite center".into()));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidDiskConfig(format!("radius {r} is not positive")));
        }
        let cfg = DiskConfig { centers, radii };
        let j = cfg.len();
        for a in 0..j {
            for b in a + 1..j {
                let gap = norm(sub(cfg.centers[a], cfg.centers[b])) - cfg.radii[a] - cfg.radii[b];
                if gap <= 0.0 {
                    return Err(Error::InvalidDiskConfig(format!("disks {a} and {b} overlap (gap {gap})")));
                }
            }
        }
        for i in 0..j {
            for a in 0..j {
                for b in a + 1..j {
                    if i == a || i == b {
                        continue;
                    }
                    let clearance = cfg.hull_distance(cfg.centers[i], a, b) - cfg.radii[i];
                    if clearance <= 0.0 {
                        return Err(Error::InvalidDiskConfig(format!(
                            "disk {i} meets the convex hull of disks {a} and {b}"
                        )));
                    }
                }
            }
        }
        Ok(cfg)
    }

    /// Three disks of radius `r` on an equilateral triangle of side `spacing`.
    pub fn equilateral(r: f64, spacing: f64) -> Result<Self> {
        let rc = spacing / 3f64.sqrt();
        let centers = (0..3)
            .map(|k| {
                let a = TAU * k as f64 / 3.0;
                [rc * a.cos(), rc * a.sin()]
            })
            .collect();
        Self::new(centers, vec![r; 3])
    }

    /// Two disks of radius `r` on the `x` axis, centers `spacing` apart.
    pub fn two_disk(r: f64, spacing: f64) -> Result<Self> {
        Self::new(vec![[0.0, 0.0], [spacing, 0.0]], vec![r; 2])
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.centers.iter().map(|c| [c[0] * factor, c[1] * factor]).collect(),
            self.radii.iter().map(|r| r * factor).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec2] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn perimeter(&self, disk: usize) -> f64 {
        TAU * self.radii[disk]
    }

    /// Distance from `p` to the convex hull of disks `a` and `b`.
    ///
    /// The hull is the union of the disks with centers `(1−s)c_a + s·c_b` and
    /// radii `(1−s)r_a + s·r_b`, so the distance is a convex function of `s`.
    fn hull_distance(&self, p: Vec2, a: usize, b: usize) -> f64 {
        let (ca, cb) = (self.centers[a], self.centers[b]);
        let (ra, rb) = (self.radii[a], self.radii[b]);
        let f = |s: f64| {
            let c = [ca[0] + s * (cb[0] - ca[0]), ca[1] + s * (cb[1] - ca[1])];
            norm(sub(p, c)) - (ra + s * (rb - ra))
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0)).max(0.0)
    }

    pub(crate) fn point(&self, disk: usize, angle: f64) -> Vec2 {
        let c = self.centers[disk];
        let r = self.radii[disk];
        [c[0] + r * angle.cos(), c[1] + r * angle.sin()]
    }
}

/// Outgoing boundary coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoord {
    pub disk: usize,
    pub y: f64,
    pub eta: f64,
}

impl BoundaryCoord {
    pub fn new(config: &DiskConfig, disk: usize, y: f64, eta: f64) -> Result<Self> {
        if disk >= config.len() {
            return Err(Error::InvalidArgument(format!("disk {disk} out of range")));
        }
        if !y.is_finite() || !(eta.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("invalid boundary coordinate y={y}, eta={eta}")));
        }
        let per = config.perimeter(disk);
        Ok(BoundaryCoord { disk, y: y.rem_euclid(per), eta })
    }

    pub fn angle(&self, config: &DiskConfig) -> f64 {
        self.y / config.radii[self.disk]
    }

    pub fn position(&self, config: &DiskConfig) -> Vec2 {
        config.point(self.disk, self.angle(config))
    }

    pub fn velocity(&self, config: &DiskConfig) -> Vec2 {
        let a = self.angle(config);
        let (n, t) = ([a.cos(), a.sin()], [-a.sin(), a.cos()]);
        let c = (1.0 - self.eta * self.eta).sqrt();
        [self.eta * t[0] + c * n[0], self.eta * t[1] + c * n[1]]
    }
}

/// Image of one billiard step with the free-flight length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounce {
    pub coord: BoundaryCoord,
    pub flight: f64,
}

pub const GRAZING_TOL: f64 = 1e-12;

/// First disk hit by the outgoing ray, reflected; `None` if the ray escapes.
pub fn billiard_step(config: &DiskConfig, c: BoundaryCoord) -> Result<Option<Bounce>> {
    if c.disk >= config.len() || !(c.eta.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("invalid boundary coordinate {c:?}")));
    }
    let p = c.position(config);
    let v = c.velocity(config);
    let mut best: Option<(usize, f64)> = None;
    for (k, (&ck, &rk)) in config.centers.iter().zip(&config.radii).enumerate() {
        if k == c.disk {
            continue;
        }
        let d = sub(p, ck);
        let b = dot(v, d);
        let disc = b * b - (dot(d, d) - rk * rk);
        if disc < 0.0 || b >= 0.0 {
            continue;
        }
        let s = -b - disc.sqrt();
        if s > 0.0 && best.is_none_or(|(_, sb)| s < sb) {
            best = Some((k, s));
        }
    }
    let Some((k, s)) = best else { return Ok(None) };
    let q = [p[0] + s * v[0], p[1] + s * v[1]];
    let r = config.radii[k];
    let n = [(q[0] - config.centers[k][0]) / r, (q[1] - config.centers[k][1]) / r];
    let vn = dot(v, n);
    let w = [v[0] - 2.0 * vn * n[0], v[1] - 2.0 * vn * n[1]];
    let angle = n[1].atan2(n[0]);
    let eta = dot(w, [-n[1], n[0]]);
    if eta.abs() >= 1.0 - GRAZING_TOL {
        return Err(Error::GrazingHit { eta });
    }
    let y = (r * angle).rem_euclid(config.perimeter(k));
    Ok(Some(Bounce { coord: BoundaryCoord { disk: k, y, eta }, flight: s }))
}
