use std::collections::BTreeMap;
use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dot, norm, sub, DiskConfig, Vec2};
use crate::symbolic_pressure::{CylinderEntry, CylinderTable, Subshift, TableBounds, Word};
use crate::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;

/// Bouncing path realizing a disk word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSegment {
    pub word: Word,
    pub closed: bool,
    /// Boundary angle of each bounce, measured from the positive `x` axis.
    pub angles: Vec<f64>,
    /// Free-flight lengths; `lengths[k]` joins bounce `k` to bounce `k+1`
    /// (cyclically when closed).
    pub lengths: Vec<f64>,
    #[serde(rename = "logJ")]
    pub log_j: f64,
    pub t_total: f64,
    pub residual: f64,
    pub converged: bool,
}

impl OrbitSegment {
    fn segments(&self) -> Vec<(usize, usize)> {
        segments(self.word.len(), self.closed)
    }

    /// Largest mismatch between incidence and reflection angles over the
    /// bounces that have both an incoming and an outgoing flight.
    pub fn reflection_defect(&self, config: &DiskConfig) -> f64 {
        let n = self.word.len();
        let pts: Vec<Vec2> = (0..n).map(|k| config.point(self.word.0[k] as usize, self.angles[k])).collect();
        let interior: Vec<usize> = if self.closed { (0..n).collect() } else { (1..n - 1).collect() };
        interior
            .into_iter()
            .map(|k| {
                let nrm = [self.angles[k].cos(), self.angles[k].sin()];
                let prev = sub(pts[(k + n - 1) % n], pts[k]);
                let next = sub(pts[(k + 1) % n], pts[k]);
                let signed = |d: Vec2| (nrm[0] * d[1] - nrm[1] * d[0]).atan2(dot(nrm, d));
                (signed(prev) + signed(next)).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn segments(n: usize, closed: bool) -> Vec<(usize, usize)> {
    if closed {
        (0..n).map(|k| (k, (k + 1) % n)).collect()
    } else {
        (0..n - 1).map(|k| (k, k + 1)).collect()
    }
}

struct LengthModel<'a> {
    config: &'a DiskConfig,
    disks: Vec<usize>,
    segs: Vec<(usize, usize)>,
}

impl LengthModel<'_> {
    fn points(&self, th: &[f64]) -> Vec<Vec2> {
        th.iter().zip(&self.disks).map(|(&a, &d)| self.config.point(d, a)).collect()
    }

    fn length(&self, th: &[f64]) -> f64 {
        let p = self.points(th);
        self.segs.iter().map(|&(a, b)| norm(sub(p[b], p[a]))).sum()
    }

    /// Total length, gradient and Hessian with respect to the bounce angles.
    fn derivatives(&self, th: &[f64]) -> (Vec<f64>, Mat<f64>) {
        let n = th.len();
        let p = self.points(th);
        // first and second derivatives of P_k with respect to θ_k
        let d1: Vec<Vec2> = (0..n)
            .map(|k| {
                let r = self.config.radii[self.disks[k]];
                [-r * th[k].sin(), r * th[k].cos()]
            })
            .collect();
        let d2: Vec<Vec2> = (0..n)
            .map(|k| {
                let r = self.config.radii[self.disks[k]];
                [-r * th[k].cos(), -r * th[k].sin()]
            })
            .collect();
        let mut g = vec![0.0; n];
        let mut h = Mat::<f64>::zeros(n, n);
        for &(a, b) in &self.segs {
            let dv = sub(p[b], p[a]);
            let d = norm(dv);
            // D = P_b − P_a, ∂D/∂θ_a = −P_a', ∂D/∂θ_b = P_b'
            let da = [-d1[a][0], -d1[a][1]];
            let db = d1[b];
            let (ga, gb) = (dot(dv, da) / d, dot(dv, db) / d);
            g[a] += ga;
            g[b] += gb;
            let d3 = d * d * d;
            let haa = (dot(da, da) + dot(dv, [-d2[a][0], -d2[a][1]])) / d - dot(dv, da).powi(2) / d3;
            let hbb = (dot(db, db) + dot(dv, d2[b])) / d - dot(dv, db).powi(2) / d3;
            let hab = dot(da, db) / d - dot(dv, da) * dot(dv, db) / d3;
            h[(a, a)] += haa;
            h[(b, b)] += hbb;
            h[(a, b)] += hab;
            h[(b, a)] += hab;
        }
        (g, h)
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn direction(from: Vec2, to: Vec2) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

fn validate_word(config: &DiskConfig, word: &Word, closed: bool) -> Result<()> {
    let s = word.symbols();
    if s.len() < 2 {
        return Err(Error::InvalidWord(format!("word {word} is shorter than 2")));
    }
    if let Some(&d) = s.iter().find(|&&d| d as usize >= config.len()) {
        return Err(Error::InvalidWord(format!("word {word} names disk {d} of {}", config.len())));
    }
    if s.windows(2).any(|w| w[0] == w[1]) || (closed && s[0] == s[s.len() - 1]) {
        return Err(Error::InvalidWord(format!("word {word} has an immediate repeat")));
    }
    Ok(())
}

/// Path bouncing off the disks of `word` in order, found by minimizing the
/// total flight length with a damped Newton iteration.
///
/// Closed words close up into a periodic orbit and also get their unstable
/// multiplier; open words leave the first and arrive at the last disk along
/// the normal and carry the log of the largest singular value of the
/// transfer product instead.
pub fn orbit_for_word(config: &DiskConfig, word: &Word, closed: bool) -> Result<OrbitSegment> {
    validate_word(config, word, closed)?;
    let disks: Vec<usize> = word.symbols().iter().map(|&d| d as usize).collect();
    let n = disks.len();
    let model = LengthModel { config, segs: segments(n, closed), disks };
    let cs = config.centers();
    let mut th: Vec<f64> = (0..n)
        .map(|k| {
            let here = cs[model.disks[k]];
            let neighbours: Vec<usize> = match (closed, k) {
                (false, 0) => vec![1],
                (false, k) if k == n - 1 => vec![n - 2],
                _ => vec![(k + n - 1) % n, (k + 1) % n],
            };
            let mut u = [0.0, 0.0];
            for j in neighbours {
                let a = direction(here, cs[model.disks[j]]);
                u[0] += a.cos();
                u[1] += a.sin();
            }
            u[1].atan2(u[0])
        })
        .collect();

    let mut len = model.length(&th);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (g, h) = model.derivatives(&th);
        residual = sup_norm(&g);
        if residual <= 1e-3 * RESIDUAL_TOL {
            break;
        }
        let mut step = Mat::from_fn(n, 1, |i, _| -g[i]);
        let newton = match h.llt(Side::Lower) {
            Ok(llt) => {
                llt.solve_in_place(step.as_mut());
                true
            }
            Err(_) => false,
        };
        let dir: Vec<f64> = if newton { (0..n).map(|i| step[(i, 0)]).collect() } else { g.iter().map(|x| -x).collect() };
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-12 {
            let trial: Vec<f64> = th.iter().zip(&dir).map(|(t, d)| t + alpha * d).collect();
            let tl = model.length(&trial);
            // near the minimum the length change drowns in round-off; fall
            // back to the gradient norm as merit
            if tl < len || sup_norm(&model.derivatives(&trial).0) < residual {
                th = trial;
                len = tl;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (g, _) = model.derivatives(&th);
    residual = residual.min(sup_norm(&g));
    let converged = residual <= RESIDUAL_TOL;
    if !converged {
        return Err(Error::NoConvergence(format!("word {word}: gradient {residual:e} after {MAX_ITER} iterations")));
    }

    let pts = model.points(&th);
    for (si, &(a, b)) in model.segs.iter().enumerate() {
        check_segment(config, word, si, &model.disks, (a, b), &pts, &th)?;
    }
    let lengths: Vec<f64> = model.segs.iter().map(|&(a, b)| norm(sub(pts[b], pts[a]))).collect();
    let mut seg = OrbitSegment {
        word: word.clone(),
        closed,
        angles: th.iter().map(|a| a.rem_euclid(std::f64::consts::TAU)).collect(),
        t_total: lengths.iter().sum(),
        lengths,
        log_j: f64::NAN,
        residual,
        converged,
    };
    seg.log_j = if closed { stability(config, &seg)? } else { open_expansion(config, &seg) };
    Ok(seg)
}

fn check_segment(
    config: &DiskConfig,
    word: &Word,
    index: usize,
    disks: &[usize],
    (a, b): (usize, usize),
    pts: &[Vec2],
    th: &[f64],
) -> Result<()> {
    let shadow = |disk| Error::ShadowedPath { word: word.to_string(), segment: index, disk };
    let dv = sub(pts[b], pts[a]);
    // must leave disk a outward and reach disk b from outside
    if dot(dv, [th[a].cos(), th[a].sin()]) <= 0.0 {
        return Err(shadow(disks[a]));
    }
    if dot(dv, [th[b].cos(), th[b].sin()]) >= 0.0 {
        return Err(shadow(disks[b]));
    }
    let l2 = dot(dv, dv);
    for (k, (&c, &r)) in config.centers().iter().zip(config.radii()).enumerate() {
        if k == disks[a] || k == disks[b] {
            continue;
        }
        let s = (dot(sub(c, pts[a]), dv) / l2).clamp(0.0, 1.0);
        let q = [pts[a][0] + s * dv[0], pts[a][1] + s * dv[1]];
        if norm(sub(c, q)) <= r {
            return Err(shadow(k));
        }
    }
    Ok(())
}

type M2 = [[f64; 2]; 2];

fn mul(a: M2, b: M2) -> M2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Free flights and curvature kicks along the path, in path order.
fn transfer_product(config: &DiskConfig, seg: &OrbitSegment) -> M2 {
    let n = seg.word.len();
    let pts: Vec<Vec2> = (0..n).map(|k| config.point(seg.word.0[k] as usize, seg.angles[k])).collect();
    let mut m: M2 = [[1.0, 0.0], [0.0, 1.0]];
    for (&(a, b), &tau) in seg.segments().iter().zip(&seg.lengths) {
        m = mul([[1.0, tau], [0.0, 1.0]], m);
        if !seg.closed && b == n - 1 {
            break;
        }
        let nrm = [seg.angles[b].cos(), seg.angles[b].sin()];
        let cos_phi = dot(nrm, sub(pts[a], pts[b])) / norm(sub(pts[a], pts[b]));
        let kappa = 1.0 / config.radii()[seg.word.0[b] as usize];
        m = mul([[1.0, 0.0], [2.0 * kappa / cos_phi, 1.0]], m);
    }
    m
}

fn open_expansion(config: &DiskConfig, seg: &OrbitSegment) -> f64 {
    let m = transfer_product(config, seg);
    let f2: f64 = m.iter().flatten().map(|x| x * x).sum();
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    // largest singular value of a 2×2 matrix
    let s2 = 0.5 * (f2 + (f2 * f2 - 4.0 * det * det).max(0.0).sqrt());
    0.5 * s2.ln()
}

/// Log of the unstable multiplier of a closed orbit.
pub fn stability(config: &DiskConfig, segment: &OrbitSegment) -> Result<f64> {
    if !segment.closed {
        return Err(Error::InvalidArgument(format!("word {} is not closed", segment.word)));
    }
    if !segment.converged {
        return Err(Error::NoConvergence(format!("word {} did not converge", segment.word)));
    }
    let m = transfer_product(config, segment);
    let tr = m[0][0] + m[1][1];
    if tr.abs() <= 2.0 {
        return Err(Error::NotHyperbolic { trace: tr.abs() });
    }
    let lam = 0.5 * (tr.abs() + (tr * tr - 4.0).sqrt());
    Ok(lam.ln())
}

/// Periodic-orbit weights for every cyclically admissible word of length `n`.
///
/// Words whose orbit would cross a third disk are dropped and counted in
/// the log.
pub fn cylinder_table(config: &DiskConfig, n: usize) -> Result<CylinderTable> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("table depth must be at least 2, got {n}")));
    }
    let shift = Subshift::no_repeat(config.len())?;
    let words = shift.cyclic_words(n);
    let orbits: Vec<Result<Option<(Word, CylinderEntry)>>> = words
        .par_iter()
        .map(|w| match orbit_for_word(config, w, true) {
            Ok(o) => Ok(Some((w.clone(), CylinderEntry { log_j: o.log_j, t: o.t_total }))),
            Err(Error::ShadowedPath { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut entries = BTreeMap::new();
    let mut dropped = 0usize;
    for o in orbits {
        match o? {
            Some((w, e)) => {
                entries.insert(w, e);
            }
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        log::info!("depth {n}: dropped {dropped} shadowed words");
    }
    if entries.is_empty() {
        return Err(Error::EmptyTable);
    }
    CylinderTable::new(shift, n, entries, TableBounds::default())
}

/// CSV with header `word,angle_0..,length_0..,logJ,t`; all orbits must share
/// one word length.
pub fn write_orbits_csv<W: Write>(orbits: &[OrbitSegment], out: W) -> Result<()> {
    let n = orbits.first().map_or(0, |o| o.word.len());
    let lens = orbits.first().map_or(0, |o| o.lengths.len());
    if orbits.iter().any(|o| o.word.len() != n || o.lengths.len() != lens) {
        return Err(Error::InvalidArgument("orbits of mixed length".into()));
    }
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["word".to_string()];
    header.extend((0..n).map(|k| format!("angle_{k}")));
    header.extend((0..lens).map(|k| format!("length_{k}")));
    header.extend(["logJ".to_string(), "t".to_string()]);
    let csv_err = |e: csv::Error| Error::Serialization(e.to_string());
    wtr.write_record(&header).map_err(csv_err)?;
    for o in orbits {
        let mut rec = vec![o.word.to_string()];
        rec.extend(o.angles.iter().chain(&o.lengths).map(|v| format!("{v:?}")));
        rec.push(format!("{:?}", o.log_j));
        rec.push(format!("{:?}", o.t_total));
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{billiard_step, BoundaryCoord};
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn two_disk_axial_orbit() {
        let cfg = DiskConfig::two_disk(1.0, 6.0).unwrap();
        let o = orbit_for_word(&cfg, &w("01"), true).unwrap();
        assert!(o.converged && o.residual <= 1e-10);
        assert!((o.t_total - 8.0).abs() < 1e-12);
        assert!(o.angles[0].abs() < 1e-9 || (o.angles[0] - std::f64::consts::TAU).abs() < 1e-9);
        assert!((o.angles[1] - std::f64::consts::PI).abs() < 1e-9);
        // per bounce: trace of [[1,0],[2,1]]·[[1,4],[0,1]] is 10
        let per_bounce = (5.0 + 24f64.sqrt()).ln();
        assert!((o.log_j - 2.0 * per_bounce).abs() < 1e-12);
        let r = orbit_for_word(&cfg, &w("10"), true).unwrap();
        assert!((r.log_j - o.log_j).abs() < 1e-12);
    }

    #[test]
    fn multiplier_matches_numerical_jacobian() {
        let cfg = DiskConfig::two_disk(1.0, 6.0).unwrap();
        let h = 1e-6;
        let f = |y: f64, e: f64| {
            let c = BoundaryCoord::new(&cfg, 0, y, e).unwrap();
            let b = billiard_step(&cfg, billiard_step(&cfg, c).unwrap().unwrap().coord).unwrap().unwrap();
            let y = if b.coord.y > std::f64::consts::PI { b.coord.y - std::f64::consts::TAU } else { b.coord.y };
            (y, b.coord.eta)
        };
        let (yp, ep) = f(h, 0.0);
        let (ym, em) = f(-h, 0.0);
        let (yq, eq) = f(0.0, h);
        let (yr, er) = f(0.0, -h);
        let tr = (yp - ym + eq - er) / (2.0 * h);
        let det = ((yp - ym) * (eq - er) - (yq - yr) * (ep - em)) / (4.0 * h * h);
        let lam = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
        let o = orbit_for_word(&cfg, &w("01"), true).unwrap();
        assert!((lam.ln() - o.log_j).abs() < 1e-5, "{} vs {}", lam.ln(), o.log_j);
    }

    #[test]
    fn triangle_orbit_and_symmetry() {
        let cfg = DiskConfig::equilateral(1.0, 6.0).unwrap();
        let a = orbit_for_word(&cfg, &w("012"), true).unwrap();
        let b = orbit_for_word(&cfg, &w("021"), true).unwrap();
        assert!(a.reflection_defect(&cfg) < 1e-9);
        assert!((a.log_j - b.log_j).abs() < 1e-10 && (a.t_total - b.t_total).abs() < 1e-10);
        // bounce points sit on the lines from the centroid to the centers
        for (k, &ang) in a.angles.iter().enumerate() {
            let c = cfg.centers()[k];
            let inward = (-c[1]).atan2(-c[0]).rem_euclid(std::f64::consts::TAU);
            assert!((ang - inward).abs() < 1e-9);
        }
        // side of the inscribed triangle: centers at circumradius 6/√3, bounce at radius 6/√3 − 1
        let side = (6.0 / 3f64.sqrt() - 1.0) * 3f64.sqrt();
        assert!((a.t_total - 3.0 * side).abs() < 1e-9);
    }

    #[test]
    fn rotation_symmetry_of_words() {
        let cfg = DiskConfig::equilateral(1.0, 6.0).unwrap();
        let base = orbit_for_word(&cfg, &w("01012"), true).unwrap();
        assert!(base.reflection_defect(&cfg) < 1e-9);
        for s in ["12120", "20201", "10120"] {
            let o = orbit_for_word(&cfg, &w(s), true).unwrap();
            assert!((o.log_j - base.log_j).abs() < 1e-9, "{s}");
            assert!((o.t_total - base.t_total).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn word_preconditions() {
        let cfg = DiskConfig::equilateral(1.0, 6.0).unwrap();
        assert!(matches!(orbit_for_word(&cfg, &w("001"), false), Err(Error::InvalidWord(_))));
        assert!(matches!(orbit_for_word(&cfg, &w("010"), true), Err(Error::InvalidWord(_))));
        assert!(matches!(orbit_for_word(&cfg, &w("0"), false), Err(Error::InvalidWord(_))));
        assert!(matches!(orbit_for_word(&cfg, &w("03"), false), Err(Error::InvalidWord(_))));
        assert!(orbit_for_word(&cfg, &w("010"), false).is_ok());
    }

    #[test]
    fn open_orbit_obeys_reflection_law_inside() {
        let cfg = DiskConfig::equilateral(1.0, 6.0).unwrap();
        let o = orbit_for_word(&cfg, &w("01201"), false).unwrap();
        assert_eq!(o.lengths.len(), 4);
        assert!(o.reflection_defect(&cfg) < 1e-9);
        assert!(o.log_j > 0.0);
    }

    #[test]
    fn shadowed_word_is_rejected() {
        // segments between bounces lie in the hull of their two disks, so only
        // an eclipsing configuration can shadow a word
        let cfg = DiskConfig { centers: vec![[0.0, 0.0], [4.0, 0.5], [8.0, 0.0]], radii: vec![1.0; 3] };
        assert!(matches!(orbit_for_word(&cfg, &w("02"), true), Err(Error::ShadowedPath { disk: 1, .. })));
        assert!(orbit_for_word(&cfg, &w("01"), true).is_ok());
    }

    #[test]
    fn tables_for_three_disks() {
        let cfg = DiskConfig::equilateral(1.0, 6.0).unwrap();
        let t2 = cylinder_table(&cfg, 2).unwrap();
        assert_eq!(t2.len(), 6);
        let t5 = cylinder_table(&cfg, 5).unwrap();
        assert_eq!(t5.len(), 30);
        let two = cylinder_table(&DiskConfig::two_disk(1.0, 6.0).unwrap(), 2).unwrap();
        assert!(two.iter().all(|(_, e)| (e.t - 8.0).abs() < 1e-12));
        assert!(cylinder_table(&cfg, 1).is_err());
    }

    #[test]
    fn flight_time_grows_with_spacing() {
        let near = cylinder_table(&DiskConfig::equilateral(1.0, 6.0).unwrap(), 4).unwrap();
        let far = cylinder_table(&DiskConfig::equilateral(1.0, 7.0).unwrap(), 4).unwrap();
        for (w, e) in near.iter() {
            assert!(far.get(w).unwrap().t > e.t);
        }
    }

    #[test]
    fn csv_header() {
        let cfg = DiskConfig::equilateral(1.0, 6.0).unwrap();
        let o = orbit_for_word(&cfg, &w("012"), true).unwrap();
        let mut buf = Vec::new();
        write_orbits_csv(&[o], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("word,angle_0,angle_1,angle_2,length_0,length_1,length_2,logJ,t\n"));
    }
}
