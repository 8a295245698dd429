use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::packet::WavePacket;
use crate::quantum_baker::QuantumState;
use crate::{Error, Result, C64};

/// Real field sampled on the `k×k` grid of the torus; `values[q*k + p]` sits
/// at `(x, ξ) = (p/k, q/k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseField {
    pub k: usize,
    pub values: Vec<f64>,
}

impl PhaseField {
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[q * self.k + p]
    }

    /// Riemann sum `k⁻² Σ values`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / (self.k * self.k) as f64
    }

    /// Headerless CSV grid, one line per `ξ` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let err = |e: csv::Error| Error::Serialization(e.to_string());
        for row in self.values.chunks(self.k.max(1)) {
            wtr.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut values = Vec::new();
        let mut rows = 0;
        for rec in csv::ReaderBuilder::new().has_headers(false).from_reader(input).records() {
            let rec = rec.map_err(|e| Error::Serialization(e.to_string()))?;
            for cell in rec.iter() {
                values.push(cell.trim().parse::<f64>().map_err(|e| Error::Serialization(e.to_string()))?);
            }
            rows += 1;
        }
        if rows == 0 || values.len() != rows * rows {
            return Err(Error::Serialization(format!("{} values do not form a square grid", values.len())));
        }
        Ok(PhaseField { k: rows, values })
    }

    /// Share of the integral within torus distance `radius` of `(x, ξ)`.
    pub fn mass_near(&self, x: f64, xi: f64, radius: f64) -> f64 {
        let k = self.k as f64;
        let circ = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(1.0);
            d.min(1.0 - d)
        };
        let mut near = 0.0;
        for q in 0..self.k {
            for p in 0..self.k {
                if circ(p as f64 / k, x).hypot(circ(q as f64 / k, xi)) <= radius {
                    near += self.get(p, q);
                }
            }
        }
        near / self.values.iter().sum::<f64>()
    }
}

/// Coherent states `φ_{mk}` centered at the grid points `(m/N, k/N)` of the
/// `N`-dimensional torus space. They form a tight frame,
/// `N⁻¹ Σ |φ_{mk}⟩⟨φ_{mk}| = I`.
pub struct CoherentFrame {
    n: usize,
    theta: f64,
    // fiducial state at the origin as (offset, amplitude), offsets in (−N/2, N/2]
    window: Vec<(isize, C64)>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CoherentFrame {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadDimension(format!("N = {n} is too small")));
        }
        let h = 1.0 / (TAU * n as f64);
        let fid = WavePacket::coherent(h, [0.0, 0.0])?.to_torus(n, theta)?;
        let nrm = fid.norm();
        let peak = fid.amps().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let half = (n / 2) as isize;
        let window = fid
            .amps()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 1e-18 * peak)
            .map(|(j, z)| {
                let j = j as isize;
                // f̃(j − N) = e^{−2πiθ} f̃(j)
                if j > half {
                    (j - n as isize, z * C64::cis(-TAU * theta) / nrm)
                } else {
                    (j, z / nrm)
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(CoherentFrame {
            n,
            theta,
            window,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Support of `φ_{m0}`: pairs `(index, amplitude)`.
    fn shifted(&self, m: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let n = self.n as isize;
        self.window.iter().map(move |&(d, val)| {
            let raw = m as isize + d;
            let s = raw.div_euclid(n);
            ((raw - s * n) as usize, val * C64::cis(-TAU * self.theta * s as f64))
        })
    }

    /// `φ_{mk}` in the position basis.
    pub fn state(&self, m: usize, k: usize) -> QuantumState {
        let n = self.n as f64;
        let mut amps = vec![C64::new(0.0, 0.0); self.n];
        for (j, val) in self.shifted(m % self.n) {
            amps[j] = val * C64::cis(TAU * k as f64 * (j as f64 + self.theta) / n);
        }
        QuantumState::new(amps).expect("frame state is finite")
    }

    fn check(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got });
        }
        Ok(())
    }

    /// Husimi density `N |⟨φ_{mk}, u⟩|²` on the frame grid; its Riemann sum
    /// equals `‖u‖²` exactly.
    pub fn husimi(&self, u: &QuantumState) -> Result<PhaseField> {
        self.check(u.dim())?;
        let n = self.n;
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|m| {
                let mut buf = vec![C64::new(0.0, 0.0); n];
                for (j, val) in self.shifted(m) {
                    buf[j] = val.conj() * u.amps()[j];
                }
                self.forward.process(&mut buf);
                buf.iter().map(|z| n as f64 * z.norm_sqr()).collect()
            })
            .collect();
        let mut values = vec![0.0; n * n];
        for (m, row) in rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                values[k * n + m] = *v;
            }
        }
        Ok(PhaseField { k: n, values })
    }

    /// Coherent expectations `⟨φ_{mk}, Q φ_{mk}⟩`, laid out like a
    /// [`PhaseField`].
    pub fn lower_symbol(&self, q: &Mat<C64>) -> Result<Vec<C64>> {
        self.check(q.nrows())?;
        self.check(q.ncols())?;
        let n = self.n;
        let rows: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|m| {
                let support: Vec<(usize, C64)> = self.shifted(m).collect();
                let mut s = vec![C64::new(0.0, 0.0); n];
                for &(a, va) in &support {
                    for &(b, vb) in &support {
                        s[(a + n - b) % n] += va.conj() * q[(a, b)] * vb;
                    }
                }
                self.forward.process(&mut s);
                s
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for (m, row) in rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                out[k * n + m] = *v;
            }
        }
        Ok(out)
    }

    /// `tr Q` by the coherent-state quadrature `N⁻¹ Σ ⟨φ_{mk}, Q φ_{mk}⟩`.
    pub fn trace(&self, q: &Mat<C64>) -> Result<C64> {
        Ok(self.lower_symbol(q)?.iter().sum::<C64>() / self.n as f64)
    }

    /// Anti-Wick quantization `N⁻¹ Σ g(m/N, k/N) |φ_{mk}⟩⟨φ_{mk}|` of a real
    /// symbol sampled on the frame grid.
    pub fn anti_wick(&self, symbol: &PhaseField) -> Result<Mat<C64>> {
        self.check(symbol.k)?;
        let n = self.n;
        let mut out = Mat::<C64>::zeros(n, n);
        let mut col = vec![C64::new(0.0, 0.0); n];
        for m in 0..n {
            for (k, c) in col.iter_mut().enumerate() {
                *c = C64::new(symbol.values[k * n + m], 0.0);
            }
            self.inverse.process(&mut col);
            let support: Vec<(usize, C64)> = self.shifted(m).collect();
            for &(a, va) in &support {
                for &(b, vb) in &support {
                    out[(a, b)] += va * vb.conj() * col[(a + n - b) % n] / n as f64;
                }
            }
        }
        Ok(out)
    }
}

/// Husimi density of `u` on a `k×k` grid. The frame grid `k = N` goes
/// through FFTs; other grids evaluate each coherent state directly.
pub fn husimi(u: &QuantumState, k: usize, theta: f64) -> Result<PhaseField> {
    let n = u.dim();
    if k == n {
        return CoherentFrame::new(n, theta)?.husimi(u);
    }
    if k < 8 {
        return Err(Error::InvalidArgument(format!("Husimi grid needs k >= 8, got {k}")));
    }
    let h = u.h();
    let values = (0..k * k)
        .into_par_iter()
        .map(|idx| {
            let (q, p) = (idx / k, idx % k);
            let phi = WavePacket::coherent(h, [p as f64 / k as f64, q as f64 / k as f64])?.to_torus(n, theta)?;
            let nrm = phi.norm();
            let ip: C64 = phi.amps().iter().zip(u.amps()).map(|(a, b)| a.conj() * b).sum();
            Ok(n as f64 * ip.norm_sqr() / (nrm * nrm))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PhaseField { k, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baker_classical::BakerSpec;
    use crate::quantum_baker::{OpenMapOperator, Variant};
    use crate::rng::{self, RngExt};

    #[test]
    fn frame_states_are_normalized_and_translated() {
        for n in [9, 81, 243] {
            let frame = CoherentFrame::new(n, 0.5).unwrap();
            let h = 1.0 / (TAU * n as f64);
            for (m, k) in [(0, 0), (3, 7), (n - 1, n / 2)] {
                let s = frame.state(m, k);
                assert!((s.norm() - 1.0).abs() < 1e-8);
                let direct = WavePacket::coherent(h, [m as f64 / n as f64, k as f64 / n as f64])
                    .unwrap()
                    .to_torus(n, 0.5)
                    .unwrap();
                let unit: Vec<C64> = direct.amps().iter().map(|z| z / direct.norm()).collect();
                let d = super::super::packet::phase_fitted_distance(s.amps(), &unit);
                assert!(d < 1e-8, "n={n} ({m},{k}) {d}");
            }
        }
    }

    #[test]
    fn field_csv_round_trip() {
        let f = PhaseField { k: 3, values: (0..9).map(|i| i as f64 / 7.0).collect() };
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(PhaseField::read_csv(&buf[..]).unwrap(), f);
        assert!(PhaseField::read_csv(&b"1,2\n"[..]).is_err());
    }

    #[test]
    fn husimi_mass_is_the_norm() {
        let mut g = rng::stream(5, 0);
        let u = QuantumState::random(81, &mut g).unwrap();
        let field = CoherentFrame::new(81, 0.5).unwrap().husimi(&u).unwrap();
        assert!((field.integral() - 1.0).abs() < 1e-12);
        assert!(field.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn off_frame_grid_matches_frame_grid() {
        let n = 27;
        let u = QuantumState::basis(n, 4).unwrap();
        let on = husimi(&u, n, 0.5).unwrap();
        let direct = husimi(&u, 27 * 2, 0.5).unwrap();
        assert!(husimi(&u, 4, 0.5).is_err());
        for (p, q) in [(3, 5), (10, 0), (26, 26)] {
            assert!((on.get(p, q) - direct.get(2 * p, 2 * q)).abs() < 1e-8);
        }
        assert!((direct.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trace_quadrature() {
        let n = 64;
        let frame = CoherentFrame::new(n, 0.5).unwrap();
        let mut g = rng::stream(11, 0);
        let mut q = Mat::<C64>::from_fn(n, n, |_, _| C64::new(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5));
        q = &q + q.adjoint();
        let exact: C64 = (0..n).map(|i| q[(i, i)]).sum();
        let quad = frame.trace(&q).unwrap();
        assert!((quad - exact).norm() <= 1e-10 * exact.norm().max(1.0));
        let id = Mat::<C64>::identity(243, 243);
        let tr = CoherentFrame::new(243, 0.5).unwrap().trace(&id).unwrap();
        assert!((tr.re - 243.0).abs() < 1e-9 && tr.im.abs() < 1e-9);
    }

    #[test]
    fn anti_wick_of_constant_is_scalar() {
        let n = 27;
        let frame = CoherentFrame::new(n, 0.5).unwrap();
        let g = frame.anti_wick(&PhaseField { k: n, values: vec![2.5; n * n] }).unwrap();
        let want = Mat::<C64>::from_fn(n, n, |i, j| C64::new(if i == j { 2.5 } else { 0.0 }, 0.0));
        let err = (&g - &want).norm_l2();
        assert!(err < 1e-10);
    }

    #[test]
    fn anti_wick_is_hermitian_and_local() {
        let n = 81;
        let frame = CoherentFrame::new(n, 0.5).unwrap();
        let values = (0..n * n)
            .map(|idx| {
                let x = (idx % n) as f64 / n as f64;
                (TAU * x).cos()
            })
            .collect();
        let g = frame.anti_wick(&PhaseField { k: n, values }).unwrap();
        assert!((&g - g.adjoint()).norm_l2() < 1e-12);
        // lower symbol of the quantization recovers the symbol up to O(h)
        let low = frame.lower_symbol(&g).unwrap();
        let h = 1.0 / (TAU * n as f64);
        for m in [0, 20, 40] {
            let want = (TAU * m as f64 / n as f64).cos();
            assert!((low[m].re - want).abs() < 50.0 * h);
        }
    }

    #[test]
    fn egorov_localization() {
        let spec = BakerSpec::new(3, vec![0, 2]).unwrap();
        let n = 729;
        let op = OpenMapOperator::build(&spec, n, Variant::Fft).unwrap();
        let h = op.h();
        let rho = [0.1, 0.4];
        let phi = WavePacket::coherent(h, rho).unwrap().to_torus(n, 0.5).unwrap();
        let image = op.apply(&phi).unwrap();
        let field = husimi(&image, n, 0.5).unwrap();
        let share = field.mass_near(0.3, 0.4 / 3.0, 10.0 * h.sqrt());
        assert!(share >= 0.9, "{share}");
    }
}
