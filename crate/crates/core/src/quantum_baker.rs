//! Quantized open baker maps on the `N`-dimensional torus Hilbert space.
//!
//! Position basis vectors sit at `x_k = (k + θ)/N`. The quantization is
//!
//! ```text
//! M_N = G_N⁻¹ · blockdiag_j ( G_{N/a} if j ∈ A else 0 )
//! ```
//!
//! with the discrete Fourier kernel `(G_M)_{kl} = M^{-1/2} e^{−2πi(k+θ)(l+θ)/M}`
//! acting on the position strips `[jN/a, (j+1)N/a)`. Each kernel is a plain
//! DFT between diagonal twiddles, so [`OpenMapOperator::apply`] costs
//! `O(N log N)`. The Walsh variant swaps every Fourier kernel for the tensor
//! power of the `a×a` kernel on the base-`a` digits of the index.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{Read, Write};
use std::sync::{Arc, OnceLock};

use faer::Mat;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::baker_classical::BakerSpec;
use crate::rng::{LabRng, RngExt};
use crate::{Error, Result, C64};

pub const DEFAULT_PHASE: f64 = 0.5;
pub const DENSE_CAP: usize = 6561;

/// Position-basis amplitudes; `h = 1/(2πN)` is derived from the length.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amps: Vec<C64>,
}

impl QuantumState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::BadDimension("state has no amplitudes".into()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(QuantumState { amps })
    }

    pub fn basis(n: usize, k: usize) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); n];
        *amps.get_mut(k).ok_or_else(|| Error::InvalidArgument(format!("basis index {k} >= {n}")))? =
            C64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// Normalized state with independent Gaussian amplitudes.
    pub fn random(n: usize, rng: &mut LabRng) -> Result<Self> {
        let mut amps: Vec<C64> = (0..n)
            .map(|_| {
                // Box–Muller
                let r = (-2.0 * (1.0 - rng.random::<f64>()).ln()).sqrt();
                let a = TAU * rng.random::<f64>();
                C64::new(r * a.cos(), r * a.sin())
            })
            .collect();
        let nrm = norm(&amps);
        amps.iter_mut().for_each(|z| *z /= nrm);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn h(&self) -> f64 {
        1.0 / (TAU * self.amps.len() as f64)
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Serialization(e.to_string());
        wtr.write_record(["index", "re", "im"]).map_err(err)?;
        for (k, z) in self.amps.iter().enumerate() {
            wtr.write_record([k.to_string(), format!("{:?}", z.re), format!("{:?}", z.im)]).map_err(err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            index: usize,
            re: f64,
            im: f64,
        }
        let mut amps = Vec::new();
        for (k, row) in csv::Reader::from_reader(input).deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::Serialization(e.to_string()))?;
            if row.index != k {
                return Err(Error::Serialization(format!("row {k} has index {}", row.index)));
            }
            amps.push(C64::new(row.re, row.im));
        }
        Self::new(amps)
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    Fft,
    Walsh,
}

/// `G_M` applied through one FFT of length `M`.
#[derive(Clone)]
struct FourierKernel {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `e^{−2πiθl/M}`
    pre: Vec<C64>,
    /// `M^{-1/2} e^{−2πi(θk+θ²)/M}`
    post: Vec<C64>,
}

impl FourierKernel {
    fn new(planner: &mut FftPlanner<f64>, m: usize, theta: f64) -> Self {
        let mf = m as f64;
        let scale = 1.0 / mf.sqrt();
        FourierKernel {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            pre: (0..m).map(|l| C64::cis(-TAU * theta * l as f64 / mf)).collect(),
            post: (0..m).map(|k| C64::cis(-TAU * (theta * k as f64 + theta * theta) / mf) * scale).collect(),
        }
    }

    fn apply(&self, buf: &mut [C64]) {
        buf.iter_mut().zip(&self.pre).for_each(|(z, p)| *z *= p);
        self.forward.process(buf);
        buf.iter_mut().zip(&self.post).for_each(|(z, p)| *z *= p);
    }

    fn apply_adjoint(&self, buf: &mut [C64]) {
        buf.iter_mut().zip(&self.post).for_each(|(z, p)| *z *= p.conj());
        self.inverse.process(buf);
        buf.iter_mut().zip(&self.pre).for_each(|(z, p)| *z *= p.conj());
    }
}

/// Dense `G_M` entry by entry.
pub fn fourier_kernel(m: usize, theta: f64) -> Mat<C64> {
    let mf = m as f64;
    Mat::from_fn(m, m, |k, l| {
        C64::cis(-TAU * (k as f64 + theta) * (l as f64 + theta) / mf) / mf.sqrt()
    })
}

/// `F_a^{⊗k}` on base-`a` digits followed by reversal of the digit order.
#[derive(Clone)]
struct WalshKernel {
    a: usize,
    digits: usize,
    block: Mat<C64>,
    reversal: Vec<usize>,
}

impl WalshKernel {
    fn new(a: usize, digits: usize, theta: f64) -> Self {
        let n = a.pow(digits as u32);
        let reversal = (0..n)
            .map(|mut i| {
                let mut r = 0;
                for _ in 0..digits {
                    r = r * a + i % a;
                    i /= a;
                }
                r
            })
            .collect();
        WalshKernel { a, digits, block: fourier_kernel(a, theta), reversal }
    }

    fn tensor(&self, buf: &mut [C64], adjoint: bool) {
        let a = self.a;
        let mut fiber = vec![C64::new(0.0, 0.0); a];
        let mut stride = 1;
        for _ in 0..self.digits {
            for base in 0..buf.len() {
                if (base / stride) % a != 0 {
                    continue;
                }
                for (r, f) in fiber.iter_mut().enumerate() {
                    *f = (0..a)
                        .map(|c| {
                            let g = if adjoint { self.block[(c, r)].conj() } else { self.block[(r, c)] };
                            g * buf[base + c * stride]
                        })
                        .sum();
                }
                for (r, f) in fiber.iter().enumerate() {
                    buf[base + r * stride] = *f;
                }
            }
            stride *= a;
        }
    }

    fn permute(&self, buf: &mut [C64]) {
        let src = buf.to_vec();
        for (i, &r) in self.reversal.iter().enumerate() {
            buf[r] = src[i];
        }
    }

    fn apply(&self, buf: &mut [C64]) {
        self.tensor(buf, false);
        self.permute(buf);
    }

    fn apply_adjoint(&self, buf: &mut [C64]) {
        // digit reversal is an involution
        self.permute(buf);
        self.tensor(buf, true);
    }
}

#[derive(Clone)]
enum Kernels {
    Fft { outer: FourierKernel, strip: FourierKernel },
    Walsh { outer: WalshKernel, strip: WalshKernel },
}

/// The matrix `M_N` with its FFT plans; dense form assembled on demand.
#[derive(Clone)]
pub struct OpenMapOperator {
    spec: BakerSpec,
    n: usize,
    variant: Variant,
    theta: f64,
    kernels: Kernels,
    dense: OnceLock<Mat<C64>>,
}

impl fmt::Debug for OpenMapOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpenMapOperator")
            .field("spec", &self.spec)
            .field("n", &self.n)
            .field("variant", &self.variant)
            .field("theta", &self.theta)
            .finish()
    }
}

fn exact_power(a: usize, n: usize) -> Option<usize> {
    let mut p = 1;
    let mut k = 0;
    while p < n {
        p *= a;
        k += 1;
    }
    (p == n).then_some(k)
}

impl OpenMapOperator {
    pub fn build(spec: &BakerSpec, n: usize, variant: Variant) -> Result<Self> {
        Self::with_phase(spec, n, variant, DEFAULT_PHASE)
    }

    pub fn with_phase(spec: &BakerSpec, n: usize, variant: Variant, theta: f64) -> Result<Self> {
        let a = spec.base();
        if n == 0 || !n.is_multiple_of(a) {
            return Err(Error::BadDimension(format!("N = {n} is not a positive multiple of a = {a}")));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!("phase {theta} outside [0, 1)")));
        }
        let kernels = match variant {
            Variant::Fft => {
                let mut planner = FftPlanner::new();
                Kernels::Fft {
                    outer: FourierKernel::new(&mut planner, n, theta),
                    strip: FourierKernel::new(&mut planner, n / a, theta),
                }
            }
            Variant::Walsh => {
                let k = exact_power(a, n)
                    .ok_or_else(|| Error::BadDimension(format!("Walsh quantization needs N = {a}^k, got {n}")))?;
                Kernels::Walsh { outer: WalshKernel::new(a, k, theta), strip: WalshKernel::new(a, k - 1, theta) }
            }
        };
        Ok(OpenMapOperator { spec: spec.clone(), n, variant, theta, kernels, dense: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / (TAU * self.n as f64)
    }

    pub fn spec(&self) -> &BakerSpec {
        &self.spec
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn strips(&self, buf: &mut [C64], f: impl Fn(&mut [C64])) {
        let w = self.n / self.spec.base();
        for (j, chunk) in buf.chunks_mut(w).enumerate() {
            if self.spec.contains(j) {
                f(chunk);
            } else {
                chunk.fill(C64::new(0.0, 0.0));
            }
        }
    }

    /// `M_N` applied in place.
    pub fn apply_in_place(&self, buf: &mut [C64]) -> Result<()> {
        if buf.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: buf.len() });
        }
        match &self.kernels {
            Kernels::Fft { outer, strip } => {
                debug_assert_eq!(strip.m * self.spec.base(), outer.m);
                self.strips(buf, |c| strip.apply(c));
                outer.apply_adjoint(buf);
            }
            Kernels::Walsh { outer, strip } => {
                self.strips(buf, |c| strip.apply(c));
                outer.apply_adjoint(buf);
            }
        }
        Ok(())
    }

    /// `M_N*` applied in place.
    pub fn apply_adjoint_in_place(&self, buf: &mut [C64]) -> Result<()> {
        if buf.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: buf.len() });
        }
        match &self.kernels {
            Kernels::Fft { outer, strip } => {
                outer.apply(buf);
                self.strips(buf, |c| strip.apply_adjoint(c));
            }
            Kernels::Walsh { outer, strip } => {
                outer.apply(buf);
                self.strips(buf, |c| strip.apply_adjoint(c));
            }
        }
        Ok(())
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        let mut buf = state.amps.clone();
        self.apply_in_place(&mut buf)?;
        Ok(QuantumState { amps: buf })
    }

    pub fn apply_adjoint(&self, state: &QuantumState) -> Result<QuantumState> {
        let mut buf = state.amps.clone();
        self.apply_adjoint_in_place(&mut buf)?;
        Ok(QuantumState { amps: buf })
    }

    /// Dense matrix, assembled column by column and cached.
    pub fn dense(&self) -> Result<&Mat<C64>> {
        self.dense_with_cap(DENSE_CAP)
    }

    pub fn dense_with_cap(&self, cap: usize) -> Result<&Mat<C64>> {
        if let Some(m) = self.dense.get() {
            return Ok(m);
        }
        if self.n > cap {
            return Err(Error::DimensionCap { n: self.n, cap });
        }
        let n = self.n;
        let mut m = Mat::<C64>::zeros(n, n);
        let mut col = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            col.fill(C64::new(0.0, 0.0));
            col[k] = C64::new(1.0, 0.0);
            self.apply_in_place(&mut col)?;
            for (i, z) in col.iter().enumerate() {
                m[(i, k)] = *z;
            }
        }
        Ok(self.dense.get_or_init(|| m))
    }

    /// Dense `M_N*` assembled from the adjoint application.
    pub fn dense_adjoint(&self) -> Result<Mat<C64>> {
        if self.n > DENSE_CAP {
            return Err(Error::DimensionCap { n: self.n, cap: DENSE_CAP });
        }
        let n = self.n;
        let mut col = vec![C64::new(0.0, 0.0); n];
        let mut m = Mat::<C64>::zeros(n, n);
        for k in 0..n {
            col.fill(C64::new(0.0, 0.0));
            col[k] = C64::new(1.0, 0.0);
            self.apply_adjoint_in_place(&mut col)?;
            for (i, z) in col.iter().enumerate() {
                m[(i, k)] = *z;
            }
        }
        Ok(m)
    }
}

const MAGIC: &[u8; 4] = b"OQM1";

/// `OQM1`, `u64` dimension, then row-major interleaved `(re, im)`, all
/// little-endian.
pub fn write_dense_binary<W: Write>(m: &Mat<C64>, mut out: W) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    out.write_all(MAGIC)?;
    out.write_all(&(m.nrows() as u64).to_le_bytes())?;
    let mut row = Vec::with_capacity(16 * m.ncols());
    for i in 0..m.nrows() {
        row.clear();
        for j in 0..m.ncols() {
            row.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            row.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dense_binary<R: Read>(mut input: R) -> Result<Mat<C64>> {
    let mut head = [0u8; 12];
    input.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Serialization("bad magic, expected OQM1".into()));
    }
    let n = u64::from_le_bytes(head[4..].try_into().unwrap()) as usize;
    let mut bytes = vec![0u8; 16 * n * n];
    input.read_exact(&mut bytes)?;
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    Ok(Mat::from_fn(n, n, |i, j| {
        let o = 16 * (i * n + j);
        C64::new(f(o), f(o + 8))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn max_abs(m: &Mat<C64>) -> f64 {
        let mut best: f64 = 0.0;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                best = best.max(m[(i, j)].norm());
            }
        }
        best
    }

    /// `G_N⁻¹·blockdiag` written out with explicit kernels.
    fn reference(spec: &BakerSpec, n: usize, theta: f64) -> Mat<C64> {
        let a = spec.base();
        let w = n / a;
        let g = fourier_kernel(w, theta);
        let mut block = Mat::<C64>::zeros(n, n);
        for &j in spec.alphabet() {
            for r in 0..w {
                for c in 0..w {
                    block[(j * w + r, j * w + c)] = g[(r, c)];
                }
            }
        }
        fourier_kernel(n, theta).adjoint() * &block
    }

    fn singular_values(m: &Mat<C64>) -> Vec<f64> {
        m.singular_values().unwrap()
    }

    fn cantor() -> BakerSpec {
        BakerSpec::new(3, vec![0, 2]).unwrap()
    }

    #[test]
    fn closed_baker_is_unitary() {
        let spec = BakerSpec::new(2, vec![0, 1]).unwrap();
        for variant in [Variant::Fft, Variant::Walsh] {
            let op = OpenMapOperator::build(&spec, 8, variant).unwrap();
            let m = op.dense().unwrap();
            let defect = m.adjoint() * m - Mat::<C64>::identity(8, 8);
            assert!(max_abs(&defect) <= 1e-12, "{variant:?}");
        }
    }

    #[test]
    fn rank_of_open_map() {
        for variant in [Variant::Fft, Variant::Walsh] {
            let op = OpenMapOperator::build(&cantor(), 9, variant).unwrap();
            let sv = singular_values(op.dense().unwrap());
            assert_eq!(sv.iter().filter(|&&s| (s - 1.0).abs() < 1e-10).count(), 6);
            assert_eq!(sv.iter().filter(|&&s| s < 1e-10).count(), 3);
        }
    }

    #[test]
    fn three_by_three_by_hand() {
        let g3 = fourier_kernel(3, 0.0);
        let op = OpenMapOperator::with_phase(&cantor(), 3, Variant::Fft, 0.0).unwrap();
        let want = g3.adjoint() * Mat::<C64>::from_fn(3, 3, |i, j| C64::new(if i == j && i != 1 { 1.0 } else { 0.0 }, 0.0));
        assert!(max_abs(&(op.dense().unwrap() - &want)) < 1e-14);
        // with θ = 1/2 the 1×1 blocks are G_1 = e^{−iπ/2}
        let g3 = fourier_kernel(3, 0.5);
        let op = OpenMapOperator::build(&cantor(), 3, Variant::Fft).unwrap();
        let diag = Mat::<C64>::from_fn(3, 3, |i, j| if i == j && i != 1 { C64::new(0.0, -1.0) } else { C64::new(0.0, 0.0) });
        assert!(max_abs(&(op.dense().unwrap() - g3.adjoint() * diag)) < 1e-14);
    }

    #[test]
    fn fft_path_matches_explicit_kernels() {
        for (spec, n) in [(cantor(), 81), (BakerSpec::new(4, vec![1, 2]).unwrap(), 48), (cantor(), 30)] {
            for theta in [0.0, 0.5] {
                let op = OpenMapOperator::with_phase(&spec, n, Variant::Fft, theta).unwrap();
                let r = reference(&spec, n, theta);
                let mut g = rng::stream(5, n as u64);
                let psi = QuantumState::random(n, &mut g).unwrap();
                let out = op.apply(&psi).unwrap();
                let col = faer::Col::<C64>::from_fn(n, |i| psi.amps()[i]);
                let want = &r * &col;
                let err = (0..n).map(|i| (out.amps()[i] - want[i]).norm()).fold(0.0, f64::max);
                assert!(err <= 1e-12 * psi.norm(), "n={n} θ={theta} err={err}");
            }
        }
    }

    #[test]
    fn adjoint_is_conjugate_transpose() {
        for variant in [Variant::Fft, Variant::Walsh] {
            let op = OpenMapOperator::build(&cantor(), 27, variant).unwrap();
            let d = op.dense().unwrap();
            assert!(max_abs(&(op.dense_adjoint().unwrap() - d.adjoint())) < 1e-13);
        }
    }

    #[test]
    fn hole_strip_is_annihilated() {
        let op = OpenMapOperator::build(&cantor(), 81, Variant::Fft).unwrap();
        let mut g = rng::stream(1, 0);
        let mut psi = QuantumState::random(81, &mut g).unwrap().into_amps();
        psi[..27].fill(C64::new(0.0, 0.0));
        psi[54..].fill(C64::new(0.0, 0.0));
        let out = op.apply(&QuantumState::new(psi).unwrap()).unwrap();
        assert!(out.norm() <= 1e-12);
    }

    #[test]
    fn subunitary_and_column_norms() {
        for (spec, n) in [(cantor(), 27), (BakerSpec::new(5, vec![0, 2, 4]).unwrap(), 25), (cantor(), 54)] {
            let op = OpenMapOperator::build(&spec, n, Variant::Fft).unwrap();
            let d = op.dense().unwrap();
            assert!(singular_values(d).iter().all(|&s| s <= 1.0 + 1e-10));
            for k in 0..n {
                let c: f64 = (0..n).map(|i| d[(i, k)].norm_sqr()).sum::<f64>().sqrt();
                assert!(c <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn closed_norm_preserved() {
        let op = OpenMapOperator::build(&BakerSpec::new(2, vec![0, 1]).unwrap(), 512, Variant::Fft).unwrap();
        let mut g = rng::stream(3, 0);
        let psi = QuantumState::random(512, &mut g).unwrap();
        assert!((op.apply(&psi).unwrap().norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(OpenMapOperator::build(&cantor(), 10, Variant::Fft), Err(Error::BadDimension(_))));
        assert!(matches!(OpenMapOperator::build(&cantor(), 18, Variant::Walsh), Err(Error::BadDimension(_))));
        let op = OpenMapOperator::build(&cantor(), 9, Variant::Fft).unwrap();
        assert!(matches!(op.apply(&QuantumState::basis(8, 0).unwrap()), Err(Error::DimensionMismatch { .. })));
        let big = OpenMapOperator::build(&cantor(), 3 * 2200, Variant::Fft).unwrap();
        assert!(matches!(big.dense(), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn state_csv_round_trip() {
        let mut g = rng::stream(9, 0);
        let psi = QuantumState::random(17, &mut g).unwrap();
        let mut buf = Vec::new();
        psi.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"index,re,im\n"));
        assert_eq!(QuantumState::read_csv(&buf[..]).unwrap(), psi);
        assert!((psi.h() * TAU * 17.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_binary_round_trip() {
        let op = OpenMapOperator::build(&cantor(), 9, Variant::Fft).unwrap();
        let mut buf = Vec::new();
        write_dense_binary(op.dense().unwrap(), &mut buf).unwrap();
        assert_eq!(&buf[..4], b"OQM1");
        assert_eq!(buf.len(), 12 + 16 * 81);
        assert_eq!(&read_dense_binary(&buf[..]).unwrap(), op.dense().unwrap());
    }
}
