//! Numerical laboratory for improved fractal Weyl upper bounds.
//!
//! The crate pairs a classical side (topological pressure on subshifts of
//! finite type, the open baker map, planar disk billiards) with a quantum side
//! (quantized open baker maps, eigenvalue counting, coherent-state propagation
//! damped by an escape function) and cross-checks each quantity against an
//! independent route.
//!
//! | module | contents |
//! |---|---|
//! | [`symbolic_pressure`] | cylinder tables, finite-depth and extrapolated pressure, Bowen root, decay rate, `σ(γ)` |
//! | [`baker_classical`] | open baker map `F_{a,A}`, trapped-set covers, box counting, survival measure |
//! | [`disk_billiard`] | n-disk billiard map, periodic orbits by length minimisation, stability, Monte-Carlo escape |
//! | [`quantum_baker`] | FFT-structured and Walsh quantizations `M_N` |
//! | [`spectral_counting`] | dense spectra, annulus counts, Weyl exponent fits |
//! | [`phase_space`] | Gaussian packets, torus coherent states, Husimi fields, escape-function damping, experiments |
//! | [`cli_io`] | configuration, result bundles, CSV/JSON/SVG output, the command runner |
//!
//! Runnable walkthroughs live in `examples/`, one per capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baker_classical;
pub mod cli_io;
pub mod disk_billiard;
mod error;
pub mod phase_space;
pub mod quantum_baker;
pub mod rng;
pub mod spectral_counting;
pub mod symbolic_pressure;

pub use error::{Error, Result};

/// Double-precision complex scalar shared with `faer` and `rustfft`.
pub type C64 = faer::c64;
