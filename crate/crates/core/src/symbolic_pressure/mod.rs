//! Thermodynamic formalism on subshifts of finite type.
//!
//! A [`CylinderTable`] records, for each admissible word of length `n`, the
//! Birkhoff sums of the unstable log-Jacobian `φ_u` and of the return time
//! `t_ret` along that cylinder. Everything else in this module is computed
//! from tables:
//!
//! * [`finite_pressure`]: `p_n = (1/n) log Σ_w exp(c_J·logJ(w) + c_t·t(w))`
//! * [`pressure`]: extrapolation `p_n = P + c/n` over several depths
//! * [`bowen_dimension`]: root of `s ↦ P(-s·φ_u)`
//! * [`classical_decay_rate`]: root of `s ↦ P(-φ_u + s·t_ret)`
//! * [`sigma_of_gamma`] and [`p_of_beta`]: the gap functions built from
//!   `P(-φ_u + 2γ·t_ret) / (6 λ_max)`
//! * [`lyapunov_bounds`]: max/min cycle means of `logJ/n` on the word graph

mod cycle_mean;
mod pressure;
mod subshift;
mod table;

pub use cycle_mean::{lyapunov_bounds, max_cycle_mean};
pub use pressure::{
    bowen_dimension, classical_decay_rate, finite_pressure, p_of_beta, pressure, sigma_of_gamma,
    PressureEstimate, BISECTION_TOL,
};
pub use subshift::{Subshift, Word};
pub use table::{CylinderEntry, CylinderTable, TableBounds};
