//! Gaussian wave packets, torus coherent states and escape-function damping.

mod escape;
mod experiments;
mod packet;
mod torus;

pub use escape::{
    calibrate_growth_constant, damping_operator, escape_field, escape_g, escape_growth, trapped_distances, Damping,
    EscapeParams, GrowthCheck,
};
pub use experiments::{
    damped_power, damped_propagation_experiment, hs_trace_experiment, ExperimentParams, HsTraceSeries, PropagationSeries, DEFAULT_SLACK,
};
pub use packet::{compose, det, phase_fitted_distance, to_grid, GridTarget, Sp2, WavePacket, IDENTITY, ROTATION};
pub use torus::{husimi, CoherentFrame, PhaseField};
