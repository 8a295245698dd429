//! Hilbert-Schmidt norm of powers of the damped quantized baker map, with
//! the number of steps growing like a multiple of `log(1/h)`.
//!
//! `cargo run --release --example damped_trace -- [t] [max_power]`

use weyl_lab::baker_classical::BakerSpec;
use weyl_lab::phase_space::{hs_trace_experiment, EscapeParams, ExperimentParams, DEFAULT_SLACK};

fn main() -> weyl_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let t: f64 = args.next().map_or(2.0, |s| s.parse().expect("t"));
    let max_power: u32 = args.next().map_or(6, |s| s.parse().expect("power"));

    let spec = BakerSpec::new(3, vec![0, 2])?;
    let esc = EscapeParams::new(0.4, 1.0, t)?;
    let steps = ExperimentParams::from_epsilon(0.01, (spec.base() as f64).ln(), DEFAULT_SLACK)?;
    let dims: Vec<usize> = (4..=max_power).map(|k| 3usize.pow(k)).collect();
    let series = hs_trace_experiment(&spec, &dims, &esc, &steps)?;

    println!("t = {t}, vartheta = {:.5}, d_H = {:.4}", steps.vartheta, spec.dimension());
    for i in 0..dims.len() {
        println!(
            "  N = {:5}  n = {}  |M^n|_HS^2 = {:10.4}  coherent quadrature {:10.4}",
            series.dims[i], series.n[i], series.w[i], series.quadrature[i]
        );
    }
    println!("exponent against 1/h: {:.4}", series.exponent);
    println!("largest gap between the two traces: {:.1e}", series.max_relative_gap());
    Ok(())
}
